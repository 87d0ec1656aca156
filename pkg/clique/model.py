"""
Hybrid scattering GNN.

    H^0 = m_emb(X)
    per layer l = 1..K and filter f in the bank:
        H_f   = f(H^{l-1})                      A^r (low-pass) or Psi_k (band-pass)
        s_f   = leaky_relu(H_f || H^{l-1}) a^l  one score per node
        alpha = softmax over filters, per node
        H^l   = m^l(sum_f alpha_f * H_f)
    h = m_out(H^0 || ... || H^K), p = min-max normalized h
"""
from dataclasses import dataclass, field, replace
from typing import Dict, List, Tuple

import numpy as np

from clique import autodiff as ad
from clique.autodiff import Tape, Var
from clique.constants import (
    BAND_PASS,
    DEFAULT_FILTERS,
    HIDDEN_DIM,
    INPUT_DIM,
    LEAKY_SLOPE,
    MLP_DEPTH,
    NUM_LAYERS,
    FilterSpec,
)
from clique.features import FeatureMatrix
from clique.graph import Graph

ModelParams = Dict[str, np.ndarray]


@dataclass(frozen=True)
class ModelConfig:
    input_dim: int = INPUT_DIM
    hidden_dim: int = HIDDEN_DIM
    num_layers: int = NUM_LAYERS
    filters: Tuple[FilterSpec, ...] = field(default=DEFAULT_FILTERS)
    low_pass_only: bool = False
    mlp_depth: int = MLP_DEPTH
    standardize_features: bool = False
    seed: int = 0

    def __post_init__(self):
        if self.num_layers < 1 or self.hidden_dim < 1 or self.input_dim < 1:
            raise ValueError(
                f"Need num_layers, hidden_dim, input_dim >= 1, got "
                f"{self.num_layers}, {self.hidden_dim}, {self.input_dim}"
            )
        if self.mlp_depth < 1:
            raise ValueError(f"MLP depth must be >= 1, got {self.mlp_depth}")
        object.__setattr__(self, "filters", tuple(FilterSpec(*f) for f in self.filters))
        if not self.active_filters:
            raise ValueError("Filter set is empty after removing band-pass filters")

    @property
    def active_filters(self) -> Tuple[FilterSpec, ...]:
        if self.low_pass_only:
            return tuple(f for f in self.filters if f.kind != BAND_PASS)
        return self.filters

    def ablation(self) -> "ModelConfig":
        """The same architecture restricted to low-pass filters."""
        return replace(self, low_pass_only=True)

    def to_dict(self) -> dict:
        return {
            "input_dim": self.input_dim,
            "hidden_dim": self.hidden_dim,
            "num_layers": self.num_layers,
            "filters": [[f.kind, f.scale] for f in self.filters],
            "low_pass_only": self.low_pass_only,
            "mlp_depth": self.mlp_depth,
            "standardize_features": self.standardize_features,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ModelConfig":
        data = dict(data)
        data["filters"] = tuple(FilterSpec(kind, int(scale)) for kind, scale in data["filters"])
        return cls(**data)


# --- Parameter Layout ---
def _mlp_shapes(prefix: str, in_dim: int, hidden: int, out_dim: int, depth: int):
    dims = [in_dim] + [hidden] * (depth - 1) + [out_dim]
    shapes = []
    for i, (fan_in, fan_out) in enumerate(zip(dims[:-1], dims[1:])):
        shapes.append((f"{prefix}.{i}.W", (fan_in, fan_out)))
        shapes.append((f"{prefix}.{i}.b", (fan_out,)))
    return shapes


def param_shapes(config: ModelConfig) -> List[Tuple[str, tuple]]:
    d, dh, depth = config.input_dim, config.hidden_dim, config.mlp_depth
    shapes = _mlp_shapes("emb", d, dh, dh, depth)
    for layer in range(1, config.num_layers + 1):
        shapes.append((f"layer{layer}.att", (2 * dh,)))
        shapes.extend(_mlp_shapes(f"layer{layer}.mlp", dh, dh, dh, depth))
    shapes.extend(_mlp_shapes("out", dh * (config.num_layers + 1), dh, 1, depth))
    return shapes


def count_params(config: ModelConfig) -> int:
    return int(sum(np.prod(shape) for _, shape in param_shapes(config)))


def init_params(config: ModelConfig) -> ModelParams:
    """Glorot-uniform weights and attention vectors, zero biases."""
    rng = np.random.default_rng(config.seed)
    params = {}
    for name, shape in param_shapes(config):
        if name.endswith(".b"):
            params[name] = np.zeros(shape)
            continue
        fan_in, fan_out = shape if len(shape) == 2 else (shape[0], 1)
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        params[name] = rng.uniform(-limit, limit, size=shape)
    return params


# --- Forward Pass on a Tape ---
def _mlp(x: Var, params: Dict[str, Var], prefix: str, depth: int) -> Var:
    for i in range(depth):
        x = ad.affine(x, params[f"{prefix}.{i}.W"], params[f"{prefix}.{i}.b"])
        if i < depth - 1:
            x = ad.relu(x)
    return x


def embed(X: Var, params: Dict[str, Var], config: ModelConfig) -> Var:
    if X.value.ndim != 2 or X.shape[1] != config.input_dim:
        raise ValueError(f"Expected {config.input_dim} feature columns, got shape {X.shape}")
    return _mlp(X, params, "emb", config.mlp_depth)


def layer_forward(
    H: Var, graph: Graph, params: Dict[str, Var], layer: int, config: ModelConfig
) -> Tuple[Var, List[Var]]:
    """One attention-gated filter-bank layer; returns H^l and the per-filter weights."""
    if H.value.ndim != 2 or H.shape[1] != config.hidden_dim:
        raise ValueError(f"Expected {config.hidden_dim} hidden columns, got shape {H.shape}")
    attention = params[f"layer{layer}.att"]
    filtered = ad.filter_bank_apply(graph, config.active_filters, H)
    scores = [
        ad.row_dot(ad.leaky_relu(ad.concat_columns(H_f, H), LEAKY_SLOPE), attention)
        for H_f in filtered
    ]
    alphas = ad.softmax_over_group(scores)
    aggregated = ad.elementwise_mul(filtered[0], alphas[0])
    for H_f, alpha in zip(filtered[1:], alphas[1:]):
        aggregated = aggregated + ad.elementwise_mul(H_f, alpha)
    return _mlp(aggregated, params, f"layer{layer}.mlp", config.mlp_depth), alphas


@dataclass
class ForwardTrace:
    p: Var
    h: Var
    readouts: List[Var]
    attention: List[List[Var]]


def forward_on_tape(
    tape: Tape, graph: Graph, X: np.ndarray, params: Dict[str, Var], config: ModelConfig
) -> ForwardTrace:
    H = embed(tape.var(X), params, config)
    readouts, attention = [H], []
    for layer in range(1, config.num_layers + 1):
        H, alphas = layer_forward(H, graph, params, layer, config)
        readouts.append(H)
        attention.append(alphas)
    h = _mlp(ad.concat_columns(*readouts), params, "out", config.mlp_depth)
    return ForwardTrace(ad.min_max_normalize(h), h, readouts, attention)


def as_vars(tape: Tape, params: ModelParams, requires_grad: bool = False) -> Dict[str, Var]:
    return {
        name: tape.var(value, requires_grad=requires_grad, name=name)
        for name, value in params.items()
    }


def input_matrix(features: FeatureMatrix, config: ModelConfig) -> np.ndarray:
    return (features.standardized() if config.standardize_features else features).values


def forward(
    graph: Graph, features: FeatureMatrix, params: ModelParams, config: ModelConfig
) -> Tuple[np.ndarray, List[np.ndarray]]:
    """Inference: probability vector p and the K+1 readouts, no gradients kept."""
    tape = Tape()
    trace = forward_on_tape(
        tape, graph, input_matrix(features, config), as_vars(tape, params), config
    )
    return trace.p.value.ravel(), [H.value for H in trace.readouts]


# --- Checkpoint Payload ---
def params_to_dict(params: ModelParams) -> dict:
    return {
        name: {"shape": list(value.shape), "data": value.ravel().tolist()}
        for name, value in params.items()
    }


def params_from_dict(data: dict, config: ModelConfig) -> ModelParams:
    params = {}
    for name, shape in param_shapes(config):
        if name not in data:
            raise ValueError(f"Checkpoint is missing parameter '{name}'")
        entry = data[name]
        if tuple(entry["shape"]) != tuple(shape):
            raise ValueError(
                f"Parameter '{name}' has shape {entry['shape']}, expected {list(shape)}"
            )
        params[name] = np.asarray(entry["data"], dtype=float).reshape(shape)
    return params
