from dataclasses import dataclass

import numpy as np

from clique import autodiff as ad
from clique.autodiff import Var
from clique.constants import BETA_PRESETS, DEFAULT_BETA
from clique.graph import Graph


@dataclass(frozen=True)
class LossConfig:
    beta: float = DEFAULT_BETA

    def __post_init__(self):
        if not self.beta >= 0:
            raise ValueError(f"beta must be non-negative, got {self.beta}")

    @classmethod
    def preset(cls, name: str) -> "LossConfig":
        if name not in BETA_PRESETS:
            raise ValueError(f"Unknown beta preset '{name}', choose from {sorted(BETA_PRESETS)}")
        return cls(BETA_PRESETS[name])


def loss(p, graph: Graph, cfg: LossConfig = LossConfig()) -> float:
    """L(p) = -p^T W p + beta * p^T Wbar p."""
    return -graph.quad_form(p) + cfg.beta * graph.complement_quad_form(p)


def loss_on_tape(p: Var, graph: Graph, cfg: LossConfig = LossConfig()) -> Var:
    return ad.quad_form_loss(p, graph, cfg.beta)


def loss_support_certificate(p, graph: Graph, threshold: float = 0.0) -> bool:
    """True iff the nodes with p above the threshold form a clique (zero complement mass)."""
    if threshold < 0:
        raise ValueError(f"Threshold must be non-negative, got {threshold}")
    support = (np.asarray(p, dtype=float) > threshold).astype(float)
    return graph.complement_quad_form(support) == 0.0


def loss_karalias_form(p, graph: Graph, beta_prime: float, gamma: float) -> float:
    """
    gamma - (beta'+1) sum_{(u,v) in E} w_uv p_u p_v + beta'/2 sum_{u != v} p_u p_v,
    with E holding both orientations of every edge (so the edge sum is p^T W p).
    """
    p = np.asarray(p, dtype=float)
    total = p.sum()
    distinct_pairs = total * total - p @ p
    return gamma - (beta_prime + 1.0) * graph.quad_form(p) + beta_prime / 2.0 * distinct_pairs


def pairwise_form_equivalent(beta_prime: float):
    """
    (scale, beta) with loss_karalias_form(p, G, beta', 0) == scale * loss(p, G, beta).

    Splitting the pair sum into edges and non-edges gives
    -(1 + beta'/2) p^T W p + beta'/2 p^T Wbar p.
    """
    if beta_prime < 0:
        raise ValueError(f"beta' must be non-negative, got {beta_prime}")
    scale = 1.0 + beta_prime / 2.0
    return scale, beta_prime / (2.0 + beta_prime)
