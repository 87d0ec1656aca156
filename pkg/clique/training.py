import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from clique import model
from clique.autodiff import Tape, Var
from clique.constants import (
    ADAM_BETA1,
    ADAM_BETA2,
    ADAM_EPS,
    DEFAULT_BETA,
    LEARNING_RATE,
    PATIENCE,
    VALIDATION_FRACTION,
)
from clique.datagen import Instance
from clique.features import compute_features
from clique.graph import Graph
from clique.loss import LossConfig, loss_on_tape
from clique.model import ModelConfig, ModelParams
from logging_config import logger, train_logger


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = LEARNING_RATE
    epochs: int = 100
    beta: float = DEFAULT_BETA
    seed: int = 0
    beta1: float = ADAM_BETA1
    beta2: float = ADAM_BETA2
    eps: float = ADAM_EPS
    clip_norm: Optional[float] = None
    patience: int = PATIENCE
    validation_fraction: float = VALIDATION_FRACTION

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ValueError(f"learning_rate must be positive, got {self.learning_rate}")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            raise ValueError(f"Moment decay rates must be in [0, 1), got {self.beta1}, {self.beta2}")
        if self.epochs < 0:
            raise ValueError(f"epochs must be >= 0, got {self.epochs}")
        if not 0 <= self.validation_fraction < 1:
            raise ValueError(f"validation_fraction must be in [0, 1), got {self.validation_fraction}")
        LossConfig(self.beta)


@dataclass
class AdamState:
    first: Dict[str, np.ndarray] = field(default_factory=dict)
    second: Dict[str, np.ndarray] = field(default_factory=dict)
    step: int = 0
    skipped: int = 0


@dataclass
class TrainReport:
    train_losses: List[float] = field(default_factory=list)
    val_losses: List[float] = field(default_factory=list)  # index 0 is before training
    best_epoch: int = 0
    best_val_loss: float = math.inf
    skipped_steps: int = 0
    diverged: bool = False
    stopped_early: bool = False
    elapsed: float = 0.0
    config: Dict = field(default_factory=dict)

    def to_dict(self) -> Dict:
        return asdict(self)


def adam_step(
    params: ModelParams, grads: Dict[str, np.ndarray], state: AdamState, cfg: TrainConfig
) -> Tuple[ModelParams, AdamState]:
    """Bias-corrected adaptive-moment update; a step with non-finite grads is skipped."""
    if not all(np.all(np.isfinite(g)) for g in grads.values()):
        state.skipped += 1
        logger.warning(f"Skipping optimizer step {state.step + 1}: non-finite gradient")
        return params, state

    if cfg.clip_norm is not None:
        norm = math.sqrt(sum(float(np.sum(g * g)) for g in grads.values()))
        if norm > cfg.clip_norm:
            grads = {k: g * (cfg.clip_norm / norm) for k, g in grads.items()}

    step = state.step + 1
    updated, first, second = {}, {}, {}
    for name, value in params.items():
        g = grads[name]
        first[name] = cfg.beta1 * state.first.get(name, np.zeros_like(g)) + (1 - cfg.beta1) * g
        second[name] = cfg.beta2 * state.second.get(name, np.zeros_like(g)) + (1 - cfg.beta2) * g * g
        first_hat = first[name] / (1 - cfg.beta1 ** step)
        second_hat = second[name] / (1 - cfg.beta2 ** step)
        updated[name] = value - cfg.learning_rate * first_hat / (np.sqrt(second_hat) + cfg.eps)
    return updated, AdamState(first, second, step, state.skipped)


def make_objective(
    graph: Graph, X: np.ndarray, mcfg: ModelConfig, beta: float
) -> Callable[[Tape, Dict[str, Var]], Var]:
    """The per-graph training loss as a function of named parameter Vars."""

    def objective(tape: Tape, param_vars: Dict[str, Var]) -> Var:
        trace = model.forward_on_tape(tape, graph, X, param_vars, mcfg)
        return loss_on_tape(trace.p, graph, LossConfig(beta))

    return objective


def loss_and_grads(
    graph: Graph, X: np.ndarray, params: ModelParams, mcfg: ModelConfig, beta: float
) -> Tuple[float, Dict[str, np.ndarray]]:
    tape = Tape()
    root = make_objective(graph, X, mcfg, beta)(tape, model.as_vars(tape, params, requires_grad=True))
    grads = tape.backward(root)
    return float(root.value), grads


def evaluate_loss(
    graph: Graph, X: np.ndarray, params: ModelParams, mcfg: ModelConfig, beta: float
) -> float:
    tape = Tape()
    return float(make_objective(graph, X, mcfg, beta)(tape, model.as_vars(tape, params)).value)


def split_dataset(
    dataset: Sequence[Instance], fraction: float, seed: int
) -> Tuple[List[Instance], List[Instance]]:
    """Seeded shuffle split; a single-instance dataset validates on itself."""
    if len(dataset) < 2 or fraction == 0:
        return list(dataset), list(dataset)
    order = np.random.default_rng(seed).permutation(len(dataset))
    n_val = min(max(1, int(round(fraction * len(dataset)))), len(dataset) - 1)
    return [dataset[i] for i in order[n_val:]], [dataset[i] for i in order[:n_val]]


def train(
    dataset: Sequence[Instance],
    mcfg: ModelConfig,
    tcfg: TrainConfig,
    validation: Optional[Sequence[Instance]] = None,
    threads: int = 1,
) -> Tuple[ModelParams, TrainReport]:
    """
    One graph per optimizer step, order reshuffled each epoch. Returns the
    parameters with the lowest mean validation loss seen, the initial ones included.
    """
    if not dataset:
        raise ValueError("Cannot train on an empty dataset")
    start = time.perf_counter()
    if validation is None:
        train_set, val_set = split_dataset(dataset, tcfg.validation_fraction, tcfg.seed)
    else:
        train_set, val_set = list(dataset), list(validation)

    def prepare(instances):
        return [
            (inst.graph, model.input_matrix(compute_features(inst.graph), mcfg)) for inst in instances
        ]

    train_data, val_data = prepare(train_set), prepare(val_set)

    def validation_loss(snapshot: ModelParams) -> float:
        def one(item):
            return evaluate_loss(item[0], item[1], snapshot, mcfg, tcfg.beta)

        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                return float(np.mean(list(pool.map(one, val_data))))
        return float(np.mean([one(item) for item in val_data]))

    params = model.init_params(mcfg)
    state = AdamState()
    report = TrainReport(config={"model": mcfg.to_dict(), "train": asdict(tcfg)})
    best_params = params
    report.best_val_loss = validation_loss(params)
    report.val_losses.append(report.best_val_loss)
    train_logger.info(
        f"START -> {len(train_data)} train / {len(val_data)} val graphs, "
        f"{model.count_params(mcfg)} parameters, initial val={report.best_val_loss:.4f}"
    )

    rng = np.random.default_rng(tcfg.seed)
    stale = 0
    for epoch in range(1, tcfg.epochs + 1):
        epoch_losses = []
        for index in rng.permutation(len(train_data)):
            graph, X = train_data[index]
            value, grads = loss_and_grads(graph, X, params, mcfg, tcfg.beta)
            if not math.isfinite(value):
                report.diverged = True
                logger.error(
                    f"Training diverged at epoch {epoch} (loss={value}); "
                    f"returning checkpoint from epoch {report.best_epoch}"
                )
                break
            epoch_losses.append(value)
            params, state = adam_step(params, grads, state, tcfg)
        if report.diverged:
            break

        val_loss = validation_loss(params)
        report.train_losses.append(float(np.mean(epoch_losses)))
        report.val_losses.append(val_loss)
        train_logger.info(
            f"EPOCH -> {epoch}: train={report.train_losses[-1]:.4f} val={val_loss:.4f}"
        )
        if val_loss < report.best_val_loss:
            report.best_val_loss, report.best_epoch = val_loss, epoch
            best_params = params
            stale = 0
        else:
            stale += 1
            if stale >= tcfg.patience:
                report.stopped_early = True
                train_logger.info(f"EARLY STOP -> no improvement for {stale} epochs")
                break

    report.skipped_steps = state.skipped
    report.elapsed = time.perf_counter() - start
    train_logger.info(
        f"DONE -> best epoch {report.best_epoch}, val={report.best_val_loss:.4f}, "
        f"skipped steps {report.skipped_steps}, {report.elapsed:.1f}s"
    )
    return best_params, report
