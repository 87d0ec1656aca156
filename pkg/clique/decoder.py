import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import FrozenSet, Iterable, List, Optional

import numpy as np

from clique.constants import TAU_MULTIPLIER
from clique.graph import Graph
from logging_config import logger


@dataclass(frozen=True)
class DecoderConfig:
    kappa: int = 1
    tau: Optional[int] = None  # None means the whole ranking
    strict: bool = False  # pseudocode loop bounds instead of the prose ones

    def __post_init__(self):
        if self.kappa < 1:
            raise ValueError(f"kappa must be >= 1, got {self.kappa}")
        if self.tau is not None and self.tau < 1:
            raise ValueError(f"tau must be >= 1, got {self.tau}")

    def resolve_tau(self, n: int) -> int:
        tau = n if self.tau is None else self.tau
        if tau > n:
            logger.warning(f"tau={tau} exceeds n={n}; clamping to {n}")
            tau = n
        if self.kappa > tau:
            raise ValueError(f"kappa={self.kappa} exceeds tau={tau}")
        return tau


@dataclass(frozen=True)
class CliqueResult:
    nodes: FrozenSet[int]
    size: int
    sampler_index: int
    elapsed: float


def rank_nodes(p) -> np.ndarray:
    """Node indices by descending p; ties keep ascending node index."""
    p = np.asarray(p, dtype=float)
    return np.argsort(-p, kind="stable")


def candidate_accept(graph: Graph, clique: Iterable[int], v: int) -> bool:
    """v joins the clique iff it is adjacent to every member."""
    adjacent = graph.neighbor_sets[v]
    return all(u in adjacent for u in clique)


def _run_sampler(graph: Graph, order: np.ndarray, j: int, tau: int, cfg: DecoderConfig) -> List[int]:
    """Grows the clique seeded at rank j (0-based) over the ranked prefix."""
    clique = [int(order[j])]
    if cfg.strict:
        # Pseudocode bounds: 0-based rank j + i for i = 2..tau-kappa; rank j + 1 is skipped
        candidates = [j + i for i in range(2, tau - cfg.kappa + 1) if j + i < len(order)]
    else:
        candidates = range(j + 1, tau)
    for rank in candidates:
        v = int(order[rank])
        if candidate_accept(graph, clique, v):
            clique.append(v)
    return clique


def decode(graph: Graph, p, cfg: DecoderConfig = DecoderConfig(), threads: int = 1) -> CliqueResult:
    """Best of kappa greedy samplers; the lowest sampler index wins ties on size."""
    start = time.perf_counter()
    n = graph.node_count
    if n == 0:
        raise ValueError("Cannot decode a graph without nodes")
    if len(p) != n:
        raise ValueError(f"Probability vector has {len(p)} entries, graph has {n} nodes")
    tau = cfg.resolve_tau(n)
    order = rank_nodes(p)

    if threads > 1 and cfg.kappa > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            cliques = list(
                pool.map(lambda j: _run_sampler(graph, order, j, tau, cfg), range(cfg.kappa))
            )
    else:
        cliques = [_run_sampler(graph, order, j, tau, cfg) for j in range(cfg.kappa)]

    best = max(range(len(cliques)), key=lambda j: (len(cliques[j]), -j))
    nodes = frozenset(cliques[best])
    if not graph.is_clique(nodes):
        raise AssertionError(f"Decoder produced a non-clique: {sorted(nodes)}")
    return CliqueResult(nodes, len(nodes), best, time.perf_counter() - start)


def default_tau(n: int, expected_size: float) -> int:
    return int(min(n, TAU_MULTIPLIER * np.ceil(expected_size)))
