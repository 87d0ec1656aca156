from dataclasses import dataclass
from typing import FrozenSet, List, Optional, Set

import numpy as np

import config
from clique.graph import Graph
from logging_config import logger


def _bit_indices(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def _adjacency_masks(graph: Graph) -> List[int]:
    masks = []
    for v in range(graph.node_count):
        mask = 0
        for u in graph.neighbors(v):
            mask |= 1 << int(u)
        masks.append(mask)
    return masks


def exact_max_clique(graph: Graph, node_cap: Optional[int] = None, override: bool = False) -> FrozenSet[int]:
    """
    Maximum clique by Bron-Kerbosch with pivoting, iterative over an explicit stack.

    Candidate and excluded sets are int bitmasks; branches that cannot beat the
    best clique found so far are pruned.
    """
    cap = config.EXACT_NODE_CAP if node_cap is None else node_cap
    if graph.node_count > cap and not override:
        raise ValueError(
            f"Graph has {graph.node_count} nodes, above the exact solver cap of {cap}; "
            f"pass override=True (--force-exact) or raise CLIQUE_EXACT_NODE_CAP"
        )
    if graph.node_count == 0:
        return frozenset()

    adj = _adjacency_masks(graph)
    best: List[int] = []
    stack = [((), (1 << graph.node_count) - 1, 0)]
    while stack:
        chosen, candidates, excluded = stack.pop()
        if not candidates:
            if not excluded and len(chosen) > len(best):
                best = list(chosen)
            continue
        if len(chosen) + candidates.bit_count() <= len(best):
            continue

        pivot = max(
            _bit_indices(candidates | excluded),
            key=lambda u: (candidates & adj[u]).bit_count(),
        )
        for v in _bit_indices(candidates & ~adj[pivot]):
            stack.append((chosen + (v,), candidates & adj[v], excluded & adj[v]))
            candidates &= ~(1 << v)
            excluded |= 1 << v

    return frozenset(best)


@dataclass(frozen=True)
class HeuristicConfig:
    eta1: int = 5  # random restarts
    eta2: int = 100  # improvement iterations per restart
    seed: int = 0

    def __post_init__(self):
        if self.eta1 < 1 or self.eta2 < 1:
            raise ValueError(f"eta1 and eta2 must be >= 1, got {self.eta1}, {self.eta2}")

    @property
    def label(self) -> str:
        return f"local-search({self.eta1},{self.eta2})"


class _CliqueState:
    """Current clique plus, for every outside node, how many members it misses."""

    def __init__(self, graph: Graph, seed_node: int):
        self.graph = graph
        self.members: Set[int] = set()
        self.missing = np.zeros(graph.node_count, dtype=np.int64)
        self.add(seed_node)

    def add(self, v: int):
        self.members.add(v)
        self.missing += 1
        self.missing[self.graph.neighbors(v)] -= 1

    def remove(self, v: int):
        self.members.discard(v)
        self.missing -= 1
        self.missing[self.graph.neighbors(v)] += 1

    def outside(self, misses: int) -> np.ndarray:
        mask = self.missing == misses
        mask[list(self.members)] = False
        return np.flatnonzero(mask)

    def blocker(self, v: int) -> int:
        """The single member not adjacent to v (v must miss exactly one member)."""
        adjacent = self.graph.neighbor_sets[v]
        return next(u for u in self.members if u not in adjacent)


def _grow(state: _CliqueState, rng: np.random.Generator):
    """Greedily adds the admissible node with the most admissible neighbors."""
    while True:
        admissible = state.outside(0)
        if admissible.size == 0:
            return
        pool = set(admissible.tolist())
        scores = np.array([len(state.graph.neighbor_sets[v] & pool) for v in admissible])
        top = admissible[scores == scores.max()]
        state.add(int(rng.choice(top)))


def _two_for_one(state: _CliqueState, rng: np.random.Generator) -> bool:
    """Swaps one member out for two mutually adjacent nodes that each miss only it."""
    one_missing = state.outside(1)
    by_blocker = {}
    for v in rng.permutation(one_missing):
        by_blocker.setdefault(state.blocker(int(v)), []).append(int(v))
    for u, group in by_blocker.items():
        for i, v in enumerate(group):
            for w in group[i + 1 :]:
                if state.graph.has_edge(v, w):
                    state.remove(u)
                    state.add(v)
                    state.add(w)
                    return True
    return False


def local_search(graph: Graph, cfg: HeuristicConfig = HeuristicConfig()) -> FrozenSet[int]:
    """
    Random-restart local search: per restart, greedy growth from a random node,
    then up to eta2 moves of (add, else one-out-two-in swap, else random plateau swap).
    """
    if graph.node_count == 0:
        return frozenset()
    rng = np.random.default_rng(cfg.seed)
    best: FrozenSet[int] = frozenset()

    for _ in range(cfg.eta1):
        state = _CliqueState(graph, int(rng.integers(graph.node_count)))
        _grow(state, rng)
        if len(state.members) > len(best):
            best = frozenset(state.members)
        tabu = -1

        for _ in range(cfg.eta2):
            admissible = state.outside(0)
            if admissible.size:
                state.add(int(rng.choice(admissible)))
            elif not _two_for_one(state, rng):
                plateau = [v for v in state.outside(1).tolist() if v != tabu]
                if not plateau:
                    break
                v = int(rng.choice(plateau))
                tabu = state.blocker(v)
                state.remove(tabu)
                state.add(v)
            if len(state.members) > len(best):
                best = frozenset(state.members)

    if not graph.is_clique(best):
        raise AssertionError(f"Local search produced a non-clique: {sorted(best)}")
    logger.debug(f"LOCAL SEARCH -> {cfg.label}: size {len(best)}")
    return best


def approximation_score(predicted_size: int, reference_size: int) -> float:
    """Predicted over reference clique size; above 1 against a non-exact reference."""
    if reference_size <= 0:
        raise ValueError(f"Reference size must be >= 1, got {reference_size}")
    return predicted_size / reference_size
