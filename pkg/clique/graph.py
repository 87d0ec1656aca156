"""
Immutable sparse undirected graph and the matrix-free operators the model needs.

Operators (W adjacency, D degree matrix, I identity):
    P     = 1/2 (I + W D^-1)                      lazy random walk, column-stochastic
    Psi_0 = I - P,  Psi_k = P^(2^(k-1)) - P^(2^k)  diffusion wavelets
    A     = (D+I)^-1/2 (W+I) (D+I)^-1/2           renormalized adjacency

Isolated nodes keep their mass under the walk (P e_v = e_v), so every wavelet
vanishes on them. The complement graph is never materialized.
"""
from functools import cached_property
from typing import Dict, Iterable, List, Sequence, Tuple

import numpy as np
from scipy import sparse

from clique.constants import BAND_PASS, LOW_PASS, FilterSpec


class Graph:
    def __init__(self, node_count: int, adjacency: sparse.csr_matrix):
        self.node_count = int(node_count)
        self.adjacency = adjacency
        self.degrees = np.diff(adjacency.indptr).astype(np.int64)
        self.degrees.setflags(write=False)

        deg = self.degrees.astype(float)
        self._inv_degree = np.divide(1.0, deg, out=np.zeros_like(deg), where=deg > 0)
        self._isolated = (self.degrees == 0).astype(float)
        self._renorm_scale = 1.0 / np.sqrt(deg + 1.0)

    # --- Construction ---
    @classmethod
    def from_edge_list(cls, pairs: Iterable[Tuple[int, int]], n: int) -> "Graph":
        """Builds an undirected simple graph; reversed and repeated pairs collapse."""
        if n < 0:
            raise ValueError(f"Node count must be non-negative, got {n}")
        edges = np.asarray(list(pairs), dtype=np.int64).reshape(-1, 2)
        for index, (u, v) in enumerate(edges):
            if u == v:
                raise ValueError(f"Self-loop ({u},{v}) at pair {index} is not allowed")
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"Edge ({u},{v}) at pair {index} out of bounds for n={n}")

        rows = np.concatenate([edges[:, 0], edges[:, 1]])
        cols = np.concatenate([edges[:, 1], edges[:, 0]])
        adjacency = sparse.coo_matrix(
            (np.ones(len(rows)), (rows, cols)), shape=(n, n)
        ).tocsr()
        adjacency.sum_duplicates()
        adjacency.data[:] = 1.0
        adjacency.sort_indices()
        return cls(n, adjacency)

    def relabel(self, perm: Sequence[int]) -> "Graph":
        """Returns the isomorphic graph where node v becomes perm[v]."""
        perm = np.asarray(perm, dtype=np.int64)
        edges = self.edge_array()
        return Graph.from_edge_list(perm[edges], self.node_count)

    # --- Structure ---
    @property
    def edge_count(self) -> int:
        return int(self.degrees.sum() // 2)

    def neighbors(self, v: int) -> np.ndarray:
        start, stop = self.adjacency.indptr[v], self.adjacency.indptr[v + 1]
        return self.adjacency.indices[start:stop]

    @cached_property
    def neighbor_sets(self) -> Tuple[frozenset, ...]:
        return tuple(frozenset(self.neighbors(v).tolist()) for v in range(self.node_count))

    def has_edge(self, u: int, v: int) -> bool:
        return v in self.neighbor_sets[u]

    def edge_array(self) -> np.ndarray:
        """Undirected edges as an (|E|, 2) array with u < v, sorted."""
        upper = sparse.triu(self.adjacency, k=1).tocoo()
        edges = np.column_stack([upper.row, upper.col]).astype(np.int64)
        order = np.lexsort((edges[:, 1], edges[:, 0]))
        return edges[order]

    def __repr__(self):
        return f"Graph(n={self.node_count}, edges={self.edge_count})"

    # --- Shape Helpers ---
    def _as_matrix(self, X) -> Tuple[np.ndarray, bool]:
        X = np.asarray(X, dtype=float)
        vector = X.ndim == 1
        if vector:
            X = X[:, None]
        if X.ndim != 2 or X.shape[0] != self.node_count:
            raise ValueError(
                f"Expected an array with {self.node_count} rows, got shape {X.shape}"
            )
        return X, vector

    @staticmethod
    def _restore(Y: np.ndarray, vector: bool) -> np.ndarray:
        return Y[:, 0] if vector else Y

    # --- Lazy Random Walk ---
    def _walk_once(self, X: np.ndarray) -> np.ndarray:
        spread = self.adjacency @ (self._inv_degree[:, None] * X)
        return 0.5 * (X + spread + self._isolated[:, None] * X)

    def _walk_transpose_once(self, X: np.ndarray) -> np.ndarray:
        gathered = self._inv_degree[:, None] * (self.adjacency @ X)
        return 0.5 * (X + gathered + self._isolated[:, None] * X)

    def apply_walk(self, X, t: int) -> np.ndarray:
        """P^t X by t sparse passes."""
        if t < 0:
            raise ValueError(f"Walk power must be non-negative, got {t}")
        Y, vector = self._as_matrix(X)
        for _ in range(t):
            Y = self._walk_once(Y)
        return self._restore(Y, vector)

    def apply_walk_transpose(self, X, t: int) -> np.ndarray:
        """(P^T)^t X, the reversed walk 1/2 (I + D^-1 W)."""
        if t < 0:
            raise ValueError(f"Walk power must be non-negative, got {t}")
        Y, vector = self._as_matrix(X)
        for _ in range(t):
            Y = self._walk_transpose_once(Y)
        return self._restore(Y, vector)

    # --- Diffusion Wavelets ---
    def _dyadic_powers(self, X: np.ndarray, max_scale: int, step) -> Dict[int, np.ndarray]:
        """{t: P^t X} for t in {0, 1, 2, 4, ..., 2^max_scale}, one pass per power."""
        powers = {0: X}
        Y = X
        for t in range(1, 2 ** max_scale + 1):
            Y = step(Y)
            if t & (t - 1) == 0:
                powers[t] = Y
        return powers

    @staticmethod
    def _wavelet_from_powers(powers: Dict[int, np.ndarray], k: int) -> np.ndarray:
        if k == 0:
            return powers[0] - powers[1]
        return powers[2 ** (k - 1)] - powers[2 ** k]

    def apply_wavelet(self, X, k: int) -> np.ndarray:
        if k < 0:
            raise ValueError(f"Wavelet scale must be non-negative, got {k}")
        Y, vector = self._as_matrix(X)
        powers = self._dyadic_powers(Y, max(k, 0), self._walk_once)
        return self._restore(self._wavelet_from_powers(powers, k), vector)

    def apply_wavelet_transpose(self, X, k: int) -> np.ndarray:
        if k < 0:
            raise ValueError(f"Wavelet scale must be non-negative, got {k}")
        Y, vector = self._as_matrix(X)
        powers = self._dyadic_powers(Y, max(k, 0), self._walk_transpose_once)
        return self._restore(self._wavelet_from_powers(powers, k), vector)

    # --- Renormalized Adjacency ---
    def _renorm_once(self, X: np.ndarray) -> np.ndarray:
        scaled = self._renorm_scale[:, None] * X
        return self._renorm_scale[:, None] * (self.adjacency @ scaled + scaled)

    def apply_renorm_adj(self, X, r: int = 1) -> np.ndarray:
        """A^r X; A is symmetric so it is its own transpose."""
        if r < 0:
            raise ValueError(f"Adjacency power must be non-negative, got {r}")
        Y, vector = self._as_matrix(X)
        for _ in range(r):
            Y = self._renorm_once(Y)
        return self._restore(Y, vector)

    # --- Filter Bank ---
    def apply_filter(self, spec: FilterSpec, X, transpose: bool = False) -> np.ndarray:
        if spec.kind == LOW_PASS:
            return self.apply_renorm_adj(X, spec.scale)
        if spec.kind == BAND_PASS:
            if transpose:
                return self.apply_wavelet_transpose(X, spec.scale)
            return self.apply_wavelet(X, spec.scale)
        raise ValueError(f"Unknown filter kind: {spec.kind}")

    def apply_filter_bank(self, X, filters: Sequence[FilterSpec]) -> List[np.ndarray]:
        """Applies every filter to X, sharing walk and adjacency powers across the bank."""
        Y, vector = self._as_matrix(X)
        band_scales = [f.scale for f in filters if f.kind == BAND_PASS]
        low_scales = [f.scale for f in filters if f.kind == LOW_PASS]

        walk_powers = (
            self._dyadic_powers(Y, max(band_scales), self._walk_once) if band_scales else {}
        )
        renorm_powers = {0: Y}
        current = Y
        for r in range(1, max(low_scales, default=0) + 1):
            current = self._renorm_once(current)
            renorm_powers[r] = current

        outputs = []
        for spec in filters:
            if spec.kind == LOW_PASS:
                outputs.append(renorm_powers[spec.scale])
            elif spec.kind == BAND_PASS:
                outputs.append(self._wavelet_from_powers(walk_powers, spec.scale))
            else:
                raise ValueError(f"Unknown filter kind: {spec.kind}")
        return [self._restore(out, vector) for out in outputs]

    # --- Quadratic Forms ---
    def quad_form(self, p) -> float:
        """p^T W p, summed over both orientations of every edge."""
        p = np.asarray(p, dtype=float)
        return float(p @ (self.adjacency @ p))

    def complement_quad_form(self, p) -> float:
        """p^T Wbar p = (sum p)^2 - p^T W p - sum p^2, in O(|E| + n)."""
        p = np.asarray(p, dtype=float)
        total = p.sum()
        return float(total * total - self.quad_form(p) - p @ p)

    # --- Cliques ---
    def is_clique(self, nodes: Iterable[int]) -> bool:
        members = list(dict.fromkeys(int(v) for v in nodes))
        neighbor_sets = self.neighbor_sets
        for i, u in enumerate(members):
            adjacent = neighbor_sets[u]
            for v in members[i + 1 :]:
                if v not in adjacent:
                    return False
        return True


def indicator(nodes: Iterable[int], n: int) -> np.ndarray:
    x = np.zeros(n)
    x[list(nodes)] = 1.0
    return x


def from_edge_list(pairs: Iterable[Tuple[int, int]], n: int) -> Graph:
    return Graph.from_edge_list(pairs, n)
