from dataclasses import dataclass

import numpy as np
import pandas as pd
from scipy.sparse import csgraph

from clique.constants import FEATURE_COLUMNS
from clique.graph import Graph


@dataclass(frozen=True)
class FeatureMatrix:
    """Per-node (eccentricity, clustering coefficient, log-degree), shape n x 3."""

    values: np.ndarray

    @property
    def node_count(self) -> int:
        return self.values.shape[0]

    def standardized(self) -> "FeatureMatrix":
        """Per-graph z-score of every column; constant columns become 0."""
        mean = self.values.mean(axis=0)
        std = self.values.std(axis=0)
        scaled = np.divide(
            self.values - mean, std, out=np.zeros_like(self.values), where=std > 0
        )
        return FeatureMatrix(scaled)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.values, columns=list(FEATURE_COLUMNS))

    def to_csv(self, path: str):
        self.to_frame().to_csv(path, index_label="node")


def eccentricity(graph: Graph) -> np.ndarray:
    """Largest BFS distance from each node to any node of its own component."""
    if graph.node_count == 0:
        return np.zeros(0)
    dist = csgraph.shortest_path(graph.adjacency, directed=False, unweighted=True)
    reachable = np.where(np.isfinite(dist), dist, 0.0)
    return reachable.max(axis=1)


def clustering_coefficient(graph: Graph) -> np.ndarray:
    """Edges among neighbors over (d choose 2); 0 when the degree is below 2."""
    W = graph.adjacency
    closed_walks = np.asarray((W @ W).multiply(W).sum(axis=1)).ravel()  # 2 x triangles
    deg = graph.degrees.astype(float)
    pairs = deg * (deg - 1.0)
    return np.divide(closed_walks, pairs, out=np.zeros_like(deg), where=deg >= 2)


def log_degree(graph: Graph) -> np.ndarray:
    return np.log(np.maximum(graph.degrees, 1).astype(float))


def compute_features(graph: Graph, standardize: bool = False) -> FeatureMatrix:
    values = np.column_stack(
        [eccentricity(graph), clustering_coefficient(graph), log_degree(graph)]
    ).reshape(graph.node_count, len(FEATURE_COLUMNS))
    features = FeatureMatrix(values)
    return features.standardized() if standardize else features
