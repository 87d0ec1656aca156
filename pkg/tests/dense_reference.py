"""Dense operators for small graphs, used as oracles by the sparse tests."""
import numpy as np

from clique.graph import Graph


def dense_adjacency(graph: Graph) -> np.ndarray:
    return graph.adjacency.toarray()


def dense_walk(graph: Graph) -> np.ndarray:
    W = dense_adjacency(graph)
    deg = W.sum(axis=0)
    P = 0.5 * np.eye(graph.node_count)
    for v in range(graph.node_count):
        if deg[v] == 0:
            P[v, v] = 1.0
        else:
            P[:, v] += 0.5 * W[:, v] / deg[v]
    return P


def dense_wavelet(graph: Graph, k: int) -> np.ndarray:
    P = dense_walk(graph)
    if k == 0:
        return np.eye(graph.node_count) - P
    power = np.linalg.matrix_power
    return power(P, 2 ** (k - 1)) - power(P, 2 ** k)


def dense_renorm_adj(graph: Graph) -> np.ndarray:
    W = dense_adjacency(graph)
    scale = 1.0 / np.sqrt(W.sum(axis=1) + 1.0)
    return scale[:, None] * (W + np.eye(graph.node_count)) * scale[None, :]


def dense_complement(graph: Graph) -> np.ndarray:
    n = graph.node_count
    return np.ones((n, n)) - np.eye(n) - dense_adjacency(graph)


def brute_force_clique_number(graph: Graph) -> int:
    n = graph.node_count
    best = 0
    for mask in range(1 << n):
        nodes = [v for v in range(n) if mask >> v & 1]
        if len(nodes) > best and graph.is_clique(nodes):
            best = len(nodes)
    return best


def dense_filter(graph: Graph, kind: str, scale: int) -> np.ndarray:
    if kind == "low":
        return np.linalg.matrix_power(dense_renorm_adj(graph), scale)
    return dense_wavelet(graph, scale)


def dense_mlp(x: np.ndarray, params: dict, prefix: str, depth: int) -> np.ndarray:
    for i in range(depth):
        x = x @ params[f"{prefix}.{i}.W"] + params[f"{prefix}.{i}.b"]
        if i < depth - 1:
            x = np.maximum(x, 0.0)
    return x


def dense_layer(graph: Graph, H: np.ndarray, params: dict, layer: int, filters, depth: int,
                slope: float = 0.2):
    """Filter bank, per-node softmax attention over filters, then the layer MLP."""
    filtered = [dense_filter(graph, kind, scale) @ H for kind, scale in filters]
    attention = params[f"layer{layer}.att"]
    scores = []
    for H_f in filtered:
        joined = np.hstack([H_f, H])
        scores.append(np.where(joined > 0, joined, slope * joined) @ attention)
    scores = np.stack(scores, axis=1)
    weights = np.exp(scores - scores.max(axis=1, keepdims=True))
    weights /= weights.sum(axis=1, keepdims=True)
    mixed = sum(weights[:, [f]] * H_f for f, H_f in enumerate(filtered))
    return dense_mlp(mixed, params, f"layer{layer}.mlp", depth), weights
