from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional

import numpy as np
import pandas as pd

from clique.constants import PRESETS
from clique.graph import Graph
from logging_config import logger


@dataclass
class Instance:
    graph: Graph
    planted: Optional[FrozenSet[int]] = None
    mc_size: Optional[int] = None
    meta: Dict = field(default_factory=dict)
    name: str = ""

    def __post_init__(self):
        if self.planted is not None:
            self.planted = frozenset(int(v) for v in self.planted)
            if not self.graph.is_clique(self.planted):
                raise ValueError(f"Instance '{self.name}': planted set is not a clique")
            if self.mc_size is not None and self.mc_size < len(self.planted):
                raise ValueError(
                    f"Instance '{self.name}': mc_size {self.mc_size} below planted size {len(self.planted)}"
                )


def planted_clique(n: int, edge_prob: float, q: int, seed: int) -> Instance:
    """G(n, edge_prob) background with q uniformly chosen nodes made pairwise adjacent."""
    if not 1 <= q <= n:
        raise ValueError(f"Planted size must satisfy 1 <= q <= n, got q={q}, n={n}")
    if not 0.0 <= edge_prob <= 1.0:
        raise ValueError(f"Edge probability must be in [0, 1], got {edge_prob}")
    rng = np.random.default_rng(seed)
    planted = np.sort(rng.choice(n, size=q, replace=False))

    rows, cols = np.triu_indices(n, k=1)
    keep = rng.random(rows.size) < edge_prob
    in_planted = np.zeros(n, dtype=bool)
    in_planted[planted] = True
    keep |= in_planted[rows] & in_planted[cols]

    graph = Graph.from_edge_list(zip(rows[keep], cols[keep]), n)
    meta = {"generator": "planted", "n": n, "edge_prob": edge_prob, "q": q, "seed": seed}
    return Instance(graph, frozenset(planted.tolist()), None, meta)


def rb_hard(groups: int, domain: int, hardness: float, seed: int) -> Instance:
    """
    k groups of d nodes, each group an independent set, so no clique exceeds k.
    Between every two groups a hardness fraction of the d*d cross pairs is removed,
    never the pair joining the hidden assignment (one node per group), which
    therefore stays a k-clique.
    """
    if groups < 2 or domain < 2:
        raise ValueError(f"Need groups, domain >= 2, got {groups}, {domain}")
    if not 0.0 <= hardness < 1.0:
        raise ValueError(f"Hardness must be in [0, 1), got {hardness}")
    rng = np.random.default_rng(seed)
    n = groups * domain
    hidden = np.arange(groups) * domain + rng.integers(domain, size=groups)

    local_u, local_v = np.divmod(np.arange(domain * domain), domain)
    removals = min(int(round(hardness * domain * domain)), domain * domain - 1)
    edges = []
    for g1 in range(groups):
        for g2 in range(g1 + 1, groups):
            us = g1 * domain + local_u
            vs = g2 * domain + local_v
            keep = np.ones(domain * domain, dtype=bool)
            protected = (us == hidden[g1]) & (vs == hidden[g2])
            removable = np.flatnonzero(~protected)
            keep[rng.choice(removable, size=removals, replace=False)] = False
            edges.append(np.column_stack([us[keep], vs[keep]]))

    graph = Graph.from_edge_list(np.vstack(edges), n)
    meta = {
        "generator": "rb",
        "groups": groups,
        "domain": domain,
        "hardness": hardness,
        "seed": seed,
    }
    return Instance(graph, frozenset(hidden.tolist()), groups, meta)


def generate_preset(preset: str, count: int, seed: int) -> List[Instance]:
    """`count` instances of a named preset, each from its own spawned seed stream."""
    if preset not in PRESETS:
        raise ValueError(f"Unknown preset '{preset}', choose from {sorted(PRESETS)}")
    if count < 1:
        raise ValueError(f"Count must be >= 1, got {count}")
    spec = PRESETS[preset]
    instances = []
    for index, child in enumerate(np.random.SeedSequence(seed).spawn(count)):
        sizes = np.random.default_rng(child)
        child_seed = int(child.generate_state(1)[0])
        if spec.generator == "planted":
            instance = planted_clique(spec.domain[0], spec.hardness, spec.groups[0], child_seed)
        else:
            k = int(sizes.integers(spec.groups[0], spec.groups[1] + 1))
            d = int(sizes.integers(spec.domain[0], spec.domain[1] + 1))
            instance = rb_hard(k, d, spec.hardness, child_seed)
        instance.name = f"graph_{index:04d}"
        instance.meta["preset"] = preset
        instances.append(instance)
    logger.info(f"GENERATE -> preset={preset}, count={count}, seed={seed}")
    return instances


def dataset_stats(instances: List[Instance]) -> Dict[str, float]:
    """Mean and population std of node and edge counts."""
    frame = pd.DataFrame(
        {
            "nodes": [inst.graph.node_count for inst in instances],
            "edges": [inst.graph.edge_count for inst in instances],
        }
    )
    return {
        "graphs": len(frame),
        "nodes_mean": float(frame["nodes"].mean()),
        "nodes_std": float(frame["nodes"].std(ddof=0)),
        "edges_mean": float(frame["edges"].mean()),
        "edges_std": float(frame["edges"].std(ddof=0)),
    }
