import json
import os
from datetime import datetime
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

import config
from clique.datagen import Instance, dataset_stats
from clique.graph import Graph
from clique.model import ModelConfig, ModelParams, params_from_dict, params_to_dict
from logging_config import logger

# Per-instance keys a manifest entry may carry.
MANIFEST_INSTANCE_FIELDS = ["name", "file", "planted", "mc_size", "meta"]

# Top-level keys of a checkpoint document.
CHECKPOINT_FIELDS = ["version", "config", "params", "report", "created_at"]

EDGE_LIST_SUFFIXES = (".edgelist", ".txt", ".edges")

# TU benchmark layout: <NAME>_A.txt plus <NAME>_graph_indicator.txt
TU_EDGE_SUFFIX = "_A.txt"
TU_INDICATOR_SUFFIX = "_graph_indicator.txt"


class DatasetFormatError(ValueError):
    def __init__(self, path: str, line: Optional[int], message: str):
        self.path = path
        self.line = line
        where = f"{path}:{line}" if line is not None else path
        super().__init__(f"{where}: {message}")


# --- Edge-List Files ---
def parse_edge_list(path: str) -> Graph:
    """
    One "u v" pair per line, 0-indexed; '#' lines ignored; an optional
    "n <count>" line fixes the node count, otherwise it is max index + 1.
    """
    pairs: List[Tuple[int, int]] = []
    line_numbers: List[int] = []
    declared: Optional[int] = None
    with open(path) as handle:
        for line_no, raw in enumerate(handle, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            fields = line.split()
            if fields[0] == "n":
                if len(fields) != 2 or not fields[1].isdigit():
                    raise DatasetFormatError(path, line_no, f"malformed header '{line}'")
                declared = int(fields[1])
                continue
            if len(fields) != 2:
                raise DatasetFormatError(path, line_no, f"expected 'u v', got '{line}'")
            try:
                u, v = int(fields[0]), int(fields[1])
            except ValueError:
                raise DatasetFormatError(path, line_no, f"non-integer node in '{line}'")
            if u < 0 or v < 0:
                raise DatasetFormatError(path, line_no, f"negative node index in '{line}'")
            if u == v:
                raise DatasetFormatError(path, line_no, f"self-loop on node {u}")
            pairs.append((u, v))
            line_numbers.append(line_no)

    if declared is not None:
        # the header may come after some edges
        for (u, v), line_no in zip(pairs, line_numbers):
            if max(u, v) >= declared:
                raise DatasetFormatError(
                    path, line_no, f"node {max(u, v)} out of range for n={declared}"
                )

    n = declared if declared is not None else max((max(e) for e in pairs), default=-1) + 1
    return Graph.from_edge_list(pairs, n)


def write_edge_list(graph: Graph, path: str):
    with open(path, "w") as handle:
        handle.write(f"n {graph.node_count}\n")
        for u, v in graph.edge_array():
            handle.write(f"{u} {v}\n")


class DatasetManager:
    """A dataset directory: manifest.json plus one edge-list file per instance."""

    def __init__(self, root: str):
        self.root = root
        self.manifest_path = os.path.join(root, config.MANIFEST_FILE)

    def save_dataset(self, instances: List[Instance], generator: Optional[Dict[str, Any]] = None):
        os.makedirs(self.root, exist_ok=True)
        entries = []
        for index, instance in enumerate(instances):
            name = instance.name or f"graph_{index:04d}"
            file_name = f"{name}.edgelist"
            write_edge_list(instance.graph, os.path.join(self.root, file_name))
            entries.append(
                {
                    "name": name,
                    "file": file_name,
                    "planted": sorted(instance.planted) if instance.planted is not None else None,
                    "mc_size": instance.mc_size,
                    "meta": instance.meta,
                }
            )
        manifest = {
            "version": config.MANIFEST_VERSION,
            "generator": generator or {},
            "stats": dataset_stats(instances) if instances else {},
            "instances": entries,
        }
        with open(self.manifest_path, "w") as handle:
            json.dump(manifest, handle, indent=2)
        logger.info(f"SAVED -> {len(entries)} instances to {self.root}")

    def load_manifest(self) -> Dict[str, Any]:
        try:
            with open(self.manifest_path) as handle:
                manifest = json.load(handle)
        except json.JSONDecodeError as e:
            raise DatasetFormatError(self.manifest_path, e.lineno, f"invalid JSON: {e.msg}")
        if not isinstance(manifest.get("instances"), list):
            raise DatasetFormatError(self.manifest_path, None, "missing 'instances' list")
        return manifest

    def load_dataset(self) -> List[Instance]:
        if not os.path.exists(self.manifest_path):
            return self._load_bare_directory()

        instances = []
        for position, entry in enumerate(self.load_manifest()["instances"]):
            unknown = set(entry) - set(MANIFEST_INSTANCE_FIELDS)
            if unknown:
                raise DatasetFormatError(
                    self.manifest_path, None, f"instance {position}: unknown fields {sorted(unknown)}"
                )
            if "file" not in entry:
                raise DatasetFormatError(self.manifest_path, None, f"instance {position}: missing 'file'")
            graph = parse_edge_list(os.path.join(self.root, entry["file"]))
            name = entry.get("name") or os.path.splitext(entry["file"])[0]
            try:
                instances.append(
                    Instance(
                        graph,
                        entry.get("planted"),
                        entry.get("mc_size"),
                        entry.get("meta") or {},
                        name,
                    )
                )
            except (ValueError, IndexError, TypeError) as e:
                raise DatasetFormatError(self.manifest_path, None, f"instance {position}: {e}")
        return instances

    def _load_bare_directory(self) -> List[Instance]:
        files = sorted(f for f in os.listdir(self.root) if f.endswith(EDGE_LIST_SUFFIXES))
        return [
            Instance(parse_edge_list(os.path.join(self.root, f)), name=os.path.splitext(f)[0])
            for f in files
        ]


def save_dataset(instances: List[Instance], path: str, generator: Optional[Dict[str, Any]] = None):
    DatasetManager(path).save_dataset(instances, generator)


def load_dataset(path: str) -> List[Instance]:
    """
    A dataset directory, a TU benchmark directory, a bare directory of edge
    lists, or a single edge-list file.
    """
    if os.path.isdir(path):
        tu_name = find_tu_name(path)
        if tu_name is not None and not os.path.exists(os.path.join(path, config.MANIFEST_FILE)):
            return load_tu_dataset(path, tu_name)
        return DatasetManager(path).load_dataset()
    if not os.path.exists(path):
        raise FileNotFoundError(f"No dataset at '{path}'")
    name = os.path.splitext(os.path.basename(path))[0]
    return [Instance(parse_edge_list(path), name=name)]


# --- TU Benchmark Layout (IMDB-BINARY, COLLAB, TWITTER) ---
def find_tu_name(root: str) -> Optional[str]:
    for file_name in sorted(os.listdir(root)):
        if file_name.endswith(TU_EDGE_SUFFIX):
            name = file_name[: -len(TU_EDGE_SUFFIX)]
            if os.path.exists(os.path.join(root, name + TU_INDICATOR_SUFFIX)):
                return name
    return None


def load_tu_dataset(root: str, name: str) -> List[Instance]:
    """
    Reads <name>_A.txt (1-indexed "u, v" rows over all graphs) and
    <name>_graph_indicator.txt (graph id per node). Data is not bundled.
    """
    edges = pd.read_csv(
        os.path.join(root, name + TU_EDGE_SUFFIX), header=None, names=["u", "v"], skipinitialspace=True
    )
    indicator = pd.read_csv(
        os.path.join(root, name + TU_INDICATOR_SUFFIX), header=None, names=["graph"]
    )["graph"].to_numpy()

    first_node = np.concatenate([[0], np.flatnonzero(np.diff(indicator)) + 1])
    edges["graph"] = indicator[edges["u"].to_numpy() - 1]
    edges = edges[edges["u"] != edges["v"]]

    instances = []
    for index, (graph_id, start) in enumerate(zip(indicator[first_node], first_node)):
        n = int((indicator == graph_id).sum())
        local = edges[edges["graph"] == graph_id][["u", "v"]].to_numpy() - 1 - start
        graph = Graph.from_edge_list(map(tuple, local), n)
        instances.append(
            Instance(graph, meta={"generator": "tu", "dataset": name, "graph_id": int(graph_id)},
                     name=f"{name}_{index:04d}")
        )
    logger.info(f"LOADED -> {len(instances)} graphs from TU dataset '{name}'")
    return instances


# --- Checkpoints ---
class CheckpointManager:
    """JSON checkpoints: config block plus flat row-major named arrays with shapes."""

    def __init__(self, path: str):
        self.path = path

    def save(self, model_config: ModelConfig, params: ModelParams, report: Optional[Dict] = None):
        directory = os.path.dirname(self.path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        document = {
            "version": config.CHECKPOINT_VERSION,
            "config": model_config.to_dict(),
            "params": params_to_dict(params),
            "report": report or {},
            "created_at": datetime.now().isoformat(timespec="seconds"),
        }
        with open(self.path, "w") as handle:
            json.dump(document, handle)
        logger.info(f"CHECKPOINT -> saved {len(params)} arrays to {self.path}")

    def load(self) -> Tuple[ModelConfig, ModelParams, Dict]:
        try:
            with open(self.path) as handle:
                document = json.load(handle)
        except json.JSONDecodeError as e:
            raise DatasetFormatError(self.path, e.lineno, f"invalid checkpoint JSON: {e.msg}")
        for field in ("version", "config", "params"):
            if field not in document:
                raise DatasetFormatError(self.path, None, f"checkpoint missing '{field}'")
        unknown = set(document) - set(CHECKPOINT_FIELDS)
        if unknown:
            logger.warning(f"Ignoring unknown checkpoint fields {sorted(unknown)} in {self.path}")
        if document["version"] > config.CHECKPOINT_VERSION:
            raise DatasetFormatError(
                self.path, None, f"checkpoint version {document['version']} is newer than supported"
            )
        model_config = ModelConfig.from_dict(document["config"])
        params = params_from_dict(document["params"], model_config)
        return model_config, params, document.get("report", {})
