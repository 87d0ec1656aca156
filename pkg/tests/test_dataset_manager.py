import json
import logging

import numpy as np
import pytest

from clique import model
from clique.datagen import Instance, generate_preset
from clique.graph import Graph
from clique.harness import cli
from clique.model import ModelConfig
from dataset_manager import (
    CheckpointManager,
    DatasetFormatError,
    DatasetManager,
    load_dataset,
    load_tu_dataset,
    parse_edge_list,
    save_dataset,
    write_edge_list,
)


def write(path, text):
    path.write_text(text)
    return str(path)


def test_parse_edge_list_with_header_and_comments(tmp_path):
    path = write(tmp_path / "g.edgelist", "# toy graph\nn 5\n0 1\n\n1 2\n2 0\n")
    graph = parse_edge_list(path)
    assert graph.node_count == 5
    assert graph.edge_count == 3


def test_parse_edge_list_infers_node_count(tmp_path):
    assert parse_edge_list(write(tmp_path / "g.txt", "0 3\n1 3\n")).node_count == 4


@pytest.mark.parametrize(
    "body, line, message",
    [
        ("0 1\n2 2\n", 2, "self-loop"),
        ("0 1\n-1 2\n", 2, "negative"),
        ("0 1 2\n", 1, "expected"),
        ("0 x\n", 1, "non-integer"),
        ("n 3\n0 1\n1 3\n", 3, "out of range"),
        ("0 1\n1 5\nn 3\n", 2, "out of range"),
        ("n three\n", 1, "header"),
    ],
)
def test_parse_edge_list_reports_line_numbers(tmp_path, body, line, message):
    path = write(tmp_path / "bad.edgelist", body)
    with pytest.raises(DatasetFormatError, match=message) as info:
        parse_edge_list(path)
    assert info.value.line == line
    assert f"bad.edgelist:{line}" in str(info.value)


def test_edge_list_files_survive_a_write(tmp_path, triangle_with_tail):
    path = str(tmp_path / "g.edgelist")
    write_edge_list(triangle_with_tail, path)
    graph = parse_edge_list(path)
    assert graph.node_count == 5
    assert np.array_equal(graph.edge_array(), triangle_with_tail.edge_array())


def test_dataset_directory_keeps_instance_metadata(tmp_path):
    instances = generate_preset("tiny-hard", 2, seed=1)
    root = str(tmp_path / "data")
    save_dataset(instances, root, {"preset": "tiny-hard", "count": 2, "seed": 1})

    manifest = DatasetManager(root).load_manifest()
    assert manifest["version"] == 1
    assert manifest["generator"]["preset"] == "tiny-hard"
    assert manifest["stats"]["graphs"] == 2

    loaded = load_dataset(root)
    for original, restored in zip(instances, loaded):
        assert restored.name == original.name
        assert restored.planted == original.planted
        assert restored.mc_size == 8
        assert restored.meta["preset"] == "tiny-hard"
        assert np.array_equal(restored.graph.edge_array(), original.graph.edge_array())


def test_manifest_rejects_unknown_fields(tmp_path):
    root = tmp_path / "data"
    save_dataset([Instance(Graph.from_edge_list([(0, 1)], 2), name="g")], str(root))
    manifest = json.loads((root / "manifest.json").read_text())
    manifest["instances"][0]["weights"] = [1.0]
    (root / "manifest.json").write_text(json.dumps(manifest))
    with pytest.raises(DatasetFormatError, match="unknown fields"):
        load_dataset(str(root))


def test_manifest_rejects_a_non_clique_planted_set(tmp_path):
    root = tmp_path / "data"
    save_dataset([Instance(Graph.from_edge_list([(0, 1), (1, 2)], 3), name="g")], str(root))
    manifest = json.loads((root / "manifest.json").read_text())
    manifest["instances"][0]["planted"] = [0, 2]
    (root / "manifest.json").write_text(json.dumps(manifest))
    with pytest.raises(DatasetFormatError, match="not a clique"):
        load_dataset(str(root))


def test_invalid_manifest_json(tmp_path):
    (tmp_path / "manifest.json").write_text("{not json")
    with pytest.raises(DatasetFormatError, match="invalid JSON"):
        load_dataset(str(tmp_path))


def test_bare_directory_and_single_file(tmp_path):
    write(tmp_path / "b.edgelist", "0 1\n")
    write(tmp_path / "a.txt", "0 1\n1 2\n")
    write(tmp_path / "notes.md", "ignored")
    loaded = load_dataset(str(tmp_path))
    assert [inst.name for inst in loaded] == ["a", "b"]
    assert all(inst.mc_size is None for inst in loaded)

    single = load_dataset(str(tmp_path / "a.txt"))
    assert len(single) == 1 and single[0].graph.edge_count == 2
    with pytest.raises(FileNotFoundError):
        load_dataset(str(tmp_path / "missing"))


def test_tu_dataset_splits_graphs(tmp_path):
    # two graphs: a triangle on nodes 1-3 and an edge on nodes 4-5, both orientations listed
    write(tmp_path / "TOY_A.txt", "1, 2\n2, 1\n2, 3\n3, 2\n1, 3\n3, 1\n4, 5\n5, 4\n")
    write(tmp_path / "TOY_graph_indicator.txt", "1\n1\n1\n2\n2\n")
    graphs = load_tu_dataset(str(tmp_path), "TOY")
    assert [inst.graph.node_count for inst in graphs] == [3, 2]
    assert [inst.graph.edge_count for inst in graphs] == [3, 1]
    assert graphs[1].meta["graph_id"] == 2


def test_tu_directories_are_detected(tmp_path, capsys):
    write(tmp_path / "TOY_A.txt", "1, 2\n2, 1\n2, 3\n3, 2\n1, 3\n3, 1\n4, 5\n5, 4\n")
    write(tmp_path / "TOY_graph_indicator.txt", "1\n1\n1\n2\n2\n")
    graphs = load_dataset(str(tmp_path))
    assert [inst.name for inst in graphs] == ["TOY_0000", "TOY_0001"]
    assert cli(["oracle", "--data", str(tmp_path)]) == 0
    assert "TOY_0000: size 3" in capsys.readouterr().out


def test_checkpoint_keeps_config_and_params(tmp_path):
    config = ModelConfig(hidden_dim=4, low_pass_only=True, seed=2)
    params = model.init_params(config)
    path = str(tmp_path / "runs" / "model.json")
    CheckpointManager(path).save(config, params, {"best_epoch": 3})

    restored_config, restored, report = CheckpointManager(path).load()
    assert restored_config == config
    assert report == {"best_epoch": 3}
    assert all(np.array_equal(restored[k], v) for k, v in params.items())


def test_checkpoint_version_and_fields(tmp_path, caplog):
    config = ModelConfig(hidden_dim=2)
    path = tmp_path / "model.json"
    CheckpointManager(str(path)).save(config, model.init_params(config))
    document = json.loads(path.read_text())

    document["optimizer"] = {}
    path.write_text(json.dumps(document))
    with caplog.at_level(logging.WARNING):
        CheckpointManager(str(path)).load()
    assert "optimizer" in caplog.text

    document["version"] = 99
    path.write_text(json.dumps(document))
    with pytest.raises(DatasetFormatError, match="newer"):
        CheckpointManager(str(path)).load()

    del document["params"]
    path.write_text(json.dumps(document))
    with pytest.raises(DatasetFormatError, match="missing 'params'"):
        CheckpointManager(str(path)).load()
