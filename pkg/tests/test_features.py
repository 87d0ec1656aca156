import networkx as nx
import numpy as np
import pandas as pd
import pytest
from hypothesis import given, settings

from clique.features import (
    FeatureMatrix,
    clustering_coefficient,
    compute_features,
    eccentricity,
    log_degree,
)
from clique.graph import Graph
from tests.strategies import graphs


def to_networkx(graph: Graph) -> nx.Graph:
    G = nx.Graph()
    G.add_nodes_from(range(graph.node_count))
    G.add_edges_from(graph.edge_array().tolist())
    return G


@settings(max_examples=60, deadline=None)
@given(graphs(max_nodes=20))
def test_eccentricity_matches_networkx_per_component(graph):
    G = to_networkx(graph)
    expected = np.zeros(graph.node_count)
    for component in nx.connected_components(G):
        for v, ecc in nx.eccentricity(G.subgraph(component)).items():
            expected[v] = ecc
    assert np.array_equal(eccentricity(graph), expected)


@settings(max_examples=60, deadline=None)
@given(graphs(max_nodes=20))
def test_clustering_matches_networkx(graph):
    expected = nx.clustering(to_networkx(graph))
    ours = clustering_coefficient(graph)
    assert np.allclose(ours, [expected[v] for v in range(graph.node_count)])


def test_features_on_triangle_with_tail(triangle_with_tail):
    values = compute_features(triangle_with_tail).values
    assert values.shape == (5, 3)
    assert values[:, 0].tolist() == [2, 2, 1, 2, 0]
    assert values[:, 1].tolist() == pytest.approx([1.0, 1.0, 1.0 / 3.0, 0.0, 0.0])
    assert values[:, 2].tolist() == pytest.approx(np.log([2, 2, 3, 1, 1]).tolist())


def test_log_degree_of_isolated_node_is_zero():
    assert log_degree(Graph.from_edge_list([], 3)).tolist() == [0.0, 0.0, 0.0]


def test_standardized_zeroes_constant_columns():
    features = FeatureMatrix(np.array([[1.0, 2.0, 5.0], [3.0, 2.0, 5.0]]))
    scaled = features.standardized().values
    assert scaled[:, 0].tolist() == [-1.0, 1.0]
    assert scaled[:, 1:].tolist() == [[0.0, 0.0], [0.0, 0.0]]


def test_empty_graph_gives_empty_matrix():
    assert compute_features(Graph.from_edge_list([], 0)).values.shape == (0, 3)


def test_feature_csv_has_named_columns(path4, tmp_path):
    path = tmp_path / "features.csv"
    compute_features(path4).to_csv(str(path))
    frame = pd.read_csv(path)
    assert list(frame.columns) == ["node", "ecc", "cc", "logdeg"]
    assert frame["ecc"].tolist() == [3, 2, 2, 3]


def test_small_graph_feature_rows():
    triangle = Graph.from_edge_list([(0, 1), (1, 2), (0, 2)], 3)
    assert np.allclose(compute_features(triangle).values, [[1.0, 1.0, np.log(2)]] * 3)
    assert compute_features(Graph.from_edge_list([], 1)).values.tolist() == [[0.0, 0.0, 0.0]]

    path = Graph.from_edge_list([(0, 1), (1, 2)], 3)
    assert eccentricity(path).tolist() == [2, 1, 2]
    assert compute_features(path).values[1] == pytest.approx([1.0, 0.0, np.log(2)])


def test_star_center_has_no_clustering():
    star = Graph.from_edge_list([(0, 1), (0, 2), (0, 3)], 4)
    assert clustering_coefficient(star)[0] == 0.0
