import logging

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from clique.decoder import (
    DecoderConfig,
    candidate_accept,
    decode,
    default_tau,
    rank_nodes,
)
from clique.graph import Graph
from tests.strategies import graph_and_vector

K4 = Graph.from_edge_list([(u, v) for u in range(4) for v in range(u + 1, 4)], 4)


def test_rank_nodes_breaks_ties_by_index():
    assert rank_nodes([0.5, 0.9, 0.5, 0.9]).tolist() == [1, 3, 0, 2]


def test_candidate_accept(triangle_with_tail):
    assert candidate_accept(triangle_with_tail, [0, 1], 2)
    assert not candidate_accept(triangle_with_tail, [0, 2], 3)
    assert candidate_accept(triangle_with_tail, [], 4)


def test_single_sampler_grows_greedily(triangle_with_tail):
    result = decode(triangle_with_tail, np.array([0.9, 0.8, 0.7, 0.6, 0.1]))
    assert result.nodes == frozenset({0, 1, 2})
    assert result.size == 3
    assert result.sampler_index == 0


def test_later_sampler_can_win(triangle_with_tail):
    p = np.array([0.5, 0.4, 0.3, 0.9, 0.8])
    assert decode(triangle_with_tail, p, DecoderConfig(kappa=1)).size == 2
    result = decode(triangle_with_tail, p, DecoderConfig(kappa=3))
    assert result.nodes == frozenset({0, 1, 2})
    assert result.sampler_index == 2


def test_size_ties_go_to_the_lowest_sampler():
    graph = Graph.from_edge_list([(0, 1), (2, 3)], 4)
    result = decode(graph, np.array([1.0, 0.5, 0.9, 0.1]), DecoderConfig(kappa=2))
    assert result.nodes == frozenset({0, 1})
    assert result.sampler_index == 0


def test_prefix_limits_candidates():
    p = np.array([0.4, 0.3, 0.2, 0.1])
    assert decode(K4, p, DecoderConfig(tau=2)).nodes == frozenset({0, 1})


def test_strict_bounds_shrink_the_scan():
    p = np.array([0.4, 0.3, 0.2, 0.1])
    assert decode(K4, p, DecoderConfig(kappa=2, tau=4)).size == 4
    strict = decode(K4, p, DecoderConfig(kappa=2, tau=4, strict=True))
    assert strict.nodes == frozenset({0, 2})
    assert strict.sampler_index == 0


def test_strict_bounds_skip_the_next_ranked_node():
    p = np.array([0.4, 0.3, 0.2, 0.1])
    strict = decode(K4, p, DecoderConfig(kappa=1, tau=4, strict=True))
    assert strict.nodes == frozenset({0, 2, 3})


def test_tau_above_n_is_clamped(caplog):
    with caplog.at_level(logging.WARNING):
        result = decode(K4, np.ones(4), DecoderConfig(tau=10))
    assert result.size == 4
    assert "clamping" in caplog.text


def test_kappa_above_tau_is_rejected():
    with pytest.raises(ValueError, match="kappa"):
        decode(K4, np.ones(4), DecoderConfig(kappa=3, tau=2))


def test_invalid_inputs():
    with pytest.raises(ValueError):
        DecoderConfig(kappa=0)
    with pytest.raises(ValueError):
        DecoderConfig(tau=0)
    with pytest.raises(ValueError, match="entries"):
        decode(K4, np.ones(3))
    with pytest.raises(ValueError, match="without nodes"):
        decode(Graph.from_edge_list([], 0), np.ones(0))


def test_default_tau():
    assert default_tau(100, 8) == 32
    assert default_tau(20, 8) == 20
    assert default_tau(100, 7.5) == 32


@settings(max_examples=1000, deadline=None)
@given(graph_and_vector(max_nodes=14, low=0.0, high=1.0), st.data())
def test_more_samplers_never_hurt(case, data):
    graph, p = case
    n = graph.node_count
    tau = data.draw(st.integers(1, n))
    k1 = data.draw(st.integers(1, tau))
    k2 = data.draw(st.integers(k1, tau))
    small = decode(graph, p, DecoderConfig(kappa=k1, tau=tau))
    large = decode(graph, p, DecoderConfig(kappa=k2, tau=tau))
    assert graph.is_clique(small.nodes) and graph.is_clique(large.nodes)
    assert large.size >= small.size


@settings(max_examples=50, deadline=None)
@given(graph_and_vector(max_nodes=14, low=0.0, high=1.0))
def test_threaded_decode_matches_serial(case):
    graph, p = case
    cfg = DecoderConfig(kappa=graph.node_count)
    serial = decode(graph, p, cfg)
    threaded = decode(graph, p, cfg, threads=4)
    assert (threaded.nodes, threaded.sampler_index) == (serial.nodes, serial.sampler_index)


def test_rank_nodes_examples():
    assert rank_nodes([0.1, 0.9, 0.5]).tolist() == [1, 2, 0]
    assert rank_nodes(np.full(4, 0.3)).tolist() == [0, 1, 2, 3]


def test_pendant_trap_needs_a_second_sampler():
    # triangle a=0, b=1, c=2 with pendant d=3 on a
    graph = Graph.from_edge_list([(0, 1), (1, 2), (0, 2), (0, 3)], 4)
    p = np.array([0.90, 0.80, 0.70, 0.95])
    assert decode(graph, p, DecoderConfig(kappa=1, tau=4)).nodes == frozenset({0, 3})
    assert decode(graph, p, DecoderConfig(kappa=2, tau=4)).nodes == frozenset({0, 1, 2})


def test_one_hot_scores_with_unit_prefix():
    p = np.zeros(4)
    p[2] = 1.0
    assert decode(K4, p, DecoderConfig(kappa=1, tau=1)).nodes == frozenset({2})


@settings(max_examples=300, deadline=None)
@given(graph_and_vector(max_nodes=10, low=0.0, high=1.0), st.data())
def test_candidate_accept_matches_complement_mass(case, data):
    graph, p = case
    clique = decode(graph, p).nodes
    outside = sorted(set(range(graph.node_count)) - clique)
    if not outside:
        return
    v = data.draw(st.sampled_from(outside))
    x = np.zeros(graph.node_count)
    x[list(clique | {v})] = 1.0
    assert candidate_accept(graph, clique, v) == (graph.complement_quad_form(x) == 0.0)
