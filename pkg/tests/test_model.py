import numpy as np
import pytest

from clique import model
from clique.autodiff import Tape, grad_check
from clique.constants import BAND_PASS, LOW_PASS, FilterSpec
from clique.features import compute_features
from clique.graph import Graph
from clique.loss import LossConfig, loss_on_tape
from clique.model import ModelConfig
from tests.dense_reference import dense_layer, dense_mlp


def random_graph(n, density, seed):
    rng = np.random.default_rng(seed)
    rows, cols = np.triu_indices(n, k=1)
    keep = rng.random(rows.size) < density
    return Graph.from_edge_list(zip(rows[keep], cols[keep]), n)


@pytest.mark.parametrize(
    "overrides, expected",
    [
        ({}, 633),
        ({"hidden_dim": 1, "num_layers": 1, "mlp_depth": 1}, 11),
        ({"hidden_dim": 16}, 2289),
    ],
)
def test_count_params(overrides, expected):
    config = ModelConfig(**overrides)
    assert model.count_params(config) == expected
    assert sum(v.size for v in model.init_params(config).values()) == expected


def test_init_params_is_seeded():
    first = model.init_params(ModelConfig(seed=3))
    second = model.init_params(ModelConfig(seed=3))
    other = model.init_params(ModelConfig(seed=4))
    assert all(np.array_equal(first[k], second[k]) for k in first)
    assert not np.array_equal(first["emb.0.W"], other["emb.0.W"])
    assert np.all(first["emb.0.b"] == 0.0)


def test_config_validation():
    with pytest.raises(ValueError):
        ModelConfig(num_layers=0)
    with pytest.raises(ValueError):
        ModelConfig(mlp_depth=0)
    with pytest.raises(ValueError, match="empty"):
        ModelConfig(filters=(FilterSpec(BAND_PASS, 1),), low_pass_only=True)


def test_ablation_keeps_only_low_pass_filters():
    ablated = ModelConfig().ablation()
    assert ablated.low_pass_only
    assert [f.kind for f in ablated.active_filters] == [LOW_PASS] * 3
    assert model.count_params(ablated) == model.count_params(ModelConfig())


def test_config_survives_dict_form():
    config = ModelConfig(hidden_dim=4, num_layers=3, low_pass_only=True, seed=9)
    assert ModelConfig.from_dict(config.to_dict()) == config


def test_forward_produces_normalized_scores():
    graph = random_graph(20, 0.3, seed=1)
    config = ModelConfig()
    p, readouts = model.forward(graph, compute_features(graph), model.init_params(config), config)
    assert p.shape == (20,)
    assert p.min() == 0.0 and p.max() == 1.0
    assert len(readouts) == config.num_layers + 1
    assert all(H.shape == (20, config.hidden_dim) for H in readouts)


def test_attention_weights_sum_to_one_per_node():
    graph = random_graph(12, 0.4, seed=2)
    config = ModelConfig()
    tape = Tape()
    X = model.input_matrix(compute_features(graph), config)
    trace = model.forward_on_tape(tape, graph, X, model.as_vars(tape, model.init_params(config)), config)
    for alphas in trace.attention:
        assert len(alphas) == len(config.filters)
        assert np.allclose(sum(a.value for a in alphas), 1.0)


def test_symmetric_graph_gives_constant_scores():
    complete = Graph.from_edge_list([(u, v) for u in range(5) for v in range(u + 1, 5)], 5)
    config = ModelConfig()
    p, _ = model.forward(complete, compute_features(complete), model.init_params(config), config)
    assert p.tolist() == [0.5] * 5


@pytest.mark.parametrize("seed", range(5))
def test_forward_is_permutation_equivariant(seed):
    graph = random_graph(15, 0.35, seed=seed)
    perm = np.random.default_rng(seed).permutation(15)
    relabeled = graph.relabel(perm)
    config = ModelConfig(seed=seed)
    params = model.init_params(config)
    p, _ = model.forward(graph, compute_features(graph), params, config)
    q, _ = model.forward(relabeled, compute_features(relabeled), params, config)
    assert np.allclose(q[perm], p, atol=1e-9)


def test_embed_rejects_wrong_feature_width():
    config = ModelConfig()
    tape = Tape()
    params = model.as_vars(tape, model.init_params(config))
    with pytest.raises(ValueError, match="feature columns"):
        model.embed(tape.var(np.ones((4, 2))), params, config)


def test_params_from_dict_checks_shapes():
    config = ModelConfig(hidden_dim=2)
    payload = model.params_to_dict(model.init_params(config))
    restored = model.params_from_dict(payload, config)
    assert all(np.array_equal(restored[k], v) for k, v in model.init_params(config).items())
    with pytest.raises(ValueError, match="shape"):
        model.params_from_dict(payload, ModelConfig(hidden_dim=3))
    del payload["out.0.W"]
    with pytest.raises(ValueError, match="missing"):
        model.params_from_dict(payload, config)


@pytest.mark.parametrize("seed", range(20))
def test_model_and_loss_gradients_match_finite_differences(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(4, 11))
    graph = random_graph(n, float(rng.uniform(0.3, 0.7)), seed=seed)
    config = ModelConfig(hidden_dim=4, seed=seed, low_pass_only=bool(seed % 4 == 3))
    X = model.input_matrix(compute_features(graph), config)

    def objective(tape, param_vars):
        trace = model.forward_on_tape(tape, graph, X, param_vars, config)
        return loss_on_tape(trace.p, graph, LossConfig(1.0))

    error = grad_check(objective, model.init_params(config), h=1e-6, max_coords=4, seed=seed)
    assert error < 1e-4


def test_zero_weights_give_zero_embeddings():
    config = ModelConfig()
    params = {k: np.zeros_like(v) for k, v in model.init_params(config).items()}
    tape = Tape()
    H = model.embed(tape.var(np.random.default_rng(0).normal(size=(4, 3))), model.as_vars(tape, params), config)
    assert np.all(H.value == 0.0)


def test_single_filter_gets_all_the_attention():
    graph = random_graph(6, 0.5, seed=5)
    config = ModelConfig(filters=(FilterSpec(BAND_PASS, 1),), hidden_dim=3)
    tape = Tape()
    X = model.input_matrix(compute_features(graph), config)
    trace = model.forward_on_tape(tape, graph, X, model.as_vars(tape, model.init_params(config)), config)
    assert all(np.all(alphas[0].value == 1.0) for alphas in trace.attention)


def test_single_node_graph_scores_one_half():
    graph = Graph.from_edge_list([], 1)
    config = ModelConfig()
    p, _ = model.forward(graph, compute_features(graph), model.init_params(config), config)
    assert p.tolist() == [0.5]


def test_doubling_width_more_than_doubles_parameters():
    assert model.count_params(ModelConfig(hidden_dim=16)) > 2 * model.count_params(ModelConfig(hidden_dim=8))


@pytest.mark.parametrize("low_pass_only", [False, True])
def test_layers_match_dense_computation(low_pass_only):
    graph = Graph.from_edge_list([(0, 1), (1, 2), (0, 2), (2, 3), (3, 4)], 5)
    config = ModelConfig(hidden_dim=4, seed=11, low_pass_only=low_pass_only)
    params = model.init_params(config)
    X = model.input_matrix(compute_features(graph), config)
    tape = Tape()
    trace = model.forward_on_tape(tape, graph, X, model.as_vars(tape, params), config)

    H = dense_mlp(X, params, "emb", config.mlp_depth)
    assert np.allclose(trace.readouts[0].value, H, atol=1e-10)
    readouts = [H]
    for layer in range(1, config.num_layers + 1):
        H, weights = dense_layer(graph, H, params, layer, config.active_filters, config.mlp_depth)
        assert np.allclose(trace.readouts[layer].value, H, atol=1e-10)
        got = np.hstack([alpha.value for alpha in trace.attention[layer - 1]])
        assert np.allclose(got, weights, atol=1e-10)
        readouts.append(H)

    h = dense_mlp(np.hstack(readouts), params, "out", config.mlp_depth).ravel()
    assert np.allclose(trace.p.value.ravel(), (h - h.min()) / (h.max() - h.min()), atol=1e-10)
