import numpy as np
import pytest

from tmvzsl import graph, propagation
from tmvzsl.dataset import PrototypeSet
from tmvzsl.errors import InvalidParameter, ShapeError

import oracles


def _path_operator(n=3):
    edges = {(i, i + 1): 1.0 for i in range(n - 1)}
    return graph.propagation_operator(graph.AffinityGraph(n=n, edges=edges))


def test_alpha_zero_returns_seeds():
    op = _path_operator()
    Y0 = np.zeros((3, 2))
    Y0[0, 0] = 1.0
    result = propagation.propagate(op, Y0, alpha=0.0)
    assert np.array_equal(result.F, Y0)
    assert result.converged


def test_disconnected_components_follow_their_prototype():
    # two cliques with one prototype vertex each, no cross edges
    edges = {(0, 1): 1.0, (1, 2): 1.0, (0, 2): 1.0,
             (3, 4): 1.0, (4, 5): 1.0, (3, 5): 1.0}
    op = graph.propagation_operator(graph.AffinityGraph(n=6, edges=edges))
    Y0 = np.zeros((6, 2))
    Y0[0, 0] = 1.0
    Y0[3, 1] = 1.0
    result = propagation.propagate(op, Y0, alpha=0.85)
    preds = np.argmax(result.F, axis=1)
    assert list(preds) == [0, 0, 0, 1, 1, 1]


def test_path_graph_matches_closed_form():
    op = _path_operator()
    Y0 = np.zeros((3, 2))
    Y0[0, 0] = 1.0
    result = propagation.propagate(op, Y0, alpha=0.5)
    expected = oracles.closed_form_propagation(op.dense(), Y0, 0.5)
    assert np.max(np.abs(result.F - expected)) < 1e-8


@pytest.mark.parametrize("alpha", [0.5, 0.85, 0.9])
def test_seeded_operators_match_closed_form(alpha):
    for seed in range(3):
        rng = np.random.default_rng(seed)
        X = rng.normal(size=(40, 3))
        op = graph.propagation_operator(graph.hypergraph_homogeneous(X, k=4))
        Y0 = np.zeros((40, 3))
        for c, row in enumerate((0, 13, 26)):
            Y0[row, c] = 1.0
        result = propagation.propagate(op, Y0, alpha=alpha)
        expected = oracles.closed_form_propagation(op.dense(), Y0, alpha)
        assert result.converged
        assert np.max(np.abs(result.F - expected)) < 1e-8


def test_seed_scaling_property():
    op = _path_operator(5)
    Y0 = np.zeros((5, 2))
    Y0[0, 0] = 1.0
    Y0[4, 1] = 1.0
    base = propagation.propagate(op, Y0, alpha=0.7)
    scaled = propagation.propagate(op, 3.5 * Y0, alpha=0.7)
    assert np.max(np.abs(scaled.F - 3.5 * base.F)) < 1e-8
    assert np.array_equal(np.argmax(scaled.F, axis=1), np.argmax(base.F, axis=1))


def test_propagate_validation():
    op = _path_operator()
    Y0 = np.zeros((3, 1))
    with pytest.raises(InvalidParameter):
        propagation.propagate(op, Y0, alpha=1.0)
    with pytest.raises(ShapeError):
        propagation.propagate(op, np.zeros((4, 1)))


def test_non_convergence_flag():
    op = _path_operator(10)
    Y0 = np.zeros((10, 1))
    Y0[0, 0] = 1.0
    result = propagation.propagate(op, Y0, alpha=0.9, tol=1e-14, max_iter=3)
    assert not result.converged
    assert result.n_iter == 3


def test_seed_matrix_structure():
    seeds = propagation.seed_matrix(4, 3)
    assert seeds.n == 7
    assert seeds.prototype_rows == [4, 5, 6]
    assert [seeds.prototype_class(r) for r in (4, 5, 6)] == [0, 1, 2]
    assert np.array_equal(seeds.Y0[:4], np.zeros((4, 3)))


# ---------------------------------------------------------------------------
# Bayesian model averaging
# ---------------------------------------------------------------------------


def _toy_setup(seed=0, n=10):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, 2))
    op = graph.propagation_operator(graph.knn_graph(X, k=3))
    Y0 = np.zeros((n, 2))
    Y0[0, 0] = 1.0
    Y0[n - 1, 1] = 1.0
    return op, propagation.SeedMatrix(Y0)


def test_bma_single_graph_is_plain_propagation():
    op, seeds = _toy_setup()
    combined = propagation.bma_combine([op], seeds, alpha=0.85)
    plain = propagation.propagate(op, seeds, alpha=0.85)
    assert np.array_equal(combined.F, plain.F)  # bitwise


def test_bma_duplicated_graph_equals_single():
    op, seeds = _toy_setup()
    single = propagation.bma_combine([op], seeds, alpha=0.85)
    doubled = propagation.bma_combine([op, op], seeds, alpha=0.85)
    assert np.max(np.abs(doubled.F - single.F)) <= 1e-12


def test_bma_weights_are_a_distribution():
    opa, seeds = _toy_setup(1)
    opb, _ = _toy_setup(2)
    _, weights = propagation.bma_combine([opa, opb], seeds, alpha=0.85,
                                         return_weights=True)
    assert weights.sum() == pytest.approx(1.0, abs=1e-12)
    assert np.all(weights >= 0) and np.all(weights <= 1)


def test_bma_operator_order_invariance():
    opa, seeds = _toy_setup(3)
    opb, _ = _toy_setup(4)
    ab = propagation.bma_combine([opa, opb], seeds, alpha=0.85)
    ba = propagation.bma_combine([opb, opa], seeds, alpha=0.85)
    assert np.max(np.abs(ab.F - ba.F)) <= 1e-12


def test_bma_isolated_prototypes_defer_to_informative_graph():
    # graph A: path through all vertices; graph B: prototypes isolated
    n = 10
    edges_a = {(i, i + 1): 1.0 for i in range(n - 1)}
    op_a = graph.propagation_operator(graph.AffinityGraph(n=n, edges=edges_a))
    edges_b = {(i, i + 1): 1.0 for i in range(1, n - 2)}  # 0 and n-1 isolated
    with pytest.warns(UserWarning):
        op_b = graph.propagation_operator(graph.AffinityGraph(n=n, edges=edges_b))
    Y0 = np.zeros((n, 2))
    Y0[0, 0] = 1.0
    Y0[n - 1, 1] = 1.0
    seeds = propagation.SeedMatrix(Y0)
    informative = propagation.propagate(op_a, seeds, alpha=0.85)
    combined = propagation.bma_combine([op_a, op_b], seeds, alpha=0.85)
    data_rows = slice(1, n - 1)
    assert np.array_equal(np.argmax(combined.F[data_rows], axis=1),
                          np.argmax(informative.F[data_rows], axis=1))


# ---------------------------------------------------------------------------
# multi-view hypergraph pipeline
# ---------------------------------------------------------------------------


def _embedded_toy(seed=0, n=12, d=3):
    rng = np.random.default_rng(seed)
    X = np.vstack([rng.normal(size=(n // 2, d)) - 4.0,
                   rng.normal(size=(n // 2, d)) + 4.0])
    protos = PrototypeSet(
        space_dim=d,
        items=[(("neg",), -4.0 * np.ones(d)), (("pos",), 4.0 * np.ones(d))],
    )
    return X, protos


def test_tmv_hlp_single_view_reduces_to_homogeneous_propagation():
    X, protos = _embedded_toy()
    scores = propagation.tmv_hlp([X], [protos], k=3, alpha=0.85)
    cloud = np.vstack([X, protos.vectors])
    op = graph.propagation_operator(graph.hypergraph_homogeneous(cloud, k=3))
    seeds = propagation.seed_matrix(X.shape[0], 2)
    expected = propagation.propagate(op, seeds, alpha=0.85)
    assert np.array_equal(scores.F, expected.F[:X.shape[0]])
    assert scores.class_names == ["neg", "pos"]


def test_tmv_hlp_two_views_separable():
    X, protos = _embedded_toy(1)
    noisy = X + np.random.default_rng(2).normal(scale=0.05, size=X.shape)
    scores = propagation.tmv_hlp([X, noisy], [protos, protos], k=3, alpha=0.85)
    preds = scores.predictions()
    assert preds == ["neg"] * 6 + ["pos"] * 6


def test_tmv_hlp_validation():
    X, protos = _embedded_toy()
    with pytest.raises(ShapeError):
        propagation.tmv_hlp([X], [protos, protos], k=3)
    with pytest.raises(ShapeError):
        propagation.tmv_hlp([X[:5], X], [protos, protos], k=3)
    other = PrototypeSet(space_dim=3, items=[(("a",), np.zeros(3)),
                                             (("b",), np.ones(3))])
    with pytest.raises(InvalidParameter):
        propagation.tmv_hlp([X, X], [protos, other], k=3)


def test_scores_csv_export(tmp_path):
    X, protos = _embedded_toy()
    scores = propagation.tmv_hlp([X], [protos], k=3, alpha=0.5)
    path = tmp_path / "scores.csv"
    propagation.write_scores_csv(scores, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "neg,pos"
    assert len(lines) == 1 + scores.n
    parsed = np.array([[float(v) for v in line.split(",")] for line in lines[1:]])
    assert np.array_equal(parsed, scores.F)
