import numpy as np
import pytest

from tmvzsl import embedding
from tmvzsl.dataset import PrototypeSet
from tmvzsl.errors import InvalidParameter, ShapeError

import oracles


def _random_views(seed, n=50, dims=(4, 3), couple=0.5):
    rng = np.random.default_rng(seed)
    views = [rng.normal(size=(n, d)) for d in dims]
    shared = rng.normal(size=n)
    for V in views:
        V[:, 0] += couple * shared
    return views


def test_identical_views_all_correlations_one():
    rng = np.random.default_rng(20)
    X = rng.normal(size=(20, 3))
    model = embedding.fit_mvcca([X, X.copy()], m=3, reg=1e-12)
    assert np.max(np.abs(model.rho - 1.0)) < 1e-8


def test_negated_1d_views_fully_correlated():
    rng = np.random.default_rng(21)
    x = rng.normal(size=(30, 1))
    model = embedding.fit_mvcca([x, -x], m=1, reg=1e-12)
    assert model.rho[0] == pytest.approx(1.0, abs=1e-8)


def test_two_view_rho_matches_dense_gev_oracle():
    for seed in range(5):
        X, Y = _random_views(seed)
        model = embedding.fit_mvcca([X, Y], m=2, reg=1e-4)
        expected = oracles.dense_gev_cca_rho([X, Y], 2, 1e-4)
        assert np.max(np.abs(model.rho - expected)) < 1e-6


def test_two_view_rho_matches_classical_cca_oracle():
    for seed in range(5):
        X, Y = _random_views(seed + 100)
        model = embedding.fit_mvcca([X, Y], m=3, reg=1e-4)
        expected = oracles.classical_cca_rho(X, Y, 3, 1e-4)
        assert np.max(np.abs(model.rho - expected)) < 1e-6


@pytest.mark.parametrize("dims", [(4, 3), (4, 3, 5)])
def test_per_view_constraint_residual(dims):
    views = _random_views(42, dims=dims)
    reg = 1e-4
    model = embedding.fit_mvcca(views, m=2, reg=reg)
    n = views[0].shape[0]
    for V, W in zip(views, model.weights):
        Vc = V - V.mean(axis=0)
        B = Vc.T @ Vc / (n - 1) + reg * np.eye(V.shape[1])
        residual = W.T @ B @ W - np.eye(model.m)
        assert np.max(np.abs(residual)) < 1e-6


def test_rho_non_increasing_and_bounded():
    for seed in range(4):
        views = _random_views(seed, dims=(5, 4, 3))
        model = embedding.fit_mvcca(views, m=3, reg=1e-4)
        assert np.all(np.diff(model.rho) <= 1e-12)
        assert np.all(model.rho >= 0.0)
        assert np.all(model.rho <= 1.0 + 1e-8)


def test_sign_canonicalization():
    views = _random_views(9)
    model = embedding.fit_mvcca(views, m=2, reg=1e-4)
    for col in model.weights[0].T:
        assert col[np.argmax(np.abs(col))] >= 0


def test_embed_mean_row_is_zero():
    views = _random_views(1)
    model = embedding.fit_mvcca(views, m=2, reg=1e-4)
    out = embedding.embed(model, model.means[0].reshape(1, -1), 0)
    assert np.array_equal(out.data, np.zeros((1, 2)))


def test_embed_weight_power_zero_is_unscaled():
    views = _random_views(2)
    model = embedding.fit_mvcca(views, m=2, reg=1e-4, weight_power=0.0)
    X = views[0]
    expected = (X - model.means[0]) @ model.weights[0]
    assert np.array_equal(embedding.embed(model, X, 0).data, expected)


def test_embed_matches_center_multiply_scale_oracle():
    views = _random_views(3)
    model = embedding.fit_mvcca(views, m=3, reg=1e-4, weight_power=4.0)
    X = views[1]
    centered = X - model.means[1]
    expected = oracles.naive_matmul(centered, model.weights[1])
    expected = expected * (np.asarray(model.rho) ** 4.0)
    got = embedding.embed(model, X, 1).data
    assert np.max(np.abs(got - expected)) < 1e-10


def test_embed_row_independence():
    views = _random_views(4)
    model = embedding.fit_mvcca(views, m=2, reg=1e-4)
    full = embedding.embed(model, views[0], 0).data
    subset = embedding.embed(model, views[0][3:7], 0).data
    assert np.array_equal(full[3:7], subset)


def test_embed_prototypes_match_data_rows_bit_exactly():
    views = _random_views(5)
    model = embedding.fit_mvcca(views, m=2, reg=1e-4)
    protos = PrototypeSet(
        space_dim=views[1].shape[1],
        items=[(("c0",), views[1][0]), (("c1",), views[1][6])],
    )
    embedded = embedding.embed_prototypes(model, protos, 1)
    rows = embedding.embed(model, views[1], 1).data
    assert embedded.label_sets == [("c0",), ("c1",)]
    assert np.array_equal(embedded.vectors[0], rows[0])
    assert np.array_equal(embedded.vectors[1], rows[6])


def test_embed_prototype_at_view_mean_is_zero():
    views = _random_views(6)
    model = embedding.fit_mvcca(views, m=2, reg=1e-4)
    protos = PrototypeSet(space_dim=views[0].shape[1],
                          items=[(("c",), model.means[0])])
    out = embedding.embed_prototypes(model, protos, 0)
    assert np.array_equal(out.vectors, np.zeros((1, 2)))


def test_fit_mvcca_parameter_validation():
    views = _random_views(7)
    with pytest.raises(InvalidParameter):
        embedding.fit_mvcca(views, m=10, reg=1e-4)  # m > min dim
    with pytest.raises(InvalidParameter):
        embedding.fit_mvcca(views, m=2, reg=0.0)
    with pytest.raises(InvalidParameter):
        embedding.fit_mvcca([views[0]], m=1, reg=1e-4)
    with pytest.raises(ShapeError):
        embedding.fit_mvcca([views[0], views[1][:-1]], m=1, reg=1e-4)
    with pytest.raises(ShapeError):
        embedding.embed(embedding.fit_mvcca(views, m=2, reg=1e-4),
                        np.ones((2, 9)), 0)


def test_cca_save_load_roundtrip(tmp_path):
    views = _random_views(8, dims=(4, 3, 2))
    model = embedding.fit_mvcca(views, m=2, reg=1e-4, weight_power=2.0)
    embedding.save_cca(model, tmp_path / "cca")
    back = embedding.load_cca(tmp_path / "cca")
    assert back.n_views == model.n_views
    assert back.weight_power == model.weight_power
    assert np.array_equal(back.rho, model.rho)
    for a, b in zip(back.weights, model.weights):
        assert np.array_equal(a, b)
    for a, b in zip(back.means, model.means):
        assert np.array_equal(a, b)
    X = views[2]
    assert np.array_equal(embedding.embed(back, X, 2).data,
                          embedding.embed(model, X, 2).data)
