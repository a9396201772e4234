import numpy as np
import pytest

from tmvzsl import projection
from tmvzsl.errors import ShapeError, SingularSystemError

import oracles


def test_identity_targets_recovers_identity():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(30, 4))
    model = projection.fit_ridge(X, X, 0.0)
    assert np.max(np.abs(model.weights - np.eye(4))) < 1e-8


def test_zero_targets_zero_weights():
    rng = np.random.default_rng(1)
    X = rng.normal(size=(20, 3))
    model = projection.fit_ridge(X, np.zeros((20, 2)), 1.0)
    assert np.max(np.abs(model.weights)) < 1e-12
    assert np.max(np.abs(model.bias)) < 1e-12


def test_hand_solved_1d_ridge():
    # w = sum(x*y) / (sum(x^2) + lambda) = 28 / 15
    X = np.array([[1.0], [2.0], [3.0]])
    Y = np.array([[2.0], [4.0], [6.0]])
    model = projection.fit_ridge(X, Y, 1.0)
    assert model.weights[0, 0] == pytest.approx(28.0 / 15.0, abs=1e-12)


def test_apply_identity_roundtrip():
    rng = np.random.default_rng(2)
    X = rng.normal(size=(25, 5))
    model = projection.fit_ridge(X, X, 1e-12)
    out = projection.apply(model, X)
    assert np.max(np.abs(out.data - X)) < 1e-6


def test_apply_zero_weight_model_gives_bias_rows():
    model = projection.ProjectionModel(
        weights=np.zeros((3, 2)),
        bias=np.array([1.5, -2.0]),
        input_mean=np.zeros(3),
        input_scale=np.ones(3),
        lam=1.0,
    )
    out = projection.apply(model, np.ones((4, 3)))
    np.testing.assert_array_equal(out.data, np.tile([1.5, -2.0], (4, 1)))


def test_apply_matches_naive_matmul_oracle():
    rng = np.random.default_rng(3)
    W = rng.normal(size=(4, 3))
    model = projection.ProjectionModel(
        weights=W,
        bias=np.zeros(3),
        input_mean=np.zeros(4),
        input_scale=np.ones(4),
        lam=0.0,
    )
    X = rng.normal(size=(7, 4))
    expected = oracles.naive_matmul(X, W)
    assert np.max(np.abs(projection.apply(model, X).data - expected)) < 1e-10


@pytest.mark.parametrize("normalize,fit_bias", [
    ("none", False), ("none", True), ("zscore", True), ("l2", False),
])
def test_normal_equation_residual(normalize, fit_bias):
    rng = np.random.default_rng(4)
    lam = 0.37
    X = rng.normal(size=(40, 6))
    Y = rng.normal(size=(40, 3))
    model = projection.fit_ridge(X, Y, lam, normalize=normalize, fit_bias=fit_bias)
    Xn = (X - model.input_mean) / model.input_scale
    if fit_bias:
        Xn = Xn - Xn.mean(axis=0)
        Yc = Y - Y.mean(axis=0)
    else:
        Yc = Y
    residual = (Xn.T @ Xn + lam * np.eye(6)) @ model.weights - Xn.T @ Yc
    assert np.linalg.norm(residual) < 1e-8


def test_monotone_shrinkage():
    rng = np.random.default_rng(5)
    X = rng.normal(size=(30, 5))
    Y = rng.normal(size=(30, 2))
    norms = [
        np.linalg.norm(projection.fit_ridge(X, Y, lam).weights)
        for lam in (0.01, 0.1, 1.0, 10.0)
    ]
    assert all(a >= b - 1e-12 for a, b in zip(norms, norms[1:]))


def test_rank_deficient_without_ridge_raises():
    X = np.array([[1.0, 2.0], [2.0, 4.0], [3.0, 6.0]])  # collinear columns
    with pytest.raises(SingularSystemError):
        projection.fit_ridge(X, np.ones((3, 1)), 0.0)
    # regularized solve succeeds on the same data
    projection.fit_ridge(X, np.ones((3, 1)), 1e-3)


def test_row_mismatch_raises():
    with pytest.raises(ShapeError):
        projection.fit_ridge(np.ones((3, 2)), np.ones((4, 1)), 1.0)


def test_apply_dimension_mismatch_raises():
    model = projection.fit_ridge(np.eye(3), np.eye(3), 1e-6)
    with pytest.raises(ShapeError):
        projection.apply(model, np.ones((2, 4)))


def test_model_save_load_roundtrip(tmp_path):
    rng = np.random.default_rng(6)
    X = rng.normal(size=(20, 4))
    Y = rng.normal(size=(20, 3))
    model = projection.fit_ridge(X, Y, 0.5, normalize="zscore", fit_bias=True)
    path = tmp_path / "proj.model"
    projection.save_model(model, path)
    back = projection.load_model(path)
    assert np.array_equal(back.weights, model.weights)
    assert np.array_equal(back.bias, model.bias)
    assert np.array_equal(back.input_mean, model.input_mean)
    assert np.array_equal(back.input_scale, model.input_scale)
    assert back.lam == model.lam
    assert back.normalize == model.normalize
