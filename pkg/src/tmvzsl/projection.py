"""Feature-to-semantic projection via multi-output ridge regression."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .dataset import FeatureMatrix, as_array
from .errors import FormatError, InvalidParameter, ShapeError, SingularSystemError

NORMALIZE_MODES = ("none", "zscore", "l2")


@dataclass
class ProjectionModel:
    """Linear map from a low-level feature view to one semantic view.

    ``apply`` computes ``((X - input_mean) / input_scale) @ weights + bias``.
    """

    weights: np.ndarray
    bias: np.ndarray
    input_mean: np.ndarray
    input_scale: np.ndarray
    lam: float
    normalize: str = "none"

    @property
    def d_in(self) -> int:
        return self.weights.shape[0]

    @property
    def d_out(self) -> int:
        return self.weights.shape[1]


def _normalizer(X: np.ndarray, mode: str):
    if mode == "none":
        return np.zeros(X.shape[1]), np.ones(X.shape[1])
    if mode == "zscore":
        mean = X.mean(axis=0)
        scale = X.std(axis=0)
        scale[scale == 0.0] = 1.0
        return mean, scale
    if mode == "l2":
        # global scale so row norms average 1; keeps columns comparable
        norms = np.linalg.norm(X, axis=1)
        s = float(norms.mean()) if norms.mean() > 0 else 1.0
        return np.zeros(X.shape[1]), np.full(X.shape[1], s)
    raise InvalidParameter(f"unknown normalize mode {mode!r}")


def fit_ridge(
    X,
    Y,
    lam: float,
    *,
    normalize: str = "none",
    fit_bias: bool = False,
) -> ProjectionModel:
    """Fit ``min_W ||Xn W - Y||_F^2 + lam ||W||_F^2`` on normalized inputs.

    Solved through an SVD-backed least-squares factorization of the
    augmented system [Xn; sqrt(lam) I], never an explicit inverse. With
    ``lam == 0`` the design matrix must have full column rank, otherwise
    SingularSystemError is raised.
    """
    Xa = as_array(X)
    Ya = as_array(Y)
    if Xa.shape[0] != Ya.shape[0]:
        raise ShapeError(f"row mismatch: X has {Xa.shape[0]}, Y has {Ya.shape[0]}")
    if Xa.shape[0] < 1:
        raise ShapeError("need at least one row")
    if lam < 0:
        raise InvalidParameter(f"lambda must be >= 0, got {lam}")

    mean, scale = _normalizer(Xa, normalize)
    Xn = (Xa - mean) / scale
    d_in, d_out = Xn.shape[1], Ya.shape[1]

    if fit_bias:
        x_off = Xn.mean(axis=0)
        y_off = Ya.mean(axis=0)
        A = Xn - x_off
        T = Ya - y_off
    else:
        x_off = np.zeros(d_in)
        y_off = np.zeros(d_out)
        A = Xn
        T = Ya

    if lam > 0:
        A_aug = np.vstack([A, np.sqrt(lam) * np.eye(d_in)])
        T_aug = np.vstack([T, np.zeros((d_in, d_out))])
    else:
        A_aug, T_aug = A, T

    W, _, rank, _ = scipy.linalg.lstsq(A_aug, T_aug, lapack_driver="gelsd")
    if lam == 0 and rank < d_in:
        raise SingularSystemError(
            f"rank-deficient design (rank {rank} < {d_in}) with lambda=0"
        )

    bias = y_off - x_off @ W
    return ProjectionModel(
        weights=W,
        bias=bias,
        input_mean=mean,
        input_scale=scale,
        lam=float(lam),
        normalize=normalize,
    )


def apply(model: ProjectionModel, X) -> FeatureMatrix:
    """Project features into the model's semantic view."""
    Xa = as_array(X)
    if Xa.shape[1] != model.d_in:
        raise ShapeError(f"X has {Xa.shape[1]} columns, model expects {model.d_in}")
    Xn = (Xa - model.input_mean) / model.input_scale
    return FeatureMatrix(Xn @ model.weights + model.bias, view_name="projected")


def save_model(model: ProjectionModel, path) -> None:
    """Serialize to matrix text format with a small key=value header."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("# projection-model\n")
        fh.write(f"# d_in = {model.d_in}\n")
        fh.write(f"# d_out = {model.d_out}\n")
        fh.write(f"# lambda = {model.lam!r}\n")
        fh.write(f"# normalize = {model.normalize}\n")
        for row in model.weights:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")
        for vec in (model.bias, model.input_mean, model.input_scale):
            fh.write(",".join(repr(float(v)) for v in vec) + "\n")


def load_model(path) -> ProjectionModel:
    header: dict[str, str] = {}
    rows: list[list[float]] = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            stripped = line.strip()
            if not stripped:
                continue
            if stripped.startswith("#"):
                if "=" in stripped:
                    key, _, value = stripped.lstrip("# ").partition("=")
                    header[key.strip()] = value.strip()
                continue
            rows.append([float(t) for t in stripped.split(",")])
    try:
        d_in = int(header["d_in"])
        d_out = int(header["d_out"])
        lam = float(header["lambda"])
    except KeyError as exc:
        raise FormatError(f"{path}: missing header key {exc}") from None
    if len(rows) != d_in + 3:
        raise FormatError(
            f"{path}: expected {d_in + 3} data rows, found {len(rows)}"
        )
    weights = np.array(rows[:d_in])
    if weights.shape != (d_in, d_out):
        raise FormatError(f"{path}: weight block shape {weights.shape}")
    bias, mean, scale = (np.array(rows[d_in + i]) for i in range(3))
    return ProjectionModel(
        weights=weights,
        bias=bias,
        input_mean=mean,
        input_scale=scale,
        lam=lam,
        normalize=header.get("normalize", "none"),
    )
