"""Multi-view CCA embedding shared by the feature view and all semantic views.

The model maximizes the sum of pairwise cross-view covariances under
per-view regularized unit-variance constraints

    maximize   sum_{i != j} tr(W_i' C_ij W_j)
    subject to W_i' (C_ii + reg_i I) W_i = I   for every view i.

Columns are extracted one at a time: each step solves the joint generalized
eigenproblem restricted to the per-view subspaces that are (C_ii + reg I)-
orthogonal to all previously accepted columns, then rescales each view's
component to unit regularized variance. For two views this sequence
reproduces classical CCA; for more views it keeps the per-view constraint
exact while greedily maximizing the summed correlation. Covariances use the
unbiased 1/(n-1) normalizer.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .dataset import FeatureMatrix, PrototypeSet, as_array, load_matrix, write_matrix
from .errors import FormatError, InvalidParameter, NumericalError, ShapeError

DEFAULT_WEIGHT_POWER = 4.0


@dataclass
class CcaModel:
    """Per-view projections into a shared latent space.

    ``weights[i]`` is d_i x m, ``means[i]`` the view's centering vector and
    ``rho`` the per-column canonical correlations in descending order.
    Embedded coordinates are scaled by ``rho ** weight_power``.
    """

    weights: list[np.ndarray]
    means: list[np.ndarray]
    rho: np.ndarray
    reg: list[float]
    weight_power: float = DEFAULT_WEIGHT_POWER

    @property
    def n_views(self) -> int:
        return len(self.weights)

    @property
    def m(self) -> int:
        return int(self.rho.shape[0])

    def view_dim(self, i: int) -> int:
        return self.weights[i].shape[0]


def _covariance_blocks(views: list[np.ndarray]):
    n = views[0].shape[0]
    means = [X.mean(axis=0) for X in views]
    centered = [X - mu for X, mu in zip(views, means)]
    denom = n - 1
    blocks = {}
    for i, Xi in enumerate(centered):
        for j, Xj in enumerate(centered):
            if j < i:
                continue
            blocks[(i, j)] = Xi.T @ Xj / denom
    return means, blocks


def _block(blocks, i, j):
    return blocks[(i, j)] if i <= j else blocks[(j, i)].T


def _null_basis(c: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the hyperplane orthogonal to vector c."""
    return scipy.linalg.null_space(c.reshape(1, -1))


def fit_mvcca(
    views,
    m: int | None = None,
    reg: float | None = None,
    *,
    weight_power: float = DEFAULT_WEIGHT_POWER,
) -> CcaModel:
    """Fit the multi-view embedding on row-aligned views.

    ``m`` defaults to the smallest view dimensionality. ``reg`` is the
    absolute ridge added to every view's covariance; when omitted each view
    uses 1e-4 * trace(C_ii) / d_i. Column signs are canonicalized so the
    largest-magnitude entry of each column of the first view's weights is
    positive; columns are ordered by descending correlation.
    """
    mats = [as_array(v) for v in views]
    if len(mats) < 2:
        raise InvalidParameter(f"need at least 2 views, got {len(mats)}")
    n = mats[0].shape[0]
    if n < 2:
        raise InvalidParameter(f"need at least 2 rows, got {n}")
    for k, Xv in enumerate(mats):
        if Xv.shape[0] != n:
            raise ShapeError(
                f"view {k} has {Xv.shape[0]} rows, expected {n}"
            )
    dims = [Xv.shape[1] for Xv in mats]
    if m is None or m == 0:
        m = min(dims)
    if not 1 <= m <= min(dims):
        raise InvalidParameter(f"m={m} outside [1, {min(dims)}]")
    if reg is not None and reg <= 0:
        raise InvalidParameter(f"reg must be > 0, got {reg}")

    means, blocks = _covariance_blocks(mats)
    n_views = len(mats)
    if reg is None:
        regs = [max(1e-4 * np.trace(_block(blocks, i, i)) / dims[i], 1e-12)
                for i in range(n_views)]
    else:
        regs = [float(reg)] * n_views
    B_full = [
        _block(blocks, i, i) + regs[i] * np.eye(dims[i]) for i in range(n_views)
    ]

    bases = [np.eye(d) for d in dims]
    cols = [np.zeros((d, m)) for d in dims]
    rho = np.zeros(m)

    for t in range(m):
        sizes = [Q.shape[1] for Q in bases]
        offsets = np.concatenate([[0], np.cumsum(sizes)])
        total = offsets[-1]
        A_red = np.zeros((total, total))
        B_red = np.zeros((total, total))
        for i in range(n_views):
            si = slice(offsets[i], offsets[i + 1])
            B_red[si, si] = bases[i].T @ B_full[i] @ bases[i]
            for j in range(n_views):
                if i == j:
                    continue
                sj = slice(offsets[j], offsets[j + 1])
                A_red[si, sj] = bases[i].T @ _block(blocks, i, j) @ bases[j]
        A_red = (A_red + A_red.T) / 2
        B_red = (B_red + B_red.T) / 2

        try:
            eigvals, eigvecs = scipy.linalg.eigh(A_red, B_red)
        except scipy.linalg.LinAlgError as exc:
            raise NumericalError(f"generalized eigensolve failed: {exc}") from None
        z = eigvecs[:, -1]

        parts = []
        for i in range(n_views):
            w_red = z[offsets[i]:offsets[i + 1]]
            b = float(w_red @ (bases[i].T @ B_full[i] @ bases[i]) @ w_red)
            if b > 1e-300:
                w_red = w_red / np.sqrt(b)
            else:
                # view not touched by this direction: fall back to any unit
                # feasible vector so the constraint stays exact
                w_red = np.zeros(sizes[i])
                w_red[0] = 1.0
                b0 = float(w_red @ (bases[i].T @ B_full[i] @ bases[i]) @ w_red)
                w_red = w_red / np.sqrt(b0)
            parts.append(w_red)

        # canonical sign: largest-|entry| of view 0's column positive
        w0 = bases[0] @ parts[0]
        pivot = int(np.argmax(np.abs(w0)))
        if w0[pivot] < 0:
            parts = [-p for p in parts]

        full = [bases[i] @ parts[i] for i in range(n_views)]
        corr = 0.0
        for i in range(n_views):
            for j in range(n_views):
                if i != j:
                    corr += float(full[i] @ _block(blocks, i, j) @ full[j])
        rho[t] = corr / (n_views * (n_views - 1))
        for i in range(n_views):
            cols[i][:, t] = full[i]

        if t + 1 < m:
            for i in range(n_views):
                c = bases[i].T @ (B_full[i] @ full[i])
                bases[i] = bases[i] @ _null_basis(c)

    rho = np.clip(rho, 0.0, None)
    order = np.argsort(-rho, kind="stable")
    rho = rho[order]
    weights = [c[:, order] for c in cols]

    return CcaModel(
        weights=weights,
        means=[np.asarray(mu) for mu in means],
        rho=rho,
        reg=regs,
        weight_power=float(weight_power),
    )


def embed(model: CcaModel, X, view_index: int) -> FeatureMatrix:
    """Embed rows of one view: center, project, scale by rho**weight_power."""
    Xa = as_array(X)
    if not 0 <= view_index < model.n_views:
        raise InvalidParameter(f"view_index {view_index} out of range")
    if Xa.shape[1] != model.view_dim(view_index):
        raise ShapeError(
            f"X has {Xa.shape[1]} columns, view {view_index} expects "
            f"{model.view_dim(view_index)}"
        )
    scale = model.rho ** model.weight_power
    coords = (Xa - model.means[view_index]) @ model.weights[view_index] * scale
    return FeatureMatrix(coords, view_name=f"embedded_{view_index}")


def embed_prototypes(model: CcaModel, protos: PrototypeSet, view_index: int) -> PrototypeSet:
    """Embed prototype vectors exactly as data rows of the given view."""
    if protos.space_dim != model.view_dim(view_index):
        raise ShapeError(
            f"prototypes have dim {protos.space_dim}, view {view_index} expects "
            f"{model.view_dim(view_index)}"
        )
    coords = embed(model, protos.vectors, view_index).data
    return PrototypeSet(
        space_dim=model.m,
        items=[(labels, coords[k]) for k, (labels, _) in enumerate(protos.items)],
    )


def save_cca(model: CcaModel, directory) -> None:
    """Serialize to a directory of matrix files plus a manifest."""
    os.makedirs(directory, exist_ok=True)
    with open(os.path.join(directory, "manifest.txt"), "w", encoding="utf-8",
              newline="\n") as fh:
        fh.write(f"n_views = {model.n_views}\n")
        fh.write(f"m = {model.m}\n")
        fh.write(f"weight_power = {model.weight_power!r}\n")
        fh.write("reg = " + ",".join(repr(r) for r in model.reg) + "\n")
        fh.write("rho = " + ",".join(repr(float(r)) for r in model.rho) + "\n")
    for i in range(model.n_views):
        write_matrix(model.weights[i], os.path.join(directory, f"weights_{i}.csv"))
        write_matrix(model.means[i].reshape(1, -1),
                     os.path.join(directory, f"mean_{i}.csv"))


def load_cca(directory) -> CcaModel:
    manifest = {}
    with open(os.path.join(directory, "manifest.txt"), encoding="utf-8") as fh:
        for line in fh:
            if "=" in line:
                key, _, value = line.partition("=")
                manifest[key.strip()] = value.strip()
    try:
        n_views = int(manifest["n_views"])
        weight_power = float(manifest["weight_power"])
        reg = [float(v) for v in manifest["reg"].split(",")]
        rho = np.array([float(v) for v in manifest["rho"].split(",")])
    except KeyError as exc:
        raise FormatError(f"{directory}: manifest missing {exc}") from None
    weights, means = [], []
    for i in range(n_views):
        weights.append(load_matrix(os.path.join(directory, f"weights_{i}.csv")).data)
        means.append(load_matrix(os.path.join(directory, f"mean_{i}.csv")).data[0])
    return CcaModel(weights=weights, means=means, rho=rho, reg=reg,
                    weight_power=weight_power)
