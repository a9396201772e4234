"""kNN affinity graphs, (hyper)graphs over embedded views, and their
normalized propagation operators.

Similarity is the heat kernel exp(-d^2 / (2 sigma^2)); with sigma="auto" the
bandwidth is the median of the distances the structure actually uses.
Distance ties are broken toward the lower vertex index everywhere, so
construction is deterministic.
"""

from __future__ import annotations

import warnings as _warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse

from .dataset import as_array
from .errors import InvalidParameter, ShapeError

DENSE_LIMIT = 2000


@dataclass
class AffinityGraph:
    """Sparse symmetric nonnegative weight map with zero diagonal."""

    n: int
    edges: dict[tuple[int, int], float] = field(default_factory=dict)

    def weight_matrix(self):
        if self.n <= DENSE_LIMIT:
            W = np.zeros((self.n, self.n))
            for (i, j), w in self.edges.items():
                W[i, j] = w
                W[j, i] = w
            return W
        rows, cols, vals = [], [], []
        for (i, j), w in self.edges.items():
            rows += [i, j]
            cols += [j, i]
            vals += [w, w]
        return scipy.sparse.csr_matrix((vals, (rows, cols)), shape=(self.n, self.n))


@dataclass
class Hypergraph:
    """List of weighted hyperedges over n vertices."""

    n: int
    hyperedges: list[tuple[tuple[int, ...], float]]
    query_view: str = ""
    neighbor_view: str = ""


@dataclass
class PropagationOperator:
    """Symmetric normalized operator with spectral radius <= 1."""

    n: int
    S: object  # dense ndarray or scipy sparse matrix
    kind: str  # "graph" | "hypergraph"

    def dense(self) -> np.ndarray:
        if scipy.sparse.issparse(self.S):
            return self.S.toarray()
        return np.asarray(self.S)


def _pairwise_distances(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    aa = np.sum(A * A, axis=1)[:, None]
    bb = np.sum(B * B, axis=1)[None, :]
    sq = aa + bb - 2.0 * (A @ B.T)
    np.maximum(sq, 0.0, out=sq)
    return np.sqrt(sq)


def _knn_indices(dist_row: np.ndarray, k: int, exclude: int | None) -> np.ndarray:
    d = dist_row.copy()
    if exclude is not None:
        d[exclude] = np.inf
    order = np.argsort(d, kind="stable")  # stable sort = lower-index tie-break
    return order[:k]


def _heat_weight(d: float, sigma: float) -> float:
    if d == 0.0:
        return 1.0
    if sigma <= 0.0:
        return 0.0
    return float(np.exp(-(d * d) / (2.0 * sigma * sigma)))


def _resolve_sigma(sigma, included_distances: list[float]) -> float:
    if sigma == "auto" or sigma is None:
        if not included_distances:
            return 1.0
        return float(np.median(included_distances))
    s = float(sigma)
    if s <= 0:
        raise InvalidParameter(f"sigma must be > 0, got {s}")
    return s


def knn_graph(X, k: int, sigma="auto") -> AffinityGraph:
    """Mutual-or kNN graph under Euclidean distance with heat-kernel weights.

    Edge (i, j) exists iff j is among i's k nearest neighbors or vice versa.
    With sigma="auto" the bandwidth is the median included edge distance.
    """
    Xa = as_array(X)
    n = Xa.shape[0]
    if not 1 <= k < n:
        raise InvalidParameter(f"k={k} outside [1, {n - 1}]")
    D = _pairwise_distances(Xa, Xa)
    pairs = set()
    for i in range(n):
        for j in _knn_indices(D[i], k, exclude=i):
            pairs.add((min(i, int(j)), max(i, int(j))))
    ordered = sorted(pairs)
    s = _resolve_sigma(sigma, [float(D[i, j]) for i, j in ordered])
    edges = {(i, j): _heat_weight(float(D[i, j]), s) for i, j in ordered}
    return AffinityGraph(n=n, edges=edges)


def hypergraph_heterogeneous(X_query, X_neighbor, k: int, sigma="auto") -> Hypergraph:
    """One hyperedge per vertex: {i} plus the kNN of query point i among the
    neighbor view's points. Weights are the mean pairwise heat-kernel
    similarity inside the edge, measured in the neighbor view."""
    Q = as_array(X_query)
    M = as_array(X_neighbor)
    if Q.shape[0] != M.shape[0]:
        raise ShapeError(
            f"query has {Q.shape[0]} rows, neighbor view has {M.shape[0]}"
        )
    if Q.shape[1] != M.shape[1]:
        raise ShapeError(
            "cross-view neighborhoods need both views in the same embedded "
            f"space, got dims {Q.shape[1]} and {M.shape[1]}"
        )
    n = Q.shape[0]
    if not 1 <= k < n:
        raise InvalidParameter(f"k={k} outside [1, {n - 1}]")

    D_cross = _pairwise_distances(Q, M)
    D_nbr = _pairwise_distances(M, M)
    vertex_sets = []
    for i in range(n):
        members = [i] + [int(j) for j in _knn_indices(D_cross[i], k, exclude=i)]
        vertex_sets.append(tuple(sorted(set(members))))

    intra = []
    for vs in vertex_sets:
        for a_idx in range(len(vs)):
            for b_idx in range(a_idx + 1, len(vs)):
                intra.append(float(D_nbr[vs[a_idx], vs[b_idx]]))
    s = _resolve_sigma(sigma, intra)

    hyperedges = []
    for vs in vertex_sets:
        sims = [
            _heat_weight(float(D_nbr[vs[a], vs[b]]), s)
            for a in range(len(vs))
            for b in range(a + 1, len(vs))
        ]
        weight = float(np.mean(sims)) if sims else 1.0
        hyperedges.append((vs, weight))
    return Hypergraph(n=n, hyperedges=hyperedges)


def hypergraph_homogeneous(X, k: int, sigma="auto") -> Hypergraph:
    """Hyperedges {i} + kNN(i) computed within a single view."""
    return hypergraph_heterogeneous(X, X, k, sigma)


def _exact_symmetrize(S):
    # IEEE addition commutes, so (S + S.T) / 2 is exactly symmetric
    return (S + S.T) / 2.0


def propagation_operator(g) -> PropagationOperator:
    """Normalized operator for a graph or hypergraph.

    Graphs: S = D^{-1/2} W D^{-1/2}. Hypergraphs: the standard normalized
    incidence operator Dv^{-1/2} H We De^{-1} H' Dv^{-1/2}. Rows and columns
    of zero-degree vertices are zeroed with a warning.
    """
    if isinstance(g, AffinityGraph):
        W = g.weight_matrix()
        n = g.n
        sparse = scipy.sparse.issparse(W)
        deg = np.asarray(W.sum(axis=1)).reshape(-1)
        isolated = deg == 0.0
        if np.any(isolated):
            _warnings.warn(
                f"{int(isolated.sum())} isolated vertex rows zeroed in operator"
            )
        with np.errstate(divide="ignore"):
            dinv = np.where(isolated, 0.0, 1.0 / np.sqrt(np.where(isolated, 1.0, deg)))
        if sparse:
            Dinv = scipy.sparse.diags(dinv)
            S = Dinv @ W @ Dinv
        else:
            S = dinv[:, None] * W * dinv[None, :]
        return PropagationOperator(n=n, S=_exact_symmetrize(S), kind="graph")

    if isinstance(g, Hypergraph):
        n = g.n
        if not g.hyperedges:
            raise InvalidParameter("hypergraph has no hyperedges")
        n_edges = len(g.hyperedges)
        we = np.array([w for _, w in g.hyperedges])
        de = np.array([float(len(vs)) for vs, _ in g.hyperedges])
        if np.any(de == 0):
            raise InvalidParameter("empty hyperedge")
        sparse = n > DENSE_LIMIT
        if sparse:
            rows, cols = [], []
            for e, (vs, _) in enumerate(g.hyperedges):
                rows.extend(vs)
                cols.extend([e] * len(vs))
            H = scipy.sparse.csr_matrix(
                (np.ones(len(rows)), (rows, cols)), shape=(n, n_edges)
            )
            dv = np.asarray(H @ we).reshape(-1)
        else:
            H = np.zeros((n, n_edges))
            for e, (vs, _) in enumerate(g.hyperedges):
                H[list(vs), e] = 1.0
            dv = H @ we
        isolated = dv == 0.0
        if np.any(isolated):
            _warnings.warn(
                f"{int(isolated.sum())} zero-degree vertex rows zeroed in operator"
            )
        dvinv = np.where(isolated, 0.0, 1.0 / np.sqrt(np.where(isolated, 1.0, dv)))
        if sparse:
            Dv = scipy.sparse.diags(dvinv)
            mid = scipy.sparse.diags(we / de)
            S = Dv @ H @ mid @ H.T @ Dv
        else:
            S = (dvinv[:, None] * H) @ np.diag(we / de) @ (H.T * dvinv[None, :])
        return PropagationOperator(n=n, S=_exact_symmetrize(S), kind="hypergraph")

    raise InvalidParameter(f"unsupported graph type {type(g).__name__}")


def write_hypergraph(g: Hypergraph, path) -> None:
    """One line per hyperedge: ``weight: v1 v2 ...``."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for vs, w in g.hyperedges:
            fh.write(f"{w!r}: " + " ".join(str(v) for v in vs))
            fh.write("\n")


def load_hypergraph(path, n: int) -> Hypergraph:
    hyperedges = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            head, _, tail = stripped.partition(":")
            vs = tuple(int(t) for t in tail.split())
            hyperedges.append((vs, float(head)))
    return Hypergraph(n=n, hyperedges=hyperedges)
