"""Dimensionality reduction ahead of clustering.

Two reducers share one output type: exact PCA as the deterministic
baseline, and a neighbor-embedding reducer (the pipeline default) built
from an exact cosine k-NN graph, per-point bandwidth calibration, fuzzy
union symmetrization, and a negative-sampling SGD layout. Both are
bit-reproducible for a fixed seed.

k-NN search is exact brute force with row blocking; at the corpus sizes
this package targets (tens of thousands of documents) that stays cheap and
avoids approximate-index dependencies.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy import sparse

from .embeddings import EmbeddingMatrix
from .errors import ValidationError

_KNN_BLOCK = 1024
_NEGATIVE_SAMPLE_RATE = 5
_SIGMA_TOL = 1e-5
_SIGMA_MAX_ITER = 64
_GRAD_CLIP = 4.0


@dataclass(frozen=True)
class ReducerParams:
    n_neighbors: int = 15
    min_dist: float = 0.1
    out_dim: int = 5
    epochs: int = 200
    seed: int = 0
    # curve constants for min_dist 0.1 / spread 1.0
    curve_a: float = 1.577
    curve_b: float = 0.895

    def __post_init__(self):
        if self.n_neighbors < 2:
            raise ValidationError("n_neighbors must be >= 2")
        if not 0.0 <= self.min_dist < 1.0:
            raise ValidationError("min_dist must be in [0, 1)")
        if self.out_dim < 2:
            raise ValidationError("out_dim must be >= 2")
        if self.epochs < 1:
            raise ValidationError("epochs must be >= 1")


@dataclass(frozen=True)
class ReducedEmbedding:
    data: np.ndarray  # float64, shape (rows, out_dim)
    method: Literal["pca", "umap"]
    params: ReducerParams | None = None

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def out_dim(self) -> int:
        return self.data.shape[1]


def pca_reduce(matrix: EmbeddingMatrix, out_dim: int = 5) -> ReducedEmbedding:
    """Project rows onto the top principal components of the centered data.

    Components are ordered by descending eigenvalue. Signs are fixed by
    making each component's largest-magnitude loading positive, so repeated
    runs agree bit for bit. Zero-variance input projects to all zeros.
    """
    X = np.asarray(matrix.data, dtype=np.float64)
    n, dim = X.shape
    if out_dim > dim:
        raise ValidationError(f"out_dim {out_dim} exceeds embedding dim {dim}")
    if n < 2:
        raise ValidationError("PCA needs at least 2 rows")
    centered = X - X.mean(axis=0)
    _, s, vt = np.linalg.svd(centered, full_matrices=False)
    # sign convention: largest |loading| per component is positive
    anchors = np.argmax(np.abs(vt), axis=1)
    signs = np.sign(vt[np.arange(vt.shape[0]), anchors])
    signs[signs == 0] = 1.0
    vt = vt * signs[:, None]
    projected = centered @ vt[:out_dim].T
    return ReducedEmbedding(data=projected, method="pca")


def cosine_knn(data: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Exact k nearest neighbors by cosine distance, excluding self.

    Returns (indices, distances), each (n, k), neighbors sorted by
    ascending distance with index as the tie-breaker. Zero rows are treated
    as maximally distant from everything (distance 1).
    """
    X = np.asarray(data, dtype=np.float64)
    n = X.shape[0]
    if k >= n:
        raise ValidationError(f"need more points ({n}) than neighbors ({k})")
    norms = np.linalg.norm(X, axis=1)
    safe = np.where(norms == 0, 1.0, norms)
    unit = X / safe[:, None]

    idx_out = np.empty((n, k), dtype=np.int64)
    dist_out = np.empty((n, k), dtype=np.float64)
    for start in range(0, n, _KNN_BLOCK):
        stop = min(start + _KNN_BLOCK, n)
        dist = 1.0 - unit[start:stop] @ unit.T
        np.clip(dist, 0.0, 2.0, out=dist)
        rows = np.arange(start, stop)
        dist[rows - start, rows] = np.inf  # mask self
        part = np.argpartition(dist, k - 1, axis=1)[:, :k]
        part_d = np.take_along_axis(dist, part, axis=1)
        order = np.lexsort((part, part_d), axis=1)
        idx_out[start:stop] = np.take_along_axis(part, order, axis=1)
        dist_out[start:stop] = np.take_along_axis(part_d, order, axis=1)
    return idx_out, dist_out


def _calibrate_sigmas(knn_dists: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-point bandwidths via binary search.

    For each point the bandwidth sigma solves
    sum_j exp(-max(0, d_ij - rho_i) / sigma) = log2(k), with rho_i the
    nearest-neighbor distance. The search runs at most 64 iterations and
    keeps the best sigma seen when the target is unreachable.
    """
    n, k = knn_dists.shape
    target = np.log2(k)
    rho = knn_dists[:, 0].copy()
    sigmas = np.empty(n)
    adjusted = np.maximum(knn_dists - rho[:, None], 0.0)
    for i in range(n):
        lo, hi = 0.0, np.inf
        mid = 1.0
        best_sigma, best_err = mid, np.inf
        for _ in range(_SIGMA_MAX_ITER):
            val = np.exp(-adjusted[i] / mid).sum() if mid > 0 else float((adjusted[i] == 0).sum())
            err = abs(val - target)
            if err < best_err:
                best_err, best_sigma = err, mid
            if err < _SIGMA_TOL:
                break
            if val > target:
                hi = mid
                mid = (lo + hi) / 2.0
            else:
                lo = mid
                mid = mid * 2.0 if hi == np.inf else (lo + hi) / 2.0
        sigmas[i] = best_sigma
    return sigmas, rho


def membership_graph(knn_idx: np.ndarray, knn_dists: np.ndarray) -> sparse.csr_matrix:
    """Directed membership weights symmetrized by the fuzzy union a+b-ab."""
    n, k = knn_idx.shape
    sigmas, rho = _calibrate_sigmas(knn_dists)
    w = np.exp(-np.maximum(knn_dists - rho[:, None], 0.0) / sigmas[:, None])
    rows = np.repeat(np.arange(n), k)
    graph = sparse.coo_matrix((w.ravel(), (rows, knn_idx.ravel())), shape=(n, n)).tocsr()
    transpose = graph.T.tocsr()
    combined = graph + transpose - graph.multiply(transpose)
    combined.eliminate_zeros()
    return combined.tocsr()


def _dedupe_rows(X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Collapse byte-identical rows so exchangeable inputs share one layout."""
    contiguous = np.ascontiguousarray(X)
    view = contiguous.view([("", contiguous.dtype)] * contiguous.shape[1]).ravel()
    _, first_idx, inverse = np.unique(view, return_index=True, return_inverse=True)
    order = np.argsort(first_idx)  # keep first-appearance order for determinism
    rank = np.empty_like(order)
    rank[order] = np.arange(len(order))
    return first_idx[order], rank[inverse]


def _sgd_layout(
    graph: sparse.csr_matrix, params: ReducerParams, rng: np.random.Generator
) -> np.ndarray:
    """Negative-sampling SGD on the cross-entropy layout objective.

    Edges are sampled in proportion to their membership weight through the
    usual epochs-per-sample schedule; each sampled edge attracts both
    endpoints and repels the head from a handful of uniform negatives.
    Single-threaded with a fixed update order, hence bit-reproducible.
    """
    n = graph.shape[0]
    a, b = params.curve_a, params.curve_b
    coo = graph.tocoo()
    head = coo.row.astype(np.int64)
    tail = coo.col.astype(np.int64)
    weight = coo.data.astype(np.float64)
    keep = head != tail
    head, tail, weight = head[keep], tail[keep], weight[keep]

    emb = rng.uniform(-10.0, 10.0, size=(n, params.out_dim)).astype(np.float32)
    if weight.size == 0:
        return emb.astype(np.float64)

    epochs_per_sample = weight.max() / weight
    next_sample = epochs_per_sample.copy()
    epochs_per_negative = epochs_per_sample / _NEGATIVE_SAMPLE_RATE
    next_negative = epochs_per_negative.copy()

    for epoch in range(1, params.epochs + 1):
        alpha = np.float32(1.0 - (epoch - 1) / params.epochs)
        due = next_sample <= epoch
        if due.any():
            h, t = head[due], tail[due]
            delta = emb[h] - emb[t]
            d2 = np.einsum("ij,ij->i", delta, delta).astype(np.float64)
            coeff = np.zeros_like(d2)
            pos = d2 > 0.0
            pd2 = d2[pos]
            coeff[pos] = (-2.0 * a * b * pd2 ** (b - 1.0)) / (a * pd2**b + 1.0)
            grad = np.clip(coeff[:, None] * delta, -_GRAD_CLIP, _GRAD_CLIP).astype(np.float32)
            np.add.at(emb, h, alpha * grad)
            np.add.at(emb, t, -alpha * grad)
            next_sample[due] += epochs_per_sample[due]

            n_neg = ((epoch - next_negative[due]) / epochs_per_negative[due]).astype(np.int64)
            n_neg = np.maximum(n_neg, 0)
            if n_neg.sum() > 0:
                rep_h = np.repeat(h, n_neg)
                rep_t = rng.integers(0, n, size=rep_h.size)
                mask = rep_h != rep_t
                rep_h, rep_t = rep_h[mask], rep_t[mask]
                delta = emb[rep_h] - emb[rep_t]
                d2 = np.einsum("ij,ij->i", delta, delta).astype(np.float64)
                coeff = (2.0 * b) / ((0.001 + d2) * (a * d2**b + 1.0))
                grad = np.clip(coeff[:, None] * delta, -_GRAD_CLIP, _GRAD_CLIP).astype(np.float32)
                # coincident negatives get a fixed kick apart
                grad[d2 == 0.0] = _GRAD_CLIP
                np.add.at(emb, rep_h, alpha * grad)
            next_negative[due] += n_neg * epochs_per_negative[due]
    return emb.astype(np.float64)


def umap_reduce(matrix: EmbeddingMatrix, params: ReducerParams) -> ReducedEmbedding:
    """Neighbor-embedding reduction of document embeddings.

    Exact-duplicate rows are collapsed before graph construction and share
    their representative's final coordinates, so exchangeable inputs map to
    identical outputs. Requires more points than n_neighbors.
    """
    X = np.asarray(matrix.data, dtype=np.float64)
    n = X.shape[0]
    if n <= params.n_neighbors:
        raise ValidationError(
            f"need more than n_neighbors={params.n_neighbors} points, got {n}; "
            "lower n_neighbors"
        )
    unique_idx, inverse = _dedupe_rows(X)
    unique = X[unique_idx]
    rng = np.random.default_rng(params.seed)

    if unique.shape[0] == 1:
        layout = rng.uniform(-10.0, 10.0, size=(1, params.out_dim))
        return ReducedEmbedding(data=layout[inverse], method="umap", params=params)

    k = min(params.n_neighbors, unique.shape[0] - 1)
    knn_idx, knn_dists = cosine_knn(unique, k)
    graph = membership_graph(knn_idx, knn_dists)
    layout = _sgd_layout(graph, params, rng)
    if not np.isfinite(layout).all():
        raise ValidationError("layout diverged to non-finite coordinates")
    return ReducedEmbedding(data=layout[inverse], method="umap", params=params)
