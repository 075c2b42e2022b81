"""Clustering of reduced document embeddings.

The primary clusterer is a self-contained hierarchical density clusterer:
core distances define a mutual-reachability metric, Prim's algorithm grows
a minimum spanning tree in O(N) memory by materializing one distance row
at a time, union-find turns the sorted edges into a single-linkage
dendrogram, and the dendrogram is condensed by minimum cluster size before
excess-of-mass cluster selection. A seeded k-means is provided as the
deterministic centroid-based alternative.

Density lambdas are 1/distance, capped at 1e12 so coincident points stay
finite.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from scipy.spatial.distance import cdist

from .errors import ValidationError

LAMBDA_CAP = 1e12
_CORE_BLOCK = 512


@dataclass(frozen=True)
class CondensedTree:
    """Flat condensed hierarchy: one row per child falling out of a parent.

    Children below ``root_label`` are point indices; children at or above
    it are cluster labels. ``lam`` is the density level (1/distance) at
    which the child separates from the parent.
    """

    parent: np.ndarray
    child: np.ndarray
    lam: np.ndarray
    size: np.ndarray
    root_label: int

    def point_rows(self) -> np.ndarray:
        return self.child < self.root_label

    def cluster_rows(self) -> np.ndarray:
        return self.child >= self.root_label


@dataclass(frozen=True)
class ClusterResult:
    labels: np.ndarray  # int64, -1 marks outliers
    probabilities: np.ndarray  # float64 in [0, 1], 0 for outliers
    n_clusters: int
    method: Literal["hdbscan", "kmeans"]
    condensed: CondensedTree | None = field(default=None, repr=False)

    def cluster_sizes(self) -> dict[int, int]:
        labels, counts = np.unique(self.labels, return_counts=True)
        return {int(l): int(c) for l, c in zip(labels, counts)}


def _check_data(data: np.ndarray) -> np.ndarray:
    X = np.asarray(data, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValidationError("expected a non-empty 2-D array of points")
    if not np.isfinite(X).all():
        raise ValidationError("points contain non-finite values")
    return X


def core_distances(data: np.ndarray, min_samples: int) -> np.ndarray:
    """Distance from each point to its min_samples-th nearest other point."""
    X = _check_data(data)
    n = X.shape[0]
    if min_samples < 1:
        raise ValidationError("min_samples must be >= 1")
    if min_samples >= n:
        raise ValidationError(f"min_samples={min_samples} requires more than {min_samples} points, got {n}")
    core = np.empty(n)
    for start in range(0, n, _CORE_BLOCK):
        stop = min(start + _CORE_BLOCK, n)
        dist = cdist(X[start:stop], X)
        # the self distance occupies rank 0, so rank min_samples is the
        # min_samples-th neighbor excluding self
        core[start:stop] = np.partition(dist, min_samples, axis=1)[:, min_samples]
    return core


def mutual_reachability_mst(data: np.ndarray, core: np.ndarray) -> np.ndarray:
    """Minimum spanning tree of the mutual-reachability graph via Prim.

    mreach(a, b) = max(core_a, core_b, d(a, b)). Rows of the pairwise
    distance matrix are computed on demand, so memory stays O(N). Returns
    an (N-1, 3) array of [source, target, weight] in discovery order.
    """
    X = _check_data(data)
    n = X.shape[0]
    if core.shape != (n,):
        raise ValidationError("core distances do not match the data")
    in_tree = np.zeros(n, dtype=bool)
    best_weight = np.full(n, np.inf)
    best_source = np.full(n, -1, dtype=np.int64)
    edges = np.empty((n - 1, 3))
    current = 0
    in_tree[0] = True
    for step in range(n - 1):
        row = np.sqrt(((X - X[current]) ** 2).sum(axis=1))
        mreach = np.maximum(np.maximum(core, core[current]), row)
        better = ~in_tree & (mreach < best_weight)
        best_weight[better] = mreach[better]
        best_source[better] = current
        frontier = np.where(in_tree, np.inf, best_weight)
        nxt = int(np.argmin(frontier))
        edges[step] = (best_source[nxt], nxt, best_weight[nxt])
        in_tree[nxt] = True
        current = nxt
    return edges


def single_linkage(mst_edges: np.ndarray) -> np.ndarray:
    """Union-find agglomeration of MST edges into a dendrogram.

    Output rows are (left_node, right_node, distance, size) with new
    internal nodes numbered N..2N-2, matching the usual linkage layout.
    """
    n = mst_edges.shape[0] + 1
    order = np.argsort(mst_edges[:, 2], kind="stable")
    parent = np.arange(2 * n - 1, dtype=np.int64)
    size = np.ones(2 * n - 1, dtype=np.int64)

    def find(x: int) -> int:
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    linkage = np.empty((n - 1, 4))
    for new_node, edge_idx in enumerate(order, start=n):
        a, b, w = mst_edges[edge_idx]
        ra, rb = find(int(a)), find(int(b))
        linkage[new_node - n] = (ra, rb, w, size[ra] + size[rb])
        parent[ra] = parent[rb] = new_node
        size[new_node] = size[ra] + size[rb]
    return linkage


def condense_tree(linkage: np.ndarray, min_cluster_size: int) -> CondensedTree:
    """Prune the dendrogram: splits smaller than min_cluster_size fall out
    as points, larger splits open new clusters. The root keeps label N."""
    n = linkage.shape[0] + 1
    root = 2 * n - 2
    relabel = np.full(2 * n - 1, -1, dtype=np.int64)
    relabel[root] = n
    next_label = n + 1
    rows_parent: list[int] = []
    rows_child: list[int] = []
    rows_lam: list[float] = []
    rows_size: list[int] = []

    def node_size(node: int) -> int:
        return 1 if node < n else int(linkage[node - n, 3])

    def leaves_under(node: int) -> list[int]:
        out: list[int] = []
        stack = [node]
        while stack:
            cur = stack.pop()
            if cur < n:
                out.append(cur)
            else:
                stack.append(int(linkage[cur - n, 0]))
                stack.append(int(linkage[cur - n, 1]))
        return out

    def emit(parent_label: int, child: int, lam: float, size: int) -> None:
        rows_parent.append(parent_label)
        rows_child.append(child)
        rows_lam.append(lam)
        rows_size.append(size)

    # BFS from the root so parents are labelled before their children
    queue = [root]
    visited_head = 0
    ignored = np.zeros(2 * n - 1, dtype=bool)
    while visited_head < len(queue):
        node = queue[visited_head]
        visited_head += 1
        if node < n or ignored[node]:
            continue
        left, right = int(linkage[node - n, 0]), int(linkage[node - n, 1])
        dist = float(linkage[node - n, 2])
        lam = LAMBDA_CAP if dist <= 0.0 else min(1.0 / dist, LAMBDA_CAP)
        left_size, right_size = node_size(left), node_size(right)
        label = relabel[node]

        if left_size >= min_cluster_size and right_size >= min_cluster_size:
            for child, csize in ((left, left_size), (right, right_size)):
                relabel[child] = next_label
                next_label += 1
                emit(label, int(relabel[child]), lam, csize)
                queue.append(child)
        elif left_size < min_cluster_size and right_size < min_cluster_size:
            for child in (left, right):
                for point in leaves_under(child):
                    emit(label, point, lam, 1)
            _ignore_subtrees(linkage, n, (left, right), ignored)
        else:
            keep, drop = (left, right) if left_size >= min_cluster_size else (right, left)
            relabel[keep] = label  # the big side continues as the same cluster
            queue.append(keep)
            for point in leaves_under(drop):
                emit(label, point, lam, 1)
            _ignore_subtrees(linkage, n, (drop,), ignored)

    return CondensedTree(
        parent=np.asarray(rows_parent, dtype=np.int64),
        child=np.asarray(rows_child, dtype=np.int64),
        lam=np.asarray(rows_lam, dtype=np.float64),
        size=np.asarray(rows_size, dtype=np.int64),
        root_label=n,
    )


def _ignore_subtrees(linkage: np.ndarray, n: int, nodes: tuple[int, ...], ignored: np.ndarray) -> None:
    stack = [node for node in nodes if node >= n]
    while stack:
        cur = stack.pop()
        ignored[cur] = True
        left, right = int(linkage[cur - n, 0]), int(linkage[cur - n, 1])
        stack.extend(child for child in (left, right) if child >= n)


def compute_stability(tree: CondensedTree) -> dict[int, float]:
    """Excess of mass per cluster: sum of (lambda_child - lambda_birth) * size."""
    births: dict[int, float] = {tree.root_label: 0.0}
    for child, lam in zip(tree.child, tree.lam):
        if child >= tree.root_label:
            births[int(child)] = float(lam)
    stability: dict[int, float] = defaultdict(float)
    for parent, lam, size in zip(tree.parent, tree.lam, tree.size):
        p = int(parent)
        stability[p] += (float(lam) - births[p]) * int(size)
    for label in births:
        stability.setdefault(label, 0.0)
    return dict(stability)


def select_clusters_eom(tree: CondensedTree, stability: dict[int, float]) -> list[int]:
    """Excess-of-mass selection, root excluded; ties go to the parent."""
    children_of: dict[int, list[int]] = defaultdict(list)
    cluster_rows = tree.cluster_rows()
    for parent, child in zip(tree.parent[cluster_rows], tree.child[cluster_rows]):
        children_of[int(parent)].append(int(child))

    candidates = sorted((c for c in stability if c != tree.root_label), reverse=True)
    running = dict(stability)
    selected = {c: True for c in candidates}
    for node in candidates:  # children carry higher labels, so they come first
        subtree = sum(running[child] for child in children_of.get(node, ()))
        if children_of.get(node) and subtree > running[node]:
            selected[node] = False
            running[node] = subtree
        else:
            stack = list(children_of.get(node, ()))
            while stack:
                sub = stack.pop()
                selected[sub] = False
                stack.extend(children_of.get(sub, ()))
    return sorted(c for c in candidates if selected[c])


def _fallback_root_labels(
    tree: CondensedTree, n_points: int, min_cluster_size: int
) -> tuple[np.ndarray, np.ndarray, int]:
    """Labeling when the condensed tree never split into selectable clusters.

    Points that persist past the root's lowest density level form one
    cluster; points falling out at that first level are outliers. If every
    point leaves at the same level there is nothing to separate, so all of
    them form the cluster.
    """
    labels = np.full(n_points, -1, dtype=np.int64)
    probabilities = np.zeros(n_points)
    points = tree.point_rows()
    pts = tree.child[points]
    lams = tree.lam[points]
    mask = lams > lams.min()
    if not mask.any():
        mask = np.ones(lams.shape, dtype=bool)
    if mask.sum() < min_cluster_size:
        return labels, probabilities, 0
    labels[pts[mask]] = 0
    lam_max = lams[mask].max()
    if lam_max <= 0:
        probabilities[pts[mask]] = 1.0
    else:
        probabilities[pts[mask]] = np.minimum(lams[mask], lam_max) / lam_max
    return labels, probabilities, 1


def _label_points(
    tree: CondensedTree, selected: list[int], n_points: int, min_cluster_size: int
) -> tuple[np.ndarray, np.ndarray, int]:
    if not selected:
        return _fallback_root_labels(tree, n_points, min_cluster_size)

    selected_set = set(selected)
    label_of = {c: i for i, c in enumerate(selected)}
    parent_of: dict[int, int] = {}
    cluster_rows = tree.cluster_rows()
    for parent, child in zip(tree.parent[cluster_rows], tree.child[cluster_rows]):
        parent_of[int(child)] = int(parent)

    labels = np.full(n_points, -1, dtype=np.int64)
    point_lambda = np.zeros(n_points)
    points = tree.point_rows()
    for parent, child, lam in zip(tree.parent[points], tree.child[points], tree.lam[points]):
        cluster = int(parent)
        while cluster not in selected_set and cluster in parent_of:
            cluster = parent_of[cluster]
        if cluster in selected_set:
            labels[int(child)] = label_of[cluster]
            point_lambda[int(child)] = float(lam)

    probabilities = np.zeros(n_points)
    for idx in range(len(selected)):
        members = labels == idx
        lam_max = point_lambda[members].max()
        if lam_max <= 0:
            probabilities[members] = 1.0
        else:
            probabilities[members] = np.minimum(point_lambda[members], lam_max) / lam_max
    return labels, probabilities, len(selected)


def hdbscan_fit(
    data: np.ndarray, min_cluster_size: int = 10, min_samples: int | None = None
) -> ClusterResult:
    """Hierarchical density clustering with excess-of-mass extraction.

    Labels are contiguous from 0 in selection order; -1 marks outliers.
    Probabilities scale each point's fall-out density by its cluster's
    maximum, so the densest point of every cluster scores 1.0 and outliers
    score 0.0.
    """
    X = _check_data(data)
    if min_cluster_size < 2:
        raise ValidationError("min_cluster_size must be >= 2")
    if min_samples is None:
        min_samples = min_cluster_size
    n = X.shape[0]
    if n <= min_samples:
        raise ValidationError(f"need more than min_samples={min_samples} points, got {n}")

    core = core_distances(X, min_samples)
    mst = mutual_reachability_mst(X, core)
    linkage = single_linkage(mst)
    tree = condense_tree(linkage, min_cluster_size)
    stability = compute_stability(tree)
    selected = select_clusters_eom(tree, stability)
    labels, probabilities, k = _label_points(tree, selected, n, min_cluster_size)
    return ClusterResult(
        labels=labels, probabilities=probabilities, n_clusters=k, method="hdbscan", condensed=tree
    )


def kmeans_fit(
    data: np.ndarray,
    n_clusters: int,
    seed: int = 0,
    max_iter: int = 300,
    tol: float = 1e-6,
) -> ClusterResult:
    """Seeded k-means with greedy ++ initialization and Lloyd refinement.

    Every point is assigned, so there are no outliers and all membership
    probabilities are 1. Empty clusters are reseeded to the point farthest
    from its current centroid.
    """
    X = _check_data(data)
    n = X.shape[0]
    if n_clusters < 1:
        raise ValidationError("n_clusters must be >= 1")
    if n_clusters > n:
        raise ValidationError(f"n_clusters={n_clusters} exceeds point count {n}")

    rng = np.random.default_rng(seed)
    centers = np.empty((n_clusters, X.shape[1]))
    centers[0] = X[rng.integers(n)]
    closest_sq = ((X - centers[0]) ** 2).sum(axis=1)
    for c in range(1, n_clusters):
        total = closest_sq.sum()
        if total > 0:
            centers[c] = X[rng.choice(n, p=closest_sq / total)]
        else:
            centers[c] = X[rng.integers(n)]
        closest_sq = np.minimum(closest_sq, ((X - centers[c]) ** 2).sum(axis=1))

    labels = np.zeros(n, dtype=np.int64)
    for _ in range(max_iter):
        dist = cdist(X, centers)
        labels = dist.argmin(axis=1).astype(np.int64)
        new_centers = centers.copy()
        for c in range(n_clusters):
            members = labels == c
            if members.any():
                new_centers[c] = X[members].mean(axis=0)
            else:
                assigned = dist[np.arange(n), labels]
                new_centers[c] = X[int(np.argmax(assigned))]
        shift = np.linalg.norm(new_centers - centers, axis=1).max()
        centers = new_centers
        if shift < tol:
            break
    dist = cdist(X, centers)
    labels = dist.argmin(axis=1).astype(np.int64)
    return ClusterResult(
        labels=labels,
        probabilities=np.ones(n),
        n_clusters=n_clusters,
        method="kmeans",
    )


def soft_memberships(data: np.ndarray, result: ClusterResult) -> np.ndarray:
    """Distribute every document over clusters, outliers included.

    Each cluster is summarized by the centroid of its full-confidence
    points. Inverse-distance weights to those centroids give a base
    distribution; assigned documents blend it half-and-half with their hard
    label, which keeps the argmax equal to the hard assignment. Rows sum
    to 1.
    """
    X = _check_data(data)
    k = result.n_clusters
    if k == 0:
        raise ValidationError("no clusters to compute memberships for")
    if result.labels.shape[0] != X.shape[0]:
        raise ValidationError("labels do not match the data")

    centroids = np.empty((k, X.shape[1]))
    for c in range(k):
        members = result.labels == c
        exemplars = members & (result.probabilities >= 1.0)
        pick = exemplars if exemplars.any() else members
        if not pick.any():
            raise ValidationError(f"cluster {c} has no members")
        centroids[c] = X[pick].mean(axis=0)

    inv = 1.0 / (cdist(X, centroids) + 1e-9)
    base = inv / inv.sum(axis=1, keepdims=True)
    out = base.copy()
    assigned = result.labels >= 0
    onehot = np.zeros((X.shape[0], k))
    onehot[assigned, result.labels[assigned]] = 1.0
    out[assigned] = 0.5 * onehot[assigned] + 0.5 * base[assigned]
    return out
