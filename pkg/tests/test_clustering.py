import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import sparse
from scipy.cluster import hierarchy
from scipy.sparse.csgraph import minimum_spanning_tree
from scipy.spatial.distance import cdist, squareform

from topicforge.clustering import (
    ClusterResult,
    LAMBDA_CAP,
    compute_stability,
    condense_tree,
    core_distances,
    hdbscan_fit,
    kmeans_fit,
    mutual_reachability_mst,
    select_clusters_eom,
    single_linkage,
    soft_memberships,
)
from topicforge.errors import ValidationError


def two_blobs(n_per=20, sep=10.0, seed=0, noise=0.1):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(n_per, 2)) * noise
    b = rng.normal(size=(n_per, 2)) * noise + sep
    return np.vstack([a, b])


def adjusted_rand(labels_a, labels_b):
    """Adjusted Rand index from the pair-counting contingency table."""
    a = np.asarray(labels_a)
    b = np.asarray(labels_b)
    ua, ia = np.unique(a, return_inverse=True)
    ub, ib = np.unique(b, return_inverse=True)
    table = np.zeros((ua.size, ub.size), dtype=np.int64)
    np.add.at(table, (ia, ib), 1)
    comb = lambda x: x * (x - 1) // 2
    sum_cells = comb(table).sum()
    sum_rows = comb(table.sum(axis=1)).sum()
    sum_cols = comb(table.sum(axis=0)).sum()
    total = comb(a.size)
    expected = sum_rows * sum_cols / total
    max_index = (sum_rows + sum_cols) / 2
    if max_index == expected:
        return 1.0
    return (sum_cells - expected) / (max_index - expected)


def mutual_reachability(data, min_samples):
    d = cdist(data, data)
    core = np.sort(d, axis=1)[:, min_samples]
    mr = np.maximum(d, np.maximum(core[:, None], core[None, :]))
    np.fill_diagonal(mr, 0.0)
    return mr


def test_core_distances_match_oracle():
    rng = np.random.default_rng(0)
    data = rng.normal(size=(80, 3))
    for min_samples in (1, 3, 7):
        ours = core_distances(data, min_samples)
        oracle = np.sort(cdist(data, data), axis=1)[:, min_samples]
        assert np.allclose(ours, oracle, atol=1e-12)


def test_mst_total_weight_matches_kruskal_oracle():
    for seed in range(10):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(10, 120))
        data = rng.normal(size=(n, 3))
        min_samples = int(rng.integers(1, min(6, n - 1)))
        core = core_distances(data, min_samples)
        mst = mutual_reachability_mst(data, core)
        assert mst.shape == (n - 1, 3)
        mr = mutual_reachability(data, min_samples)
        oracle = minimum_spanning_tree(sparse.csr_matrix(mr)).sum()
        assert abs(mst[:, 2].sum() - oracle) < 1e-9


def test_single_linkage_heights_match_scipy():
    rng = np.random.default_rng(2)
    data = rng.normal(size=(60, 3))
    core = core_distances(data, 4)
    link = single_linkage(mutual_reachability_mst(data, core))
    oracle = hierarchy.linkage(squareform(mutual_reachability(data, 4), checks=False), method="single")
    assert link.shape == (59, 4)
    assert np.allclose(np.sort(link[:, 2]), np.sort(oracle[:, 2]), atol=1e-12)
    assert link[-1, 3] == 60
    # merge heights never decrease
    assert np.all(np.diff(link[:, 2]) >= -1e-15)


def test_condensed_tree_structure():
    data = two_blobs()
    core = core_distances(data, 3)
    tree = condense_tree(single_linkage(mutual_reachability_mst(data, core)), 5)
    n = data.shape[0]
    assert tree.root_label == n
    # exactly one row per point, each with size 1
    points = tree.point_rows()
    assert sorted(tree.child[points].tolist()) == list(range(n))
    assert np.all(tree.size[points] == 1)
    assert np.all(tree.lam >= 0)
    assert np.all(tree.lam <= LAMBDA_CAP)
    clusters = tree.cluster_rows()
    assert np.all(tree.size[clusters] >= 5)


def test_stability_and_selection_disjoint():
    data = two_blobs()
    core = core_distances(data, 3)
    tree = condense_tree(single_linkage(mutual_reachability_mst(data, core)), 5)
    stability = compute_stability(tree)
    assert all(v >= 0 for v in stability.values())
    selected = select_clusters_eom(tree, stability)
    assert selected
    # no selected cluster is an ancestor of another
    children_of = {}
    for parent, child in zip(tree.parent[tree.cluster_rows()], tree.child[tree.cluster_rows()]):
        children_of.setdefault(int(parent), []).append(int(child))
    for node in selected:
        stack = list(children_of.get(node, []))
        while stack:
            below = stack.pop()
            assert below not in selected
            stack.extend(children_of.get(below, []))


def test_hdbscan_two_blobs_perfect():
    data = two_blobs()
    truth = np.array([0] * 20 + [1] * 20)
    res = hdbscan_fit(data, min_cluster_size=5, min_samples=3)
    assert res.n_clusters == 2
    assert adjusted_rand(res.labels, truth) == 1.0
    assert res.method == "hdbscan"
    assert np.all(res.probabilities >= 0) and np.all(res.probabilities <= 1)
    assert np.all(res.probabilities[res.labels >= 0] > 0)


def test_hdbscan_far_outlier_is_noise():
    data = np.vstack([two_blobs(), [[100.0, 100.0]]])
    res = hdbscan_fit(data, min_cluster_size=5, min_samples=3)
    assert res.labels[-1] == -1
    assert res.probabilities[-1] == 0.0
    assert res.n_clusters == 2
    assert res.cluster_sizes()[-1] == 1


def test_hdbscan_identical_points_single_cluster():
    data = np.ones((15, 3))
    res = hdbscan_fit(data, min_cluster_size=4, min_samples=2)
    assert res.n_clusters == 1
    assert np.all(res.labels == 0)
    assert np.all(res.probabilities == 1.0)


def test_hdbscan_single_root_fallback():
    # one dense blob plus one remote point: no split survives the minimum
    # size, so members come from the root with the far point left as noise
    rng = np.random.default_rng(3)
    data = np.vstack([rng.normal(size=(25, 2)) * 0.1, [[50.0, 50.0]]])
    res = hdbscan_fit(data, min_cluster_size=20, min_samples=3)
    assert res.n_clusters == 1
    assert res.labels[-1] == -1
    assert np.all(res.labels[:25] == 0)


def test_hdbscan_label_order_is_stable():
    data = two_blobs(seed=5)
    a = hdbscan_fit(data, min_cluster_size=5)
    b = hdbscan_fit(data, min_cluster_size=5)
    assert np.array_equal(a.labels, b.labels)
    assert np.array_equal(a.probabilities, b.probabilities)


def test_hdbscan_validation():
    data = np.zeros((5, 2))
    with pytest.raises(ValidationError):
        hdbscan_fit(data, min_cluster_size=1)
    with pytest.raises(ValidationError):
        hdbscan_fit(data, min_cluster_size=3, min_samples=5)
    with pytest.raises(ValidationError):
        hdbscan_fit(np.zeros((3, 2)), min_cluster_size=4)  # min_samples defaults to 4 >= n


def test_kmeans_recovers_blobs():
    data = two_blobs(seed=6)
    truth = np.array([0] * 20 + [1] * 20)
    res = kmeans_fit(data, 2, seed=0)
    assert res.n_clusters == 2
    assert adjusted_rand(res.labels, truth) == 1.0
    assert np.all(res.probabilities == 1.0)
    assert res.method == "kmeans"
    assert set(np.unique(res.labels)) == {0, 1}


def test_kmeans_deterministic_per_seed():
    rng = np.random.default_rng(7)
    data = rng.normal(size=(100, 4))
    a = kmeans_fit(data, 5, seed=3)
    b = kmeans_fit(data, 5, seed=3)
    assert np.array_equal(a.labels, b.labels)


def test_kmeans_every_cluster_nonempty():
    # duplicated points force the empty-cluster reseed path
    data = np.vstack([np.zeros((30, 2)), np.ones((3, 2)), [[5.0, 5.0]]])
    res = kmeans_fit(data, 3, seed=0)
    assert set(np.unique(res.labels)) == {0, 1, 2}


def test_kmeans_validation():
    data = np.zeros((4, 2))
    with pytest.raises(ValidationError):
        kmeans_fit(data, 0)
    with pytest.raises(ValidationError):
        kmeans_fit(data, 5)


def test_soft_memberships_rows():
    data = np.vstack([two_blobs(seed=8), [[100.0, 100.0]]])
    res = hdbscan_fit(data, min_cluster_size=5, min_samples=3)
    soft = soft_memberships(data, res)
    assert soft.shape == (41, res.n_clusters)
    assert np.allclose(soft.sum(axis=1), 1.0, atol=1e-9)
    assert np.all(soft >= 0)
    assigned = res.labels >= 0
    assert np.array_equal(np.argmax(soft[assigned], axis=1), res.labels[assigned])


def test_soft_memberships_rejects_no_clusters():
    data = np.zeros((4, 2))
    res = ClusterResult(
        labels=np.full(4, -1, dtype=np.int64),
        probabilities=np.zeros(4),
        n_clusters=0,
        method="hdbscan",
        condensed=None,
    )
    with pytest.raises(ValidationError):
        soft_memberships(data, res)


@given(
    seed=st.integers(min_value=0, max_value=10_000),
    n=st.integers(min_value=8, max_value=60),
    min_samples=st.integers(min_value=1, max_value=5),
)
@settings(max_examples=25, deadline=None)
def test_mst_weight_property(seed, n, min_samples):
    min_samples = min(min_samples, n - 2)
    rng = np.random.default_rng(seed)
    data = rng.normal(size=(n, 3))
    core = core_distances(data, min_samples)
    mst = mutual_reachability_mst(data, core)
    mr = mutual_reachability(data, min_samples)
    oracle = minimum_spanning_tree(sparse.csr_matrix(mr)).sum()
    assert abs(mst[:, 2].sum() - oracle) < 1e-9


@given(
    seed=st.integers(min_value=0, max_value=10_000),
    n_per=st.integers(min_value=8, max_value=25),
)
@settings(max_examples=20, deadline=None)
def test_hdbscan_labels_contiguous_property(seed, n_per):
    data = two_blobs(n_per=n_per, seed=seed)
    res = hdbscan_fit(data, min_cluster_size=4, min_samples=2)
    labels = np.unique(res.labels)
    non_noise = labels[labels >= 0]
    assert np.array_equal(non_noise, np.arange(res.n_clusters))
    assert res.probabilities.shape == (data.shape[0],)
    assert np.all((res.probabilities >= 0) & (res.probabilities <= 1))
