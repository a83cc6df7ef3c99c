import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pkdnet.cluster import ClusterPoint, KMeansResult, build_cluster_space, kmeans, top_cluster
from pkdnet.dataset import Dataset
from pkdnet.errors import InconsistentInput, InvalidK, LengthMismatch, MissingColumn, TooFewPoints


def points(xy, prefix="p"):
    return [ClusterPoint(f"{prefix}{i}", float(a), float(b)) for i, (a, b) in enumerate(xy)]


def brute_two_means(x):
    """Minimum within-cluster sum of squares over every 2-partition."""
    n = len(x)
    best = np.inf
    for mask in range(1, 2 ** (n - 1)):
        lab = (mask >> np.arange(n)) & 1
        if lab.min() == lab.max():
            continue
        best = min(best, sum(((x[lab == c] - x[lab == c].mean(axis=0)) ** 2).sum() for c in (0, 1)))
    return best


def test_build_space_mean_and_column():
    data = Dataset(["a", "b"], ["g1", "g2"], [[1.0, 3.0], [0.0, 0.0]], [1, 0])
    pts = build_cluster_space(data, [0.9, 0.1])
    assert pts == [ClusterPoint("a", 2.0, 0.9), ClusterPoint("b", 0.0, 0.1)]
    pts = build_cluster_space(data, [0.9, 0.1], "g2")
    assert [p.expression for p in pts] == [3.0, 0.0]


def test_build_space_errors():
    data = Dataset(["a", "b"], ["g1"], [[1.0], [2.0]], [1, 0])
    with pytest.raises(LengthMismatch):
        build_cluster_space(data, [0.5])
    with pytest.raises(MissingColumn):
        build_cluster_space(data, [0.5, 0.5], "fold_change")


def test_exact_fit_when_k_equals_points():
    pts = points([(0, 0), (5, 5), (10, 0)])
    r = kmeans(pts, 3, seed=0)
    assert r.objective == 0.0
    assert sorted(map(tuple, r.centroids)) == [(0, 0), (5, 5), (10, 0)]
    assert sorted(r.assignments.tolist()) == [0, 1, 2]


def test_two_blobs():
    pts = points([(0, 0), (0, 1), (10, 10), (10, 11)])
    r = kmeans(pts, 2, seed=3)
    a = r.assignments
    assert a[0] == a[1] and a[2] == a[3] and a[0] != a[2]
    assert r.objective == pytest.approx(1.0)


def test_k_errors():
    with pytest.raises(InvalidK):
        kmeans(points([(0, 0), (1, 1)]), 3)
    with pytest.raises(InvalidK):
        kmeans(points([(0, 0), (0, 0), (0, 0)]), 2)   # one distinct point
    with pytest.raises(InvalidK):
        kmeans(points([(0, 0)]), 0)
    with pytest.raises(TooFewPoints):
        kmeans([], 1)


@pytest.mark.parametrize("inst", range(50))
def test_matches_brute_force(inst):
    rng = np.random.default_rng(inst)
    n = int(rng.integers(2, 9))
    x = rng.random((n, 2))
    r = kmeans(points(x), 2, seed=inst)
    assert r.objective == pytest.approx(brute_two_means(x), rel=1e-12, abs=1e-15)


def test_local_minimum_escaped():
    # Lloyd from any pair of data points settles at 0.2458; the optimum pairs {0,3} and {1,2}
    x = np.array([[0.10658981, 0.64690119], [0.30715136, 0.06047217],
                  [0.27292214, 0.07763995], [0.7654825, 0.48265902]])
    r = kmeans(points(x), 2, seed=0, restarts=1)
    a = r.assignments
    assert a[0] == a[3] and a[1] == a[2] and a[0] != a[1]
    assert r.objective == pytest.approx(brute_two_means(x), rel=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.integers(5, 60), st.integers(1, 4))
def test_kmeans_invariants(seed, n, k):
    rng = np.random.default_rng(seed)
    x = np.column_stack([rng.normal(size=n), rng.random(n)])
    r = kmeans(points(x), k, seed=seed, restarts=3)
    assert r.centroids.shape == (k, 2)
    assert np.all(np.bincount(r.assignments, minlength=k) >= 1)
    assert r.objective >= 0
    assert all(b <= a + 1e-12 * max(a, 1) for a, b in zip(r.trace, r.trace[1:]))
    assert r.objective == pytest.approx(r.trace[-1] if r.trace else 0.0, abs=1e-12)
    # each point sits with its nearest centroid
    d2 = ((x[:, None, :] - r.centroids[None]) ** 2).sum(axis=2)
    own = d2[np.arange(n), r.assignments]
    assert np.all(own <= d2.min(axis=1) + 1e-12)
    for c in range(k):
        np.testing.assert_allclose(r.centroids[c], x[r.assignments == c].mean(axis=0), atol=1e-12)


def test_deterministic():
    rng = np.random.default_rng(9)
    pts = points(rng.random((40, 2)))
    a, b = kmeans(pts, 3, seed=11), kmeans(pts, 3, seed=11)
    np.testing.assert_array_equal(a.assignments, b.assignments)
    assert a.objective == b.objective and a.centroids.tobytes() == b.centroids.tobytes()


def _result(assign, k):
    return KMeansResult(np.zeros((k, 2)), np.array(assign), 0.0, 1, 0)


def test_top_cluster_argmax():
    pts = [ClusterPoint("z", 0, 0.1), ClusterPoint("b", 0, 0.9), ClusterPoint("a", 0, 0.9),
           ClusterPoint("c", 0, 0.5)]
    assert top_cluster(_result([0, 1, 1, 2], 3), pts) == (1, ["a", "b"])


def test_top_cluster_tie_goes_low():
    pts = [ClusterPoint("x", 0, 0.5), ClusterPoint("y", 0, 0.5)]
    assert top_cluster(_result([1, 0], 2), pts) == (0, ["y"])


def test_top_cluster_single():
    pts = [ClusterPoint(i, 0, p) for i, p in (("b", 0.2), ("a", 0.7))]
    assert top_cluster(_result([0, 0], 1), pts) == (0, ["a", "b"])


def test_top_cluster_inconsistent():
    with pytest.raises(InconsistentInput):
        top_cluster(_result([0, 1], 2), [ClusterPoint("a", 0, 0.5)])
    with pytest.raises(InconsistentInput):
        top_cluster(_result([0, 5], 2), [ClusterPoint("a", 0, 0.5), ClusterPoint("b", 0, 0.5)])
