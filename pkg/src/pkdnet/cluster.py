"""K-means on the (expression summary, predicted probability) plane."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .dataset import Dataset
from .errors import InconsistentInput, InvalidK, LengthMismatch, MissingColumn, TooFewPoints

MAX_ITER = 300


class ClusterPoint(NamedTuple):
    id: str
    expression: float
    probability: float


@dataclass
class KMeansResult:
    centroids: np.ndarray
    assignments: np.ndarray
    objective: float
    iterations: int
    seed: int
    trace: list = field(default_factory=list)   # objective after each Lloyd step of the kept run


def build_cluster_space(data: Dataset, probabilities, expression_column="mean"):
    """One point per row of ``data`` (expected to be standardized already).

    ``expression_column`` names a feature column, or ``"mean"`` for the row
    mean over all features.
    """
    probabilities = np.asarray(probabilities, dtype=np.float64)
    if probabilities.shape != (data.n,):
        raise LengthMismatch(f"{data.n} rows but {probabilities.shape[0]} probabilities")
    if np.any((probabilities < 0) | (probabilities > 1)):
        raise ValueError("probabilities must lie in [0, 1]")
    if expression_column == "mean":
        expr = data.x.mean(axis=1)
    else:
        try:
            j = data.feature_names.index(expression_column)
        except ValueError:
            raise MissingColumn(f"no feature named {expression_column!r}") from None
        expr = data.x[:, j]
    return [ClusterPoint(i, float(e), float(p)) for i, e, p in zip(data.ids, expr, probabilities)]


def _as_array(points):
    return np.array([(p.expression, p.probability) for p in points], dtype=np.float64).reshape(-1, 2)


def _sq_dists(x, centroids):
    return ((x[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)


def _plus_plus(x, k, rng):
    centroids = [x[rng.integers(x.shape[0])]]
    closest = ((x - centroids[0]) ** 2).sum(axis=1)
    for _ in range(1, k):
        total = closest.sum()
        # total > 0 while fewer than (distinct points) centroids are placed
        i = int(np.searchsorted(np.cumsum(closest), rng.random() * total, side="right"))
        i = min(i, x.shape[0] - 1)
        centroids.append(x[i])
        closest = np.minimum(closest, ((x - x[i]) ** 2).sum(axis=1))
    return np.array(centroids)


def _objective(x, centroids, labels):
    return float(((x - centroids[labels]) ** 2).sum())


def _lloyd(x, centroids, k, labels=None, trace=None, it=0):
    """Returns (centroids, labels, iterations, trace)."""
    trace = [] if trace is None else trace
    while it < MAX_ITER:
        it += 1
        d2 = _sq_dists(x, centroids)
        new = np.argmin(d2, axis=1)   # ties to the lowest centroid index
        empty = np.setdiff1d(np.arange(k), new)
        if empty.size:
            # move each empty centroid onto the point farthest from its own centroid
            far = d2[np.arange(x.shape[0]), new]
            counts = np.bincount(new, minlength=k)
            for c in empty:
                # never strip a cluster of its last member
                for i in np.argsort(-far, kind="stable"):
                    if counts[new[i]] > 1:
                        break
                counts[new[i]] -= 1
                counts[c] += 1
                centroids[c] = x[i]
                new[i] = c
                far[i] = 0.0
        if labels is not None and np.array_equal(new, labels):
            break
        labels = new
        centroids = np.array([x[labels == c].mean(axis=0) for c in range(k)])
        trace.append(_objective(x, centroids, labels))
    return centroids, labels, it, trace


def _hartigan_pass(x, centroids, labels, k):
    """Single-point moves that lower the objective once centroids follow the point.

    Moving x from a (size n_a) to b (size n_b) changes the objective by
    n_b/(n_b+1) |x-c_b|^2 - n_a/(n_a-1) |x-c_a|^2. Returns the number of moves.
    """
    counts = np.bincount(labels, minlength=k).astype(np.float64)
    centroids = centroids.copy()
    scale = max(_objective(x, centroids, labels), 1e-300)
    moves = 0
    for i in range(x.shape[0]):
        a = labels[i]
        if counts[a] < 2:
            continue
        d2 = ((centroids - x[i]) ** 2).sum(axis=1)
        cost = counts / (counts + 1) * d2
        cost[a] = counts[a] / (counts[a] - 1) * d2[a]
        b = int(np.argmin(cost))
        if b == a or cost[a] - cost[b] <= 1e-12 * scale:
            continue
        centroids[a] = (counts[a] * centroids[a] - x[i]) / (counts[a] - 1)
        centroids[b] = (counts[b] * centroids[b] + x[i]) / (counts[b] + 1)
        counts[a] -= 1
        counts[b] += 1
        labels[i] = b
        moves += 1
    return moves


def _fit(x, centroids, k):
    """Lloyd to a fixed point, then Hartigan passes, alternating until neither moves."""
    centroids, labels, it, trace = _lloyd(x, centroids, k)
    while it < MAX_ITER:
        labels = labels.copy()
        if not _hartigan_pass(x, centroids, labels, k):
            break
        it += 1
        centroids = np.array([x[labels == c].mean(axis=0) for c in range(k)])
        trace.append(_objective(x, centroids, labels))
        centroids, labels, it, trace = _lloyd(x, centroids, k, labels, trace, it)
    return centroids, labels, it, trace


def kmeans(points, k=3, seed=0, restarts=10) -> KMeansResult:
    """k-means++ seeding, Lloyd iterations polished by single-point moves,
    best of ``restarts`` runs.

    Each restart draws from its own generator spawned from ``seed``. The run
    with the lowest objective is kept; ties keep the earlier restart.
    """
    x = _as_array(points)
    if x.shape[0] == 0:
        raise TooFewPoints("k-means needs at least one point")
    n_distinct = np.unique(x, axis=0).shape[0]
    if not 1 <= k <= n_distinct:
        raise InvalidK(f"k must lie in [1, {n_distinct}] (distinct points), got {k}")
    if restarts < 1:
        raise InvalidK("restarts must be at least 1")

    best = None
    for child in np.random.SeedSequence(seed).spawn(restarts):
        rng = np.random.default_rng(child)
        centroids, labels, iters, trace = _fit(x, _plus_plus(x, k, rng), k)
        obj = _objective(x, centroids, labels)
        if best is None or obj < best.objective:
            best = KMeansResult(centroids, labels, obj, iters, seed, trace)
    return best


def top_cluster(result: KMeansResult, points):
    """Cluster with the highest mean probability and its sorted member ids."""
    labels = np.asarray(result.assignments)
    if labels.shape[0] != len(points):
        raise InconsistentInput(f"{labels.shape[0]} assignments for {len(points)} points")
    k = result.centroids.shape[0]
    if labels.size and (labels.min() < 0 or labels.max() >= k):
        raise InconsistentInput("assignment outside [0, k)")
    prob = np.array([p.probability for p in points])
    means = np.array([prob[labels == c].mean() if np.any(labels == c) else -np.inf
                      for c in range(k)])
    top = int(np.argmax(means))
    return top, sorted(p.id for p, c in zip(points, labels) if c == top)
