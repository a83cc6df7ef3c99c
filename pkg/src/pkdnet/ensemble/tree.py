"""Binary decision trees stored as flat arrays.

Rows with ``x[feature] <= threshold`` go left. Split candidates are the
midpoints between consecutive distinct sorted values of a feature. When two
candidates score equally the lower feature index wins, then the lower
threshold.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import MalformedModel

LEAF = -1


@dataclass
class DecisionTree:
    feature: np.ndarray    # int, LEAF for leaves
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray      # leaf payload; positive fraction or additive score

    @property
    def n_nodes(self):
        return self.feature.shape[0]

    def depth(self):
        depth = np.zeros(self.n_nodes, dtype=np.int64)
        for i in range(self.n_nodes):
            if self.feature[i] != LEAF:
                depth[self.left[i]] = depth[self.right[i]] = depth[i] + 1
        return int(depth.max())

    def leaves(self):
        return np.flatnonzero(self.feature == LEAF)

    def apply(self, x) -> np.ndarray:
        """Leaf index reached by every row of ``x``."""
        x = np.asarray(x, dtype=np.float64)
        node = np.zeros(x.shape[0], dtype=np.int64)
        rows = np.arange(x.shape[0])
        while True:
            feat = self.feature[node]
            active = feat != LEAF
            if not active.any():
                return node
            r, n, f = rows[active], node[active], feat[active]
            go_left = x[r, f] <= self.threshold[n]
            node[active] = np.where(go_left, self.left[n], self.right[n])

    def predict(self, x) -> np.ndarray:
        return self.value[self.apply(x)]

    # nested-dict form used by the JSON model files
    def to_dict(self, node=0):
        if self.feature[node] == LEAF:
            return {"value": float(self.value[node])}
        return {"feature": int(self.feature[node]),
                "threshold": float(self.threshold[node]),
                "left": self.to_dict(int(self.left[node])),
                "right": self.to_dict(int(self.right[node]))}

    @classmethod
    def from_dict(cls, doc):
        b = _Builder()

        def walk(d):
            if not isinstance(d, dict):
                raise MalformedModel("tree node must be an object")
            if "value" in d:
                return b.leaf(float(d["value"]))
            try:
                i = b.split(int(d["feature"]), float(d["threshold"]))
                b.left[i] = walk(d["left"])
                b.right[i] = walk(d["right"])
            except KeyError as exc:
                raise MalformedModel(f"tree node missing {exc}") from None
            return i

        walk(doc)
        return b.build()


class _Builder:
    def __init__(self):
        self.feature, self.threshold, self.left, self.right, self.value = [], [], [], [], []

    def _add(self, feature, threshold, value):
        self.feature.append(feature)
        self.threshold.append(threshold)
        self.left.append(LEAF)
        self.right.append(LEAF)
        self.value.append(value)
        return len(self.feature) - 1

    def leaf(self, value):
        return self._add(LEAF, 0.0, value)

    def split(self, feature, threshold):
        return self._add(feature, threshold, 0.0)

    def build(self):
        return DecisionTree(np.array(self.feature, dtype=np.int64),
                            np.array(self.threshold, dtype=np.float64),
                            np.array(self.left, dtype=np.int64),
                            np.array(self.right, dtype=np.int64),
                            np.array(self.value, dtype=np.float64))


def _pick(score, values):
    """Best (row, position, threshold) of a score table or None.

    ``score[r, i]`` is the cost of cutting sorted column ``r`` after position
    ``i``; cuts between equal values are ignored. Lower is better.
    """
    valid = values[:, 1:] > values[:, :-1]
    if not valid.any():
        return None
    score = np.where(valid, score, np.inf)
    flat = int(np.argmin(score))   # row-major: lowest row, then lowest position
    r, i = divmod(flat, score.shape[1])
    lo, hi = values[r, i], values[r, i + 1]
    thr = 0.5 * (lo + hi)
    if not lo <= thr < hi:   # adjacent floats
        thr = lo
    return r, i, thr


def gini_scores(y_sorted):
    """Size-weighted Gini impurity of both children for every cut.

    ``y_sorted`` is (f, m) of 0/1 labels; the result is (f, m - 1) and is
    divided by m so it compares directly with the parent impurity.
    """
    m = y_sorted.shape[1]
    pos_l = np.cumsum(y_sorted, axis=1)[:, :-1].astype(np.float64)
    n_l = np.arange(1, m, dtype=np.float64)
    n_r = m - n_l
    pos_r = y_sorted.sum(axis=1, keepdims=True) - pos_l
    # n * (1 - p^2 - q^2) = 2 * pos * neg / n
    imp = 2.0 * pos_l * (n_l - pos_l) / n_l + 2.0 * pos_r * (n_r - pos_r) / n_r
    return imp / m


def gini(y):
    m = len(y)
    if m == 0:
        return 0.0
    p = float(np.mean(y))
    return 2.0 * p * (1.0 - p)


def sse_scores(g_sorted):
    """Negative between-children sum of squares (lower is a better regression cut)."""
    m = g_sorted.shape[1]
    s_l = np.cumsum(g_sorted, axis=1)[:, :-1]
    n_l = np.arange(1, m, dtype=np.float64)
    s_r = g_sorted.sum(axis=1, keepdims=True) - s_l
    s_r *= s_r
    s_r /= m - n_l
    s_l *= s_l
    s_l /= n_l
    s_l += s_r
    return np.negative(s_l, out=s_l)


def build_gini_tree(x, y, max_depth, n_candidates, rng) -> DecisionTree:
    """Classification tree on 0/1 labels; leaves store the positive fraction.

    At every node ``n_candidates`` features are drawn without replacement
    (all of them when ``n_candidates >= d``). A node becomes a leaf at
    ``max_depth``, when pure, with fewer than two rows, or when none of the
    drawn features varies.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    d = x.shape[1]
    b = _Builder()

    def grow(rows, depth):
        ys = y[rows]
        frac = float(ys.mean()) if rows.size else 0.0
        if depth >= max_depth or rows.size < 2 or frac in (0.0, 1.0):
            return b.leaf(frac)
        if n_candidates >= d:
            feats = np.arange(d)
        else:
            feats = np.sort(rng.choice(d, size=n_candidates, replace=False))
        sub = x[np.ix_(rows, feats)].T                 # (f, m)
        order = np.argsort(sub, axis=1, kind="stable")
        vals = np.take_along_axis(sub, order, axis=1)
        best = _pick(gini_scores(ys[order]), vals)
        if best is None:
            return b.leaf(frac)
        r, _, thr = best
        node = b.split(int(feats[r]), thr)
        go_left = x[rows, feats[r]] <= thr
        b.left[node] = grow(rows[go_left], depth + 1)
        b.right[node] = grow(rows[~go_left], depth + 1)
        return node

    grow(np.arange(x.shape[0]), 0)
    return b.build()


class PresortedRegressionTrees:
    """Grows many regression trees on one fixed matrix.

    Columns are argsorted once. Every node carries its rows as a (d, m)
    block of row indices, each line sorted by that feature; children inherit
    a stable partition of the block, so no node ever sorts again.
    """

    def __init__(self, x):
        self.x = np.asarray(x, dtype=np.float64)
        self.order = np.argsort(self.x, axis=0, kind="stable").T.copy()   # (d, n)
        self.sorted_vals = np.take_along_axis(self.x.T, self.order, axis=1)

    def grow(self, target, max_depth, leaf_value) -> DecisionTree:
        """Fit squared-error cuts to ``target``; ``leaf_value(rows)`` fills leaves."""
        target = np.asarray(target, dtype=np.float64)
        n = self.x.shape[0]
        b = _Builder()
        go_left = np.zeros(n, dtype=bool)

        def leaf(rows):
            return b.leaf(leaf_value(rows))

        def grow(block, vals, depth):
            rows = block[0]
            m = rows.size
            g = target[rows]
            if depth >= max_depth or m < 2 or np.all(g == g[0]):
                return leaf(rows)
            best = _pick(sse_scores(target[block]), vals)
            if best is None:
                return leaf(rows)
            r, i, thr = best
            node = b.split(r, thr)
            n_l = i + 1
            if depth + 1 >= max_depth:
                # both children are leaves; only their rows are needed
                b.left[node] = leaf(block[r, :n_l])
                b.right[node] = leaf(block[r, n_l:])
                return node
            go_left[:] = False
            go_left[block[r, :n_l]] = True
            mask = go_left[block]
            b.left[node] = grow(block[mask].reshape(-1, n_l),
                                vals[mask].reshape(-1, n_l), depth + 1)
            mask = ~mask
            b.right[node] = grow(block[mask].reshape(-1, m - n_l),
                                 vals[mask].reshape(-1, m - n_l), depth + 1)
            return node

        grow(self.order, self.sorted_vals, 0)
        return b.build()
