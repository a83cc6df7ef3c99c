from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..dataset import Dataset
from ..errors import InvalidHyperparameter
from .tree import build_gini_tree


@dataclass
class RandomForestModel:
    trees: list
    features_per_split: int
    seed: int = 0

    def predict_proba(self, x):
        x = np.asarray(x, dtype=np.float64)
        return np.mean([t.predict(x) for t in self.trees], axis=0)


def tree_seed(seed, index):
    """Independent per-tree stream; identical whatever order trees are built in."""
    return np.random.SeedSequence([int(seed), int(index)])


def train_random_forest(train: Dataset, n_trees=100, max_depth=12, seed=0, *,
                        features_per_split=None, bootstrap=True) -> RandomForestModel:
    """Bagged Gini trees with ``floor(sqrt(d))`` candidate features per split."""
    if n_trees < 1:
        raise InvalidHyperparameter(f"n_trees must be at least 1, got {n_trees}")
    if max_depth < 1:
        raise InvalidHyperparameter(f"max_depth must be at least 1, got {max_depth}")
    if features_per_split is None:
        features_per_split = max(1, int(math.isqrt(train.d)))
    if features_per_split < 1:
        raise InvalidHyperparameter("features_per_split must be at least 1")

    trees = []
    for k in range(n_trees):
        rng = np.random.default_rng(tree_seed(seed, k))
        if bootstrap:
            rows = rng.integers(0, train.n, size=train.n)
            x, y = train.x[rows], train.y[rows]
        else:
            x, y = train.x, train.y
        trees.append(build_gini_tree(x, y, max_depth, features_per_split, rng))
    return RandomForestModel(trees, features_per_split, seed)
