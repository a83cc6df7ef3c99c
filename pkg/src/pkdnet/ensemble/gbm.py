from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..dataset import Dataset
from ..errors import DegenerateClass, InvalidHyperparameter
from .logistic import log1pexp, sigmoid
from .tree import PresortedRegressionTrees

_HESS_FLOOR = 1e-12


@dataclass
class GbmModel:
    initial_score: float
    trees: list
    learning_rate: float

    def decision(self, x):
        x = np.asarray(x, dtype=np.float64)
        score = np.full(x.shape[0], self.initial_score)
        for t in self.trees:
            score += self.learning_rate * t.predict(x)
        return score

    def predict_proba(self, x):
        return sigmoid(self.decision(x))


def logistic_loss(y, score):
    return float(np.mean(log1pexp(score) - y * score))


def train_gbm(train: Dataset, n_rounds=100, max_depth=3, learning_rate=0.1, seed=0,
              *, trace=None) -> GbmModel:
    """Gradient boosting on the logistic loss.

    Each round fits a squared-error regression tree to the residuals
    ``y - sigmoid(score)`` and sets every leaf to the Newton step
    ``sum(residual) / sum(p * (1 - p))`` over its rows. All features are
    considered at every split, so ``seed`` has no effect; it is kept for a
    uniform learner signature.

    If ``trace`` is a list, the training loss before the first round and
    after every round is appended to it.
    """
    if n_rounds < 0:
        raise InvalidHyperparameter("n_rounds must be non-negative")
    if max_depth < 1:
        raise InvalidHyperparameter("max_depth must be at least 1")
    if not learning_rate >= 0:
        raise InvalidHyperparameter("learning_rate must be non-negative")
    y = train.y.astype(np.float64)
    base = y.mean()
    if base in (0.0, 1.0):
        raise DegenerateClass("gradient boosting needs both classes")

    init = math.log(base / (1.0 - base))
    score = np.full(train.n, init)
    grower = PresortedRegressionTrees(train.x) if n_rounds else None
    trees = []
    if trace is not None:
        trace.append(logistic_loss(y, score))
    for _ in range(n_rounds):
        p = sigmoid(score)
        resid = y - p
        hess = p * (1.0 - p)

        def newton(rows):
            return float(resid[rows].sum() / max(hess[rows].sum(), _HESS_FLOOR))

        tree = grower.grow(resid, max_depth, newton)
        score += learning_rate * tree.predict(train.x)
        trees.append(tree)
        if trace is not None:
            trace.append(logistic_loss(y, score))
    return GbmModel(init, trees, float(learning_rate))
