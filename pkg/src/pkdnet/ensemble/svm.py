from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..dataset import Dataset
from ..errors import DegenerateClass, InvalidHyperparameter
from .logistic import sigmoid, train_logistic


@dataclass
class LinearSvmModel:
    w: np.ndarray
    b: float
    platt_a: float = 0.0
    platt_b: float = 0.0

    def __post_init__(self):
        self.w = np.asarray(self.w, dtype=np.float64)
        self.b, self.platt_a, self.platt_b = float(self.b), float(self.platt_a), float(self.platt_b)

    def decision(self, x):
        return np.asarray(x, dtype=np.float64) @ self.w + self.b

    def predict_proba(self, x):
        return sigmoid(self.platt_a * self.decision(x) + self.platt_b)


def train_linear_svm(train: Dataset, lam=1e-4, epochs=20, seed=0) -> LinearSvmModel:
    """Pegasos on the L2-regularized hinge loss, then Platt calibration.

    The bias is learned as the weight of a constant input and is regularized
    along with ``w``. Step size at update ``t`` is ``1 / (lam * t)``; each
    epoch visits every row once in a freshly shuffled order.

    Platt parameters come from a logistic regression of the labels on the
    training decision scores. Scores with no spread carry no information, so
    the calibration is left at (0, 0) and every probability is 0.5.
    """
    if not lam > 0:
        raise InvalidHyperparameter(f"lambda must be positive, got {lam}")
    if epochs < 0:
        raise InvalidHyperparameter("epochs must be non-negative")
    if train.y.min() == train.y.max():
        raise DegenerateClass("linear SVM needs both classes in the training rows")

    x = np.hstack([train.x, np.ones((train.n, 1))])
    y = np.where(train.y == 1, 1.0, -1.0)
    w = np.zeros(x.shape[1])
    rng = np.random.default_rng(seed)
    t = 0
    for _ in range(epochs):
        for i in rng.permutation(train.n):
            t += 1
            eta = 1.0 / (lam * t)
            margin = y[i] * (x[i] @ w)
            w *= 1.0 - eta * lam
            if margin < 1.0:
                w += (eta * y[i]) * x[i]

    model = LinearSvmModel(w[:-1], w[-1])
    scores = model.decision(train.x)
    if np.ptp(scores) > 0:
        platt = train_logistic(scores[:, None], train.y, l2=1e-3, iters=2000)
        model.platt_a, model.platt_b = float(platt.coefficients[0]), platt.intercept
    return model
