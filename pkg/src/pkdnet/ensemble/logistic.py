from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DegenerateClass, DimensionMismatch


@dataclass
class LogisticModel:
    coefficients: np.ndarray
    intercept: float

    def __post_init__(self):
        self.coefficients = np.asarray(self.coefficients, dtype=np.float64)
        self.intercept = float(self.intercept)

    def decision(self, x):
        return np.asarray(x, dtype=np.float64) @ self.coefficients + self.intercept

    def predict_proba(self, x):
        return sigmoid(self.decision(x))


def sigmoid(z):
    z = np.asarray(z, dtype=np.float64)
    # exp of a non-positive argument only
    e = np.exp(-np.abs(z))
    return np.where(z >= 0, 1.0 / (1.0 + e), e / (1.0 + e))


def log1pexp(z):
    return np.logaddexp(0.0, z)


def logistic_loss_and_grad(coef, intercept, x, y, l2):
    """Mean log loss plus ``l2/2 * |coef|^2``; the intercept is not penalized.

    Returns ``(loss, grad_coef, grad_intercept)``.
    """
    z = x @ coef + intercept
    loss = float(np.mean(log1pexp(z) - y * z) + 0.5 * l2 * coef @ coef)
    r = (sigmoid(z) - y) / x.shape[0]
    return loss, x.T @ r + l2 * coef, float(r.sum())


def train_logistic(x, y, l2=1e-3, iters=5000, tol=1e-8) -> LogisticModel:
    """Full-batch gradient descent from zero.

    The step is ``1 / L`` with ``L = 0.25 * lambda_max([x, 1]^T [x, 1] / n) + l2``,
    the Lipschitz constant of the gradient, so the loss never increases.
    Stops after ``iters`` steps or once the gradient norm drops below ``tol``.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    n, k = x.shape
    if y.shape != (n,):
        raise DimensionMismatch(f"{n} rows but {y.shape[0] if y.ndim else 0} labels")
    if n < 2:
        raise DegenerateClass("logistic regression needs at least two rows")
    if y.min() == y.max():
        raise DegenerateClass("logistic regression needs both classes")

    xa = np.hstack([x, np.ones((n, 1))])
    lip = 0.25 * np.linalg.eigvalsh(xa.T @ xa / n)[-1] + l2
    step = 1.0 / lip
    coef = np.zeros(k)
    b = 0.0
    for _ in range(iters):
        _, gc, gb = logistic_loss_and_grad(coef, b, x, y, l2)
        if np.sqrt(gc @ gc + gb * gb) < tol:
            break
        coef = coef - step * gc
        b = b - step * gb
    return LogisticModel(coef, b)
