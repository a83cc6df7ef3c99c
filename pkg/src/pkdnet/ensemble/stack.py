"""Stacked generalization: three base learners under a logistic meta-classifier."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from ..dataset import Dataset
from ..errors import DegenerateClass, DimensionMismatch, InvalidFolds
from .forest import train_random_forest
from .gbm import train_gbm
from .logistic import LogisticModel, train_logistic
from .svm import train_linear_svm


def derive_seed(*keys) -> int:
    return int(np.random.SeedSequence([int(k) for k in keys]).generate_state(1, np.uint64)[0])


@dataclass
class StackConfig:
    n_folds: int = 5
    svm_lambda: float = 1e-4
    svm_epochs: int = 20
    rf_trees: int = 100
    rf_depth: int = 12
    gbm_rounds: int = 100
    gbm_depth: int = 3
    gbm_learning_rate: float = 0.1
    meta_l2: float = 1e-3
    meta_iters: int = 5000


class BaseLearner(NamedTuple):
    name: str
    fit: Callable   # (Dataset, seed) -> object with predict_proba(x)


def default_learners(config: StackConfig):
    c = config
    return (
        BaseLearner("svm", lambda d, s: train_linear_svm(d, c.svm_lambda, c.svm_epochs, s)),
        BaseLearner("rf", lambda d, s: train_random_forest(d, c.rf_trees, c.rf_depth, s)),
        BaseLearner("gbm", lambda d, s: train_gbm(d, c.gbm_rounds, c.gbm_depth,
                                                  c.gbm_learning_rate, s)),
    )


@dataclass
class StackEnsembleModel:
    svm: object
    rf: object
    gbm: object
    meta: LogisticModel
    n_folds: int
    # fitting diagnostics, not persisted
    oof: np.ndarray | None = field(default=None, repr=False, compare=False)
    folds: np.ndarray | None = field(default=None, repr=False, compare=False)

    @property
    def base(self):
        return (self.svm, self.rf, self.gbm)

    def base_proba(self, x):
        x = np.asarray(x, dtype=np.float64)
        return np.column_stack([m.predict_proba(x) for m in self.base])


def stratified_folds(y, n_folds, seed) -> np.ndarray:
    """Fold index per row; each class is shuffled and dealt round-robin."""
    y = np.asarray(y)
    counts = [int(np.sum(y == c)) for c in (0, 1)]
    if n_folds < 2 or n_folds > min(counts):
        raise InvalidFolds(f"n_folds must lie in [2, {min(counts)}] "
                           f"(smallest class size), got {n_folds}")
    rng = np.random.default_rng(seed)
    folds = np.empty(y.shape[0], dtype=np.int64)
    for c in (0, 1):
        members = rng.permutation(np.flatnonzero(y == c))
        folds[members] = np.arange(members.size) % n_folds
    return folds


def train_stack(train: Dataset, config: StackConfig | None = None, seed=0,
                learners=None) -> StackEnsembleModel:
    """Fit the stack.

    Each base learner is trained on every fold complement and predicts the
    held-out fold, giving an (n, 3) out-of-fold probability matrix on which
    the meta logistic regression is trained. The base learners are then
    refit on all training rows. ``learners`` replaces the default
    SVM / forest / boosting trio (three entries, same order).
    """
    config = config or StackConfig()
    learners = tuple(learners) if learners is not None else default_learners(config)
    if len(learners) != 3:
        raise ValueError("a stack needs exactly three base learners")
    if train.y.min() == train.y.max():
        raise DegenerateClass("stacking needs both classes in the training rows")

    folds = stratified_folds(train.y, config.n_folds, derive_seed(seed, 0))
    oof = np.full((train.n, 3), np.nan)
    for f in range(config.n_folds):
        held = folds == f
        fit_part = train.take(np.flatnonzero(~held))
        x_held = train.x[held]
        for j, learner in enumerate(learners):
            model = learner.fit(fit_part, derive_seed(seed, 1, f, j))
            oof[held, j] = model.predict_proba(x_held)

    meta = train_logistic(oof, train.y, l2=config.meta_l2, iters=config.meta_iters)
    full = [learner.fit(train, derive_seed(seed, 2, j)) for j, learner in enumerate(learners)]
    return StackEnsembleModel(*full, meta=meta, n_folds=config.n_folds, oof=oof, folds=folds)


def predict_stack(model: StackEnsembleModel, batch, threshold=0.5):
    """Meta probabilities and 0/1 labels (ties go positive)."""
    batch = np.asarray(batch, dtype=np.float64)
    if batch.ndim == 1:
        batch = batch[None, :]
    d = _n_inputs(model)
    if d is not None and batch.shape[1] != d:
        raise DimensionMismatch(f"model expects {d} features, got {batch.shape[1]}")
    proba = model.meta.predict_proba(model.base_proba(batch))
    return proba, (proba >= threshold).astype(np.int64)


def _n_inputs(model):
    w = getattr(model.svm, "w", None)
    return None if w is None else w.shape[0]
