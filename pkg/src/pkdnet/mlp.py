"""Multilayer perceptron for binary labels: ReLU hidden layers, softmax output."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .dataset import Dataset
from .errors import DimensionMismatch, EmptyBatch, InvalidArchitecture, InvalidHyperparameter, NonFiniteLoss

log = logging.getLogger(__name__)


@dataclass
class MlpModel:
    layer_sizes: list
    weights: list
    biases: list
    activation: str = "relu"

    def __post_init__(self):
        self.layer_sizes = [int(s) for s in self.layer_sizes]
        self.weights = [np.asarray(w, dtype=np.float64) for w in self.weights]
        self.biases = [np.asarray(b, dtype=np.float64) for b in self.biases]
        sizes = self.layer_sizes
        if len(self.weights) != len(sizes) - 1 or len(self.biases) != len(sizes) - 1:
            raise InvalidArchitecture("need one weight matrix and bias per layer transition")
        for l, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.shape != (sizes[l + 1], sizes[l]) or b.shape != (sizes[l + 1],):
                raise InvalidArchitecture(
                    f"layer {l}: weight {w.shape} / bias {b.shape} do not match sizes {sizes}")
        if self.activation != "relu":
            raise InvalidArchitecture(f"unsupported activation {self.activation!r}")

    @property
    def n_inputs(self):
        return self.layer_sizes[0]

    def copy(self):
        return MlpModel(list(self.layer_sizes), [w.copy() for w in self.weights],
                        [b.copy() for b in self.biases], self.activation)

    def params(self):
        return [*self.weights, *self.biases]


@dataclass
class TrainConfig:
    epochs: int = 200
    batch_size: int = 32
    learning_rate: float = 0.01
    l2: float = 0.0
    seed: int = 0

    def validate(self):
        if self.epochs < 1 or self.batch_size < 1:
            raise InvalidHyperparameter("epochs and batch_size must be positive")
        if not self.learning_rate >= 0 or not self.l2 >= 0:
            raise InvalidHyperparameter("learning_rate and l2 must be non-negative")


@dataclass
class TrainHistory:
    loss: list = field(default_factory=list)
    accuracy: list = field(default_factory=list)


def init(layer_sizes, seed) -> MlpModel:
    """He-normal weights (variance 2 / fan_in) and zero biases."""
    sizes = [int(s) for s in layer_sizes]
    if len(sizes) < 2:
        raise InvalidArchitecture("need at least an input and an output layer")
    if sizes[-1] != 2:
        raise InvalidArchitecture("output layer must have 2 units")
    if min(sizes) < 1:
        raise InvalidArchitecture("layer sizes must be positive")
    rng = np.random.default_rng(seed)
    weights = [rng.normal(0.0, np.sqrt(2.0 / fan_in), size=(fan_out, fan_in))
               for fan_in, fan_out in zip(sizes[:-1], sizes[1:])]
    biases = [np.zeros(s) for s in sizes[1:]]
    return MlpModel(sizes, weights, biases)


def _check_batch(model, batch):
    batch = np.asarray(batch, dtype=np.float64)
    if batch.ndim != 2 or batch.shape[1] != model.n_inputs:
        raise DimensionMismatch(f"model expects {model.n_inputs} inputs, got shape {batch.shape}")
    return batch


def _forward(model, a):
    # keep every activation for backprop; the last entry holds output logits
    acts = [a]
    last = len(model.weights) - 1
    for l, (w, b) in enumerate(zip(model.weights, model.biases)):
        z = acts[-1] @ w.T + b
        acts.append(z if l == last else np.maximum(z, 0.0))
    return acts


def _log_softmax(z):
    z = z - z.max(axis=1, keepdims=True)
    return z - np.log(np.exp(z).sum(axis=1, keepdims=True))


def forward(model: MlpModel, batch) -> np.ndarray:
    """Class probabilities, shape (m, 2)."""
    batch = _check_batch(model, batch)
    if batch.shape[0] == 0:
        raise EmptyBatch("forward needs at least one row")
    logits = _forward(model, batch)[-1]
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def loss_and_gradients(model: MlpModel, batch, labels, l2=0.0):
    """Mean cross-entropy plus ``l2/2 * sum(w**2)`` over weight matrices.

    Returns ``(loss, grad_weights, grad_biases)`` with gradient shapes
    matching ``model.weights`` and ``model.biases``.
    """
    batch = _check_batch(model, batch)
    labels = np.asarray(labels, dtype=np.int64)
    m = batch.shape[0]
    if m == 0:
        raise EmptyBatch("loss needs at least one row")
    if labels.shape != (m,):
        raise DimensionMismatch(f"{m} rows but {labels.shape} labels")

    acts = _forward(model, batch)
    logp = _log_softmax(acts[-1])
    rows = np.arange(m)
    loss = -logp[rows, labels].mean()
    if l2:
        loss += 0.5 * l2 * sum(float(np.sum(w * w)) for w in model.weights)

    delta = np.exp(logp)
    delta[rows, labels] -= 1.0
    delta /= m
    gw = [None] * len(model.weights)
    gb = [None] * len(model.biases)
    for l in range(len(model.weights) - 1, -1, -1):
        gw[l] = delta.T @ acts[l] + l2 * model.weights[l]
        gb[l] = delta.sum(axis=0)
        if l:
            delta = (delta @ model.weights[l]) * (acts[l] > 0)
    return float(loss), gw, gb


def train(model: MlpModel, data: Dataset, config: TrainConfig | None = None):
    """Mini-batch SGD; rows are reshuffled every epoch from ``config.seed``.

    The input model is left untouched. Raises ``NonFiniteLoss`` as soon as
    a batch loss stops being finite.
    """
    config = config or TrainConfig()
    config.validate()
    if data.n == 0:
        raise EmptyBatch("cannot train on an empty dataset")
    if data.d != model.n_inputs:
        raise DimensionMismatch(f"model expects {model.n_inputs} inputs, data has {data.d}")

    model = model.copy()
    rng = np.random.default_rng(config.seed)
    x, y = data.x, data.y
    history = TrainHistory()
    lr = config.learning_rate
    for epoch in range(config.epochs):
        order = rng.permutation(data.n)
        total = 0.0
        for start in range(0, data.n, config.batch_size):
            idx = order[start:start + config.batch_size]
            # divergence is reported through the finiteness check below
            with np.errstate(over="ignore", invalid="ignore"):
                loss, gw, gb = loss_and_gradients(model, x[idx], y[idx], config.l2)
            if not np.isfinite(loss):
                raise NonFiniteLoss(f"loss became {loss} at epoch {epoch}, "
                                    f"batch starting {start}; lower the learning rate")
            total += loss * idx.size
            for w, g in zip(model.weights, gw):
                w -= lr * g
            for b, g in zip(model.biases, gb):
                b -= lr * g
        history.loss.append(total / data.n)
        with np.errstate(over="ignore", invalid="ignore"):
            history.accuracy.append(float(np.mean(predict(model, x) == y)))
    log.debug("mlp trained: final loss %.4g", history.loss[-1] if history.loss else float("nan"))
    return model, history


def predict_proba(model: MlpModel, batch) -> np.ndarray:
    return forward(model, batch)[:, 1]


def predict(model: MlpModel, batch, threshold=0.5) -> np.ndarray:
    return (predict_proba(model, batch) >= threshold).astype(np.int64)
