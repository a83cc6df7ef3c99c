from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from ..errors import DataError, LengthMismatch


@dataclass(frozen=True)
class Metrics:
    accuracy: float
    tn: int
    fp: int
    fn: int
    tp: int
    precision: float
    recall: float
    n: int
    precision_defined: bool = True
    recall_defined: bool = True

    @property
    def confusion(self):
        """[[tn, fp], [fn, tp]]: rows are true labels, columns predictions."""
        return np.array([[self.tn, self.fp], [self.fn, self.tp]])

    def to_dict(self):
        return asdict(self)


def evaluate(predicted, labels) -> Metrics:
    """Confusion counts and rates; an undefined precision or recall is reported as 0."""
    pred = np.asarray(predicted, dtype=np.int64)
    true = np.asarray(labels, dtype=np.int64)
    if pred.shape != true.shape or pred.ndim != 1:
        raise LengthMismatch(f"{pred.shape} predictions vs {true.shape} labels")
    if pred.size == 0:
        raise DataError("cannot evaluate zero predictions")
    for arr in (pred, true):
        if np.any((arr != 0) & (arr != 1)):
            raise DataError("labels must be 0 or 1")
    tp = int(np.sum((pred == 1) & (true == 1)))
    tn = int(np.sum((pred == 0) & (true == 0)))
    fp = int(np.sum((pred == 1) & (true == 0)))
    fn = int(np.sum((pred == 0) & (true == 1)))
    n = pred.size
    return Metrics(
        accuracy=(tp + tn) / n, tn=tn, fp=fp, fn=fn, tp=tp,
        precision=tp / (tp + fp) if tp + fp else 0.0,
        recall=tp / (tp + fn) if tp + fn else 0.0,
        n=n, precision_defined=bool(tp + fp), recall_defined=bool(tp + fn),
    )
