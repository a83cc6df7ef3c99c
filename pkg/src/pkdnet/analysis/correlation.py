from __future__ import annotations

from typing import NamedTuple

import numpy as np

from ..dataset import Dataset
from ..errors import DegenerateClass


class CorrelationRecord(NamedTuple):
    feature_name: str
    r: float


def point_biserial(x, y) -> np.ndarray:
    """Pearson r (population moments) of every column of ``x`` with ``y``.

    Columns with no spread at all get r = 0.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    xc = x - x.mean(axis=0)
    yc = y - y.mean()
    sx = np.sqrt((xc * xc).mean(axis=0))
    sy = np.sqrt((yc * yc).mean())
    const = np.ptp(x, axis=0) == 0
    denom = np.where(const, 1.0, sx * sy)
    r = (xc * yc[:, None]).mean(axis=0) / denom
    r[const] = 0.0
    return np.clip(r, -1.0, 1.0)


def feature_label_correlation(data: Dataset) -> list[CorrelationRecord]:
    """Features ranked by |r| with the label, descending; ties by name."""
    if data.n == 0 or data.y.min() == data.y.max():
        raise DegenerateClass("correlation with the label needs both classes")
    r = point_biserial(data.x, data.y)
    records = [CorrelationRecord(name, float(v)) for name, v in zip(data.feature_names, r)]
    records.sort(key=lambda rec: (-abs(rec.r), rec.feature_name))
    return records
