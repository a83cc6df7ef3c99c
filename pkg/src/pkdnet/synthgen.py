"""Two-centroid Gaussian generator for labeled expression-like tables."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from .dataset import Dataset, write_csv
from .errors import ConfigError


@dataclass(frozen=True)
class SynthConfig:
    n_samples: int = 1000
    n_features: int = 5000
    n_informative: int = 100
    positive_fraction: float = 0.2
    class_separation: float = 1.0
    seed: int = 0

    def validate(self):
        for name in ("n_samples", "n_features", "n_informative"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or v < 1:
                raise ConfigError(f"{name} must be a positive integer, got {v!r}")
        if self.n_informative > self.n_features:
            raise ConfigError(f"n_informative ({self.n_informative}) exceeds "
                              f"n_features ({self.n_features})")
        for name in ("positive_fraction", "class_separation"):
            if not math.isfinite(getattr(self, name)):
                raise ConfigError(f"{name} must be finite")
        if not 0.0 <= self.positive_fraction <= 1.0:
            raise ConfigError("positive_fraction must lie in [0, 1]")
        if self.class_separation < 0:
            raise ConfigError("class_separation must be non-negative")
        if self.seed < 0:
            raise ConfigError("seed must be a non-negative integer")


#: Scaled-down counterpart of the 1000 x 5000 configuration used for fast checks.
SCALED = SynthConfig(n_samples=1000, n_features=500, n_informative=50,
                     positive_fraction=0.2, class_separation=1.0)
#: Same table with a wider centroid gap.
HIGH_SIGNAL = SynthConfig(n_samples=1000, n_features=500, n_informative=50,
                          positive_fraction=0.2, class_separation=2.0)


def _names(prefix, count):
    width = max(4, len(str(count - 1)))
    return [f"{prefix}{i:0{width}d}" for i in range(count)]


def generate(config: SynthConfig):
    """Draw one dataset from ``config``.

    Returns ``(data, informative)`` where ``informative`` holds the sorted
    column indices of the informative features in ``data.x``.

    Class 1 rows are centred at ``+class_separation`` on every informative
    axis and class 0 rows at ``-class_separation``; all features have unit
    variance. The positive count is exactly ``round(n * positive_fraction)``.
    """
    config.validate()
    n, d, k = config.n_samples, config.n_features, config.n_informative
    rng = np.random.default_rng(config.seed)

    n_pos = int(math.floor(n * config.positive_fraction + 0.5))
    y = np.zeros(n, dtype=np.int64)
    y[:n_pos] = 1

    x = rng.standard_normal((n, d))
    sign = np.where(y == 1, 1.0, -1.0)
    x[:, :k] += config.class_separation * sign[:, None]

    cols = rng.permutation(d)
    rows = rng.permutation(n)
    x = x[rows][:, cols]
    y = y[rows]
    informative = np.sort(np.flatnonzero(cols < k))
    return Dataset(_names("s", n), _names("f", d), x, y), informative


def write_synth(config: SynthConfig, csv_path, sidecar_path=None):
    """Generate and write the CSV plus a JSON sidecar naming the informative columns."""
    data, informative = generate(config)
    write_csv(data, csv_path)
    if sidecar_path is not None:
        doc = {
            "config": asdict(config),
            "seed": config.seed,
            "informative_features": [data.feature_names[j] for j in informative],
        }
        with open(sidecar_path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")
    return data, informative
