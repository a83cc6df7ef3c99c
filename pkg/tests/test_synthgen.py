import dataclasses
import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pkdnet import mlp
from pkdnet.dataset import apply_scaler, fit_scaler, split
from pkdnet.errors import ConfigError
from pkdnet.synthgen import SynthConfig, generate, write_synth


def test_full_scale_counts():
    data, informative = generate(SynthConfig(1000, 5000, 100, 0.2, 1.0, seed=3))
    assert data.x.shape == (1000, 5000)
    assert int(data.y.sum()) == 200
    assert informative.size == 100
    assert np.all(np.isfinite(data.x))


def test_zero_positive_fraction():
    data, _ = generate(SynthConfig(10, 5, 5, 0.0, 1.0, seed=1))
    assert np.all(data.y == 0)


def test_determinism():
    cfg = SynthConfig(50, 20, 5, 0.3, 1.0, seed=42)
    a, ia = generate(cfg)
    b, ib = generate(cfg)
    np.testing.assert_array_equal(a.x, b.x)
    np.testing.assert_array_equal(a.y, b.y)
    np.testing.assert_array_equal(ia, ib)
    c, _ = generate(dataclasses.replace(cfg, seed=43))
    assert not np.array_equal(a.x, c.x)


@pytest.mark.parametrize("kwargs", [
    dict(n_informative=6, n_features=5),
    dict(positive_fraction=1.5),
    dict(positive_fraction=float("nan")),
    dict(class_separation=float("inf")),
    dict(n_samples=0),
])
def test_config_errors(kwargs):
    base = dict(n_samples=10, n_features=5, n_informative=5, positive_fraction=0.2, seed=0)
    with pytest.raises(ConfigError):
        generate(SynthConfig(**{**base, **kwargs}))


def test_names_and_informative_positions_shuffled():
    data, informative = generate(SynthConfig(20, 200, 10, 0.5, 1.0, seed=7))
    assert data.feature_names[0] == "f0000" and data.ids[-1] == "s0019"
    assert informative.tolist() != list(range(10))


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_informative_mean_gap(seed):
    sep = 1.5
    data, informative = generate(SynthConfig(400, 30, 6, 0.25, sep, seed=seed))
    pos, neg = data.y == 1, data.y == 0
    for j in informative:
        gap = data.x[pos, j].mean() - data.x[neg, j].mean()
        se = np.sqrt(1 / pos.sum() + 1 / neg.sum())
        assert abs(gap - 2 * sep) < 5 * se
    noise = np.setdiff1d(np.arange(30), informative)
    for j in noise:
        gap = data.x[pos, j].mean() - data.x[neg, j].mean()
        assert abs(gap) < 5 * np.sqrt(1 / pos.sum() + 1 / neg.sum())


def test_write_synth_sidecar(tmp_path):
    cfg = SynthConfig(30, 8, 3, 0.2, 1.0, seed=9)
    data, informative = write_synth(cfg, tmp_path / "s.csv", tmp_path / "s.json")
    doc = json.loads((tmp_path / "s.json").read_text())
    assert doc["seed"] == 9
    assert doc["informative_features"] == [data.feature_names[j] for j in informative]
    header = (tmp_path / "s.csv").read_text().splitlines()[0].split(",")
    assert header[0] == "id" and header[-1] == "label"


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 300), st.floats(0.0, 1.0), st.integers(0, 2 ** 32))
def test_exact_positive_count(n, frac, seed):
    data, _ = generate(SynthConfig(n, 4, 2, frac, 1.0, seed=seed))
    assert int(data.y.sum()) == int(np.floor(n * frac + 0.5))
    assert np.all(np.isfinite(data.x))


def test_zero_separation_is_noise():
    accs, majority = [], []
    for seed in range(5):
        data, _ = generate(SynthConfig(500, 50, 10, 0.2, 0.0, seed=seed))
        parts = split(data, 0.2, seed)
        sc = fit_scaler(parts.train.x)
        train = parts.train.with_x(apply_scaler(sc, parts.train.x))
        model, _ = mlp.train(mlp.init([50, 16, 2], seed), train,
                             mlp.TrainConfig(epochs=30, seed=seed))
        pred = mlp.predict(model, apply_scaler(sc, parts.test.x))
        accs.append(np.mean(pred == parts.test.y))
        majority.append(max(parts.test.y.mean(), 1 - parts.test.y.mean()))
    assert np.mean(accs) <= np.mean(majority) + 0.05
