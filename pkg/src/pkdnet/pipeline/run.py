"""End-to-end run: data -> split -> scale -> model -> metrics -> clusters -> enrichment."""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import time
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field, fields
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .. import mlp
from ..analysis import enrich, feature_label_correlation, read_annotations, write_enrichment
from ..cluster import build_cluster_space, kmeans, top_cluster
from ..dataset import CsvSchema, DEFAULT_MISSING, Dataset, apply_scaler, fit_scaler, load_csv, split
from ..ensemble import StackConfig, train_stack
from ..ensemble.stack import derive_seed
from ..errors import ConfigError, IoError, PkdError, StageError
from ..synthgen import SynthConfig, generate
from .charts import emit_correlation_chart
from .metrics import evaluate
from .persist import predict_proba, save_model

log = logging.getLogger(__name__)

MANIFEST_VERSION = 1


def _from_dict(cls, doc, where):
    if doc is None:
        return cls()
    if not isinstance(doc, dict):
        raise ConfigError(f"{where} must be an object")
    known = {f.name for f in fields(cls)}
    unknown = set(doc) - known
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {sorted(unknown)}")
    return cls(**doc)


@dataclass
class DataSource:
    csv: str | None = None
    label_col: str = "label"
    id_col: str | None = "id"
    missing: list = field(default_factory=lambda: list(DEFAULT_MISSING))
    synth: dict | None = None


@dataclass
class ModelChoice:
    kind: str = "mlp"
    hidden: list = field(default_factory=lambda: [100])
    params: dict = field(default_factory=dict)
    seed: int | None = None


@dataclass
class SplitChoice:
    test_fraction: float = 0.2
    seed: int | None = None


@dataclass
class ClusterChoice:
    k: int = 3
    expression_column: str | None = None
    restarts: int = 10
    seed: int | None = None


@dataclass
class EnrichChoice:
    annotations: str | None = None
    namespace: str | None = None


@dataclass
class CorrelationChoice:
    top: int = 20
    svg: bool = True


@dataclass
class RunConfig:
    seed: int
    data: DataSource = field(default_factory=DataSource)
    model: ModelChoice = field(default_factory=ModelChoice)
    split: SplitChoice = field(default_factory=SplitChoice)
    scale_before_split: bool = False
    cluster: ClusterChoice = field(default_factory=ClusterChoice)
    enrich: EnrichChoice | None = None
    correlation: CorrelationChoice = field(default_factory=CorrelationChoice)
    out_dir: str = "run"

    @classmethod
    def from_dict(cls, doc):
        doc = dict(doc)
        if "seed" not in doc:
            raise ConfigError("config needs an explicit integer 'seed'")
        parts = {"data": DataSource, "model": ModelChoice, "split": SplitChoice,
                 "cluster": ClusterChoice, "correlation": CorrelationChoice}
        for key, sub in parts.items():
            if key in doc:
                doc[key] = _from_dict(sub, doc[key], key)
        if doc.get("enrich") is not None:
            doc["enrich"] = _from_dict(EnrichChoice, doc["enrich"], "enrich")
        try:
            cfg = _from_dict(cls, doc, "config")
        except TypeError as exc:
            raise ConfigError(str(exc)) from None
        cfg.validate()
        return cfg

    @classmethod
    def from_json(cls, path):
        try:
            with open(path, encoding="utf-8") as fh:
                return cls.from_dict(json.load(fh))
        except OSError as exc:
            raise IoError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc

    def validate(self):
        if not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigError("seed must be a non-negative integer")
        if (self.data.csv is None) == (self.data.synth is None):
            raise ConfigError("data needs exactly one of 'csv' or 'synth'")
        if self.model.kind not in ("mlp", "stack"):
            raise ConfigError(f"model.kind must be 'mlp' or 'stack', got {self.model.kind!r}")
        if not 0 < self.split.test_fraction < 1:
            raise ConfigError("split.test_fraction must lie in (0, 1)")
        if self.correlation.top < 1:
            raise ConfigError("correlation.top must be at least 1")

    def to_dict(self):
        doc = asdict(self)
        doc.pop("out_dir")   # location only; kept out of the manifest echo
        return doc

    def seeds(self):
        return {
            "split": self.split.seed if self.split.seed is not None else self.seed,
            "model": self.model.seed if self.model.seed is not None else derive_seed(self.seed, 1),
            "cluster": (self.cluster.seed if self.cluster.seed is not None
                        else derive_seed(self.seed, 2)),
        }


def fingerprint(data: Dataset):
    h = hashlib.sha256()
    for part in (data.ids, data.feature_names):
        h.update(json.dumps(part).encode())
    h.update(np.ascontiguousarray(data.x, dtype="<f8").tobytes())
    h.update(np.ascontiguousarray(data.y, dtype="<i8").tobytes())
    return {"rows": data.n, "columns": data.d, "sha256": h.hexdigest()}


def _sha256(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def train_model(choice: ModelChoice, train: Dataset, seed):
    """Fit the configured model on already-scaled rows."""
    if choice.kind == "mlp":
        params = dict(choice.params)
        unknown = set(params) - {"epochs", "batch_size", "learning_rate", "l2"}
        if unknown:
            raise ConfigError(f"unknown mlp params {sorted(unknown)}")
        cfg = mlp.TrainConfig(seed=derive_seed(seed, 1), **params)
        model = mlp.init([train.d, *choice.hidden, 2], derive_seed(seed, 0))
        return mlp.train(model, train, cfg)[0]
    try:
        cfg = StackConfig(**choice.params)
    except TypeError as exc:
        raise ConfigError(f"bad stack params: {exc}") from None
    return train_stack(train, cfg, seed)


def _default_expression(names):
    return "fold_change" if "fold_change" in names else "mean"


class _Stages:
    def __init__(self):
        self.timings = {}

    @contextmanager
    def __call__(self, name):
        t0 = time.perf_counter()
        try:
            yield
        except StageError:
            raise
        except (PkdError, OSError) as exc:
            raise StageError(name, exc) from exc
        finally:
            self.timings[name] = round(time.perf_counter() - t0, 6)


def run_pipeline(config: RunConfig) -> dict:
    """Execute every stage and write all artifacts plus ``manifest.json``.

    Returns the manifest as a dict. Failures surface as ``StageError`` naming
    the stage.
    """
    config.validate()
    stage = _Stages()
    seeds = config.seeds()
    out = Path(config.out_dir)
    artifacts = []

    with stage("load"):
        if config.data.csv is not None:
            data = load_csv(config.data.csv, CsvSchema(config.data.label_col, config.data.id_col,
                                                       config.data.missing))
        else:
            synth = dict(config.data.synth)
            synth.setdefault("seed", config.seed)
            try:
                data, _ = generate(SynthConfig(**synth))
            except TypeError as exc:
                raise ConfigError(f"bad synth config: {exc}") from None
        out.mkdir(parents=True, exist_ok=True)

    with stage("split"):
        if config.scale_before_split:
            # reproduces scaling the full table before splitting (leaks test rows into the scaler)
            scaler = fit_scaler(data.x)
            parts = split(data.with_x(apply_scaler(scaler, data.x)), config.split.test_fraction,
                          seeds["split"])
            train, test = parts.train, parts.test
        else:
            parts = split(data, config.split.test_fraction, seeds["split"])
            scaler = fit_scaler(parts.train.x)
            train = parts.train.with_x(apply_scaler(scaler, parts.train.x))
            test = parts.test.with_x(apply_scaler(scaler, parts.test.x))
        scaled = data.with_x(apply_scaler(scaler, data.x))

    with stage("train"):
        model = train_model(config.model, train, seeds["model"])
        save_model(model, out / "model.json", scaler, data.feature_names)
        artifacts.append("model.json")

    with stage("evaluate"):
        test_proba = predict_proba(model, test.x)
        metrics = evaluate((test_proba >= 0.5).astype(np.int64), test.y)
        train_metrics = evaluate((predict_proba(model, train.x) >= 0.5).astype(np.int64), train.y)

    with stage("predict"):
        proba = predict_proba(model, scaled.x)
        in_test = np.zeros(data.n, dtype=bool)
        in_test[parts.test_rows] = True
        with open(out / "predictions.csv", "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["id", "split", "label", "probability", "predicted"])
            for i in range(data.n):
                w.writerow([data.ids[i], "test" if in_test[i] else "train", int(data.y[i]),
                            repr(float(proba[i])), int(proba[i] >= 0.5)])
        artifacts.append("predictions.csv")

    with stage("cluster"):
        expr_col = config.cluster.expression_column or _default_expression(data.feature_names)
        points = build_cluster_space(scaled, proba, expr_col)
        result = kmeans(points, config.cluster.k, seeds["cluster"], config.cluster.restarts)
        top, members = top_cluster(result, points)
        write_cluster_outputs(points, result, top, members, expr_col,
                              out / "clusters.csv", out / "clusters.json")
        artifacts += ["clusters.csv", "clusters.json"]

    n_terms = None
    if config.enrich is not None:
        with stage("enrich"):
            if config.enrich.annotations is None:
                raise IoError("enrichment requested but no annotation file given")
            annotations = read_annotations(config.enrich.annotations)
            records = enrich(members, data.ids, annotations, config.enrich.namespace)
            write_enrichment(records, out / "enrichment.csv")
            artifacts.append("enrichment.csv")
            n_terms = len(records)

    with stage("correlate"):
        ranked = feature_label_correlation(data)
        svg = out / "correlations.svg" if config.correlation.svg else None
        emit_correlation_chart(ranked, config.correlation.top, out / "correlations.csv", svg)
        artifacts.append("correlations.csv")
        if svg is not None:
            artifacts.append("correlations.svg")

    manifest = {
        "format_version": MANIFEST_VERSION,
        "created_at": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "config": config.to_dict(),
        "seeds": seeds,
        "dataset": {**fingerprint(data), "dropped_rows": data.n_dropped},
        "split": {"train": train.n, "test": test.n},
        "metrics": {"test": metrics.to_dict(), "train": train_metrics.to_dict()},
        "clusters": {"k": config.cluster.k, "expression": expr_col, "top": top,
                     "top_size": len(members), "objective": result.objective},
        "enrichment": None if n_terms is None else {"terms_tested": n_terms},
        "artifacts": [{"name": a, "bytes": (out / a).stat().st_size, "sha256": _sha256(out / a)}
                      for a in artifacts],
        "timings": stage.timings,
    }
    with stage("write"):
        with open(out / "manifest.json", "w", encoding="utf-8") as fh:
            json.dump(manifest, fh, indent=2)
            fh.write("\n")
    log.info("run finished: test accuracy %.4f", metrics.accuracy)
    return manifest


def write_cluster_outputs(points, result, top, members, expression, csv_path, json_path):
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", "expression", "probability", "cluster"])
        for p, c in zip(points, result.assignments):
            w.writerow([p.id, repr(p.expression), repr(p.probability), int(c)])
    summary = {
        "k": int(result.centroids.shape[0]),
        "expression": expression,
        "centroids": result.centroids.tolist(),
        "objective": result.objective,
        "iterations": result.iterations,
        "seed": int(result.seed),
        "top_cluster": top,
        "top_members": members,
    }
    with open(json_path, "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")
