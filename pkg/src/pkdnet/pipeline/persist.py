"""Versioned JSON model files.

Floats are written with ``repr`` (shortest round-trip form), so a loaded
model reproduces the saved one bit for bit.
"""

from __future__ import annotations

import json

import numpy as np

from ..dataset import ScalerParams
from ..ensemble import (
    GbmModel,
    LinearSvmModel,
    LogisticModel,
    RandomForestModel,
    StackEnsembleModel,
    predict_stack,
)
from ..ensemble.tree import DecisionTree
from ..errors import DimensionMismatch, IoError, MalformedModel, UnsupportedVersion
from ..mlp import MlpModel, predict_proba as mlp_proba

FORMAT_VERSION = 1


def _floats(a):
    return np.asarray(a, dtype=np.float64).tolist()


def _mlp_doc(m: MlpModel):
    return {"layer_sizes": list(m.layer_sizes), "activation": m.activation,
            "weights": [_floats(w) for w in m.weights],
            "biases": [_floats(b) for b in m.biases]}


def _stack_doc(m: StackEnsembleModel):
    for part, kind in ((m.svm, LinearSvmModel), (m.rf, RandomForestModel), (m.gbm, GbmModel)):
        if not isinstance(part, kind):
            raise TypeError(f"cannot persist a stack whose base learner is {type(part).__name__}")
    return {
        "n_folds": m.n_folds,
        "svm": {"w": _floats(m.svm.w), "b": m.svm.b,
                "platt_a": m.svm.platt_a, "platt_b": m.svm.platt_b},
        "rf": {"features_per_split": m.rf.features_per_split, "seed": int(m.rf.seed),
               "trees": [t.to_dict() for t in m.rf.trees]},
        "gbm": {"initial_score": m.gbm.initial_score, "learning_rate": m.gbm.learning_rate,
                "trees": [t.to_dict() for t in m.gbm.trees]},
        "meta": {"coefficients": _floats(m.meta.coefficients), "intercept": m.meta.intercept},
    }


def model_kind(model):
    if isinstance(model, MlpModel):
        return "mlp"
    if isinstance(model, StackEnsembleModel):
        return "stack"
    raise TypeError(f"unsupported model type {type(model).__name__}")


def dumps_model(model, scaler: ScalerParams | None = None, feature_names=None) -> str:
    kind = model_kind(model)
    doc = {"format_version": FORMAT_VERSION, "model_kind": kind,
           "model": _mlp_doc(model) if kind == "mlp" else _stack_doc(model)}
    if scaler is not None or feature_names is not None:
        pre = {}
        if feature_names is not None:
            pre["feature_names"] = list(feature_names)
        if scaler is not None:
            pre["scaler"] = {"means": _floats(scaler.means), "stds": _floats(scaler.stds),
                             "constant": [bool(c) for c in scaler.constant]}
        doc["preprocessing"] = pre
    return json.dumps(doc, allow_nan=False, separators=(",", ":")) + "\n"


def save_model(model, path, scaler: ScalerParams | None = None, feature_names=None):
    text = dumps_model(model, scaler, feature_names)
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise IoError(f"cannot write model to {path}: {exc}") from exc


def _parse(doc):
    if not isinstance(doc, dict) or "format_version" not in doc:
        raise MalformedModel("not a model document")
    if doc["format_version"] != FORMAT_VERSION:
        raise UnsupportedVersion(f"format_version {doc['format_version']!r} "
                                 f"(this build reads {FORMAT_VERSION})")
    kind, body = doc.get("model_kind"), doc.get("model")
    try:
        if kind == "mlp":
            model = MlpModel(body["layer_sizes"], body["weights"], body["biases"],
                             body.get("activation", "relu"))
        elif kind == "stack":
            s, r, g, m = body["svm"], body["rf"], body["gbm"], body["meta"]
            model = StackEnsembleModel(
                svm=LinearSvmModel(s["w"], s["b"], s["platt_a"], s["platt_b"]),
                rf=RandomForestModel([DecisionTree.from_dict(t) for t in r["trees"]],
                                     int(r["features_per_split"]), int(r["seed"])),
                gbm=GbmModel(float(g["initial_score"]),
                             [DecisionTree.from_dict(t) for t in g["trees"]],
                             float(g["learning_rate"])),
                meta=LogisticModel(m["coefficients"], m["intercept"]),
                n_folds=int(body["n_folds"]),
            )
        else:
            raise MalformedModel(f"unknown model_kind {kind!r}")
        pre = doc.get("preprocessing") or {}
        scaler = None
        if "scaler" in pre:
            sc = pre["scaler"]
            scaler = ScalerParams(sc["means"], sc["stds"], sc.get("constant"))
        names = pre.get("feature_names")
    except MalformedModel:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedModel(f"bad {kind} model body: {exc}") from exc
    return model, scaler, names


def load_bundle(path):
    """``(model, scaler or None, feature_names or None)`` from a model file."""
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise IoError(f"cannot read model {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedModel(f"{path} is not valid JSON: {exc}") from exc
    return _parse(doc)


def load_model(path):
    return load_bundle(path)[0]


def predict_proba(model, x):
    """Positive-class probabilities from either model kind."""
    x = np.asarray(x, dtype=np.float64)
    if isinstance(model, MlpModel):
        return mlp_proba(model, x)
    if isinstance(model, StackEnsembleModel):
        return predict_stack(model, x)[0]
    raise TypeError(f"unsupported model type {type(model).__name__}")


def check_features(expected, actual):
    if expected is not None and list(expected) != list(actual):
        raise DimensionMismatch("data columns do not match the columns the model was trained on")
