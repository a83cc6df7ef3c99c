"""``pkdnet`` command line.

Exit codes: 0 success, 2 usage error, 3 data error, 4 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from ..analysis import enrich, feature_label_correlation, read_annotations, read_gene_set, write_enrichment
from ..cluster import build_cluster_space, kmeans, top_cluster
from ..dataset import CsvSchema, apply_scaler, fit_scaler, load_csv, split
from ..errors import ConfigError, DataError, NumericError, StageError, UsageError
from ..synthgen import SynthConfig, write_synth
from .charts import emit_correlation_chart
from .metrics import evaluate
from .persist import check_features, load_bundle, predict_proba, save_model
from .run import ModelChoice, RunConfig, run_pipeline, train_model, write_cluster_outputs

EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 2, 3, 4


def _read_config(path):
    if path is None:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    return doc


def _seed(args, cfg):
    seed = args.seed if args.seed is not None else cfg.get("seed")
    if seed is None:
        raise ConfigError("this command is randomized: pass --seed or set 'seed' in --config")
    return int(seed)


def _out_dir(args, cfg):
    out = Path(args.out_dir or cfg.get("out_dir") or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load(args, cfg):
    data_path = args.data or cfg.get("data")
    if data_path is None:
        raise ConfigError("--data is required")
    id_col = args.id_col if args.id_col is not None else cfg.get("id_col", "id")
    return load_csv(data_path, CsvSchema(args.label_col or cfg.get("label_col", "label"),
                                         None if id_col == "" else id_col))


def _scaled_with_model(args, cfg):
    data = _load(args, cfg)
    model, scaler, names = load_bundle(args.model)
    check_features(names, data.feature_names)
    x = apply_scaler(scaler, data.x) if scaler is not None else data.x
    return data, model, x


def _emit(doc):
    json.dump(doc, sys.stdout, indent=2)
    sys.stdout.write("\n")


def cmd_synth(args, cfg):
    params = {f: cfg[f] for f in SynthConfig.__dataclass_fields__ if f in cfg}
    for f in ("n_samples", "n_features", "n_informative", "positive_fraction", "class_separation"):
        v = getattr(args, f)
        if v is not None:
            params[f] = v
    params["seed"] = _seed(args, cfg)
    config = SynthConfig(**params)
    out = _out_dir(args, cfg)
    data, informative = write_synth(config, out / f"{args.name}.csv", out / f"{args.name}.json")
    _emit({"csv": str(out / f"{args.name}.csv"), "rows": data.n, "features": data.d,
           "positives": int(data.y.sum()), "informative": len(informative)})


def cmd_train(args, cfg):
    seed = _seed(args, cfg)
    data = _load(args, cfg)
    model_cfg = dict(cfg.get("model", {}))
    if args.kind:
        model_cfg["kind"] = args.kind
    choice = ModelChoice(**model_cfg)
    parts = split(data, args.test_fraction, seed)
    scaler = fit_scaler(parts.train.x)
    train = parts.train.with_x(apply_scaler(scaler, parts.train.x))
    test_x = apply_scaler(scaler, parts.test.x)
    model = train_model(choice, train, seed if choice.seed is None else choice.seed)
    out = _out_dir(args, cfg)
    save_model(model, out / "model.json", scaler, data.feature_names)
    metrics = evaluate((predict_proba(model, test_x) >= 0.5).astype(np.int64), parts.test.y)
    (out / "metrics.json").write_text(json.dumps(metrics.to_dict(), indent=2) + "\n")
    _emit({"model": str(out / "model.json"), "test": metrics.to_dict()})


def cmd_eval(args, cfg):
    data, model, x = _scaled_with_model(args, cfg)
    metrics = evaluate((predict_proba(model, x) >= args.threshold).astype(np.int64), data.y)
    _emit(metrics.to_dict())


def cmd_predict(args, cfg):
    data, model, x = _scaled_with_model(args, cfg)
    proba = predict_proba(model, x)
    out = _out_dir(args, cfg) / "predictions.csv"
    with open(out, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", "probability", "predicted"])
        for i, p in zip(data.ids, proba):
            w.writerow([i, repr(float(p)), int(p >= args.threshold)])
    _emit({"predictions": str(out), "rows": data.n})


def cmd_cluster(args, cfg):
    seed = _seed(args, cfg)
    data, model, x = _scaled_with_model(args, cfg)
    proba = predict_proba(model, x)
    scaled = data.with_x(x)
    expr = args.expression_col or ("fold_change" if "fold_change" in data.feature_names else "mean")
    points = build_cluster_space(scaled, proba, expr)
    result = kmeans(points, args.k, seed, args.restarts)
    top, members = top_cluster(result, points)
    out = _out_dir(args, cfg)
    write_cluster_outputs(points, result, top, members, expr,
                          out / "clusters.csv", out / "clusters.json")
    _emit({"top_cluster": top, "top_size": len(members), "objective": result.objective})


def cmd_rank(args, cfg):
    data = _load(args, cfg)
    ranked = feature_label_correlation(data)
    out = _out_dir(args, cfg)
    rows = emit_correlation_chart(ranked, args.top, out / "correlations.csv",
                                  out / "correlations.svg" if args.svg else None)
    _emit([{"feature": r.feature_name, "r": r.r} for r in rows])


def cmd_enrich(args, cfg):
    target = read_gene_set(args.target)
    if args.background:
        background = read_gene_set(args.background)
    elif args.data:
        background = set(_load(args, cfg).ids)
    else:
        raise ConfigError("enrich needs --background or --data")
    records = enrich(target, background, read_annotations(args.annotations), args.namespace)
    out = _out_dir(args, cfg) / "enrichment.csv"
    write_enrichment(records, out)
    _emit({"enrichment": str(out), "terms": len(records)})


def cmd_pipeline(args, cfg):
    if not cfg:
        raise ConfigError("pipeline needs --config")
    if args.seed is not None:
        cfg["seed"] = args.seed
    if args.out_dir:
        cfg["out_dir"] = args.out_dir
    if args.data:
        data = dict(cfg.get("data") or {})
        data.pop("synth", None)
        data["csv"] = args.data
        if args.label_col:
            data["label_col"] = args.label_col
        if args.id_col is not None:
            data["id_col"] = args.id_col or None
        cfg["data"] = data
    manifest = run_pipeline(RunConfig.from_dict(cfg))
    _emit({"out_dir": cfg.get("out_dir", "run"), "metrics": manifest["metrics"]["test"],
           "artifacts": [a["name"] for a in manifest["artifacts"]]})


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--data", help="input CSV")
    common.add_argument("--label-col", help="label column (default: label)")
    common.add_argument("--id-col", help="id column (default: id; empty string for none)")
    common.add_argument("--seed", type=int)
    common.add_argument("--out-dir")
    common.add_argument("--config", help="JSON file with defaults for any option")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="pkdnet", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("synth", parents=[common], help="write a synthetic dataset")
    s.add_argument("--n-samples", type=int)
    s.add_argument("--n-features", type=int)
    s.add_argument("--n-informative", type=int)
    s.add_argument("--positive-fraction", type=float)
    s.add_argument("--class-separation", type=float)
    s.add_argument("--name", default="synth")
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("train", parents=[common], help="split, scale and fit a model")
    s.add_argument("--kind", choices=("mlp", "stack"))
    s.add_argument("--test-fraction", type=float, default=0.2)
    s.set_defaults(func=cmd_train)

    for name, func, help_ in (("eval", cmd_eval, "metrics of a saved model on a CSV"),
                              ("predict", cmd_predict, "positive-class probabilities")):
        s = sub.add_parser(name, parents=[common], help=help_)
        s.add_argument("--model", required=True, help="model JSON written by train")
        s.add_argument("--threshold", type=float, default=0.5)
        s.set_defaults(func=func)

    s = sub.add_parser("cluster", parents=[common], help="k-means on (expression, probability)")
    s.add_argument("--model", required=True)
    s.add_argument("--k", type=int, default=3)
    s.add_argument("--restarts", type=int, default=10)
    s.add_argument("--expression-col")
    s.set_defaults(func=cmd_cluster)

    s = sub.add_parser("rank-features", parents=[common], help="feature/label correlations")
    s.add_argument("--top", type=int, default=20)
    s.add_argument("--svg", action="store_true")
    s.set_defaults(func=cmd_rank)

    s = sub.add_parser("enrich", parents=[common], help="GO term over-representation")
    s.add_argument("--target", required=True, help="gene ids, one per line")
    s.add_argument("--background", help="gene ids, one per line (default: ids in --data)")
    s.add_argument("--annotations", required=True, help="term_id/term_name/namespace/gene_id TSV")
    s.add_argument("--namespace", choices=("process", "function"))
    s.set_defaults(func=cmd_enrich)

    s = sub.add_parser("pipeline", parents=[common], help="run every stage from a config")
    s.set_defaults(func=cmd_pipeline)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _read_config(args.config)
        args.func(args, cfg)
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _code(exc.cause)
    except (UsageError, DataError, NumericError, OSError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _code(exc)
    return 0


def _code(exc):
    if isinstance(exc, NumericError):
        return EXIT_NUMERIC
    if isinstance(exc, (DataError, OSError)):
        return EXIT_DATA
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
