"""Command-line interface.

Subcommands: synth, clean, features, tune, train, predict, evaluate,
benchmark. Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric
failure. A JSON config file (--config) may supply any experiment field;
explicit flags take precedence over it.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import sys

from . import lssvm
from .data_io import DataError, atomic_write_text, load_csv, load_model, save_model, write_series_csv
from .experiment import (
    ExperimentConfig,
    PERSISTENCE,
    prepare_data,
    run_experiment,
    summary_table,
    write_report,
)
from .metrics import metric_report
from .pipeline import (
    LaggedDataset,
    SplitSpec,
    autocorrelation,
    clean,
    make_lagged_dataset,
    mi_ranking,
    split,
    take_lags,
)
from .swarm import SwarmConfig
from .synthetic import SyntheticSpec, generate_synthetic


class UsageError(Exception):
    """Bad flags or bad configuration; maps to exit code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _dataclass_from_dict(cls, d: dict):
    known = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(d) - known)
    if unknown:
        raise ValueError(f"unknown {cls.__name__} keys: {unknown}")
    return cls(**d)


def config_from_dict(d: dict) -> ExperimentConfig:
    """Build an ExperimentConfig from plain JSON data; unknown keys are rejected."""
    if not isinstance(d, dict):
        raise ValueError("config root must be a JSON object")
    d = dict(d)
    known = {f.name for f in dataclasses.fields(ExperimentConfig)}
    unknown = sorted(set(d) - known)
    if unknown:
        raise ValueError(f"unknown config keys: {unknown}")
    if isinstance(d.get("synthetic"), dict):
        synth = dict(d["synthetic"])
        if isinstance(synth.get("sinusoids"), list):
            synth["sinusoids"] = tuple((float(a), float(p)) for a, p in synth["sinusoids"])
        d["synthetic"] = _dataclass_from_dict(SyntheticSpec, synth)
    if isinstance(d.get("split"), dict):
        d["split"] = _dataclass_from_dict(SplitSpec, d["split"])
    if isinstance(d.get("swarm"), dict):
        d["swarm"] = _dataclass_from_dict(SwarmConfig, d["swarm"])
    if isinstance(d.get("strategies"), list):
        d["strategies"] = tuple(d["strategies"])
    for key in ("gamma_range", "sigma2_range"):
        if isinstance(d.get(key), list):
            d[key] = tuple(float(v) for v in d[key])
    return ExperimentConfig(**d)


def _add_input_args(p):
    p.add_argument("--in", dest="input", metavar="CSV", help="input series CSV")
    p.add_argument("--synth-n", type=int, help="synthetic series length (when no --in)")
    p.add_argument("--synth-seed", type=int, help="synthetic generator seed")


def _add_pipeline_args(p):
    p.add_argument("--n-lags", type=int, help="lag window length (default 100)")
    p.add_argument("--select-fraction", type=float, help="fraction of lags kept by MI (default 0.1)")
    p.add_argument("--mi-bins", type=int, help="histogram bins for MI (default 16)")
    p.add_argument("--z-threshold", type=float, help="outlier gate width (default 4.0)")
    p.add_argument("--train-frac", type=float)
    p.add_argument("--val-frac", type=float)
    p.add_argument("--test-frac", type=float)


def _add_swarm_args(p):
    p.add_argument("--population", type=int, help="swarm size (default 20)")
    p.add_argument("--iterations", type=int, help="optimizer iterations (default 50)")
    p.add_argument("--jumping-rate", type=float)
    p.add_argument("--jumping-percentage", type=float)
    p.add_argument("--n-transposons", type=int)
    p.add_argument("--lam", type=int, help="breeding period (default 3)")
    p.add_argument("--ce-mode", choices=("scheduled", "fixed"))
    p.add_argument("--ce-alpha", type=float)
    p.add_argument("--gamma-min", type=float)
    p.add_argument("--gamma-max", type=float)
    p.add_argument("--sigma2-min", type=float)
    p.add_argument("--sigma2-max", type=float)


def _add_experiment_args(p):
    p.add_argument("--config", metavar="JSON", help="config file; flags take precedence")
    p.add_argument("--trials", type=int, help="number of trials (default 5)")
    p.add_argument("--base-seed", type=int, help="seed of trial 0 (default 42)")
    p.add_argument("--outdir", help="output directory (default results)")
    _add_input_args(p)
    _add_pipeline_args(p)
    _add_swarm_args(p)


def _resolve_config(args) -> ExperimentConfig:
    try:
        if getattr(args, "config", None):
            with open(args.config, "r", encoding="utf-8") as fh:
                try:
                    raw = json.load(fh)
                except json.JSONDecodeError as exc:
                    raise ValueError(f"{args.config}: invalid JSON: {exc}") from None
            cfg = config_from_dict(raw)
        else:
            cfg = ExperimentConfig()

        if getattr(args, "input", None):
            cfg = dataclasses.replace(cfg, input_csv=args.input, synthetic=None)
        elif cfg.input_csv is None:
            synth = cfg.synthetic or SyntheticSpec()
            over = {}
            if getattr(args, "synth_n", None) is not None:
                over["n"] = args.synth_n
            if getattr(args, "synth_seed", None) is not None:
                over["seed"] = args.synth_seed
            cfg = dataclasses.replace(cfg, synthetic=dataclasses.replace(synth, **over))

        for attr in ("n_lags", "select_fraction", "mi_bins", "z_threshold", "trials", "base_seed", "outdir"):
            v = getattr(args, attr, None)
            if v is not None:
                cfg = dataclasses.replace(cfg, **{attr: v})

        fracs = {}
        for attr in ("train_frac", "val_frac", "test_frac"):
            v = getattr(args, attr, None)
            if v is not None:
                fracs[attr] = v
        if fracs:
            cfg = dataclasses.replace(cfg, split=dataclasses.replace(cfg.split, **fracs))

        swarm_over = {}
        for attr, fld in (
            ("population", "population"),
            ("iterations", "max_iter"),
            ("jumping_rate", "jumping_rate"),
            ("jumping_percentage", "jumping_percentage"),
            ("n_transposons", "n_transposons"),
            ("lam", "lam"),
            ("ce_mode", "ce_mode"),
            ("ce_alpha", "ce_alpha"),
        ):
            v = getattr(args, attr, None)
            if v is not None:
                swarm_over[fld] = v
        if swarm_over:
            cfg = dataclasses.replace(cfg, swarm=dataclasses.replace(cfg.swarm, **swarm_over))

        ranges = {}
        if getattr(args, "gamma_min", None) is not None or getattr(args, "gamma_max", None) is not None:
            lo = args.gamma_min if args.gamma_min is not None else cfg.gamma_range[0]
            hi = args.gamma_max if args.gamma_max is not None else cfg.gamma_range[1]
            ranges["gamma_range"] = (lo, hi)
        if getattr(args, "sigma2_min", None) is not None or getattr(args, "sigma2_max", None) is not None:
            lo = args.sigma2_min if args.sigma2_min is not None else cfg.sigma2_range[0]
            hi = args.sigma2_max if args.sigma2_max is not None else cfg.sigma2_range[1]
            ranges["sigma2_range"] = (lo, hi)
        if ranges:
            cfg = dataclasses.replace(cfg, **ranges)

        if getattr(args, "strategy", None):
            cfg = dataclasses.replace(cfg, strategies=(args.strategy,))

        cfg.validate()
    except (ValueError, TypeError) as exc:
        raise UsageError(str(exc)) from None
    except FileNotFoundError as exc:
        raise UsageError(f"config file not found: {exc.filename}") from None
    return cfg


# ---------------------------------------------------------------- commands


def cmd_synth(args):
    try:
        spec = SyntheticSpec(n=args.n, seed=args.seed, mean=args.mean)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    series = generate_synthetic(spec)
    write_series_csv(series, args.out)
    print(f"wrote {len(series)} samples to {args.out}")
    return 0


def cmd_clean(args):
    if args.z_threshold is not None and args.z_threshold <= 0:
        raise UsageError("--z-threshold must be positive")
    series = load_csv(args.input)
    cleaned, replaced = clean(series, args.z_threshold if args.z_threshold is not None else 4.0)
    write_series_csv(cleaned, args.out)
    print(f"replaced {replaced} of {len(series)} samples; wrote {args.out}")
    return 0


def cmd_features(args):
    cfg = _resolve_config(args)
    series = generate_synthetic(cfg.synthetic) if cfg.input_csv is None else load_csv(cfg.input_csv)
    cleaned, _ = clean(series, cfg.z_threshold)
    ds = make_lagged_dataset(cleaned, cfg.n_lags)
    n_train = int(cfg.split.train_frac * ds.n_rows)
    train_rows = LaggedDataset(ds.features[:n_train], ds.targets[:n_train], ds.lag_indices)
    ranked = mi_ranking(train_rows, cfg.mi_bins)
    keep = math.ceil(cfg.select_fraction * ds.n_features)

    os.makedirs(args.outdir or "features", exist_ok=True)
    outdir = args.outdir or "features"
    lines = ["rank,lag,mi,selected"]
    for rank, (lag, mi) in enumerate(ranked, start=1):
        lines.append(f"{rank},{lag},{mi!r},{int(rank <= keep)}")
    atomic_write_text(os.path.join(outdir, "mi_ranking.csv"), "\n".join(lines) + "\n")

    corr = autocorrelation(cleaned, cfg.n_lags)
    lines = ["lag,correlation"]
    for k in range(1, cfg.n_lags + 1):
        lines.append(f"{k},{float(corr[k - 1])!r}")
    atomic_write_text(os.path.join(outdir, "correlation.csv"), "\n".join(lines) + "\n")

    top = ", ".join(str(lag) for lag, _ in ranked[:keep])
    print(f"selected {keep} of {ds.n_features} lags by MI: {top}")
    print(f"wrote {outdir}/mi_ranking.csv and {outdir}/correlation.csv")
    return 0


def cmd_tune(args):
    cfg = _resolve_config(args)
    report = run_experiment(cfg)
    write_report(report, cfg.outdir)
    print(summary_table(report))
    print(f"report written to {cfg.outdir}/report.csv")
    return 0


def cmd_benchmark(args):
    cfg = _resolve_config(args)
    report = run_experiment(cfg)
    write_report(report, cfg.outdir)
    print(summary_table(report))
    print(f"report written to {cfg.outdir}/report.csv")
    failed = [t for t in report.trials if not t.ok]
    return 3 if len(failed) == len([t for t in report.trials if t.strategy != PERSISTENCE]) else 0


def cmd_train(args):
    cfg = _resolve_config(args)
    try:
        hp = lssvm.Hyperparams(args.gamma, args.sigma2)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    data = prepare_data(cfg)
    model = lssvm.train(data.train.features, data.train.targets, hp)
    save_model(model, args.model_out)
    meta = {
        "format": 1,
        "lags": list(data.selected_lags),
        "n_lags": cfg.n_lags,
        "z_threshold": cfg.z_threshold,
        "split": [cfg.split.train_frac, cfg.split.val_frac, cfg.split.test_frac],
    }
    atomic_write_text(args.model_out + ".meta.json", json.dumps(meta, sort_keys=True) + "\n")
    val_pred = lssvm.predict(model, data.val.features)
    from .metrics import rmse as _rmse

    print(
        f"trained on {data.train.n_rows} rows (lags {list(data.selected_lags)}); "
        f"validation rmse {_rmse(data.val.targets, val_pred):.4f}"
    )
    print(f"model written to {args.model_out} (+ .meta.json)")
    return 0


def _load_model_and_meta(args):
    model = load_model(args.model)
    meta_path = args.model + ".meta.json"
    if args.lags:
        lags = [int(tok) for tok in args.lags.split(",") if tok.strip()]
        meta = {"lags": lags, "n_lags": max(lags), "z_threshold": 4.0, "split": [0.6, 0.2, 0.2]}
    elif os.path.exists(meta_path):
        with open(meta_path, "r", encoding="utf-8") as fh:
            meta = json.load(fh)
    else:
        raise DataError(f"{meta_path} not found; pass --lags to describe the model's features")
    if len(meta["lags"]) != model.support_inputs.shape[1]:
        raise DataError(
            f"model expects {model.support_inputs.shape[1]} features but metadata lists {len(meta['lags'])} lags"
        )
    return model, meta


def _pipeline_for_model(args, meta):
    series = load_csv(args.input)
    cleaned, _ = clean(series, meta.get("z_threshold", 4.0))
    ds = make_lagged_dataset(cleaned, int(meta["n_lags"]))
    return take_lags(ds, meta["lags"])


def cmd_predict(args):
    model, meta = _load_model_and_meta(args)
    ds = _pipeline_for_model(args, meta)
    pred = lssvm.predict(model, ds.features)
    lines = ["index,actual,forecast,abs_error"]
    for i in range(ds.n_rows):
        err = float(abs(ds.targets[i] - pred[i]))
        lines.append(f"{i},{float(ds.targets[i])!r},{float(pred[i])!r},{err!r}")
    atomic_write_text(args.out, "\n".join(lines) + "\n")
    print(f"wrote {ds.n_rows} forecasts to {args.out}")
    return 0


def cmd_evaluate(args):
    model, meta = _load_model_and_meta(args)
    ds = _pipeline_for_model(args, meta)
    fr = meta.get("split", [0.6, 0.2, 0.2])
    train, val, test = split(ds, SplitSpec(*fr))
    block = {"train": train, "val": val, "test": test, "all": ds}[args.block]
    pred = lssvm.predict(model, block.features)
    m = metric_report(block.targets, pred)
    print(f"{args.block} block ({block.n_rows} rows): rmse={m.rmse:.4f} mae={m.mae:.4f} mape={m.mape:.2f}%")
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="windlssvm", description=__doc__)
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    p = sub.add_parser("synth", help="generate a synthetic series CSV")
    p.add_argument("--n", type=int, default=SyntheticSpec.n)
    p.add_argument("--seed", type=int, default=SyntheticSpec.seed)
    p.add_argument("--mean", type=float, default=SyntheticSpec.mean)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("clean", help="replace missing samples and outliers")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--z-threshold", type=float)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_clean)

    p = sub.add_parser("features", help="emit MI ranking and lag-correlation CSVs")
    _add_experiment_args(p)
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("tune", help="tune hyperparameters with one strategy")
    p.add_argument("--strategy", required=True, choices=("pso", "qpso", "ebqpso"))
    _add_experiment_args(p)
    p.set_defaults(func=cmd_tune)

    p = sub.add_parser("train", help="train a model at fixed hyperparameters")
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--sigma2", type=float, required=True)
    p.add_argument("--model-out", required=True)
    _add_experiment_args(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="apply a saved model to a series CSV")
    p.add_argument("--model", required=True)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--lags", help="comma-separated lag list when no .meta.json is present")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("evaluate", help="evaluate a saved model on a split block")
    p.add_argument("--model", required=True)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--lags")
    p.add_argument("--block", choices=("train", "val", "test", "all"), default="test")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("benchmark", help="run the full multi-strategy comparison")
    _add_experiment_args(p)
    p.set_defaults(func=cmd_benchmark)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if not getattr(args, "func", None):
        parser.print_help()
        return 1
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except lssvm.NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
