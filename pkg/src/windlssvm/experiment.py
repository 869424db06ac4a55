"""Multi-trial benchmark runner: pipeline, tuning, retraining, report emission.

Each trial reruns the optimizer with seed = base_seed + trial index; the data
pipeline itself is deterministic, so trials differ only through the optimizer
RNG. Seeds are shared across strategies, making the comparison paired. Report
files carry no wall-clock times (those are logged to stdout), so rerunning an
identical config reproduces every output file byte for byte.
"""

from __future__ import annotations

import dataclasses
import math
import os
import time
from dataclasses import dataclass, field

import numpy as np

from . import lssvm
from .data_io import atomic_write_text, save_model
from .metrics import MetricReport, hyperparam_space, metric_report, LssvmFitness
from .pipeline import LaggedDataset, SplitSpec, TimeSeries, clean, make_lagged_dataset, mi_ranking, split, take_lags
from .swarm import SwarmConfig, optimize_ebqpso, optimize_pso, optimize_qpso
from .synthetic import SyntheticSpec, generate_synthetic

OPTIMIZERS = {
    "pso": optimize_pso,
    "qpso": optimize_qpso,
    "ebqpso": optimize_ebqpso,
}

PERSISTENCE = "persistence"

REPORT_COLUMNS = (
    "kind",
    "strategy",
    "trial",
    "seed",
    "gamma",
    "sigma2",
    "rmse",
    "mae",
    "mape",
    "evaluations",
    "error",
)


@dataclass
class ExperimentConfig:
    input_csv: str | None = None
    synthetic: SyntheticSpec | None = None
    n_lags: int = 100
    select_fraction: float = 0.1
    mi_bins: int = 16
    z_threshold: float = 4.0
    split: SplitSpec = field(default_factory=SplitSpec)
    strategies: tuple[str, ...] = ("pso", "qpso", "ebqpso")
    swarm: SwarmConfig = field(default_factory=SwarmConfig)
    gamma_range: tuple[float, float] = (1e-4, 1e6)
    sigma2_range: tuple[float, float] = (8.0, 4e4)
    trials: int = 5
    base_seed: int = 42
    outdir: str = "results"
    mape_floor: float = 1e-6

    def validate(self):
        if (self.input_csv is None) == (self.synthetic is None):
            raise ValueError("exactly one of input_csv or synthetic must be set")
        if self.n_lags < 1:
            raise ValueError("n_lags must be positive")
        if not 0.0 < self.select_fraction <= 1.0:
            raise ValueError(f"select_fraction must lie in (0, 1], got {self.select_fraction}")
        if self.mi_bins < 1:
            raise ValueError("mi_bins must be positive")
        if self.z_threshold <= 0:
            raise ValueError("z_threshold must be positive")
        if not self.strategies:
            raise ValueError("at least one strategy required")
        for s in self.strategies:
            if s not in OPTIMIZERS:
                raise ValueError(f"unknown strategy {s!r}; choose from {sorted(OPTIMIZERS)}")
        if len(set(self.strategies)) != len(self.strategies):
            raise ValueError("duplicate strategies")
        if self.trials < 1:
            raise ValueError("trials must be positive")
        if self.base_seed < 0:
            raise ValueError("base_seed must be non-negative")
        g_lo, g_hi = self.gamma_range
        s_lo, s_hi = self.sigma2_range
        if g_lo <= 0 or g_lo >= g_hi or s_lo <= 0 or s_lo >= s_hi:
            raise ValueError("hyperparameter ranges must be positive and ordered")
        if self.mape_floor <= 0:
            raise ValueError("mape_floor must be positive")


@dataclass
class TrialResult:
    strategy: str
    trial: int
    seed: int
    gamma: float | None = None
    sigma2: float | None = None
    metrics: MetricReport | None = None
    evaluations: int | None = None
    wall_time: float | None = None
    error: str | None = None
    predictions: np.ndarray | None = None
    model: lssvm.LssvmModel | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


@dataclass
class ExperimentReport:
    trials: list[TrialResult]
    aggregates: dict[str, dict[str, tuple[float, float]]]
    selected_lags: tuple[int, ...]
    n_replaced: int
    test_targets: np.ndarray


def recompute_aggregates(trials) -> dict[str, dict[str, tuple[float, float]]]:
    """Mean and sample standard deviation per metric per strategy over the
    successful trials (std is 0 for a single trial)."""
    out: dict[str, dict[str, tuple[float, float]]] = {}
    strategies = []
    for tr in trials:
        if tr.strategy not in strategies:
            strategies.append(tr.strategy)
    for strat in strategies:
        rows = [tr for tr in trials if tr.strategy == strat and tr.ok]
        if not rows:
            continue
        out[strat] = {}
        for name in ("rmse", "mae", "mape"):
            vals = np.array([getattr(tr.metrics, name) for tr in rows])
            std = float(vals.std(ddof=1)) if vals.size > 1 else 0.0
            out[strat][name] = (float(vals.mean()), std)
    return out


def _load_series(config: ExperimentConfig) -> TimeSeries:
    if config.input_csv is not None:
        from .data_io import load_csv

        return load_csv(config.input_csv)
    return generate_synthetic(config.synthetic)


@dataclass
class PreparedData:
    """Pipeline output shared by every trial and strategy."""

    train: LaggedDataset
    val: LaggedDataset
    test: LaggedDataset
    selected_lags: tuple[int, ...]
    n_replaced: int
    persistence_pred: np.ndarray


def prepare_data(config: ExperimentConfig) -> PreparedData:
    """clean -> lag -> MI selection fitted on the train block -> split."""
    series = _load_series(config)
    cleaned, n_replaced = clean(series, config.z_threshold)
    ds = make_lagged_dataset(cleaned, config.n_lags)

    n_train = int(config.split.train_frac * ds.n_rows)
    train_rows = LaggedDataset(ds.features[:n_train], ds.targets[:n_train], ds.lag_indices)
    ranked = mi_ranking(train_rows, config.mi_bins)
    keep = math.ceil(config.select_fraction * ds.n_features)
    selected = tuple(lag for lag, _ in ranked[:keep])

    train, val, test = split(take_lags(ds, selected), config.split)
    # Naive one-step persistence on the test block: the lag-1 value.
    _, _, test_full = split(ds, config.split)
    persistence_pred = test_full.features[:, ds.lag_indices.index(1)].copy()
    return PreparedData(train, val, test, selected, n_replaced, persistence_pred)


def run_experiment(config: ExperimentConfig, log=print) -> ExperimentReport:
    """Execute the full protocol and return per-trial plus aggregate results.

    A failing trial/strategy combination is recorded with its error and the
    remaining combinations still run.
    """
    config.validate()
    data = prepare_data(config)
    log(
        f"data ready: {data.train.n_rows}/{data.val.n_rows}/{data.test.n_rows} rows, "
        f"lags {list(data.selected_lags)}, {data.n_replaced} samples replaced"
    )

    fitness = LssvmFitness(data.train, data.val)
    space = hyperparam_space(config.gamma_range, config.sigma2_range)
    sq_test = lssvm.pairwise_sq_dists(data.test.features, data.train.features)
    persistence_metrics = metric_report(data.test.targets, data.persistence_pred, config.mape_floor)

    trials: list[TrialResult] = []
    for trial in range(config.trials):
        seed = config.base_seed + trial
        for strat in config.strategies:
            result = TrialResult(strategy=strat, trial=trial, seed=seed)
            t0 = time.perf_counter()
            try:
                swarm_cfg = dataclasses.replace(config.swarm, seed=seed, dimension=2)
                opt = OPTIMIZERS[strat](fitness, space, swarm_cfg)
                hp = fitness.decode(opt.best_position)
                model = lssvm.train(
                    data.train.features, data.train.targets, hp, sq_dists=fitness.sq_train
                )
                pred = lssvm.predict(model, data.test.features, sq_dists=sq_test)
                result.gamma = hp.gamma
                result.sigma2 = hp.sigma2
                result.metrics = metric_report(data.test.targets, pred, config.mape_floor)
                result.evaluations = opt.evaluations
                result.predictions = pred
                result.model = model
            except (lssvm.NumericError, ValueError) as exc:
                result.error = f"{type(exc).__name__}: {exc}"
            result.wall_time = time.perf_counter() - t0
            trials.append(result)
            if result.ok:
                log(
                    f"trial {trial} {strat}: rmse={result.metrics.rmse:.4f} "
                    f"mae={result.metrics.mae:.4f} mape={result.metrics.mape:.2f}% "
                    f"gamma={result.gamma:.4g} sigma2={result.sigma2:.4g} "
                    f"evals={result.evaluations} ({result.wall_time:.1f}s)"
                )
            else:
                log(f"trial {trial} {strat}: FAILED: {result.error}")
        trials.append(
            TrialResult(
                strategy=PERSISTENCE,
                trial=trial,
                seed=seed,
                metrics=persistence_metrics,
                evaluations=0,
                wall_time=0.0,
                predictions=data.persistence_pred,
            )
        )

    return ExperimentReport(
        trials=trials,
        aggregates=recompute_aggregates(trials),
        selected_lags=data.selected_lags,
        n_replaced=data.n_replaced,
        test_targets=data.test.targets.copy(),
    )


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(float(v))  # plain-float repr round-trips exactly
    return str(v)


def write_report(report: ExperimentReport, outdir: str):
    """Emit report.csv, per-trial prediction CSVs and model binaries."""
    os.makedirs(outdir, exist_ok=True)
    rows = [",".join(REPORT_COLUMNS)]
    for tr in report.trials:
        m = tr.metrics
        rows.append(
            ",".join(
                _fmt(v)
                for v in (
                    "trial",
                    tr.strategy,
                    tr.trial,
                    tr.seed,
                    tr.gamma,
                    tr.sigma2,
                    m.rmse if m else None,
                    m.mae if m else None,
                    m.mape if m else None,
                    tr.evaluations,
                    tr.error or "",
                )
            )
        )
    for strat, agg in report.aggregates.items():
        for kind in ("mean", "std"):
            idx = 0 if kind == "mean" else 1
            rows.append(
                ",".join(
                    _fmt(v)
                    for v in (
                        kind,
                        strat,
                        None,
                        None,
                        None,
                        None,
                        agg["rmse"][idx],
                        agg["mae"][idx],
                        agg["mape"][idx],
                        None,
                        "",
                    )
                )
            )
    atomic_write_text(os.path.join(outdir, "report.csv"), "\n".join(rows) + "\n")

    actual = report.test_targets
    for tr in report.trials:
        if not tr.ok or tr.predictions is None or tr.strategy == PERSISTENCE:
            continue
        lines = ["index,actual,forecast,abs_error"]
        for i in range(actual.size):
            err = float(abs(actual[i] - tr.predictions[i]))
            lines.append(f"{i},{float(actual[i])!r},{float(tr.predictions[i])!r},{err!r}")
        atomic_write_text(
            os.path.join(outdir, f"predictions_{tr.strategy}_{tr.trial}.csv"),
            "\n".join(lines) + "\n",
        )
        if tr.model is not None:
            save_model(tr.model, os.path.join(outdir, f"model_{tr.strategy}_{tr.trial}"))


def summary_table(report: ExperimentReport) -> str:
    """Three-strategies-by-three-metrics table of mean +/- std, plus baseline."""
    lines = [f"{'strategy':<12} {'RMSE':>20} {'MAE':>20} {'MAPE (%)':>20}"]
    for strat, agg in report.aggregates.items():
        cells = [
            f"{agg[name][0]:.4f} +/- {agg[name][1]:.4f}" for name in ("rmse", "mae", "mape")
        ]
        lines.append(f"{strat:<12} {cells[0]:>20} {cells[1]:>20} {cells[2]:>20}")
    return "\n".join(lines)
