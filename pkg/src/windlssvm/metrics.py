"""Forecast error metrics and the validation-RMSE fitness for hyperparameter search."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import lssvm
from .pipeline import LaggedDataset
from .swarm import SearchSpace

# Targets with magnitude at or below this floor make MAPE meaningless.
MAPE_EPSILON_FLOOR = 1e-6


@dataclass(frozen=True)
class MetricReport:
    mae: float
    rmse: float
    mape: float


def _check_pair(y, yhat):
    y = np.asarray(y, dtype=float).ravel()
    yhat = np.asarray(yhat, dtype=float).ravel()
    if y.size == 0:
        raise ValueError("empty input")
    if y.size != yhat.size:
        raise ValueError(f"length mismatch: {y.size} vs {yhat.size}")
    return y, yhat


def mae(y, yhat) -> float:
    """Mean absolute error."""
    y, yhat = _check_pair(y, yhat)
    return float(np.abs(y - yhat).mean())


def rmse(y, yhat) -> float:
    """Root mean squared error."""
    y, yhat = _check_pair(y, yhat)
    d = y - yhat
    return float(np.sqrt((d * d).mean()))


def mape(y, yhat, epsilon_floor: float = MAPE_EPSILON_FLOOR) -> float:
    """Mean absolute percentage error, in percent.

    Raises if any |y_i| <= epsilon_floor, naming the first offending index.
    """
    y, yhat = _check_pair(y, yhat)
    tiny = np.abs(y) <= epsilon_floor
    if tiny.any():
        i = int(np.flatnonzero(tiny)[0])
        raise ValueError(
            f"|y[{i}]| = {abs(y[i]):.3e} <= {epsilon_floor:.0e}; MAPE undefined"
        )
    return float((np.abs(y - yhat) / np.abs(y)).mean() * 100.0)


def metric_report(y, yhat, epsilon_floor: float = MAPE_EPSILON_FLOOR) -> MetricReport:
    return MetricReport(mae=mae(y, yhat), rmse=rmse(y, yhat), mape=mape(y, yhat, epsilon_floor))


class LssvmFitness:
    """Validation RMSE of an LSSVM trained at a log10-encoded hyperparameter point.

    A position (p0, p1) decodes to gamma = 10**p0, sigma2 = 10**p1. The
    training-set and validation-to-training squared distances are
    precomputed once (they do not depend on sigma2) and reused by every
    call. Solver failures yield +inf and bump ``numeric_failures``. Calls
    are pure and safe to issue concurrently.
    """

    def __init__(self, train: LaggedDataset, val: LaggedDataset):
        if train.lag_indices != val.lag_indices:
            raise ValueError("train and validation datasets use different lags")
        self.train = train
        self.val = val
        self.sq_train = lssvm.pairwise_sq_dists(train.features)
        self.sq_val = lssvm.pairwise_sq_dists(val.features, train.features)
        self.numeric_failures = 0

    def decode(self, position) -> lssvm.Hyperparams:
        position = np.asarray(position, dtype=float).ravel()
        if position.size != 2 or not np.isfinite(position).all():
            raise ValueError(f"position must be two finite log10 values, got {position!r}")
        return lssvm.Hyperparams(gamma=10.0 ** position[0], sigma2=10.0 ** position[1])

    def __call__(self, position) -> float:
        hp = self.decode(position)
        try:
            model = lssvm.train(self.train.features, self.train.targets, hp, sq_dists=self.sq_train)
        except lssvm.NumericError:
            self.numeric_failures += 1
            return np.inf
        pred = lssvm.predict(model, self.val.features, sq_dists=self.sq_val)
        return rmse(self.val.targets, pred)


def hyperparam_space(gamma_range=(1e-4, 1e6), sigma2_range=(8.0, 4e4)) -> SearchSpace:
    """Log10-scale search box over (gamma, sigma2)."""
    g_lo, g_hi = gamma_range
    s_lo, s_hi = sigma2_range
    if g_lo <= 0 or s_lo <= 0 or g_lo >= g_hi or s_lo >= s_hi:
        raise ValueError("hyperparameter ranges must be positive and ordered")
    return SearchSpace(
        lower=np.log10([g_lo, s_lo]),
        upper=np.log10([g_hi, s_hi]),
    )
