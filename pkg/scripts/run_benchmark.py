#!/usr/bin/env python3
"""Run the three-strategy forecasting comparison on a synthetic series.

Profiles:
  reduced  n=1000, 20 lags, 15 iterations  (a couple of minutes on one core)
  full     n=4393, 100 lags, 50 iterations (hours on one core; scales with BLAS threads)
"""

import argparse
import sys
import time

from windlssvm.experiment import ExperimentConfig, run_experiment, summary_table, write_report
from windlssvm.swarm import SwarmConfig
from windlssvm.synthetic import SyntheticSpec

PROFILES = {
    "reduced": dict(n=1000, n_lags=20, max_iter=15),
    "full": dict(n=4393, n_lags=100, max_iter=50),
}


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--profile", choices=sorted(PROFILES), default="reduced")
    ap.add_argument("--outdir", default="results")
    ap.add_argument("--trials", type=int, default=5)
    ap.add_argument("--base-seed", type=int, default=42)
    ap.add_argument("--data-seed", type=int, default=7)
    args = ap.parse_args(argv)

    prof = PROFILES[args.profile]
    config = ExperimentConfig(
        synthetic=SyntheticSpec(n=prof["n"], seed=args.data_seed),
        n_lags=prof["n_lags"],
        swarm=SwarmConfig(max_iter=prof["max_iter"]),
        trials=args.trials,
        base_seed=args.base_seed,
        outdir=args.outdir,
    )

    t0 = time.perf_counter()
    report = run_experiment(config)
    write_report(report, config.outdir)
    print()
    print(summary_table(report))
    print(f"\ntotal wall time {time.perf_counter() - t0:.1f}s; files in {config.outdir}/")
    return 0


if __name__ == "__main__":
    sys.exit(main())
