#!/usr/bin/env python3
"""Offline seed sweep on the no-saddle single-element toy.

Derives the accuracy-driven schedule for the requested target, runs the
vectorized multi-seed sweep, and prints per-seed and aggregate gap numbers.
"""

import argparse

import numpy as np

from subsaddle import derive_hyperparameters, make_example_b1
from subsaddle.sweep import seed_sweep


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--epsilon", type=float, default=0.1)
    ap.add_argument("--seeds", type=int, default=20)
    ap.add_argument("--start", type=float, nargs=2, default=None,
                    metavar=("X0", "Y0"))
    args = ap.parse_args()

    fn = make_example_b1()
    config = derive_hyperparameters(fn, args.epsilon)
    print(f"schedule: horizon={config.horizon} mu={config.oracle.mu:.4g} "
          f"h1={config.h1:.4g} h2={config.h2:.4g}")
    z0 = np.array(args.start) if args.start else None
    res = seed_sweep(fn, config, seeds=range(args.seeds), z0=z0)
    print(f"{args.seeds} seeds x {res.iterations} iterations")
    print(f"average probe gap:  mean {res.avg_gap.mean():.5f}  "
          f"max {res.avg_gap.max():.5f}")
    print(f"best probe gap:     mean {res.best_gap.mean():.5f}")
    print(f"best y:             {np.round(res.best_y, 4)}")
    print(f"ergodic probe mean: x {res.ergodic_x.mean():.4f}  y {res.ergodic_y.mean():.4f}")


if __name__ == "__main__":
    main()
