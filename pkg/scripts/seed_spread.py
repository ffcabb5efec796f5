"""Spread of fitted rates across seeds, to judge how noisy a given path count is.

    python scripts/seed_spread.py example1 --levels 5:10 --ref-level 15 --paths 1000 --seeds 0:9
"""

import argparse

import numpy as np

from tamed_levy import ExperimentConfig, strong_error
from tamed_levy.cli import parse_levels

parser = argparse.ArgumentParser()
parser.add_argument("problem")
parser.add_argument("--levels", type=parse_levels, required=True)
parser.add_argument("--ref-level", type=int, required=True)
parser.add_argument("--paths", type=int, default=1000)
parser.add_argument("--seeds", type=parse_levels, default=list(range(10)))
parser.add_argument("--workers", type=int, default=None)
args = parser.parse_args()

rates = []
for seed in args.seeds:
    r = strong_error(ExperimentConfig(args.problem, args.levels, args.ref_level, args.paths, seed), workers=args.workers)
    l2 = r.l2_errors
    inversions = sum(b >= a for a, b in zip(l2, l2[1:]))
    rates.append((r.fitted_rate_l2, r.fitted_rate_l1))
    print(f"seed {seed}: rate L2 {r.fitted_rate_l2:.3f} L1 {r.fitted_rate_l1:.3f} inversions {inversions}", flush=True)
rates = np.array(rates)
print("mean", rates.mean(axis=0).round(3), "std", rates.std(axis=0, ddof=1).round(3))
