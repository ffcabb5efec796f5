"""Strong errors of the tamed scheme for Example 1 (jump SDE with quintic drift).

    python scripts/example1_rates.py --levels 5:10 --ref-level 15 --paths 1000

A fine-scale run such as --levels 11:20 --ref-level 21 takes hours of CPU time.
Writes a CSV and prints the fitted L1/L2 rates.
"""

import argparse
import sys

from tamed_levy import ExperimentConfig, strong_error
from tamed_levy.cli import parse_levels

parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
parser.add_argument("--levels", type=parse_levels, default=list(range(5, 11)))
parser.add_argument("--ref-level", type=int, default=15)
parser.add_argument("--paths", type=int, default=1000)
parser.add_argument("--seed", type=int, default=42)
parser.add_argument("--metric", choices=["terminal", "running_max"], default="terminal")
parser.add_argument("--workers", type=int, default=None)
parser.add_argument("--out", default="example1_rates.csv")
args = parser.parse_args()

report = strong_error(
    ExperimentConfig("example1", args.levels, args.ref_level, args.paths, args.seed, error_time=args.metric),
    workers=args.workers,
)
with open(args.out, "w", newline="\n") as fh:
    fh.write(report.to_csv())
print(f"{'step':>12} {'L2 error':>14} {'L1 error':>14}")
for row in reversed(report.levels):
    print(f"{'2^-%d' % row.level:>12} {row.l2_error:14.6g} {row.l1_error:14.6g}")
print(f"rate L2 {report.fitted_rate_l2:.3f}  L1 {report.fitted_rate_l1:.3f}  ({report.wall_time:.1f}s)", file=sys.stderr)
