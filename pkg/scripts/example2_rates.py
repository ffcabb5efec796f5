"""L2 convergence of the tamed delay scheme on Example 2 (y_t = x_{t-1}).

    python scripts/example2_rates.py --levels 5:8 --ref-level 12 --paths 300
"""

import argparse

from tamed_levy import ExperimentConfig, strong_error
from tamed_levy.cli import parse_levels

parser = argparse.ArgumentParser()
parser.add_argument("--levels", type=parse_levels, default=list(range(5, 9)))
parser.add_argument("--ref-level", type=int, default=12)
parser.add_argument("--paths", type=int, default=300)
parser.add_argument("--seed", type=int, default=42)
parser.add_argument("--out", default="example2_rates.csv")
args = parser.parse_args()

report = strong_error(ExperimentConfig("example2", args.levels, args.ref_level, args.paths, args.seed))
with open(args.out, "w", newline="\n") as fh:
    fh.write(report.to_csv())
for row in report.levels:
    print(row.level, f"{row.l2_error:.6g}")
print(f"fitted L2 rate {report.fitted_rate_l2:.3f}")
