"""Naive versus calibrated intervals across 21 prior means.

Defaults follow the first study: 20 coefficients, 30 training, 30
quantile-estimation and 300 test points, noise variance 4, ten seeds.
Pass ``sampling`` to use 100,000 posterior draws per cell (several minutes)
instead of the closed-form predictive.
"""

import sys
from pathlib import Path

from ensemble_calib import StudyConfig, run_study
from ensemble_calib.cli import main

mode = sys.argv[1] if len(sys.argv) > 1 else "analytic"
report = run_study(StudyConfig(mode=mode))
naive = report.series("naive")
cal = report.series("calibrated")
cal_w = report.series("calibrated", "mean_width")
naive_w = report.series("naive", "mean_width")
print(f"{'i':>4} {'naive cov':>10} {'calib cov':>10} {'naive w':>9} {'calib w':>9}")
for i in report.config.prior_means:
    print(f"{i:4d} {naive[i]:10.3f} {cal[i]:10.3f} {naive_w[i]:9.2f} {cal_w[i]:9.2f}")
print(f"saturated calibrated cells: {sum(r.saturated for r in report.rows)}")

# the same study through the command line, with charts
out = Path("demo_output") / f"first_study_{mode}"
main(["run-study", "--mode", mode, "--out", str(out)])
main(["plot", "--summary", str(out / "summary.csv"), "--out", str(out)])
