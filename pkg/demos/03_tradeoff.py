"""
Confidence threshold versus coverage
====================================

Raising the threshold keeps fewer, surer rules. This prints the sweep and
writes gnuplot-ready columns to tradeoff.dat.
"""

import sys

from calbehav import run_bundle
from calbehav.evaluation import tradeoff_plot_data, tradeoff_sweep
from calbehav.synth import cohort_bundles

user = cohort_bundles(n_users=1)[0]
instances = run_bundle(user.bundle).instances
points = tradeoff_sweep(instances)

print(f"{'conf':>5} {'rules':>5} {'accuracy':>9} {'coverage':>9}")
for p in points:
    acc = "n/a" if p.mean_accuracy is None else f"{p.mean_accuracy:.1f}%"
    print(f"{p.threshold:>5.0%} {p.rule_count:>5} {acc:>9} {p.union_coverage:>8.1f}%")

out = sys.argv[1] if len(sys.argv) > 1 else "tradeoff.dat"
with open(out, "w") as fh:
    fh.write(tradeoff_plot_data(points))
print("wrote", out)
# gnuplot> plot "tradeoff.dat" using 1:2 with lp title "accuracy", "" using 1:3 with lp title "coverage"
