"""
Personalized rules against static calendar baselines
====================================================

Ten synthetic users, 5-fold cross-validation. BM1 rejects every call during
any event; BM2 rejects calls during events whose name contains a keyword
such as "meeting" or "lecture".
"""

from calbehav.evaluation import MiningConfig, compare_methods, summary_table
from calbehav.synth import cohort_bundles

by_user = {}
for generated in cohort_bundles():
    by_user[generated.bundle.name] = compare_methods(generated.bundle, MiningConfig(0.8), k=5, seed=0)

print(f"{'user':<8}" + "".join(f"{m:>10}" for m in ("CalBehav", "BM1", "BM2")))
for name, reports in by_user.items():
    print(f"{name:<8}" + "".join(f"{r.error_rate:>9.1f}%" for r in reports))

means = summary_table(by_user)
print(f"{'mean':<8}" + "".join(f"{v:>9.1f}%" for v in means.values()))
