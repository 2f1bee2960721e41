"""Probe how the variant-1 domination constant behaves as eps -> 0.

The first construction variant raises each slot exponent from p_j to
p_j + eps before building the collection.  Nothing in the argument controls
the constant as eps vanishes, so this script simply records the empirical
ratio theta_emp = lhs/rhs on a fixed corpus for a shrinking panel of eps and
prints the trend.  No assertion is made: this is an open-question probe.

Run:  python3 demos/threshold_growth_vs_eps.py
"""

import numpy as np

from sparsedom import GridSpec, build_sparse_collection, generate_corpus

spec = GridSpec(1, 7, periodic=True)
corpus = generate_corpus("mixed", 31, 20, spec, n_slots=2, n_components=2)

print(f"grid: d=1, 2^{spec.levels} cells, 20 mixed trials, p = (1, 1)\n")
print(f"{'eps':>8}  {'max theta_emp':>14}  {'mean theta_emp':>15}")

for eps in (2.0, 1.0, 0.5, 0.25, 0.125, 0.0625):
    thetas = []
    for tup in corpus:
        rep = build_sparse_collection(list(tup), (1.0, 1.0), (2.0, 2.0),
                                      eps=eps, variant=1)
        if rep.theta_emp is not None:
            thetas.append(rep.theta_emp)
    print(f"{eps:>8g}  {max(thetas):>14.3f}  {np.mean(thetas):>15.3f}")

print("\nthe ratio climbs as eps shrinks: the sparse form averages at")
print("p + eps approach the plain p-averages from above, so the dominating")
print("integral has less room.  How fast the true constant blows up (or")
print("whether it stays bounded) is exactly the open question.")
