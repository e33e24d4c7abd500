"""
One tree, watched as it grows
=============================

Grow a single recursive tree to about a million nodes and look at the width at
the checkpoints n_l = floor(exp(sqrt(l))).  The ratio to n / sqrt(2 pi L_n)
settles down along the path.
"""

from logtree.montecarlo import convergence_experiment

rec = convergence_experiment("recursive", 190)
pts = rec["checkpoints"]
print("      n      W_n   k*   ratio")
for n, w, k, r in pts[::12] + [pts[-1]]:
    print(f"{n:8d} {w:8d} {k:3d}  {r:.4f}")

print(f"\nratio oscillation, first third: {rec['oscillation_first']:.4f}")
print(f"ratio oscillation, last third:  {rec['oscillation_last']:.4f}")
lr = [x for x in rec["level_ratio"] if x is not None]
print(f"Y_(n, floor L_n) / mu at the end: {lr[-1]:.4f}")
