"""
Width and the level that carries it
===================================

The width W_n is the largest level count.  For recursive trees its mean is
close to n / sqrt(2 pi L_n), and the correction decays like 1 / L_n.  Which
level attains the width depends on the fractional part of L_n.
"""

import math

from logtree import asympt
from logtree.montecarlo import figure1_experiment, simulate, width_ratio

for n in (10 ** 3, 10 ** 4, 10 ** 5, 10 ** 6):
    ratio, se, ref, sim = width_ratio("recursive", n, 100)
    print(f"n = {n:>8d}  mean W = {sim.width_mean:10.1f}  reference = {ref:10.1f}  "
          f"ratio = {ratio:.4f} +- {se:.4f}")

# two sizes on opposite sides of the selector breakpoint 1 - gamma
for n in (404960, 10 ** 6):
    mp = asympt.mode_prediction(n)
    print(f"\nn = {n}: L_n = {mp.L_n:.4f}, frac = {mp.frac:.3f}, "
          f"predicted width level = {mp.width_level} (offset {mp.selector:+d})")

rec = figure1_experiment(404960, 120)
print("\ntotal variation between W_n and the level counts at n = 404960:")
for ell, tv in sorted(rec["tv"].items(), key=lambda kv: int(kv[0])):
    print(f"  level {rec['levels'][int(ell) + 1]:2d}  TV = {tv:.3f}")
print("closest offset:", rec["closest"])

# the mode k* concentrates around L_n
sim = simulate("recursive", 10 ** 5, 200)
print("\nmode histogram at n = 1e5:", sim.mode_hist, f"(L_n = {math.log(1e5):.2f})")
