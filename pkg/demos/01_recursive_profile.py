"""
Expected profile of a random recursive tree
===========================================

Node i picks its parent uniformly among nodes 1..i-1.  The expected number of
nodes at level k is the coefficient of u^k in prod_{1<=j<n} (1 + u/j), so
exact rows are cheap.  We compare an exact row, a seeded simulation and the
Gaussian approximation.
"""

import math

import numpy as np

from logtree import asympt, exact, simulate

n = 5000
row = exact.expected_profile_stirling(n, k_max=25, exact=False)

# 400 trees of 5000 nodes, reproducible from the default seed
sim = simulate("recursive", n, 400)
emp = sim.mean_profile
se = sim.profile_se

c = asympt.model_constants("recursive")
print(f"n = {n}, L_n = {math.log(n):.3f}")
print(" k      exact   simulated  (+-se)   gaussian")
for k in range(0, 20):
    g = asympt.gaussian_profile(n, k, c)
    e = emp[k] if k < emp.size else 0.0
    s = se[k] if k < se.size else 0.0
    print(f"{k:2d} {row[k]:10.2f} {e:10.2f} {s:7.2f} {g:10.2f}")

# the level sums are exactly n in rational mode
small = exact.expected_profile_stirling(12)
print("\nrow for n = 12:", [str(x) for x in small])
print("sum:", sum(small))

# the largest expected level sits at floor(L_n - 1 + gamma)
print("argmax of the exact row:", int(np.argmax(row)),
      " prediction:", asympt.mode_prediction(n).k_hat)
