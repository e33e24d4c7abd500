"""
Quadtrees, grid trees and m-ary search trees
============================================

These families split their items among children according to an explicit law,
so expected profiles follow from a one-line recurrence.  Their profiles are
again Gaussian with drift v and variance sigma2 (both times L_n).
"""

import math

import numpy as np

from logtree import asympt, exact, simulate

models = ["quad:d=1", "quad:d=2", "grid:m=3,d=2", "mary:m=2,t=1", "mary:m=3,t=0"]

print("model           v        sigma2")
for name in models:
    c = asympt.model_constants(name)
    print(f"{name:14s} {str(c.v):8s} {str(c.sigma2)}")

# split laws are rational
print("\nfirst-part law, quad:d=2, n = 4:", exact.split_distribution("quad:d=2", 4).as_dict())

n = 2000
for name in models:
    tab = exact.expected_profile_dp(name, n, k_max=40, exact=False)
    sim = simulate(name, n, 200)
    emp = sim.mean_profile
    k = int(np.argmax(tab.mu[n]))
    print(f"\n{name}: exact peak level {k}, v L_n = {float(asympt.model_constants(name).v) * math.log(n):.2f}")
    for j in range(max(0, k - 2), k + 3):
        e = emp[j] if j < emp.size else 0.0
        print(f"  k={j:2d} exact {tab.mu[n][j]:8.2f}  simulated {e:8.2f}")

# central moments for two-part splits, exact in rational mode
mom = exact.central_moment_dp("quad:d=1", 12, m_max=2, exact=True)
print("\nVar Y_{12,k} for binary search trees:", [str(mom.value(12, k, 2)) for k in range(6)])
