"""
Increasing trees from a degree function
=======================================

A family of increasing trees is fixed by phi, with tau' = phi(tau).  Expected
profiles come out of the generating function tau'(z)^u int tau'(v)^(1-u) dv.
Mobile trees (phi = 1 - log(1 - w)) are the odd ones out: their mode level
grows only like log L_n.
"""

import numpy as np

from logtree import exact, series

print("phi = e^w        :", series.tree_counts("exp", 7))
print("phi = 1/(1-w)    :", series.tree_counts("plane", 7))
print("phi = 1-log(1-w) :", series.tree_counts("mobile", 7))
print("phi = 1 + w^3    :", series.tree_counts([1, 0, 0, 1], 10))

# binary increasing trees have the same profile law as binary search trees
rows = series.profile_table_increasing("increasing:phi=1,2,1", 10, 9)
bst = exact.expected_profile_dp("quad:d=1", 10, exact=True)
print("\nn = 10 binary increasing:", [str(x) for x in rows[10].mu])
print("n = 10 search tree      :", [str(x) for x in bst.row(10)])

# mobile rows: the peak barely moves while n grows a hundredfold
for n in (100, 1000, 10000):
    row = series.profile_row_increasing("mobile", n, 10, exact=False, cap=10000)
    mu = np.array(row.mu)
    print(f"\nmobile n = {n}: peak level {int(np.argmax(mu))}, "
          f"first levels {np.round(mu[:6], 1).tolist()}")

# the count asymptotics tau_n / n! ~ const * R^-n * n^-(d-2)/(d-1)
for phi in ([1, 2, 1], [1, 1, 1], [1, 0, 0, 1]):
    print(f"\nphi = {phi}: R = {series.radius(phi):.6f}, "
          f"exact/asymptotic at n = 199: {series.tau_asymptotic_ratio(phi, 199):.5f}")
