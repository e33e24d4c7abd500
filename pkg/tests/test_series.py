import math
from fractions import Fraction as F

import numpy as np
import pytest
from scipy import special

from logtree import exact, series
from logtree.series import Series


def test_log_of_geometric():
    a = Series([1] * 8).log()
    assert a.tolist() == [0] + [F(1, j) for j in range(1, 8)]


def test_binomial_power():
    got = Series([1, -2, 0, 0, 0, 0]).pow(F(1, 2)).tolist()
    want = [F(special.binom(0.5, j)).limit_denominator(1000) * (-2) ** j for j in range(6)]
    assert got == want


def test_integral_termwise():
    assert Series([3, 4, 5, 0]).integral().tolist() == [0, 3, 2, F(5, 3)]


def test_exp_log_round_trip():
    a = Series([1, F(1, 3), -2, 5, F(7, 2)])
    assert a.log().exp() == a
    assert a.pow(1) == a


def test_float_mode_agrees():
    a = Series([1, F(1, 3), -2, 5, F(7, 2)])
    b = Series(np.array([1, 1 / 3, -2, 5, 3.5]))
    assert np.allclose(b.log().exp().c, [float(x) for x in a.tolist()])


def test_log_exp_preconditions():
    with pytest.raises(ValueError):
        Series([2, 1]).log()
    with pytest.raises(ValueError):
        Series([1, 1]).exp()


def test_truncation_consistency():
    a, b = Series([1, 2, 3, 4]), Series([5, 6, 7, 8])
    full = (a * b).tolist()
    short = (Series([1, 2, 3]) * Series([5, 6, 7])).tolist()
    assert full[:3] == short


@pytest.mark.parametrize("phi,n,want", [
    ("exp", 4, 6), ("plane", 3, 3), ("mobile", 3, 2), ("plane", 5, 105), ("mobile", 5, 36),
])
def test_tree_counts(phi, n, want):
    assert series.tree_counts(phi, n)[n] == want


def test_exp_counts_are_factorials():
    taus = series.tree_counts(lambda j: F(1, math.factorial(j)), 30)
    assert taus[1:] == [math.factorial(n - 1) for n in range(1, 31)]


def test_generator_phi_must_be_normalised():
    with pytest.raises(ValueError):
        series.solve_tree_ode([2, 1, 1], 5)


def test_period_pattern():
    taus = series.tree_counts([1, 0, 1, 0, 1], 12)
    assert series.period([1, 0, 1, 0, 1]) == 2
    assert all(taus[n] == 0 for n in range(2, 13, 2))
    assert all(taus[n] > 0 for n in range(1, 13, 2))


def test_radius_values():
    assert series.radius([1, 2, 1]) == pytest.approx(1.0, rel=1e-12)
    assert series.radius([1, 0, 1]) == pytest.approx(math.pi / 2, rel=1e-12)
    assert series.radius("mobile") == pytest.approx(0.5963473623231940, rel=1e-12)


@pytest.mark.parametrize("phi,n", [([1, 2, 1], 200), ([1, 1, 1], 200), ([1, 0, 0, 1], 199)])
def test_tau_ratio_near_one(phi, n):
    assert 0.9 <= series.tau_asymptotic_ratio(phi, n) <= 1.1


def test_profile_rows_exact_identities():
    for model in ("increasing:phi=1,2,1", "increasing:phi=1,0,0,1", "mobile",
                  "increasing:phi=2,1/3,5"):
        rows = series.profile_table_increasing(model, 15, 14)
        for n, row in rows.items():
            assert row.total == n
            assert row.mu[0] == 1


def test_binary_increasing_is_bst():
    rows = series.profile_table_increasing("increasing:phi=1,2,1", 20, 19)
    tab = exact.expected_profile_dp("quad:d=1", 20, exact=True)
    for n in range(1, 21):
        assert list(rows[n].mu) == tab.row(n)[:20]


@pytest.mark.parametrize("model", ["mobile", "increasing:phi=1,2,1", "increasing:phi=1,0,0,1",
                                   "increasing:phi=1,1,1", "port", "recursive"])
def test_rows_match_enumeration(model):
    for n in (4, 7):
        if model.endswith("0,0,1") and n % 3 != 1:
            continue
        mu, _ = exact.moments_from_distribution(exact.enumerate_exact(model, n), 1)
        row = series.profile_row_increasing(model, n, n - 1, exact=True)
        assert list(row.mu) == list(mu) + [0] * (n - len(mu))


def test_float_row_close_to_exact():
    a = series.profile_row_increasing("mobile", 60, 20, exact=True)
    b = series.profile_row_increasing("mobile", 60, 20, exact=False)
    assert np.allclose([float(x) for x in a.mu], b.mu, rtol=1e-9)


def test_row_cap():
    with pytest.raises(ValueError):
        series.profile_row_increasing("mobile", 300, 5, exact=True)
