from fractions import Fraction as F

import numpy as np
import pytest

from logtree import exact
from logtree.model import parse_model_spec


@pytest.mark.parametrize("model,n,want", [
    ("port", 3, {1: F(2, 3), 2: F(1, 3)}),
    ("quad:d=1", 5, {j: F(1, 5) for j in range(5)}),
    ("mary:m=2,t=1", 4, {1: F(1, 2), 2: F(1, 2)}),
    ("quad:d=2", 2, {0: F(3, 4), 1: F(1, 4)}),
])
def test_split_laws(model, n, want):
    law = exact.split_distribution(model, n, exact=True)
    got = {j: p for j, p in law.as_dict().items() if p}
    assert got == want
    assert law.total() == 1


@pytest.mark.parametrize("model", ["port", "quad:d=3", "grid:m=3,d=2", "mary:m=3,t=1",
                                   "grid:m=4,d=3", "mary:m=2,t=2"])
def test_split_rows_sum_to_one(model):
    start = max(2, parse_model_spec(model).sample_size or 2)
    for n in range(start, 40):
        assert exact.split_distribution(model, n, exact=True).total() == 1
        assert abs(exact.split_distribution(model, n, exact=False).total() - 1) < 1e-12


def test_split_law_bucket_region():
    with pytest.raises(ValueError):
        exact.split_distribution("mary:m=3,t=1", 4)


def test_split_law_refuses_increasing():
    with pytest.raises(exact.NoSplitLaw):
        exact.split_distribution("mobile", 5)


def test_stirling_rows():
    assert list(exact.expected_profile_stirling(3)) == [1, F(3, 2), F(1, 2)]
    assert exact.expected_profile_stirling(4)[1] == F(11, 6)


def test_quad_dp_small():
    tab = exact.expected_profile_dp("quad:d=1", 3, exact=True)
    assert tab.value(3, 1) == F(4, 3)


def test_float_dp_matches_stirling():
    n = 2000
    tab = exact.expected_profile_dp("recursive", n, k_max=60, exact=False)
    ref = exact.expected_profile_stirling(n, k_max=60, exact=False)
    assert np.allclose(tab.mu[n][:61], ref, rtol=1e-10, atol=0)


@pytest.mark.parametrize("model", ["recursive", "port", "quad:d=2", "increasing:phi=1,2,1"])
def test_row_sums_are_n(model):
    if model.startswith("increasing"):
        from logtree.series import profile_table_increasing
        rows = profile_table_increasing(model, 20, 19)
        assert all(rows[n].total == n for n in rows)
        return
    tab = exact.expected_profile_dp(model, 40, exact=True)
    assert all(tab.row_sum(n) == n for n in range(1, 41))


@pytest.mark.parametrize("model", ["mary:m=3,t=1", "grid:m=3,d=2", "mary:m=2,t=1"])
def test_node_count_matches_row_sum(model):
    tab = exact.expected_profile_dp(model, 40, exact=True)
    count = exact.expected_node_count(model, 40, exact=True)
    assert all(tab.row_sum(n) == count[n] for n in range(1, 41))


def test_variance_example():
    tab = exact.central_moment_dp("recursive", 3, m_max=4, exact=True)
    assert tab.value(3, 1, 2) == F(1, 4)
    assert all(tab.value(n, k, 1) == 0 for n in range(1, 4) for k in range(3))


def test_closed_form_small():
    tab = exact.central_moment_dp("recursive", 50, m_max=2, exact=True)
    assert exact.closed_form_recursive_moments(3, 1, 2, tab) == F(1, 4)
    assert exact.closed_form_recursive_moments(50, 4, 2, tab) == tab.value(50, 4, 2)
    assert exact.closed_form_recursive_moments(20, 3, 1, tab) == 0


def test_variance_positive():
    tab = exact.central_moment_dp("recursive", 30, m_max=2, exact=True)
    for n in range(3, 31):
        for k in range(1, n - 1):
            assert tab.value(n, k, 2) > 0


@pytest.mark.parametrize("model,n,want", [
    ("recursive", 3, {(1, 2): F(1, 2), (1, 1, 1): F(1, 2)}),
    ("port", 3, {(1, 2): F(2, 3), (1, 1, 1): F(1, 3)}),
    ("quad:d=1", 3, {(1, 2): F(1, 3), (1, 1, 1): F(2, 3)}),
])
def test_enumeration(model, n, want):
    assert exact.enumerate_exact(model, n) == want


def test_enumeration_recursive_n4_level1():
    mu, _ = exact.moments_from_distribution(exact.enumerate_exact("recursive", 4), 2)
    assert mu[1] == F(11, 6)


def test_enumeration_mary_bucket():
    # m=2, t=1 needs 3 items before splitting: smaller trees are a single node
    assert exact.enumerate_exact("mary:m=2,t=1", 2) == {(1,): F(1)}


def test_enumeration_increasing_matches_dp():
    mu, P = exact.moments_from_distribution(exact.enumerate_exact("increasing:phi=1,2,1", 6), 3)
    tab = exact.central_moment_dp("quad:d=1", 6, m_max=3, exact=True)
    for k in range(6):
        assert mu[k] == tab.value(6, k)
        assert P[2][k] == tab.value(6, k, 2)


def test_enumeration_cap():
    with pytest.raises(ValueError):
        exact.enumerate_exact("recursive", 50)


def test_csv_round_trip_precision():
    tab = exact.expected_profile_dp("recursive", 4, exact=False)
    lines = tab.to_csv(n_min=4).splitlines()
    assert lines[0] == "n,k,value"
    assert float(lines[2].split(",")[2]) == tab.value(4, 1)


def test_uniform_bound_monitor_is_bounded():
    rep = exact.uniform_bound_monitor(n_max=300)
    for r, vals in rep.items():
        assert vals["max"] < 10
        assert np.all(np.isfinite(vals["per_n"]))


def test_recursive_integer_path_matches_generic():
    fast = exact.central_moment_dp("recursive", 30, m_max=5, exact=True)
    slow = exact.central_moment_dp("recursive", 30, m_max=5, exact=True, generic=True)
    assert (fast.mu == slow.mu).all()
    for m in range(1, 6):
        assert (fast.pm[m] == slow.pm[m]).all()
        assert (fast.q[m] == slow.q[m]).all()


def test_closed_form_at_boundary():
    tab = exact.central_moment_dp("recursive", 400, k_max=12, m_max=2, exact=True)
    cf = exact.closed_form_recursive_table(tab, 2)
    for n in (100, 250, 400):
        assert list(cf[n]) == list(tab.pm[2][n])
