"""Property tests over randomly drawn models, sizes and series."""

import math
from fractions import Fraction

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from logtree import asympt, exact
from logtree.generate import generate_profiles
from logtree.model import TreeModelSpec, format_model_spec, parse_model_spec, width_and_mode
from logtree.series import Series

small = st.integers(min_value=1, max_value=6)
coef = st.fractions(min_value=0, max_value=5, max_denominator=7)

models = st.one_of(
    st.sampled_from([TreeModelSpec("recursive"), TreeModelSpec("port"), TreeModelSpec("mobile")]),
    st.builds(lambda m, t: TreeModelSpec("mary", m=m, t=t), st.integers(2, 6), st.integers(0, 4)),
    st.builds(lambda d: TreeModelSpec("quad", d=d), small),
    st.builds(lambda m, d: TreeModelSpec("grid", m=m, d=d), st.integers(2, 6), small),
    st.builds(lambda head, mid, top: TreeModelSpec("increasing", phi=(head, *mid, top)),
              coef.filter(lambda c: c > 0), st.lists(coef, min_size=1, max_size=3),
              coef.filter(lambda c: c > 0)),
)
split_models = models.filter(lambda m: m.family not in ("increasing", "mobile"))


@given(models)
def test_model_round_trip(spec):
    text = format_model_spec(spec)
    assert parse_model_spec(text) == spec
    assert format_model_spec(parse_model_spec(text)) == text


@given(st.lists(st.integers(0, 50), min_size=1, max_size=12).filter(lambda c: max(c) > 0),
       st.integers(0, 5))
def test_width_ignores_trailing_zeros(counts, pad):
    assert width_and_mode(counts) == width_and_mode(counts + [0] * pad)


@settings(max_examples=60, deadline=None)
@given(split_models, st.integers(2, 60))
def test_split_rows_sum_to_one(model, n):
    if n < (model.sample_size or 1):
        return
    law = exact.split_distribution(model, n, exact=True)
    assert law.total() == 1
    assert all(p >= 0 for p in law.probs)
    assert abs(exact.split_distribution(model, n, exact=False).total() - 1) < 1e-12


@settings(max_examples=25, deadline=None)
@given(split_models.filter(lambda m: m.family in ("recursive", "port", "quad")), st.integers(1, 30))
def test_profile_rows_sum_to_n(model, n):
    tab = exact.expected_profile_dp(model, n, exact=True)
    assert tab.row_sum(n) == n
    assert tab.value(n, 0) == 1


@given(st.lists(st.fractions(-3, 3, max_denominator=9), min_size=1, max_size=7))
def test_series_exp_log(tail):
    a = Series([Fraction(1)] + tail)
    assert a.log().exp() == a
    assert (a * a.inverse()).tolist() == [1] + [0] * len(tail)


@given(st.lists(st.fractions(-3, 3, max_denominator=9), min_size=2, max_size=7),
       st.lists(st.fractions(-3, 3, max_denominator=9), min_size=2, max_size=7))
def test_series_truncation(a, b):
    n = min(len(a), len(b))
    full = (Series(a[:n]) * Series(b[:n])).tolist()
    cut = (Series(a[:n - 1]) * Series(b[:n - 1])).tolist()
    assert full[:n - 1] == cut


@given(st.floats(0, 1, exclude_max=True))
def test_selector_is_a_step(x):
    sel = asympt.selector(x)
    assert sel == (-1 if x <= 1 - asympt.EULER_GAMMA else 0)
    if abs(x - (1 - asympt.EULER_GAMMA)) > 1e-12:
        assert asympt.p_ell(x, sel) >= asympt.p_ell(x, -1 - sel)


@given(st.integers(2, 10 ** 9))
def test_mode_prediction_fields(n):
    mp = asympt.mode_prediction(n)
    assert mp.width_level in (math.floor(mp.L_n) - 1, math.floor(mp.L_n))
    assert 0 <= mp.frac < 1


@settings(max_examples=20, deadline=None)
@given(st.sampled_from(["recursive", "port", "quad:d=2", "mary:m=3,t=1", "mobile"]),
       st.integers(1, 60), st.integers(0, 2 ** 63), st.integers(0, 10 ** 6))
def test_generation_is_deterministic(model, n, seed, index):
    a = generate_profiles(model, n, seed, np.array([index]))
    b = generate_profiles(model, n, seed, np.array([index]))
    assert np.array_equal(a, b)
    assert a[0, 0] == 1
