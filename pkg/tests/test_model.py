from fractions import Fraction

import pytest

from logtree.model import (ModelError, Profile, TreeModelSpec, format_model_spec, log_scale,
                           parse_model_spec, width_and_mode)


@pytest.mark.parametrize("text,spec", [
    ("recursive", TreeModelSpec("recursive")),
    ("grid:m=3,d=2", TreeModelSpec("grid", m=3, d=2)),
    ("mary:m=2,t=5", TreeModelSpec("mary", m=2, t=5)),
    ("quad:d=1", TreeModelSpec("quad", d=1)),
    ("increasing:phi=1,2,1", TreeModelSpec("increasing", phi=(1, 2, 1))),
    ("mobile", TreeModelSpec("mobile")),
])
def test_parse(text, spec):
    assert parse_model_spec(text) == spec
    assert format_model_spec(spec) == text


def test_parse_fractions_and_decimals():
    s = parse_model_spec("increasing:phi=1,1/3,0.25")
    assert s.phi == (1, Fraction(1, 3), Fraction(1, 4))
    assert format_model_spec(s) == "increasing:phi=1,1/3,0.25"


@pytest.mark.parametrize("bad", [
    "tree", "recursive:m=2", "mary:m=1,t=0", "quad:d=0", "grid:m=2", "increasing:phi=1,2",
    "increasing:phi=0,1,1", "increasing:phi=1,1,0", "increasing:phi=1,-1,1", "mary:m=2,t=x",
])
def test_parse_rejects(bad):
    with pytest.raises(ModelError):
        parse_model_spec(bad)


def test_model_properties():
    assert parse_model_spec("mary:m=3,t=1").sample_size == 5
    assert parse_model_spec("grid:m=3,d=2").branching == 9
    assert parse_model_spec("quad:d=3").branching == 8
    assert parse_model_spec("recursive").incremental
    assert not parse_model_spec("mobile").incremental


@pytest.mark.parametrize("counts,want", [
    ([1, 2, 1], (2, 1, 1)),
    ([1, 1, 1], (1, 0, 3)),
    ([1, 3, 3, 1], (3, 1, 2)),
])
def test_width_and_mode(counts, want):
    ws = width_and_mode(Profile.from_counts(counts))
    assert (ws.width, ws.mode_level, ws.tie_count) == want
    assert width_and_mode(counts + [0, 0]) == ws


def test_width_and_mode_empty():
    with pytest.raises(ValueError):
        width_and_mode([0, 0])


def test_log_scale_floor():
    assert log_scale(1) == 1.0
    assert log_scale(2) == 1.0
    assert log_scale(1000) == pytest.approx(6.907755278982137)
