import json

import numpy as np
import pytest

from logtree import montecarlo as mc


def test_single_node_trees():
    sim = mc.simulate("recursive", 1, 37)
    assert sim.width_hist == {1: 37}
    assert sim.mode_hist == {0: 37}


def test_three_node_width_mean():
    reps = 100000
    sim = mc.simulate("recursive", 3, reps, seed=1)
    est, se = sim.width_moments()
    assert abs(est["mean"] - 1.5) <= 4 * se["mean"]


def test_bst_three_nodes():
    reps = 100000
    sim = mc.simulate("quad:d=1", 3, reps, seed=2)
    p = np.mean(sim.widths == 2)
    assert abs(p - 1 / 3) <= 4 * np.sqrt(p * (1 - p) / reps)


def test_summary_invariants():
    sim = mc.simulate("port", 200, 300, seed=4)
    assert sum(sim.width_hist.values()) == 300
    assert min(sim.mode_hist) >= 0 and max(sim.mode_hist) < sim.profiles.shape[1]
    assert np.all(sim.profiles.sum(axis=1) == 200)


@pytest.mark.parametrize("model", ["recursive", "quad:d=2", "mobile"])
def test_thread_count_does_not_matter(model):
    a = mc.simulate(model, 300, 700, seed=9, threads=1)
    b = mc.simulate(model, 300, 700, seed=9, threads=4)
    assert json.dumps(a.to_json(), sort_keys=True) == json.dumps(b.to_json(), sort_keys=True)


def test_merge_associative():
    whole = mc.simulate("recursive", 500, 90, seed=3)
    parts = [mc.simulate("recursive", 500, 30, seed=3, first=f) for f in (0, 30, 60)]
    left = parts[0].merge(parts[1]).merge(parts[2])
    right = parts[2].merge(parts[1].merge(parts[0]))
    for s in (left, right):
        assert np.array_equal(s.widths, whole.widths)
        assert np.array_equal(s.profiles, whole.profiles)
    with pytest.raises(ValueError):
        parts[0].merge(parts[2])


def test_jackknife_against_formula():
    rng = np.random.default_rng(0)
    x = rng.normal(size=400)
    est, se = mc.jackknife_moments(x)
    assert est["mean"] == pytest.approx(x.mean())
    assert est["var"] == pytest.approx(x.var(ddof=1))
    assert se["mean"] == pytest.approx(x.std(ddof=1) / np.sqrt(x.size), rel=1e-9)
    # brute-force leave-one-out for the variance
    loo = np.array([np.delete(x, i).var(ddof=1) for i in range(x.size)])
    brute = np.sqrt((x.size - 1) / x.size * np.sum((loo - loo.mean()) ** 2))
    assert se["var"] == pytest.approx(brute, rel=1e-9)
    loo4 = np.array([np.mean((np.delete(x, i) - np.delete(x, i).mean()) ** 4) for i in range(x.size)])
    assert se["m4"] == pytest.approx(np.sqrt((x.size - 1) / x.size * np.sum((loo4 - loo4.mean()) ** 2)),
                                     rel=1e-9)


def test_budget():
    with pytest.raises(mc.ResourceCapError):
        mc.simulate("recursive", 10 ** 7, 1000)
    with pytest.raises(mc.ResourceCapError):
        mc.simulate("recursive", 1000, 10, budget=5000)


def test_gate_fields():
    g = mc.width_gate("recursive", 20000, 30, seed=5)
    rec = g.to_json()
    assert set(rec) >= {"name", "measured", "reference", "tolerance", "pass", "provenance"}
    assert rec["provenance"]


def test_width_gate_rejects_mobile():
    with pytest.raises(ValueError):
        mc.width_gate("mobile", 100, 10)


def test_variance_gate_needs_three_sizes():
    with pytest.raises(ValueError):
        mc.variance_scaling_gate("recursive", [100, 1000], 10)


def test_mode_tail_probabilities():
    sim = mc.simulate("recursive", 20000, 100, seed=6)
    probs = mc.mode_tail_probabilities(sim, 1.0, [0, 2, 4, 8])
    assert probs[0] == 1.0
    assert all(b <= a for a, b in zip(probs, probs[1:]))


def test_profile_moments_enumeration():
    g = mc.profile_moment_gate("recursive", 8, 50000, seed=7)
    assert g.passed and g.provenance == "enumeration"


def test_profile_moments_recurrence():
    g = mc.profile_moment_gate("port", 120, 4000, m_max=2, seed=8)
    assert g.passed and g.provenance == "moment recurrence"


def test_profile_moments_need_table():
    with pytest.raises(ValueError):
        mc.profile_moment_gate("quad:d=2", 100, 10)


def test_tv_shrinks_with_reps():
    small = mc.tv_to_exact("recursive", 6, 10 ** 4, seed=1)
    large = mc.tv_to_exact("recursive", 6, 10 ** 6, seed=1)
    assert large < small


def test_figure1_refuses_few_reps():
    with pytest.raises(ValueError):
        mc.figure1_experiment(10000, 50)
    with pytest.raises(mc.ResourceCapError):
        mc.figure1_experiment(10 ** 7, 300)


def test_figure1_closest_is_minimal():
    rec = mc.figure1_experiment(30000, 120, seed=3)
    tv = {int(k): v for k, v in rec["tv"].items()}
    assert tv[rec["closest"]] == min(tv.values())


def test_convergence_record():
    rec = mc.convergence_experiment("recursive", 60, seed=2)
    assert rec["width_steps_ok"]
    assert len(rec["level_ratio"]) == len(rec["checkpoints"])


def test_quick_suite_deterministic():
    a = mc.run_gate_suite("quick", threads=1)
    b = mc.run_gate_suite("quick", threads=3)
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)
    assert a["passed"]


def test_head_equals_shorter_run():
    a = mc.simulate("port", 400, 50, seed=12).head(20)
    b = mc.simulate("port", 400, 20, seed=12)
    assert np.array_equal(a.widths, b.widths)
    assert np.array_equal(np.trim_zeros(a.profiles.sum(axis=0), "b"), np.trim_zeros(b.profiles.sum(axis=0), "b"))
