import numpy as np
import pytest
from scipy import stats

from logtree import exact
from logtree.generate import (GenerationError, GrowthSchedule, generate_depths, generate_profiles,
                              grow_checkpoints, profile_from_depths)
from logtree.rng import splitmix64, stream_seed, stream_seeds, uniforms

MODELS = ["recursive", "port", "quad:d=1", "quad:d=2", "grid:m=3,d=2", "mary:m=2,t=1",
          "mary:m=3,t=0", "increasing:phi=1,2,1", "mobile"]


def test_splitmix_reference():
    # first outputs of the SplitMix64 generator seeded with 0
    golden = 0x9E3779B97F4A7C15
    assert splitmix64(golden) == 0xE220A8397B1DCDAF
    assert splitmix64(2 * golden) == 0x6E789E6AA1B965F4


def test_vectorised_seeds_match_scalar():
    idx = np.arange(50)
    assert [int(x) for x in stream_seeds(7, idx)] == [stream_seed(7, i) for i in idx]
    u = uniforms(7, idx, 5)
    assert u.shape == (50, 5) and np.all((u >= 0) & (u < 1))
    assert np.array_equal(uniforms(7, idx, 3, start=2), u[:, 2:])


@pytest.mark.parametrize("depths,want", [([0], [1]), ([0, 1, 1], [1, 2]), ([0, 1, 2, 1], [1, 2, 1])])
def test_profile_from_depths(depths, want):
    assert list(profile_from_depths(depths).counts) == want


@pytest.mark.parametrize("model", MODELS)
def test_determinism_and_batch(model):
    a = generate_depths(model, 40, seed=3, index=5)
    assert np.array_equal(a, generate_depths(model, 40, seed=3, index=5))
    P = generate_profiles(model, 40, seed=3, indices=np.arange(8))
    single = np.bincount(a)
    assert np.array_equal(P[5][:len(single)], single)
    assert not np.any(P[5][len(single):])


@pytest.mark.parametrize("model", ["recursive", "port", "quad:d=2", "increasing:phi=1,2,1"])
def test_one_node_per_item(model):
    P = generate_profiles(model, 100, indices=np.arange(20))
    assert np.all(P.sum(axis=1) == 100)
    assert np.all(P[:, 0] == 1)


@pytest.mark.parametrize("model", ["recursive", "port", "quad:d=1", "mary:m=2,t=1",
                                   "increasing:phi=1,0,0,1", "mobile", "grid:m=3,d=1"])
def test_means_match_enumeration(model):
    n = 7
    reps = 40000
    mu, P = exact.moments_from_distribution(exact.enumerate_exact(model, n), 2)
    prof = generate_profiles(model, n, seed=11, indices=np.arange(reps))
    for k in range(len(mu)):
        y = prof[:, k] if k < prof.shape[1] else np.zeros(reps)
        se = np.sqrt(float(P[2][k]) / reps)
        if se == 0:
            assert np.all(y == float(mu[k]))
        else:
            assert abs(y.mean() - float(mu[k])) <= 4 * se


@pytest.mark.parametrize("model,want", [
    ("recursive", {(1, 2): 0.5, (1, 1, 1): 0.5}),
    ("port", {(1, 2): 2 / 3, (1, 1, 1): 1 / 3}),
    ("quad:d=1", {(1, 2): 1 / 3, (1, 1, 1): 2 / 3}),
])
def test_three_node_laws(model, want):
    reps = 60000
    P = generate_profiles(model, 3, seed=5, indices=np.arange(reps))
    p12 = np.mean(P[:, 1] == 2)
    assert abs(p12 - want[(1, 2)]) <= 4 * np.sqrt(want[(1, 2)] * (1 - want[(1, 2)]) / reps)


def test_bst_level_one():
    # the root's left subtree size is uniform on 0..n-1, so level 1 holds a single
    # node exactly when that size is 0 or n-1
    n, reps = 64, 20000
    P = generate_profiles("quad:d=1", n, seed=9, indices=np.arange(reps))
    ones = np.mean(P[:, 1] == 1)
    assert abs(ones - 2 / n) <= 4 * np.sqrt(2 / n / reps)


def test_bst_left_size_chi_square():
    n, reps = 64, 32000
    from logtree.generate import _draws
    # items arrive as uniform keys; the root holds the first, so its left
    # subtree size is the number of later keys below it
    u = _draws(4, np.arange(reps), n)
    left = np.sum(u[:, 1:] < u[:, :1], axis=1)
    counts = np.bincount(left, minlength=n)
    assert stats.chisquare(counts).pvalue > 1e-3


def test_increasing_cap():
    with pytest.raises(GenerationError):
        generate_depths("mobile", 5000)
    with pytest.raises(GenerationError):
        generate_depths("recursive", 0)


def test_growth_schedule():
    s = GrowthSchedule.default(190)
    c = s.checkpoints
    assert c[0] == 1 and all(b > a for a, b in zip(c, c[1:]))
    assert c[-1] == int(np.floor(np.exp(np.sqrt(190))))
    with pytest.raises(ValueError):
        GrowthSchedule((3, 3))
    with pytest.raises(ValueError):
        GrowthSchedule((0, 2))


def test_growth_small_checkpoints():
    tr = grow_checkpoints("recursive", GrowthSchedule((1, 2, 3)), seed=8)
    w = tr.widths()
    assert w[0] == 1 and w[1] == 1 and w[2] in (1, 2)


@pytest.mark.parametrize("model", ["recursive", "port", "quad:d=2", "mary:m=2,t=0"])
def test_growth_width_steps(model):
    sched = GrowthSchedule(tuple(range(1, 400)))
    w = grow_checkpoints(model, sched, seed=2).widths()
    assert np.all(np.abs(np.diff(w)) <= 1)


@pytest.mark.parametrize("model", ["recursive", "quad:d=2", "mary:m=3,t=1"])
def test_growth_final_matches_direct(model):
    sched = GrowthSchedule((10, 100, 1000))
    tr = grow_checkpoints(model, sched, seed=6, keep_profiles=True)
    direct = generate_profiles(model, 1000, seed=6, indices=np.array([0]))[0]
    assert np.array_equal(np.trim_zeros(direct, "b"), np.trim_zeros(np.asarray(tr.profiles[-1]), "b"))


def test_growth_rejects_non_incremental():
    with pytest.raises(GenerationError):
        grow_checkpoints("mobile", GrowthSchedule((1, 2)))
