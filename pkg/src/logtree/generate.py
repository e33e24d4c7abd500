"""Seeded random trees from every family, as depth sequences and profiles.

Only node depths are produced.  Three samplers cover the families:

* sequential attachment (recursive, PORT): all parent choices are drawn at once
  and depths are resolved by pointer jumping, so n = 10^7 is a vectorised job;
* split trees (quad, grid, m-ary search): the tree is built level by level for a
  whole batch of replications, regions being dense integer group ids;
* increasing varieties and mobile trees: root degree and subtree sizes are drawn
  from the generating-function coefficients, recursively (small subtrees use
  precomputed cumulative tables, one uniform per node).

Each replication ``r`` under master seed ``s`` uses its own stream, so a batch
gives the same trees as generating them one by one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from bisect import bisect_right
from functools import lru_cache

import numpy as np

from .model import Profile, TreeModelSpec, as_model, width_and_mode
from .rng import DEFAULT_SEED, uniforms

INCREASING_CAP = 2000
BATCH_ITEMS = 1 << 21          # items per vectorised batch
DRAW_BLOCK = 1 << 22           # uniforms drawn at a time for one large tree


class GenerationError(ValueError):
    pass


def _check(model: TreeModelSpec, n: int):
    if n < 1:
        raise GenerationError("n: need n >= 1")
    if model.family in ("increasing", "mobile") and n > INCREASING_CAP:
        raise GenerationError(f"n: {model.family} sampler is capped at {INCREASING_CAP}")


# -- sequential attachment -------------------------------------------------------

def _draws(seed, indices, count):
    if len(indices) == 1 and count > DRAW_BLOCK:
        parts = [uniforms(seed, indices, min(DRAW_BLOCK, count - s), start=s)
                 for s in range(0, count, DRAW_BLOCK)]
        return np.concatenate(parts, axis=1)
    return uniforms(seed, indices, count)


def _resolve_depths(anc):
    """Depths from a parent array whose roots point at themselves."""
    dist = (anc != np.arange(anc.size)).astype(np.int32)
    while True:
        nxt = anc[anc]
        if np.array_equal(nxt, anc):
            return dist
        dist += dist[anc]
        anc = nxt


def _attach_batch(model, n, seed, indices):
    """Depth matrix (R, n) for recursive or PORT trees."""
    R = len(indices)
    if n == 1:
        return np.zeros((R, 1), dtype=np.int32)
    u = _draws(seed, indices, n - 1)
    i = np.arange(1, n, dtype=np.int64)
    base = (np.arange(R, dtype=np.int64) * n)[:, None]
    if model.family == "recursive":
        local = np.minimum((u * i).astype(np.int64), i - 1)
        parent = np.empty((R, n), dtype=np.int64)
        parent[:, 0] = 0
        parent[:, 1:] = local
        anc = (parent + base).ravel()
        del u, local, parent
        return _resolve_depths(anc).reshape(R, n)
    # PORT: before node i arrives there are 2i - 1 slots; slot 0 is the root's,
    # slots 2q - 1 and 2q were added with node q (one for q's parent, one for q)
    slot = np.minimum((u * (2 * i - 1)).astype(np.int64), 2 * i - 2)
    del u
    ref = np.empty((R, n), dtype=np.int64)
    ref[:, 0] = 0
    ref[:, 1:] = (slot + 1) // 2
    direct = np.ones((R, n), dtype=bool)
    direct[:, 1:] = slot % 2 == 0
    del slot
    ref = (ref + base).ravel()
    direct = direct.ravel()
    # an odd slot means "same parent as node q": follow references until direct
    while not direct.all():
        pend = np.flatnonzero(~direct)
        r = ref[pend]
        ref[pend] = ref[r]
        direct[pend] = direct[r]
    return _resolve_depths(ref).reshape(R, n)


# -- split trees ---------------------------------------------------------------------

def _split_params(model):
    if model.family == "quad":
        return 2, 1, model.d, 0                       # m, sample size, dim, t
    if model.family == "grid":
        return model.m, model.m - 1, model.d, 0
    return model.m, model.sample_size, 1, model.t


def _split_batch(model, n, seed, indices):
    """Nodes of split trees: arrays (rep, depth, ctime, order).

    ``ctime`` is the number of items inserted before the node appears, so the
    tree grown from the first N items consists of the nodes with ctime < N.
    """
    m, s, dim, t = _split_params(model)
    mary = model.family == "mary"
    R = len(indices)
    coords = _draws(seed, indices, n * dim).reshape(R * n, dim)
    arrival = np.tile(np.arange(n, dtype=np.int64), R)
    group = np.repeat(np.arange(R, dtype=np.int64), n)
    g_rep = np.arange(R, dtype=np.int64)
    g_split = np.full(R, -1, dtype=np.int64)          # split time of the parent region
    h = m ** dim
    out_rep, out_depth, out_ctime = [], [], []
    level = 0
    while group.size:
        N = group.size
        brk = np.empty(N, dtype=bool)
        brk[0] = True
        np.not_equal(group[1:], group[:-1], out=brk[1:])
        starts = np.flatnonzero(brk)
        sizes = np.diff(np.append(starts, N))
        gid = group[starts]
        out_rep.append(g_rep[gid])
        out_depth.append(np.full(starts.size, level, dtype=np.int32))
        out_ctime.append(np.maximum(g_split[gid], arrival[starts]))
        splitting = sizes >= s
        if not splitting.any():
            break
        spl_starts = starts[splitting]
        Gs = spl_starts.size
        spl_index = np.cumsum(splitting) - 1            # index among splitting groups
        item_group = np.repeat(np.arange(starts.size), sizes)
        rank = np.arange(N) - np.repeat(starts, sizes)
        in_split = splitting[item_group]
        sample_pos = spl_starts[:, None] + np.arange(s)[None, :]
        if mary:
            keys = coords[:, 0]
            sample = keys[sample_pos]                     # (Gs, s)
            srt = np.sort(sample, axis=1)
            piv = srt[:, t::t + 1][:, :m - 1]             # (Gs, m - 1)
            order = np.argsort(sample, axis=1)
            srank = np.empty_like(order)
            np.put_along_axis(srank, order, np.arange(s)[None, :].repeat(Gs, 0), axis=1)
            is_piv = ((srank + 1) % (t + 1) == 0) & (srank < (m - 1) * (t + 1))
            drop = np.zeros(N, dtype=bool)
            drop[sample_pos[is_piv]] = True
            keep = in_split & ~drop
            k_idx = np.flatnonzero(keep)
            pg = spl_index[item_group[k_idx]]
            cell = (keys[k_idx, None] > piv[pg]).sum(axis=1)
        else:
            piv = np.sort(coords[sample_pos], axis=1)     # (Gs, s, dim); s = m - 1
            keep = in_split & (rank >= s)
            k_idx = np.flatnonzero(keep)
            pg = spl_index[item_group[k_idx]]
            cell = np.zeros(k_idx.size, dtype=np.int64)
            mult = 1
            for a in range(dim):
                c = (coords[k_idx, a][:, None] > piv[pg, :, a]).sum(axis=1)
                cell += c * mult
                mult *= m
        split_time = arrival[spl_starts + s - 1]
        new_group = pg * h + cell
        order = np.argsort(new_group, kind="stable")
        k_idx = k_idx[order]
        new_group = new_group[order]
        coords = coords[k_idx]
        arrival = arrival[k_idx]
        if new_group.size:
            brk = np.empty(new_group.size, dtype=bool)
            brk[0] = True
            np.not_equal(new_group[1:], new_group[:-1], out=brk[1:])
            dense = np.cumsum(brk) - 1
            firsts = new_group[brk]
            parent_spl = firsts // h
            g_rep = g_rep[gid[splitting]][parent_spl]
            g_split = split_time[parent_spl]
            group = dense
        else:
            group = new_group
        level += 1
    rep = np.concatenate(out_rep)
    depth = np.concatenate(out_depth)
    ctime = np.concatenate(out_ctime)
    # creation order: by ctime, earlier levels first, then discovery order
    order = np.lexsort((np.arange(rep.size), depth, ctime, rep))
    return rep[order], depth[order], ctime[order]


# -- increasing varieties ----------------------------------------------------------

def _phi_key(model):
    if model.family == "mobile":
        return "mobile"
    return tuple(model.phi)


@lru_cache(maxsize=8)
def _composition_tables(key, N):
    from .series import radius, solve_tree_ode_scaled
    phi_src = "mobile" if key == "mobile" else [c / key[0] for c in key]
    rho = radius(phi_src)
    ts = solve_tree_ode_scaled(phi_src, N, exact=False, rho=rho)
    tau = np.asarray(ts.tau.c, dtype=float)
    if key == "mobile":
        rmax = N
        phi = np.array([1.0] + [1.0 / j for j in range(1, rmax + 1)])
    else:
        phi = np.array([float(c / key[0]) for c in key])
        rmax = len(phi) - 1
    # pw[r, M] = [w^M] tau(rho w)^r; tau^r starts at w^r
    pw = np.zeros((rmax + 1, N + 1))
    pw[0, 0] = 1.0
    for r in range(1, rmax + 1):
        if r > N:
            break
        prev = pw[r - 1, r - 1:]
        pw[r, r:] = np.convolve(prev, tau[1:N + 2 - r])[:N + 1 - r]
    return tau, pw, phi


SMALL_SIZE = 12


@lru_cache(maxsize=8)
def _small_tables(key):
    """Cumulative laws of (root degree, subtree sizes) for subtrees of size <= SMALL_SIZE."""
    from .exact import _compositions
    tau, _, phi = _composition_tables(key, SMALL_SIZE + 1)
    out = {}
    for size in range(2, SMALL_SIZE + 1):
        M = size - 1
        outcomes, weights = [], []
        for r in range(1, min(len(phi) - 1, M) + 1):
            if phi[r] == 0:
                continue
            for comp in _compositions(M, r):
                w = phi[r] * float(np.prod(tau[list(comp)]))
                if w > 0:
                    outcomes.append(comp)
                    weights.append(w)
        if weights:
            c = np.cumsum(weights)
            out[size] = ((c / c[-1]).tolist(), outcomes)
    return out


def _pick(weights, u):
    c = np.cumsum(weights)
    return int(min(np.searchsorted(c, u * c[-1], side="right"), len(c) - 1))


def _increasing_tree(model, n, u):
    """Depths (breadth first) of one tree; ``u`` supplies at least 2n - 1 uniforms."""
    key = _phi_key(model)
    tau, pw, phi = _composition_tables(key, max(n, 2))
    if tau[n] == 0:
        raise GenerationError(f"n: no trees of size {n} in this variety")
    small = _small_tables(key)
    depths = []
    queue = [(n, 0)]
    head = 0
    k = 0
    while head < len(queue):
        size, depth = queue[head]
        head += 1
        depths.append(depth)
        M = size - 1
        if M == 0:
            continue
        if size <= SMALL_SIZE:
            cum, outcomes = small[size]
            i = min(bisect_right(cum, u[k]), len(cum) - 1)
            k += 1
            queue.extend((c, depth + 1) for c in outcomes[i])
            continue
        rtop = min(len(phi) - 1, M)
        w = phi[1:rtop + 1] * pw[1:rtop + 1, M]
        r = 1 + _pick(w, u[k])
        k += 1
        rem = M
        for q in range(r, 1, -1):
            a = np.arange(1, rem - q + 2)
            w = tau[a] * pw[q - 1, rem - a]
            size_a = 1 + _pick(w, u[k])
            k += 1
            queue.append((size_a, depth + 1))
            rem -= size_a
        queue.append((rem, depth + 1))
    return np.asarray(depths, dtype=np.int32)


def _increasing_batch(model, n, seed, indices):
    per = max(1, BATCH_ITEMS // (2 * n))
    for lo in range(0, len(indices), per):
        idx = indices[lo:lo + per]
        draws = uniforms(seed, idx, 2 * n).tolist()
        for row in draws:
            yield _increasing_tree(model, n, row)


# -- public API ----------------------------------------------------------------------

def generate_depths(model, n: int, seed: int = DEFAULT_SEED, index: int = 0) -> np.ndarray:
    """Node depths of one random tree, in insertion order.

    Split trees list nodes in the order they appear as items arrive; increasing
    varieties (no growth process) list them breadth first.
    """
    model = as_model(model)
    _check(model, n)
    f = model.family
    if f in ("recursive", "port"):
        return _attach_batch(model, n, seed, np.array([index]))[0].astype(np.int64)
    if f in ("quad", "grid", "mary"):
        _, depth, _ = _split_batch(model, n, seed, np.array([index]))
        return depth.astype(np.int64)
    return next(_increasing_batch(model, n, seed, np.array([index]))).astype(np.int64)


def profile_from_depths(depths) -> Profile:
    """Level counts of a depth sequence."""
    d = np.asarray(depths, dtype=np.int64)
    if d.size == 0:
        raise ValueError("depths: empty sequence")
    if d.min() < 0:
        raise ValueError("depths: negative depth")
    counts = np.bincount(d)
    return Profile(tuple(int(c) for c in counts), int(d.size))


def _counts_matrix(rep, depth, R):
    H = int(depth.max()) + 1
    flat = np.bincount(rep.astype(np.int64) * H + depth, minlength=R * H)
    return flat.reshape(R, H)


def generate_profiles(model, n: int, seed: int = DEFAULT_SEED, indices=None) -> np.ndarray:
    """Profiles of replications ``indices`` as a (R, H) count matrix.

    Row r is identical to ``profile_from_depths(generate_depths(model, n, seed, indices[r]))``.
    """
    model = as_model(model)
    _check(model, n)
    indices = np.arange(1) if indices is None else np.asarray(indices, dtype=np.int64)
    f = model.family
    blocks = []
    if f in ("increasing", "mobile"):
        rows = [np.bincount(d) for d in _increasing_batch(model, n, seed, indices)]
        H = max(len(r) for r in rows)
        out = np.zeros((len(rows), H), dtype=np.int64)
        for k, r in enumerate(rows):
            out[k, :len(r)] = r
        return out
    per = max(1, BATCH_ITEMS // n)
    for lo in range(0, len(indices), per):
        idx = indices[lo:lo + per]
        if f in ("recursive", "port"):
            depth = _attach_batch(model, n, seed, idx)
            rep = np.repeat(np.arange(len(idx)), n)
            blocks.append(_counts_matrix(rep, depth.ravel(), len(idx)))
        else:
            rep, depth, _ = _split_batch(model, n, seed, idx)
            blocks.append(_counts_matrix(rep, depth, len(idx)))
    H = max(b.shape[1] for b in blocks)
    return np.concatenate([np.pad(b, ((0, 0), (0, H - b.shape[1]))) for b in blocks])


# -- growth --------------------------------------------------------------------------

@dataclass(frozen=True)
class GrowthSchedule:
    checkpoints: tuple

    def __post_init__(self):
        c = tuple(int(x) for x in self.checkpoints)
        if not c:
            raise ValueError("checkpoints: empty schedule")
        if c[0] < 1:
            raise ValueError("checkpoints: first checkpoint must be >= 1")
        if any(b <= a for a, b in zip(c, c[1:])):
            raise ValueError("checkpoints: must be strictly increasing")
        object.__setattr__(self, "checkpoints", c)

    @classmethod
    def default(cls, ell_max: int):
        """n_ell = floor(exp(sqrt(ell))) for ell = 0..ell_max (duplicates dropped)."""
        pts = []
        for ell in range(ell_max + 1):
            v = math.floor(math.exp(math.sqrt(ell)))
            if not pts or v > pts[-1]:
                pts.append(v)
        return cls(tuple(pts))

    @classmethod
    def up_to(cls, n_max: int):
        ell = 0
        while math.floor(math.exp(math.sqrt(ell + 1))) <= n_max:
            ell += 1
        return cls.default(ell)


@dataclass(frozen=True)
class TrajectoryPoint:
    n: int
    width: int
    mode_level: int
    ratio: float


@dataclass
class WidthTrajectory:
    model: str
    seed: int
    points: list
    profiles: list = field(default_factory=list)

    def ratios(self):
        return np.array([p.ratio for p in self.points])

    def widths(self):
        return np.array([p.width for p in self.points])


def growth_depths(model, n: int, seed: int = DEFAULT_SEED, index: int = 0):
    """(depths, ctime) of one grown tree: node v is present once ctime[v] < N items."""
    model = as_model(model)
    _check(model, n)
    if not model.incremental:
        raise GenerationError(f"{model.family}: no incremental growth process")
    if model.family in ("recursive", "port"):
        d = _attach_batch(model, n, seed, np.array([index]))[0]
        return d, np.arange(n)
    _, depth, ctime = _split_batch(model, n, seed, np.array([index]))
    return depth, ctime


def grow_checkpoints(model, schedule: GrowthSchedule, seed: int = DEFAULT_SEED,
                     keep_profiles: bool = False, index: int = 0) -> WidthTrajectory:
    """Grow one tree and record (n, W_n, k*, W_n / reference) at each checkpoint."""
    from .asympt import expected_width_prediction, model_constants
    model = as_model(model)
    cp = schedule.checkpoints
    depth, ctime = growth_depths(model, cp[-1], seed, index)
    c = model_constants(model)
    H = int(depth.max()) + 1
    counts = np.zeros(H, dtype=np.int64)
    pos = 0
    pts, profs = [], []
    for N in cp:
        hi = int(np.searchsorted(ctime, N, side="left"))
        if hi > pos:
            counts += np.bincount(depth[pos:hi], minlength=H)
            pos = hi
        ws = width_and_mode(counts)
        ref = expected_width_prediction(N, c)
        pts.append(TrajectoryPoint(int(N), ws.width, ws.mode_level, ws.width / ref))
        if keep_profiles:
            profs.append(counts.copy())
    return WidthTrajectory(str(model), int(seed), pts, profs)
