"""Per-replication random streams.

Every tree gets its own stream seeded by ``stream_seed(master, index)``, so a
replication's draws never depend on how work is split across workers.  The mix
is the splitmix64 finaliser applied to ``master + (index + 1) * golden``.

Bulk draws use the stream counter-style: uniform ``j`` of replication ``r`` is
``splitmix64(seed_r + (j + 1) * golden)`` scaled to [0, 1), i.e. the SplitMix64
sequence started at ``seed_r``.  This is vectorised over both indices.
"""

import numpy as np

DEFAULT_SEED = 20060401

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_U64 = np.uint64


def splitmix64(x: int) -> int:
    x &= _MASK
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK
    return x ^ (x >> 31)


def stream_seed(master: int, index: int) -> int:
    return splitmix64((int(master) & _MASK) + (int(index) + 1) * _GOLDEN)


def _mix(x):
    # numpy uint64 arithmetic wraps modulo 2^64, as the mixer expects
    x = (x ^ (x >> _U64(30))) * _U64(0xBF58476D1CE4E5B9)
    x = (x ^ (x >> _U64(27))) * _U64(0x94D049BB133111EB)
    return x ^ (x >> _U64(31))


def stream_seeds(master: int, indices) -> np.ndarray:
    idx = np.asarray(indices, dtype=np.uint64)
    with np.errstate(over="ignore"):
        return _mix(_U64(int(master) & _MASK) + (idx + _U64(1)) * _U64(_GOLDEN))


def uniforms(master: int, indices, count: int, start: int = 0) -> np.ndarray:
    """Array (len(indices), count): draws ``start .. start+count-1`` of each stream."""
    seeds = stream_seeds(master, indices)
    j = np.arange(start + 1, start + count + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        x = _mix(seeds[:, None] + j[None, :] * _U64(_GOLDEN))
    return (x >> _U64(11)).astype(np.float64) * (1.0 / 9007199254740992.0)
