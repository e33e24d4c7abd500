"""Tree families, profiles and the level conventions shared by every module.

A model is named by a short ASCII string::

    recursive | port | mobile
    mary:m=<int>,t=<int>
    quad:d=<int>
    grid:m=<int>,d=<int>
    increasing:phi=<c0>,<c1>,...,<cd>

The root sits at level 0.  Binary search trees are not a family of their own:
``quad:d=1`` has the BST split law and ``increasing:phi=1,2,1`` (binary
increasing trees) has the same profile distribution.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

FAMILIES = ("recursive", "port", "mary", "quad", "grid", "increasing", "mobile")

# families whose profile counts one node per item
ONE_NODE_PER_ITEM = {"recursive", "port", "quad", "increasing", "mobile"}


class ModelError(ValueError):
    """Malformed model string or parameter out of range."""


@dataclass(frozen=True)
class TreeModelSpec:
    family: str
    m: int | None = None
    t: int | None = None
    d: int | None = None
    phi: tuple[Fraction, ...] | None = None

    def __post_init__(self):
        f = self.family
        if f not in FAMILIES:
            raise ModelError(f"family: unknown family {f!r}")
        need = {
            "recursive": (), "port": (), "mobile": (),
            "mary": ("m", "t"), "quad": ("d",), "grid": ("m", "d"),
            "increasing": ("phi",),
        }[f]
        for name in ("m", "t", "d", "phi"):
            val = getattr(self, name)
            if name in need and val is None:
                raise ModelError(f"{name}: required for family {f!r}")
            if name not in need and val is not None:
                raise ModelError(f"{name}: not a parameter of family {f!r}")
        if f == "mary":
            if self.m < 2:
                raise ModelError(f"m: must be >= 2, got {self.m}")
            if self.t < 0:
                raise ModelError(f"t: must be >= 0, got {self.t}")
        if f in ("quad", "grid") and self.d < 1:
            raise ModelError(f"d: must be >= 1, got {self.d}")
        if f == "grid" and self.m < 2:
            raise ModelError(f"m: must be >= 2, got {self.m}")
        if f == "increasing":
            phi = tuple(Fraction(c) for c in self.phi)
            object.__setattr__(self, "phi", phi)
            if len(phi) < 3:
                raise ModelError("phi: degree d must be >= 2 (need at least 3 coefficients)")
            if any(c < 0 for c in phi):
                raise ModelError("phi: coefficients must be nonnegative")
            if phi[0] <= 0:
                raise ModelError("phi: phi_0 must be positive")
            if phi[-1] <= 0:
                raise ModelError("phi: leading coefficient phi_d must be positive")

    # -- convenience constructors -------------------------------------------------
    @classmethod
    def recursive(cls):
        return cls("recursive")

    @classmethod
    def port(cls):
        return cls("port")

    @classmethod
    def mobile(cls):
        return cls("mobile")

    @classmethod
    def mary(cls, m: int, t: int = 0):
        return cls("mary", m=m, t=t)

    @classmethod
    def quad(cls, d: int):
        return cls("quad", d=d)

    @classmethod
    def grid(cls, m: int, d: int):
        return cls("grid", m=m, d=d)

    @classmethod
    def increasing(cls, phi: Sequence):
        return cls("increasing", phi=tuple(Fraction(c) for c in phi))

    # -- derived properties ------------------------------------------------------
    @property
    def degree(self) -> int | None:
        """Polynomial degree d of the degree function (increasing trees only)."""
        return len(self.phi) - 1 if self.phi is not None else None

    @property
    def branching(self) -> int | None:
        """Number h of root subtrees for split-tree families, else None."""
        if self.family == "quad":
            return 2 ** self.d
        if self.family == "grid":
            return self.m ** self.d
        if self.family == "mary":
            return self.m
        return None

    @property
    def sample_size(self) -> int | None:
        """Items a region needs before its node splits (smaller regions are buckets)."""
        if self.family == "quad":
            return 1
        if self.family == "grid":
            return self.m - 1
        if self.family == "mary":
            return self.m * (self.t + 1) - 1
        return None

    @property
    def retained(self) -> int | None:
        """Items kept at a split node (kappa)."""
        if self.family == "quad":
            return 1
        if self.family in ("grid", "mary"):
            return self.m - 1
        return None

    @property
    def counts_items(self) -> bool:
        """True when the profile sums to n (one node per item)."""
        if self.family in ONE_NODE_PER_ITEM:
            return True
        if self.family == "mary":
            return self.m == 2 and self.t == 0
        return self.m == 2  # grid

    @property
    def incremental(self) -> bool:
        return self.family not in ("increasing", "mobile")

    def __str__(self):
        return format_model_spec(self)


_INT = r"(\d+)"
_PATTERNS = {
    "mary": re.compile(rf"m={_INT},t={_INT}"),
    "quad": re.compile(rf"d={_INT}"),
    "grid": re.compile(rf"m={_INT},d={_INT}"),
}
_NUM = re.compile(r"\d+(\.\d*)?|\.\d+|\d+/\d+")


def parse_model_spec(text: str) -> TreeModelSpec:
    """Parse a model string such as ``"grid:m=3,d=2"`` into a validated spec."""
    if not isinstance(text, str):
        raise ModelError("model: expected a string")
    s = text.strip().lower().replace(" ", "")
    head, sep, rest = s.partition(":")
    if head in ("recursive", "port", "mobile"):
        if sep:
            raise ModelError(f"model: family {head!r} takes no parameters")
        return TreeModelSpec(head)
    if head in _PATTERNS:
        match = _PATTERNS[head].fullmatch(rest)
        if not match:
            raise ModelError(f"model: malformed parameters for {head!r}: {rest!r}")
        vals = [int(g) for g in match.groups()]
        if head == "mary":
            return TreeModelSpec("mary", m=vals[0], t=vals[1])
        if head == "quad":
            return TreeModelSpec("quad", d=vals[0])
        return TreeModelSpec("grid", m=vals[0], d=vals[1])
    if head == "increasing":
        if not rest.startswith("phi="):
            raise ModelError("phi: expected 'increasing:phi=c0,c1,...'")
        parts = rest[4:].split(",")
        if not all(_NUM.fullmatch(p) for p in parts):
            raise ModelError(f"phi: malformed coefficient list {rest[4:]!r}")
        return TreeModelSpec("increasing", phi=tuple(Fraction(p) for p in parts))
    raise ModelError(f"family: unknown family {head!r}")


def _format_coeff(c: Fraction) -> str:
    if c.denominator == 1:
        return str(c.numerator)
    den = c.denominator
    for p in (2, 5):
        while den % p == 0:
            den //= p
    if den == 1:
        # terminating decimal; find the shortest exact representation
        digits = 1
        while (c * 10 ** digits).denominator != 1:
            digits += 1
        q = c * 10 ** digits
        s = str(q.numerator).rjust(digits + 1, "0")
        return f"{s[:-digits]}.{s[-digits:]}"
    return f"{c.numerator}/{c.denominator}"


def format_model_spec(spec: TreeModelSpec) -> str:
    f = spec.family
    if f in ("recursive", "port", "mobile"):
        return f
    if f == "mary":
        return f"mary:m={spec.m},t={spec.t}"
    if f == "quad":
        return f"quad:d={spec.d}"
    if f == "grid":
        return f"grid:m={spec.m},d={spec.d}"
    return "increasing:phi=" + ",".join(_format_coeff(c) for c in spec.phi)


def as_model(model) -> TreeModelSpec:
    if isinstance(model, TreeModelSpec):
        return model
    return parse_model_spec(model)


# -- profiles ---------------------------------------------------------------------

@dataclass(frozen=True)
class Profile:
    """Node counts per level of one tree; ``counts[0]`` is the root level."""

    counts: tuple[int, ...]
    n: int

    @classmethod
    def from_counts(cls, counts, n: int | None = None):
        counts = tuple(int(c) for c in counts)
        return cls(counts, sum(counts) if n is None else int(n))

    def __len__(self):
        return len(self.counts)

    def as_array(self):
        return np.asarray(self.counts, dtype=np.int64)


@dataclass(frozen=True)
class WidthSummary:
    width: int
    mode_level: int
    tie_count: int


def width_and_mode(profile) -> WidthSummary:
    """Width (largest level count), its smallest level, and how many levels tie."""
    counts = profile.counts if isinstance(profile, Profile) else profile
    counts = np.asarray(counts)
    if counts.size == 0 or counts.max() <= 0:
        raise ValueError("profile: empty profile has no width")
    width = int(counts.max())
    hits = np.flatnonzero(counts == width)
    return WidthSummary(width, int(hits[0]), int(hits.size))


# -- level scale ------------------------------------------------------------------

def log_scale(n) -> float:
    """L_n = max(ln n, 1)."""
    return max(math.log(n), 1.0)


def delta(k, n, v=1.0):
    """Offset of level k from the drift line v * L_n."""
    return k - float(v) * log_scale(n)
