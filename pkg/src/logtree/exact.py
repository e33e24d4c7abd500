"""Exact split laws, expected profiles and central moments.

Rational tables use ``gmpy2.mpq`` internally (an order of magnitude faster
than ``Fraction`` inside numpy object arrays) and are handed back as
``Fraction``.  Float tables use float64 and BLAS dot products; every summand
in the expected-profile recurrences is nonnegative, so plain summation keeps
relative error near machine precision.

Two kinds of recurrence are covered:

* two-part splits, where a tree of size n breaks into parts (j, n - j)
  (recursive, PORT; the first part hangs one level lower) or into two root
  subtrees (j, n - 1 - j) (binary search trees, ``mary:m=2,t``);
* h-way splits ``mu_{n,k} = h * sum_j pi_{n,j} mu_{j,k-1}`` for quad, grid and
  m-ary search trees, with bucket nodes below the split threshold.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from gmpy2 import mpq

from ._exactnum import format_value, to_fraction
from .model import TreeModelSpec, as_model, log_scale

EXACT_BOUNDARY = 400      # rational arithmetic up to this n by default
MOMENT_N_MAX = 2000
MOMENT_M_MAX = 8
STIRLING_EXACT_MAX = 1000

ENUM_CAPS = {"recursive": 8, "port": 7, "quad": 7, "mary": 7, "grid": 7,
             "increasing": 7, "mobile": 7}


class NoSplitLaw(ValueError):
    """The family has no closed split law (increasing varieties, mobile trees)."""


def _want_exact(exact, n):
    return n <= EXACT_BOUNDARY if exact is None else bool(exact)


def _zeros(shape, exact):
    if exact:
        out = np.empty(shape, dtype=object)
        out.fill(mpq(0))
        return out
    return np.zeros(shape)


def _to_public(arr, exact):
    if not exact:
        return arr
    out = np.empty(arr.shape, dtype=object)
    flat_in, flat_out = arr.ravel(), out.ravel()
    for i, x in enumerate(flat_in):
        flat_out[i] = to_fraction(x)
    return out


def _to_internal(arr):
    out = np.empty(np.shape(arr), dtype=object)
    flat_in, flat_out = np.asarray(arr, dtype=object).ravel(), out.ravel()
    for i, x in enumerate(flat_in):
        x = to_fraction(x)
        flat_out[i] = mpq(x.numerator, x.denominator)
    return out


# -- split laws ---------------------------------------------------------------------

@dataclass(frozen=True)
class SplitLaw:
    """Law of the first-subtree size j for a tree of size n.

    ``probs[i]`` is the probability of ``j = j0 + i``.  ``kind`` is ``"attach"``
    (parts j and n - j, only the first one lower), ``"binary"`` (two root
    subtrees j and n - 1 - j) or ``"split"`` (h exchangeable root subtrees
    holding n - kappa items in total).
    """

    model: TreeModelSpec
    n: int
    j0: int
    probs: tuple
    h: int
    kappa: int
    kind: str

    @property
    def support(self):
        return range(self.j0, self.j0 + len(self.probs))

    def as_dict(self):
        return {self.j0 + i: p for i, p in enumerate(self.probs)}

    def total(self):
        return sum(self.probs)


def split_kind(model) -> str:
    model = as_model(model)
    f = model.family
    if f in ("recursive", "port"):
        return "attach"
    if f in ("increasing", "mobile"):
        raise NoSplitLaw(f"{f}: no closed split law; use the series module")
    if model.branching == 2:
        return "binary"
    return "split"


def _falling(x, r, exact):
    """C(x, r) elementwise for an integer vector x (zero when x < r)."""
    x = np.asarray(x)
    if exact:
        out = np.array([mpq(math.comb(int(v), r)) if v >= r else mpq(0) for v in x], dtype=object)
        return out
    acc = np.ones(x.shape)
    for i in range(r):
        acc = acc * (x - i)
    acc /= math.factorial(r)
    acc[x < r] = 0.0
    return acc


def _suffix_sum(v):
    return np.cumsum(v[::-1])[::-1]


def _row(model: TreeModelSpec, n: int, exact: bool):
    """(j0, probability vector) for size n; internal numeric types."""
    f = model.family
    one = mpq(1) if exact else 1.0
    if f == "recursive":
        return 1, np.full(n - 1, one / (n - 1), dtype=object if exact else float)
    if f == "port":
        # C(2j,j)/4^j by its product form keeps floats stable for large n
        c = _zeros(n, exact)
        c[0] = one
        for j in range(1, n):
            c[j] = c[j - 1] * (2 * j - 1) / (2 * j) if exact else c[j - 1] * ((2 * j - 1) / (2 * j))
        j = np.arange(1, n)
        probs = c[j - 1] * c[n - j - 1] / (2 * j * c[n - 1]) if not exact else \
            np.array([c[i - 1] * c[n - i - 1] / (2 * i * c[n - 1]) for i in range(1, n)], dtype=object)
        return 1, probs
    if f == "quad":
        # pi_j = S_{d-1}(j+1) / n with S_0 = 1, S_r(a) = sum_{i=a}^n S_{r-1}(i) / i
        idx = np.arange(1, n + 1)
        S = np.full(n, one, dtype=object if exact else float)
        inv = np.array([mpq(1, int(i)) for i in idx], dtype=object) if exact else 1.0 / idx
        for _ in range(model.d - 1):
            S = _suffix_sum(S * inv)
        return 0, S / n
    if f == "mary":
        m, t = model.m, model.t
        s = model.sample_size
        b = (m - 1) * (t + 1) - 1
        j = np.arange(0, n - m + 2)            # first subtree holds j of the n - (m - 1) items
        num = _falling(j, t, exact) * _falling(n - 1 - j, b, exact)
        den = mpq(math.comb(n, s)) if exact else float(_falling(np.array([n]), s, False)[0])
        return 0, num / den
    if f == "grid":
        m, d = model.m, model.d
        N = n - (m - 1)
        y = np.arange(N + 1)
        # w(x, y) = C(y - x + m - 2, m - 2) / C(y + m - 1, m - 1): the numerator is
        # absorbed by m - 1 repeated suffix sums
        denom = _falling(y + m - 1, m - 1, exact)
        G = _zeros(N + 1, exact)
        G[N] = one
        for _ in range(d):
            G = G / denom
            for _ in range(m - 1):
                G = _suffix_sum(G)
        return 0, G
    raise NoSplitLaw(f"{f}: no closed split law; use the series module")


def split_distribution(model, n: int, exact: bool | None = None) -> SplitLaw:
    """Split law of a size-n tree (first subtree size and its probability)."""
    model = as_model(model)
    kind = split_kind(model)
    if n < 2:
        raise ValueError("n: need n >= 2")
    exact = _want_exact(exact, n)
    s = model.sample_size or 1
    if kind != "attach" and n < s:
        raise ValueError(f"n: a region of {n} items is a bucket (threshold {s})")
    j0, probs = _row(model, n, exact)
    probs = [to_fraction(p) for p in probs] if exact else [float(p) for p in probs]
    h = 2 if kind != "split" else model.branching
    kappa = 0 if kind == "attach" else model.retained
    return SplitLaw(model, n, j0, tuple(probs), h, kappa, kind)


# -- tables -------------------------------------------------------------------------

@dataclass
class ExactTable:
    """``mu[n, k]`` for ``0 <= n <= n_max``, ``0 <= k <= k_max``, plus moments.

    ``pm[m]`` holds central moments ``E (Y_{n,k} - mu_{n,k})^m`` and ``q[m]`` the
    inhomogeneous part of their recurrence.  Rational tables hold ``Fraction``.
    """

    model: TreeModelSpec
    n_max: int
    k_max: int
    exact: bool
    mu: np.ndarray
    pm: dict = field(default_factory=dict)
    q: dict = field(default_factory=dict)

    def row(self, n):
        return list(self.mu[n])

    def value(self, n, k, m=None):
        if k > self.k_max:
            return Fraction(0) if self.exact else 0.0
        if m is None:
            return self.mu[n, k]
        if m == 0:
            return Fraction(1) if self.exact else 1.0
        return self.pm[m][n, k]

    def row_sum(self, n):
        return sum(self.mu[n]) if self.exact else float(np.sum(self.mu[n]))

    def max_level(self, n):
        """Level of the largest expected count (the smallest on ties)."""
        r = self.mu[n]
        best = max(r)
        return next(k for k, v in enumerate(r) if v == best)

    def rows(self, m=None, n_min=1):
        src = self.mu if m is None else self.pm[m]
        for n in range(n_min, self.n_max + 1):
            for k in range(self.k_max + 1):
                yield n, k, src[n, k]

    def to_csv(self, m=None, n_min=1) -> str:
        return table_to_csv(self.rows(m, n_min))

    def to_json(self, n_min=1) -> dict:
        out = {"model": str(self.model), "n_max": self.n_max, "k_max": self.k_max,
               "exact": self.exact,
               "mu": [[format_value(x) if self.exact else float(x) for x in self.mu[n]]
                      for n in range(n_min, self.n_max + 1)]}
        for m, tab in sorted(self.pm.items()):
            out[f"P{m}"] = [[format_value(x) if self.exact else float(x) for x in tab[n]]
                            for n in range(n_min, self.n_max + 1)]
        return out


def table_to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "k", "value"])
    for n, k, v in rows:
        w.writerow([n, k, format_value(v) if isinstance(v, (Fraction, int)) else repr(float(v))])
    return buf.getvalue()


def default_k_max(n_max, exact):
    if exact:
        return max(n_max - 1, 0)
    return max(min(n_max - 1, int(10 * log_scale(max(n_max, 1))) + 20), 0)


# -- Stirling rows ------------------------------------------------------------------

def expected_profile_stirling(n: int, k_max: int | None = None, exact: bool | None = None):
    """Coefficients of ``prod_{1<=j<n} (1 + u/j)``: the recursive-tree expected profile."""
    if n < 1:
        raise ValueError("n: need n >= 1")
    if k_max is None:
        k_max = n - 1
    if k_max < 0:
        raise ValueError("k_max: must be >= 0")
    if exact is None:
        exact = n <= STIRLING_EXACT_MAX
    K = k_max + 1
    if exact:
        # integer Stirling numbers of the first kind, one division at the end
        c = [1] + [0] * k_max
        for j in range(1, n):
            for k in range(min(j, k_max), 0, -1):
                c[k] = j * c[k] + c[k - 1]
            c[0] *= j
        den = math.factorial(n - 1)
        out = np.empty(K, dtype=object)
        out[:] = [Fraction(x, den) for x in c]
        return out
    row = np.zeros(K)
    row[0] = 1.0
    for j in range(1, n):
        row[1:] = row[1:] + row[:-1] / j
    return row


def stirling_argmax_sweep(ns, k_max: int = 60) -> dict:
    """Argmax level of the Stirling row for every n in ``ns`` (one float pass)."""
    targets = sorted(set(int(n) for n in ns))
    if not targets or targets[0] < 1:
        raise ValueError("ns: sizes must be >= 1")
    out = {}
    row = np.zeros(k_max + 1)
    row[0] = 1.0
    pos = 0
    for j in range(1, targets[-1] + 1):
        while pos < len(targets) and targets[pos] == j:
            out[j] = int(np.argmax(row))
            pos += 1
        row[1:] = row[1:] + row[:-1] / j
    return out


def uniform_bound_monitor(rs=(0.8, 1.0, 1.25), n_max: int = 1000) -> dict:
    """``max_k mu_{n,k} r^k n^{-r} sqrt(L_n)`` per n, for each r (recursive trees)."""
    out = {}
    ns = np.arange(1, n_max + 1)
    for r in rs:
        row = np.zeros(n_max)
        row[0] = 1.0
        vals = np.empty(n_max)
        powers = float(r) ** np.arange(n_max)
        for n in ns:
            if n > 1:
                row[1:] = row[1:] + row[:-1] / (n - 1)
            vals[n - 1] = np.max(row[:n] * powers[:n]) * n ** (-r) * math.sqrt(log_scale(n))
        out[float(r)] = {"per_n": vals, "max": float(vals.max()), "last": float(vals[-1])}
    return out


# -- expected profiles --------------------------------------------------------------

def _mu_table(model, n_max, k_max, exact):
    kind = split_kind(model)
    K = k_max + 1
    mu = _zeros((n_max + 1, K), exact)
    one = mpq(1) if exact else 1.0
    s = model.sample_size or 1
    if n_max >= 1:
        mu[1, 0] = one
    uniform = model.family == "recursive"
    running = _zeros(K, exact)             # sum of rows 1..n-1 (uniform law only)
    if n_max >= 1:
        running = running + mu[1]
    for n in range(2, n_max + 1):
        mu[n, 0] = one
        if kind != "attach" and n < s:
            continue
        kk = min(k_max, n - 1)             # depths never exceed n - 1
        if kk == 0:
            continue
        if uniform:
            # pi = 1/(n-1) for every j, so both weighted sums are prefix sums
            inv = mpq(1, n - 1) if exact else 1.0 / (n - 1)
            mu[n, 1:kk + 1] = (running[0:kk] + running[1:kk + 1]) * inv
            running = running + mu[n]
            continue
        j0, p = _row(model, n, exact)
        j = np.arange(j0, j0 + len(p))
        if kind == "attach":
            # mu_{j,k-1} over the first part, mu_{n-j,k} over the rest
            mu[n, 1:kk + 1] = p.dot(mu[j, 0:kk]) + p.dot(mu[n - j, 1:kk + 1])
        elif kind == "binary":
            mu[n, 1:kk + 1] = p.dot(mu[j, 0:kk]) + p.dot(mu[n - 1 - j, 0:kk])
        else:
            mu[n, 1:kk + 1] = model.branching * p.dot(mu[j, 0:kk])
    return mu


def expected_profile_dp(model, n_max: int, k_max: int | None = None,
                        exact: bool | None = None) -> ExactTable:
    """Expected profile table by the split-law recurrence."""
    model = as_model(model)
    split_kind(model)
    if n_max < 1:
        raise ValueError("n_max: need n_max >= 1")
    exact = _want_exact(exact, n_max)
    if k_max is None:
        k_max = default_k_max(n_max, exact)
    if k_max < 0:
        raise ValueError("k_max: must be >= 0")
    mu = _mu_table(model, n_max, k_max, exact)
    return ExactTable(model, n_max, k_max, exact, _to_public(mu, exact))


def expected_node_count(model, n_max: int, exact: bool | None = None):
    """Expected number of nodes for sizes 0..n_max (one-dimensional DP)."""
    model = as_model(model)
    kind = split_kind(model)
    exact = _want_exact(exact, n_max)
    if kind == "attach":
        vals = [Fraction(n) if exact else float(n) for n in range(n_max + 1)]
        return vals
    nu = _zeros(n_max + 1, exact)
    one = mpq(1) if exact else 1.0
    s = model.sample_size or 1
    h = 2 if kind == "binary" else model.branching
    for n in range(1, n_max + 1):
        if n < s or n == 1:
            nu[n] = one
            continue
        j0, p = _row(model, n, exact)
        nu[n] = one + h * p.dot(nu[j0:j0 + len(p)])
    return [to_fraction(x) if exact else float(x) for x in nu]


# -- central moments ----------------------------------------------------------------

def _recursive_moments_int(n_max, k_max, m_max):
    """Exact moments for recursive trees through integer raw moments.

    Every probability is a multiple of 1/(n-1)!, so ``R[a][n, k] = (n-1)! E Y^a``
    is an integer, and with the uniform split
    ``R_n = sum_j C(n-2, j-1) sum_a C(m, a) R^a_{j,k-1} R^(m-a)_{n-j,k}``.
    """
    K = k_max + 1
    fact = [math.factorial(max(n - 1, 0)) for n in range(n_max + 1)]
    R = {}
    for a in range(m_max + 1):
        R[a] = np.zeros((n_max + 1, K), dtype=object)
        for n in range(1, n_max + 1):
            R[a][n, 0] = fact[n]
        R[a][0, :] = 0
    for n in range(1, n_max + 1):
        R[0][n, :] = fact[n]
    for n in range(2, n_max + 1):
        kk = min(k_max, n - 1)
        j = np.arange(1, n)
        w = np.array([math.comb(n - 2, i - 1) for i in j], dtype=object)
        first = {a: R[a][j, 0:kk] for a in range(m_max + 1)}
        second = {a: R[a][n - j, 1:kk + 1] for a in range(m_max + 1)}
        for m in range(1, m_max + 1):
            acc = first[0] * second[m] + first[m] * second[0]
            for a in range(1, m):
                acc = acc + (first[a] * second[m - a]) * math.comb(m, a)
            R[m][n, 1:kk + 1] = w.dot(acc)
    zero = Fraction(0)
    mu = np.empty((n_max + 1, K), dtype=object)
    mu.fill(zero)
    P = {m: np.empty((n_max + 1, K), dtype=object) for m in range(1, m_max + 1)}
    for m in P:
        P[m].fill(zero)
    for n in range(1, n_max + 1):
        F = fact[n]
        for k in range(K):
            r1 = R[1][n, k]
            mu[n, k] = Fraction(r1, F)
            neg = -r1
            for m in range(2, m_max + 1):
                # F^m P^(m) = sum_i C(m, i) R^i F^(i-1) (-R^1)^(m-i), the i = 0 term is (-R^1)^m
                num = neg ** m
                for i in range(2, m + 1):
                    num += math.comb(m, i) * R[i][n, k] * F ** (i - 1) * neg ** (m - i)
                num += m * r1 * neg ** (m - 1)
                P[m][n, k] = Fraction(num, F ** m)
    # Q = P minus the averaged pure terms, by prefix sums of P over subtree sizes
    Q = {}
    for m in range(1, m_max + 1):
        Q[m] = np.empty((n_max + 1, K), dtype=object)
        Q[m].fill(zero)
        pre = np.empty(K, dtype=object)
        pre.fill(zero)
        for n in range(2, n_max + 1):
            pre = pre + P[m][n - 1]
            kk = min(k_max, n - 1)
            # sum_j P_{j,k-1} + P_{n-j,k} over j = 1..n-1 is pre[k-1] + pre[k]
            Q[m][n, 1:kk + 1] = P[m][n, 1:kk + 1] - (pre[0:kk] + pre[1:kk + 1]) / (n - 1)
    return mu, P, Q


def central_moment_dp(model, n_max: int, k_max: int | None = None, m_max: int = 4,
                      exact: bool | None = None, generic: bool = False) -> ExactTable:
    """Central moments of ``Y_{n,k}`` for two-part split families.

    Conditionally on the split, ``Y_{n,k} - mu_{n,k}`` is a sum of two
    independent centred subtree counts plus the shift
    ``nabla = mu(part 1) + mu(part 2) - mu_{n,k}``.  Expanding the m-th power
    in nabla gives P^(m) from lower moments of the parts; ``q[m]`` holds
    everything except the two pure terms E X^m and E Z^m.

    Rational tables for recursive trees use an integer raw-moment recurrence
    instead (much faster); ``generic=True`` forces the shared recurrence.
    """
    model = as_model(model)
    kind = split_kind(model)
    if kind == "split":
        raise ValueError(f"{model}: central moments need a two-part split (h = 2)")
    if m_max > MOMENT_M_MAX:
        raise ValueError(f"m_max: at most {MOMENT_M_MAX}")
    if m_max < 1:
        raise ValueError("m_max: need m_max >= 1")
    if n_max > MOMENT_N_MAX:
        raise ValueError(f"n_max: at most {MOMENT_N_MAX}")
    exact = _want_exact(exact, n_max)
    if k_max is None:
        k_max = default_k_max(n_max, exact)
    K = k_max + 1
    if exact and model.family == "recursive" and not generic:
        mu, P, Q = _recursive_moments_int(n_max, k_max, m_max)
        return ExactTable(model, n_max, k_max, True, mu, P, Q)
    mu = _mu_table(model, n_max, k_max, exact)
    P = {m: _zeros((n_max + 1, K), exact) for m in range(1, m_max + 1)}
    Q = {m: _zeros((n_max + 1, K), exact) for m in range(1, m_max + 1)}
    s = model.sample_size or 1
    for n in range(2, n_max + 1):
        if kind != "attach" and n < s:
            continue  # bucket: deterministic
        j0, p = _row(model, n, exact)
        j = np.arange(j0, j0 + len(p))
        if kind == "attach":
            r, shift = n - j, 0          # second part stays at level k
        else:
            r, shift = n - 1 - j, 1      # both subtrees one level lower
        # levels 1..kk (deeper levels are empty); part 1 sits one level lower,
        # part 2 is read at level k - shift
        kk = min(k_max, n - 1)
        if kk == 0:
            continue
        lo, hi = 1 - shift, kk + 1 - shift
        A = {a: P[a][j, 0:kk] for a in range(2, m_max + 1)}
        B = {b: P[b][r, lo:hi] for b in range(2, m_max + 1)}
        nabla = mu[j, 0:kk] + mu[r, lo:hi] - mu[n, 1:kk + 1]
        npow = {1: nabla}
        for c in range(2, m_max + 1):
            npow[c] = npow[c - 1] * nabla
        # D_s = E(X + Z)^s for the two centred parts: sum of C(s, a) A_a B_{s-a}
        D = {}
        for t in range(2, m_max + 1):
            acc = A[t] + B[t]
            for a in range(2, t - 1):
                acc = acc + (A[a] * B[t - a]) * math.comb(t, a)
            D[t] = acc
        for m in range(2, m_max + 1):
            # E(X + Z + nabla)^m = sum_c C(m, c) nabla^c D_{m-c}; D_1 = 0, D_0 = 1
            total = npow[m]
            for c in range(0, m - 1):
                term = D[m - c] if c == 0 else (npow[c] * D[m - c]) * math.comb(m, c)
                total = total + term
            qsum = total - A[m] - B[m]
            qrow = p.dot(qsum)
            Q[m][n, 1:kk + 1] = qrow
            P[m][n, 1:kk + 1] = qrow + p.dot(A[m] + B[m])
    pm = {m: _to_public(P[m], exact) for m in P if m <= m_max}
    q = {m: _to_public(Q[m], exact) for m in Q}
    return ExactTable(model, n_max, k_max, exact, _to_public(mu, exact), pm, q)


# -- closed form for recursive trees ------------------------------------------------

def closed_form_recursive_moments(n: int, k: int, m: int, table: ExactTable):
    """``P^(m)_{n,k}`` for recursive trees from the Q-table, by the explicit sum

    ``P_n(u) = Q_n(u) + sum_{2<=h<n} (Q_h(u)/h) (u + 1) prod_{h<j<n} (1 + u/j)``.
    """
    if table.model.family != "recursive":
        raise ValueError("table: closed form holds for recursive trees only")
    if not 1 <= n <= min(table.n_max, EXACT_BOUNDARY):
        raise ValueError(f"n: need 1 <= n <= {min(table.n_max, EXACT_BOUNDARY)}")
    if m == 1:
        return Fraction(0) if table.exact else 0.0
    if m not in table.q:
        raise ValueError(f"m: table has moments up to {max(table.q)}")
    if k > table.k_max:
        raise ValueError("k: beyond the table")
    exact = table.exact
    Qt = _to_internal(table.q[m]) if exact else table.q[m]
    one = mpq(1) if exact else 1.0
    total = Qt[n, k]
    # prod over h < j < n, built from h = n - 1 downwards
    prod = [one] + [mpq(0) if exact else 0.0] * k
    for h in range(n - 1, 1, -1):
        if h + 1 <= n - 1:
            inv = mpq(1, h + 1) if exact else 1.0 / (h + 1)
            for i in range(k, 0, -1):
                prod[i] = prod[i] + prod[i - 1] * inv
        # coefficients of (u + 1) * prod
        e = [prod[i] + (prod[i - 1] if i else 0) for i in range(k + 1)]
        acc = sum((Qt[h, k - i] * e[i] for i in range(k + 1)), mpq(0) if exact else 0.0)
        total = total + acc / h
    return to_fraction(total) if exact else float(total)


def closed_form_recursive_table(table: ExactTable, m: int):
    """All of ``P^(m)`` from the closed form, evaluated incrementally in n."""
    if table.model.family != "recursive":
        raise ValueError("table: closed form holds for recursive trees only")
    exact = table.exact
    Qt = _to_internal(table.q[m]) if exact else table.q[m]
    K = table.k_max + 1
    out = _zeros((table.n_max + 1, K), exact)
    S = _zeros(K, exact)
    for n in range(1, table.n_max + 1):
        out[n] = Qt[n] + S
        # S_{n+1} = S_n (1 + u/n) + (Q_n/n)(u + 1)
        nxt = S.copy()
        nxt[1:] = nxt[1:] + S[:-1] / n
        qn = Qt[n] / n
        nxt = nxt + qn
        nxt[1:] = nxt[1:] + qn[:-1]
        S = nxt
    return _to_public(out, exact)


# -- brute-force enumeration --------------------------------------------------------

def _add_profile(dist, counts, w):
    key = tuple(counts)
    dist[key] = dist.get(key, 0) + w


def _depth_profile(depths):
    counts = [0] * (max(depths) + 1)
    for d in depths:
        counts[d] += 1
    return counts


def _enum_recursive(n):
    dist = {}
    w = Fraction(1, math.factorial(n - 1))
    for parents in itertools.product(*[range(i) for i in range(1, n)]):
        depths = [0]
        for i, p in enumerate(parents, start=1):
            depths.append(depths[p] + 1)
        _add_profile(dist, _depth_profile(depths), w)
    return dist


def _enum_port(n):
    dist = {}

    def walk(depths, outdeg, w):
        i = len(depths)
        if i == n:
            _add_profile(dist, _depth_profile(depths), w)
            return
        slots = 2 * i - 1
        for v in range(i):
            outdeg[v] += 1
            walk(depths + [depths[v] + 1], outdeg + [0], w * Fraction(outdeg[v], slots))
            outdeg[v] -= 1

    walk([0], [0], Fraction(1))
    return dist


def split_tree_profile(seq, m: int, t: int):
    """Node profile of an m-ary search tree (sample size m(t+1)-1) built from ``seq``."""
    s = m * (t + 1) - 1
    counts = []

    def build(items, depth):
        if not items:
            return
        while len(counts) <= depth:
            counts.append(0)
        counts[depth] += 1
        if len(items) < s:
            return
        sample = sorted(items[:s])
        pivots = sample[t::t + 1][:m - 1]
        pset = set(pivots)
        parts = [[] for _ in range(m)]
        for x in items:
            if x in pset:
                continue
            parts[int(np.searchsorted(pivots, x))].append(x)
        for part in parts:
            build(part, depth + 1)

    build(list(seq), 0)
    return counts


def _enum_permutations(n, m, t):
    dist = {}
    w = Fraction(1, math.factorial(n))
    for perm in itertools.permutations(range(n)):
        _add_profile(dist, split_tree_profile(perm, m, t), w)
    return dist


def _shift_merge(dists):
    """Distribution of the level-wise sum of independent profiles, one level down."""
    acc = {(): Fraction(1)}
    for d in dists:
        nxt = {}
        for a, pa in acc.items():
            for b, pb in d.items():
                L = max(len(a), len(b))
                key = tuple((a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0)
                            for i in range(L))
                nxt[key] = nxt.get(key, 0) + pa * pb
        acc = nxt
    return {(1,) + k: p for k, p in acc.items()}


def _compositions(total, parts):
    if parts == 1:
        yield (total,)
        return
    for first in range(1, total - parts + 2):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def _enum_increasing(model, n):
    from .series import phi_coefficient, solve_tree_ode
    T = solve_tree_ode(model, n, exact=True)
    memo = {1: {(1,): Fraction(1)}}

    def dist(size):
        if size in memo:
            return memo[size]
        M = size - 1
        total = size * T[size]            # [z^M] phi(tau)
        out = {}
        for r in range(1, M + 1):
            phr = phi_coefficient(model, r)
            if phr == 0:
                continue
            for comp in _compositions(M, r):
                w = phr
                for c in comp:
                    w *= T[c]
                if w == 0:
                    continue
                w /= total
                for key, p in _shift_merge([dist(c) for c in comp]).items():
                    out[key] = out.get(key, 0) + w * p
        memo[size] = out
        return out

    if T[n] == 0:
        raise ValueError(f"n: no trees of size {n} in this variety")
    return dist(n)


def enumerate_exact(model, n: int) -> dict:
    """Exact law of the profile for a tiny tree: ``{counts tuple: Fraction}``."""
    model = as_model(model)
    f = model.family
    cap = ENUM_CAPS[f]
    if n < 1:
        raise ValueError("n: need n >= 1")
    if n > cap:
        raise ValueError(f"n: enumeration cap for {f} is {cap}")
    if f == "recursive":
        return _enum_recursive(n) if n > 1 else {(1,): Fraction(1)}
    if f == "port":
        return _enum_port(n)
    if f == "quad":
        if model.d != 1:
            raise ValueError("quad: enumeration needs d = 1 (continuous splits otherwise)")
        return _enum_permutations(n, 2, 0)
    if f == "grid":
        if model.d != 1:
            raise ValueError("grid: enumeration needs d = 1 (continuous splits otherwise)")
        return _enum_permutations(n, model.m, 0)
    if f == "mary":
        return _enum_permutations(n, model.m, model.t)
    return _enum_increasing(model, n)


def moments_from_distribution(dist: dict, m_max: int = 4):
    """Per-level means and central moments of a profile law.

    Returns ``(mu, P)`` with ``mu[k]`` and ``P[m][k]`` as Fractions.
    """
    L = max(len(k) for k in dist)
    mu = [sum((p * (c[k] if k < len(c) else 0) for c, p in dist.items()), Fraction(0))
          for k in range(L)]
    P = {}
    for m in range(1, m_max + 1):
        P[m] = [sum((p * ((c[k] if k < len(c) else 0) - mu[k]) ** m for c, p in dist.items()),
                    Fraction(0)) for k in range(L)]
    return mu, P


def profile_distribution_json(dist: dict) -> dict:
    """``{"[1,2]": "2/3", ...}`` with keys in a fixed order."""
    items = sorted(dist.items(), key=lambda kv: (len(kv[0]), kv[0]))
    return {json.dumps(list(k), separators=(",", ":")): format_value(v) for k, v in items}
