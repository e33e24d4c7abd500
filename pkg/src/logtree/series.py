"""Truncated power series and the increasing-tree generating functions.

A :class:`Series` holds coefficients ``c_0..c_N`` either as exact rationals
(``gmpy2.mpq`` inside, ``Fraction`` when read) or as a float64 array.  Every
operation is truncation consistent: the result's coefficient of ``z^k`` only
reads input coefficients of order ``<= k``.

The increasing-tree variety with degree function ``phi`` has exponential
generating function ``tau`` with ``tau' = phi(tau)``.  Float work is done in a
rescaled variable ``z = rho * w`` (``rho`` = radius of convergence) so that
coefficients stay O(1) up to ``N = 10^4``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable

import numpy as np
from gmpy2 import mpq
from scipy import integrate, special

from ._exactnum import to_fraction

from .model import TreeModelSpec, as_model

FLOAT_CAP = 2000
RATIONAL_CAP = 200

_Z = mpq(0)


class Series:
    """Power series truncated at order N (``len(coeffs) == N + 1``)."""

    __slots__ = ("c", "exact")

    def __init__(self, coeffs, exact: bool | None = None):
        if exact is None:
            exact = not isinstance(coeffs, np.ndarray) and all(
                isinstance(x, (int, Fraction, type(_Z))) for x in coeffs)
        if exact:
            self.c = [x if isinstance(x, type(_Z)) else mpq(to_fraction(x)) for x in coeffs]
        else:
            self.c = np.asarray(coeffs, dtype=float).copy()
        self.exact = exact
        if len(self.c) == 0:
            raise ValueError("series needs at least one coefficient")

    @classmethod
    def zeros(cls, N, exact=True):
        return cls([_Z] * (N + 1) if exact else np.zeros(N + 1), exact)

    @classmethod
    def from_function(cls, coeff: Callable[[int], object], N, exact=True):
        return cls([coeff(j) for j in range(N + 1)], exact)

    @property
    def N(self) -> int:
        return len(self.c) - 1

    def __getitem__(self, k):
        if self.exact:
            return [to_fraction(x) for x in self.c[k]] if isinstance(k, slice) else to_fraction(self.c[k])
        return self.c[k]

    def __len__(self):
        return len(self.c)

    def __repr__(self):
        head = self.tolist()[:6]
        return f"Series({head}{'...' if self.N > 5 else ''}, N={self.N}, exact={self.exact})"

    def __eq__(self, other):
        if not isinstance(other, Series) or other.N != self.N:
            return NotImplemented
        if self.exact and other.exact:
            return self.c == other.c
        return bool(np.array_equal(np.asarray(self.c, float), np.asarray(other.c, float)))

    def _like(self, coeffs):
        return Series(coeffs, self.exact)

    def _common(self, other):
        if not isinstance(other, Series):
            return None
        N = min(self.N, other.N)
        return N

    def tolist(self):
        return [to_fraction(x) for x in self.c] if self.exact else list(self.c)

    # -- ring operations -----------------------------------------------------
    def __add__(self, other):
        if isinstance(other, Series):
            N = self._common(other)
            if self.exact:
                return self._like([a + b for a, b in zip(self.c[:N + 1], other.c[:N + 1])])
            return self._like(self.c[:N + 1] + np.asarray(other.c[:N + 1], float))
        out = list(self.c) if self.exact else self.c.copy()
        out[0] = out[0] + other
        return self._like(out)

    __radd__ = __add__

    def __neg__(self):
        return self._like([-a for a in self.c] if self.exact else -self.c)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Series):
            if self.exact:
                other = mpq(to_fraction(other))
                return self._like([a * other for a in self.c])
            return self._like(self.c * float(other))
        N = self._common(other)
        if self.exact and other.exact:
            a, b = self.c, other.c
            out = [sum((a[i] * b[n - i] for i in range(n + 1)), _Z) for n in range(N + 1)]
            return Series(out, True)
        a = np.asarray(self.c[:N + 1], float)
        b = np.asarray(other.c[:N + 1], float)
        return Series(np.convolve(a, b)[:N + 1], False)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Series):
            return self * other.inverse()
        if self.exact:
            return self * (1 / to_fraction(other))
        return self * (1.0 / float(other))

    def coefficient_product(self, other, n):
        """[z^n] of ``self * other`` without forming the product."""
        if self.exact and other.exact:
            return sum((self.c[i] * other.c[n - i] for i in range(n + 1)), _Z)
        a = np.asarray(self.c[:n + 1], float)
        b = np.asarray(other.c[:n + 1], float)
        return float(np.dot(a, b[::-1]))

    # -- calculus ------------------------------------------------------------
    def derivative(self):
        """Derivative; the result has order N - 1."""
        if self.N == 0:
            return self._like([0] if self.exact else np.zeros(1))
        if self.exact:
            return self._like([k * self.c[k] for k in range(1, self.N + 1)])
        return self._like(self.c[1:] * np.arange(1, self.N + 1))

    def integral(self):
        """Antiderivative with zero constant term, kept at order N."""
        if self.exact:
            return self._like([_Z] + [self.c[k] / (k + 1) for k in range(self.N)])
        out = np.zeros(self.N + 1)
        out[1:] = self.c[:-1] / np.arange(1, self.N + 1)
        return self._like(out)

    def inverse(self):
        a = self.c
        if a[0] == 0:
            raise ZeroDivisionError("inverse of a series with zero constant term")
        N = self.N
        if self.exact:
            b = [_Z] * (N + 1)
            b[0] = 1 / a[0]
            for n in range(1, N + 1):
                b[n] = -sum((a[i] * b[n - i] for i in range(1, n + 1)), _Z) * b[0]
            return self._like(b)
        b = np.zeros(N + 1)
        b[0] = 1.0 / a[0]
        for n in range(1, N + 1):
            b[n] = -np.dot(a[1:n + 1], b[n - 1::-1]) * b[0]
        return self._like(b)

    def log(self):
        if self.c[0] != 1:
            raise ValueError("log needs constant term 1")
        if self.N == 0:
            return self._like([0] if self.exact else np.zeros(1))
        q = self.derivative()
        inv = Series(self.c[:self.N], self.exact).inverse()
        return (q * inv)._pad_integral(self.N)

    def _pad_integral(self, N):
        # antiderivative of an order N-1 series, returned at order N
        if self.exact:
            return Series([_Z] + [self.c[k] / (k + 1) for k in range(N)], True)
        out = np.zeros(N + 1)
        out[1:] = self.c[:N] / np.arange(1, N + 1)
        return Series(out, False)

    def exp(self):
        a = self.c
        if a[0] != 0:
            raise ValueError("exp needs constant term 0")
        N = self.N
        if self.exact:
            b = [_Z] * (N + 1)
            b[0] = mpq(1)
            ka = [k * a[k] for k in range(N + 1)]
            for n in range(1, N + 1):
                b[n] = sum((ka[k] * b[n - k] for k in range(1, n + 1)), _Z) / n
            return self._like(b)
        b = np.zeros(N + 1)
        b[0] = 1.0
        ka = a * np.arange(N + 1)
        for n in range(1, N + 1):
            b[n] = np.dot(ka[1:n + 1], b[n - 1::-1]) / n
        return self._like(b)

    def pow(self, alpha):
        """``self ** alpha`` as ``exp(alpha * log(self))``; constant term must be 1."""
        if self.exact and isinstance(alpha, (int, Fraction, type(_Z))):
            return (self.log() * alpha).exp()
        if self.exact:
            return Series(np.asarray(self.c, float), False).pow(alpha)
        return (self.log() * float(alpha)).exp()

    def __pow__(self, alpha):
        return self.pow(alpha)

    def to_float(self):
        return Series(np.asarray([float(x) for x in self.c]), False)


# -- degree functions -------------------------------------------------------------

NAMED_PHI = {
    "exp": "exp", "recursive": "exp",
    "plane": "plane", "port": "plane",
    "mobile": "mobile",
}


def _normalise_phi(phi):
    """Return ('poly', coeffs) | ('named', name) | ('generator', callable)."""
    if isinstance(phi, TreeModelSpec):
        if phi.family == "increasing":
            return "poly", tuple(c / phi.phi[0] for c in phi.phi)
        if phi.family in ("recursive", "port", "mobile"):
            return "named", NAMED_PHI[phi.family]
        raise ValueError(f"{phi.family}: not an increasing-tree variety")
    if isinstance(phi, str):
        key = phi.strip().lower()
        if key in NAMED_PHI:
            return "named", NAMED_PHI[key]
        return _normalise_phi(as_model(phi))
    if callable(phi):
        return "generator", phi
    return "poly", tuple(Fraction(c) for c in phi)


def _named_coeff(name, j):
    if name == "exp":
        return Fraction(1, math.factorial(j))
    if name == "plane":
        return Fraction(1)
    return Fraction(1) if j == 0 else Fraction(1, j)  # mobile


def phi_coefficient(phi, j) -> Fraction:
    kind, obj = _normalise_phi(phi)
    if kind == "poly":
        return obj[j] if j < len(obj) else _Z
    if kind == "named":
        return _named_coeff(obj, j)
    return Fraction(obj(j))


@dataclass(frozen=True)
class TreeSeries:
    """Solution of ``tau' = phi(tau)`` in the variable ``z = rho * w``.

    ``tau[n] = T_n * rho^n`` with ``T_n = tau_n / n!`` and
    ``psi[n] = [w^n] phi(tau(rho w))``.
    """

    tau: Series
    psi: Series
    rho: object

    def egf(self, n):
        """``T_n = tau_n / n!`` in the original variable."""
        return self.tau[n] / self.rho ** n

    def count(self, n):
        """Number ``tau_n`` of increasing trees with n labelled nodes."""
        return self.egf(n) * math.factorial(n)


def solve_tree_ode(phi, N: int, exact: bool = True, rho=1) -> Series:
    """Coefficients ``T_0..T_N`` of ``tau`` with ``tau' = phi(tau)``, ``tau(0) = 0``.

    ``phi`` is a coefficient sequence, one of the names ``"exp"``, ``"plane"``,
    ``"mobile"``, or a callable ``j -> phi_j``.
    """
    return solve_tree_ode_scaled(phi, N, exact, rho).tau


def solve_tree_ode_scaled(phi, N: int, exact: bool = True, rho=1) -> TreeSeries:
    if N < 1:
        raise ValueError("N: need N >= 1")
    kind, obj = _normalise_phi(phi)
    if kind == "poly" and (isinstance(phi, (list, tuple)) or not isinstance(phi, (str, TreeModelSpec))):
        if obj[0] != 1:
            raise ValueError("phi: need phi_0 = 1")
    if kind == "generator" and Fraction(obj(0)) != 1:
        raise ValueError("phi: need phi_0 = 1")
    if exact:
        tau, psi = _solve_exact(kind, obj, N, mpq(to_fraction(rho)))
        rho = to_fraction(rho)
        return TreeSeries(Series(tau, True), Series(psi, True), rho)
    rho = float(rho)
    tau, psi = _solve_float(kind, obj, N, rho)
    return TreeSeries(Series(tau, False), Series(psi, False), rho)


def _solve_exact(kind, obj, N, rho):
    zero = _Z
    tau = [zero] * (N + 1)
    psi = [zero] * (N + 1)
    psi[0] = mpq(1)
    if kind == "named":
        name = obj
        tau[1] = rho * psi[0]
        for n in range(1, N):
            if name == "exp":
                s = sum((psi[i] * psi[n - 1 - i] for i in range(n)), zero)
                psi[n] = rho * s / n
            elif name == "plane":
                psi[n] = sum((tau[i] * psi[n - i] for i in range(1, n + 1)), zero)
            else:
                s = sum((tau[i] * (n - i) * psi[n - i] for i in range(1, n)), zero)
                psi[n] = (rho * psi[n - 1] + s) / n
            tau[n + 1] = rho * psi[n] / (n + 1)
        if N >= 1:
            psi[N] = _psi_tail_exact(name, tau, psi, N, rho)
        return tau, psi
    # polynomial or generator: powers of tau, built one column at a time
    if kind == "poly":
        cs = [mpq(c) for c in obj]
        coeff = lambda j: cs[j] if j < len(cs) else zero  # noqa: E731
    else:
        coeff = lambda j: mpq(to_fraction(obj(j)))  # noqa: E731
    dmax = len(obj) - 1 if kind == "poly" else N
    pw = {1: tau}
    for r in range(2, dmax + 1):
        pw[r] = [zero] * (N + 1)
    for n in range(0, N):
        if n >= 1:
            for r in range(2, min(dmax, n) + 1):
                pw[r][n] = sum((tau[i] * pw[r - 1][n - i] for i in range(1, n - r + 2)), zero)
        psi[n] = (coeff(0) if n == 0 else zero) + sum(
            (coeff(r) * pw[r][n] for r in range(1, min(dmax, n) + 1)), zero)
        tau[n + 1] = rho * psi[n] / (n + 1)
    for r in range(2, min(dmax, N) + 1):
        pw[r][N] = sum((tau[i] * pw[r - 1][N - i] for i in range(1, N - r + 2)), zero)
    psi[N] = sum((coeff(r) * pw[r][N] for r in range(1, min(dmax, N) + 1)), zero)
    return tau, psi


def _psi_tail_exact(name, tau, psi, n, rho):
    zero = _Z
    if name == "exp":
        return rho * sum((psi[i] * psi[n - 1 - i] for i in range(n)), zero) / n
    if name == "plane":
        return sum((tau[i] * psi[n - i] for i in range(1, n + 1)), zero)
    s = sum((tau[i] * (n - i) * psi[n - i] for i in range(1, n)), zero)
    return (rho * psi[n - 1] + s) / n


def _solve_float(kind, obj, N, rho):
    tau = np.zeros(N + 1)
    psi = np.zeros(N + 1)
    psi[0] = 1.0
    tau[1] = rho
    if kind == "named":
        ar = np.arange(N + 1, dtype=float)
        for n in range(1, N + 1):
            if obj == "exp":
                psi[n] = rho * np.dot(psi[:n], psi[n - 1::-1]) / n
            elif obj == "plane":
                psi[n] = np.dot(tau[1:n + 1], psi[n - 1::-1])
            else:
                s = np.dot(tau[1:n], (ar[n - 1:0:-1] * psi[n - 1:0:-1])) if n > 1 else 0.0
                psi[n] = (rho * psi[n - 1] + s) / n
            if n < N:
                tau[n + 1] = rho * psi[n] / (n + 1)
        return tau, psi
    coeffs = [float(c) for c in obj] if kind == "poly" else None
    dmax = len(coeffs) - 1 if kind == "poly" else N
    pw = np.zeros((dmax + 1, N + 1))
    for n in range(0, N + 1):
        if n >= 1:
            pw[1, n] = tau[n]
            for r in range(2, min(dmax, n) + 1):
                pw[r, n] = np.dot(tau[1:n], pw[r - 1, n - 1:0:-1])
        c = (lambda j: coeffs[j]) if coeffs is not None else (lambda j: float(obj(j)))
        psi[n] = (1.0 if n == 0 else 0.0) + sum(c(r) * pw[r, n] for r in range(1, min(dmax, n) + 1))
        if n < N:
            tau[n + 1] = rho * psi[n] / (n + 1)
    return tau, psi


def tree_counts(phi, N: int) -> list[int]:
    """Exact ``tau_0..tau_N`` (number of increasing trees of each size)."""
    tau = solve_tree_ode(phi, N, exact=True)
    out = []
    for n in range(N + 1):
        v = tau[n] * math.factorial(n)
        out.append(int(v) if v.denominator == 1 else v)
    return out


# -- radius of convergence --------------------------------------------------------

def _poly_coeffs(phi):
    kind, obj = _normalise_phi(phi)
    if kind != "poly":
        raise ValueError("phi: polynomial degree function required")
    return [float(c) for c in obj]


def radius(phi) -> float:
    """``R = integral_0^inf dv / phi(v)`` (or up to the singularity at 1)."""
    kind, obj = _normalise_phi(phi)
    if kind == "named":
        if obj == "exp":
            return 1.0
        if obj == "plane":
            return 0.5
        return float(math.e * special.exp1(1.0))  # int_0^inf e^-v / (1 + v) dv
    if kind != "poly":
        raise ValueError("phi: radius available for named and polynomial phi only")
    return _poly_radius(tuple(_poly_coeffs(phi)))


@lru_cache(maxsize=64)
def _poly_radius(c: tuple) -> float:
    d = len(c) - 1
    head, _ = integrate.quad(lambda v: 1.0 / np.polyval(c[::-1], v), 0.0, 1.0,
                             epsabs=0.0, epsrel=1e-13, limit=200)
    # v = 1/s on [1, inf): integrand s^(d-2) / sum_j c_j s^(d-j)
    rev = c  # s^d phi(1/s) = sum_j c_j s^(d-j) -> polyval with coefficients c (highest first)
    tail, _ = integrate.quad(lambda s: s ** (d - 2) / np.polyval(rev, s), 0.0, 1.0,
                             epsabs=0.0, epsrel=1e-13, limit=200)
    return head + tail


def period(phi) -> int:
    """gcd of the exponents j with phi_j > 0 (so tau_n = 0 unless n = 1 mod p)."""
    c = _poly_coeffs(phi)
    p = 0
    for j, cj in enumerate(c):
        if j > 0 and cj > 0:
            p = math.gcd(p, j)
    return p


def tau_asymptotic_ratio(phi, n: int) -> float:
    """Exact ``tau_n / n!`` divided by its singularity-analysis approximation.

    The approximation is
    ``p / Gamma(1/(d-1)) * ((d-1) phi_d R)^(-1/(d-1)) * R^-n * n^(-(d-2)/(d-1))``.
    """
    c = _poly_coeffs(phi)
    if c[0] != 1:
        raise ValueError("phi: need phi_0 = 1")
    d = len(c) - 1
    if d < 2:
        raise ValueError("phi: need degree >= 2")
    p = period(phi)
    if (n - 1) % p:
        raise ValueError(f"n: tau_n vanishes unless n = 1 mod {p}")
    R = radius(phi)
    if not math.isfinite(R) or R <= 0:
        raise ArithmeticError("radius quadrature diverged")
    ts = solve_tree_ode_scaled(phi, n, exact=False, rho=R)
    exact_scaled = ts.tau[n]                      # T_n R^n
    a = 1.0 / (d - 1)
    approx_scaled = p / math.gamma(a) * ((d - 1) * c[-1] * R) ** (-a) * n ** (-(d - 2) / (d - 1))
    return float(exact_scaled / approx_scaled)


# -- expected profile polynomials -------------------------------------------------

@dataclass(frozen=True)
class ProfilePolynomialRow:
    n: int
    mu: tuple

    def __len__(self):
        return len(self.mu)

    @property
    def total(self):
        return sum(self.mu)


def _variety(model):
    if isinstance(model, (list, tuple)) or callable(model):
        return model
    if isinstance(model, str) and model.strip().lower() in NAMED_PHI:
        return model
    spec = as_model(model)
    if spec.family not in ("increasing", "mobile", "recursive", "port"):
        raise ValueError(f"{spec.family}: not an increasing-tree model")
    return spec


def _scaled_solution(model, N, exact):
    if exact:
        return solve_tree_ode_scaled(model, N, exact=True, rho=1)
    return solve_tree_ode_scaled(model, N, exact=False, rho=radius(model))


def _u_expansion(ts: TreeSeries, k_max: int):
    """Return (powers A^j/j!, C_i = int(psi * (-A)^i / i!)) for A = log psi."""
    psi = ts.psi
    A = psi.log()
    one = Series([1] + [0] * psi.N, True) if psi.exact else Series(np.eye(1, psi.N + 1)[0], False)
    powers = [one]
    negs = [one]
    for j in range(1, k_max + 1):
        powers.append(powers[-1] * A / j)
        negs.append(negs[-1] * A / (-j))
    ints = [(psi * neg).integral() for neg in negs]
    return powers, ints


def profile_row_increasing(model, n: int, k_max: int, exact: bool | None = None,
                           cap: int | None = None) -> ProfilePolynomialRow:
    """Expected profile ``mu_{n,0..k_max}`` of an increasing-tree variety.

    Uses ``Xi_n(u) = (n! / tau_n) [z^n] tau'(z)^u int_0^z tau'(v)^(1-u) dv``
    expanded in u through ``A = log tau'``.
    """
    model = _variety(model)
    if exact is None:
        exact = n <= RATIONAL_CAP
    if cap is None:
        cap = RATIONAL_CAP if exact else FLOAT_CAP
    if n > cap:
        raise ValueError(f"n: {n} exceeds the series cap {cap}")
    if k_max < 0:
        raise ValueError("k_max: must be >= 0")
    if n < 1:
        raise ValueError("n: must be >= 1")
    ts = _scaled_solution(model, n, exact)
    Tn = ts.tau.c[n]
    if Tn == 0:
        raise ValueError(f"n: no trees of size {n} in this variety")
    powers, ints = _u_expansion(ts, k_max)
    rho = mpq(ts.rho) if exact else ts.rho
    mu = []
    for k in range(k_max + 1):
        acc = _Z if exact else 0.0
        for i in range(k + 1):
            acc += powers[k - i].coefficient_product(ints[i], n)
        v = rho * acc / Tn
        mu.append(to_fraction(v) if exact else float(v))
    return ProfilePolynomialRow(n, tuple(mu))


def profile_table_increasing(model, n_max: int, k_max: int, exact: bool = True):
    """All rows ``n = 1..n_max`` at once (rational mode is practical to n ~ 60)."""
    model = _variety(model)
    ts = _scaled_solution(model, n_max, exact)
    powers, ints = _u_expansion(ts, k_max)
    rows = {}
    prods = {}
    for k in range(k_max + 1):
        total = None
        for i in range(k + 1):
            key = (k - i, i)
            if key not in prods:
                prods[key] = powers[k - i] * ints[i]
            total = prods[key] if total is None else total + prods[key]
        rho = mpq(ts.rho) if exact else ts.rho
        for n in range(1, n_max + 1):
            Tn = ts.tau.c[n]
            if Tn == 0:
                continue
            v = rho * total.c[n] / Tn
            rows.setdefault(n, []).append(to_fraction(v) if exact else float(v))
    return {n: ProfilePolynomialRow(n, tuple(v)) for n, v in rows.items()}
