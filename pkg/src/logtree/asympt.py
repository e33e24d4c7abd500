"""Closed-form asymptotic predictions: constants, Gaussian profile, width, mode.

A width-regular family has expected profile close to
``n / sqrt(2 pi sigma2 L_n) * exp(-(k - v L_n)^2 / (2 sigma2 L_n))`` with drift
``v = f'(1)`` and ``sigma2 = f'(1) + f''(1)``, where ``f`` describes how the
expected profile polynomial grows.  Mobile trees are the exception.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .model import as_model, format_model_spec, log_scale

EULER_GAMMA = 0.57721566490153286061
PI = 3.1415926535897932385
NEWTON_TOL = 1e-12


@dataclass(frozen=True)
class ModelConstants:
    v: Fraction | None
    sigma2: Fraction | None
    width_regular: bool

    def floats(self):
        return float(self.v), float(self.sigma2)


def _harmonic(n, order=1):
    return sum((Fraction(1, i ** order) for i in range(1, n + 1)), Fraction(0))


def model_constants(model) -> ModelConstants:
    """Drift and variance constants from their closed forms (exact rationals)."""
    model = as_model(model)
    f = model.family
    if f == "recursive":
        return ModelConstants(Fraction(1), Fraction(1), True)
    if f == "port":
        return ModelConstants(Fraction(1, 2), Fraction(1, 2), True)
    if f == "quad":
        d = model.d
        return ModelConstants(Fraction(2, d), Fraction(2, d * d), True)
    if f == "grid":
        m, d = model.m, model.d
        h1 = _harmonic(m) - 1
        h2 = _harmonic(m, 2) - 1
        return ModelConstants(1 / (d * h1), h2 / (d * d * h1 ** 3), True)
    if f == "mary":
        m, t = model.m, model.t
        a = _harmonic(m * (t + 1)) - _harmonic(t + 1)
        b = _harmonic(m * (t + 1), 2) - _harmonic(t + 1, 2)
        return ModelConstants(1 / a, b / a ** 3, True)
    if f == "increasing":
        d = model.degree
        return ModelConstants(Fraction(d, d - 1), Fraction(d, d - 1), True)
    return ModelConstants(None, None, False)


# -- implicit defining equations ----------------------------------------------------

def defining_polynomial(model):
    """Integer coefficients (lowest first) of P and the constant C with P(f(u)) = C u."""
    model = as_model(model)
    if model.family == "grid":
        base = [1]
        for i in range(1, model.m):
            base = _polymul(base, [i, 1])
        poly = [1]
        for _ in range(model.d):
            poly = _polymul(poly, base)
        return poly, math.factorial(model.m) ** model.d
    if model.family == "mary":
        m, t = model.m, model.t
        poly = [1]
        for i in range(t + 1, m * (t + 1)):
            poly = _polymul(poly, [i, 1])
        return poly, math.factorial(m * (t + 1)) // math.factorial(t + 1)
    raise ValueError(f"{model.family}: no implicit defining equation")


def _polymul(a, b):
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


def _polyval(c, x):
    acc = 0 * x
    for coef in reversed(c):
        acc = acc * x + coef
    return acc


def _deriv(c):
    return [i * c[i] for i in range(1, len(c))]


@dataclass(frozen=True)
class ImplicitSolution:
    f_at_1: float
    f1: float
    f2: float
    iterations: int

    @property
    def v(self):
        return self.f1

    @property
    def sigma2(self):
        return self.f1 + self.f2


def solve_implicit(model, u: float = 1.0, start: float = 2.0) -> ImplicitSolution:
    """Damped Newton for ``P(f) = C u``, then f', f'' by implicit differentiation."""
    poly, C = defining_polynomial(model)
    pf = [float(c) for c in poly]
    d1, d2 = _deriv(pf), _deriv(_deriv(pf))
    target = C * u
    f = float(start)
    it = 0
    for it in range(1, 200):
        g = _polyval(pf, f) - target
        dg = _polyval(d1, f)
        step = g / dg
        lam = 1.0
        # damping: halve until the residual shrinks
        while lam > 1e-6 and abs(_polyval(pf, f - lam * step) - target) > abs(g):
            lam /= 2
        f -= lam * step
        if abs(lam * step) <= NEWTON_TOL * max(1.0, abs(f)):
            break
    else:
        raise ArithmeticError("Newton iteration did not converge")
    p1 = _polyval(d1, f)
    f1 = C / p1
    f2 = -_polyval(d2, f) * f1 * f1 / p1
    return ImplicitSolution(f, f1, f2, it)


def implicit_constants_exact(model) -> tuple[Fraction, Fraction]:
    """(v, sigma2) from exact implicit differentiation at f(1) = 1."""
    poly, C = defining_polynomial(model)
    p1 = Fraction(_polyval(_deriv(poly), 1))
    p2 = Fraction(_polyval(_deriv(_deriv(poly)), 1))
    f1 = C / p1
    f2 = -p2 * f1 * f1 / p1
    return f1, f1 + f2


# -- profile and width --------------------------------------------------------------

def _require_regular(c: ModelConstants):
    if not c.width_regular:
        raise ValueError("model: not width-regular")


def _consts(c):
    if isinstance(c, ModelConstants):
        return c
    return model_constants(c)


def gaussian_profile(n, k, c) -> float:
    """Leading-order Gaussian approximation of mu_{n,k}."""
    c = _consts(c)
    _require_regular(c)
    v, s2 = c.floats()
    L = log_scale(n)
    dlt = k - v * L
    return n / math.sqrt(2 * PI * s2 * L) * math.exp(-dlt * dlt / (2 * s2 * L))


def expected_width_prediction(n, c) -> float:
    """``n / sqrt(2 pi sigma2 L_n)``; mobile trees get ``n / sqrt(2 pi log L_n)``."""
    c = _consts(c)
    if not c.width_regular:
        ll = math.log(log_scale(n))
        if ll <= 0:
            raise ValueError("n: log L_n must be positive for the mobile reference")
        return n / math.sqrt(2 * PI * ll)
    _, s2 = c.floats()
    return n / math.sqrt(2 * PI * s2 * log_scale(n))


# -- mode location ------------------------------------------------------------------

def p_ell(x, ell):
    """Second-order width correction as a function of x = {L_n} for offset ell."""
    return -0.5 * (x - ell - 1.5 + EULER_GAMMA) ** 2 - EULER_GAMMA / 2 + PI ** 2 / 12 + 1 / 24


def selector(x) -> int:
    """Offset in {-1, 0} maximising p_ell(x); the tie at x = 1 - gamma goes to -1."""
    return -1 if x <= 1 - EULER_GAMMA else 0


@dataclass(frozen=True)
class ModePrediction:
    n: int
    L_n: float
    frac: float
    k_hat: int
    selector: int
    width_level: int


def mode_prediction(n) -> ModePrediction:
    """Argmax of the expected profile and the level carrying the width (recursive trees)."""
    if n < 2:
        raise ValueError("n: need n >= 2")
    L = log_scale(n)
    fl = math.floor(L)
    frac = L - fl
    k_hat = math.floor(L - 1 + EULER_GAMMA)
    sel = selector(frac)
    return ModePrediction(int(n), L, frac, int(k_hat), sel, int(fl + sel))


# -- reports ------------------------------------------------------------------------

def width_regularity_report(model, n) -> dict:
    """Every leading-order prediction for (model, n) in one record."""
    model = as_model(model)
    c = model_constants(model)
    L = log_scale(n)
    rep = {"model": format_model_spec(model), "n": int(n), "L_n": L,
           "width_regular": c.width_regular}
    if c.width_regular:
        v, s2 = c.floats()
        rep.update({
            "v": v, "sigma2": s2,
            "expected_width": expected_width_prediction(n, c),
            "mode_center": v * L,
            "var_scale": n * n / L ** 3,
            "m4_scale": n ** 4 / L ** 6,
            "concentration": "P(|k* - v L_n| >= T) decreases in T",
        })
    else:
        rep.update({
            "v": None, "sigma2": None,
            "expected_width": expected_width_prediction(n, c),
            "mode_center": math.log(L),
            "var_scale": None, "m4_scale": None,
            "concentration": None,
        })
    return rep


def predict(model, n) -> dict:
    """Record with model, n, L_n, frac, v, sigma2, expected_width, k_hat, width_level."""
    model = as_model(model)
    c = model_constants(model)
    L = log_scale(n)
    out = {"model": format_model_spec(model), "n": int(n), "L_n": L, "frac": L - math.floor(L),
           "v": None, "sigma2": None, "expected_width": expected_width_prediction(n, c),
           "k_hat": None, "width_level": None}
    if c.width_regular:
        out["v"], out["sigma2"] = c.floats()
    if model.family == "recursive" and n >= 2:
        mp = mode_prediction(n)
        out["k_hat"], out["width_level"] = mp.k_hat, mp.width_level
    return out


def constants_record(model) -> dict:
    model = as_model(model)
    c = model_constants(model)
    out = {"model": format_model_spec(model), "width_regular": c.width_regular,
           "v": None if c.v is None else str(c.v), "sigma2": None if c.sigma2 is None else str(c.sigma2)}
    if c.width_regular:
        out["v_float"], out["sigma2_float"] = c.floats()
    if model.family in ("grid", "mary"):
        sol = solve_implicit(model)
        out["implicit"] = {"v": sol.v, "sigma2": sol.sigma2, "iterations": sol.iterations}
    return out


def gaussian_mass(n, c, width=6.0) -> float:
    """Sum of the Gaussian profile over integer k within v L_n +- width sigma sqrt(L_n)."""
    c = _consts(c)
    v, s2 = c.floats()
    L = log_scale(n)
    half = width * math.sqrt(s2 * L)
    ks = np.arange(max(0, math.ceil(v * L - half)), math.floor(v * L + half) + 1)
    return float(sum(gaussian_profile(n, int(k), c) for k in ks))


__all__ = [
    "EULER_GAMMA", "ModelConstants", "ModePrediction", "ImplicitSolution", "model_constants",
    "defining_polynomial", "solve_implicit", "implicit_constants_exact", "gaussian_profile",
    "expected_width_prediction", "p_ell", "selector", "mode_prediction",
    "width_regularity_report", "predict", "constants_record", "gaussian_mass",
]
