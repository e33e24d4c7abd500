"""Small helpers for exact rational tables stored in numpy object arrays."""

from fractions import Fraction

import numpy as np


def fraction_array(shape, fill=0):
    out = np.empty(shape, dtype=object)
    out.fill(Fraction(fill))
    return out


def to_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    num, den = getattr(x, "numerator", None), getattr(x, "denominator", None)
    if num is not None:
        return Fraction(int(num), int(den))
    return Fraction(x)


def format_rational(x) -> str:
    """Serialise a rational as ``"p/q"`` (``"p"`` when integral)."""
    x = to_fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def format_value(x) -> str:
    """Round-trip text for a table entry: rationals as p/q, floats via repr."""
    if isinstance(x, (Fraction, int)) and not isinstance(x, bool):
        return format_rational(x)
    return repr(float(x))
