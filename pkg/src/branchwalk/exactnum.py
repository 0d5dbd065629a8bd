"""Small bridge between float and exact (sympy) scalar arithmetic.

Subshift scenarios run end-to-end on exact numbers when their weight
tables are given symbolically (strings like ``"3/2"`` or
``"2/(1 + sqrt(5))"``).  Everything here funnels through :func:`canon`,
which rationalizes denominators and expands, so any value we store is a
Rational combination of radicals and differences of equal quantities
cancel structurally.  :func:`is_zero` falls back to ``simplify`` for the
rare case expansion alone does not settle.
"""

from __future__ import annotations

from fractions import Fraction
from numbers import Integral

import sympy as sp


def canon(value):
    """Canonical sympy form of an exact scalar (rationalized, expanded)."""
    if isinstance(value, Fraction):
        value = sp.Rational(value.numerator, value.denominator)
    expr = sp.sympify(value)
    return sp.expand(sp.radsimp(expr))


def as_exact(value):
    """Parse strings/ints/Fractions to canonical exact numbers.

    Floats are passed through unchanged — they are deliberately *not*
    promoted, so a float anywhere keeps a computation in float mode.
    """
    if isinstance(value, float):
        return value
    if isinstance(value, (str, Fraction, Integral, sp.Expr)):
        return canon(value)
    return value


def is_exact(value) -> bool:
    if isinstance(value, (Fraction, Integral)):
        return True
    return isinstance(value, sp.Expr) and not value.has(sp.Float)


def is_zero(value) -> bool:
    """Exact zero test; trustworthy for the algebraic numbers we produce."""
    if isinstance(value, float):
        return value == 0.0
    expr = canon(value)
    if expr == 0:
        return True
    return sp.simplify(expr) == 0


def to_float(value) -> float:
    return float(value)
