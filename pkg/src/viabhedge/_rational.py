"""Parsing and formatting of exact rationals."""
from decimal import Decimal, InvalidOperation
from fractions import Fraction
import math
import numbers


def to_fraction(value):
    """Convert ints, decimal strings, ``"p/q"`` strings and Fractions to Fraction.

    Floats go through their shortest repr, so 0.1 becomes 1/10 rather than
    the binary expansion.
    """
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, numbers.Integral):
        return Fraction(int(value))
    if isinstance(value, str):
        s = value.strip()
        if "/" in s:
            p, q = s.split("/", 1)
            return Fraction(int(p), int(q))
        try:
            return Fraction(Decimal(s))
        except InvalidOperation:
            raise ValueError(f"not a rational: {value!r}") from None
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError("non-finite value")
        return Fraction(Decimal(repr(value)))
    if isinstance(value, numbers.Rational):
        return Fraction(int(value.numerator), int(value.denominator))
    raise TypeError(f"cannot interpret {value!r} as a rational")


def fmt(value):
    """Canonical text form: reduced ``p/q`` for rationals, 17 digits for floats."""
    if value is None:
        return None
    if isinstance(value, float):
        return format(value, ".17g")
    if isinstance(value, numbers.Rational):
        return str(Fraction(int(value.numerator), int(value.denominator)))
    return str(value)
