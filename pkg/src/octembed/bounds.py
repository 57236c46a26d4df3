"""Exact extended-rational arithmetic for region bounds.

Finite bounds are ``int`` or ``fractions.Fraction`` (a Fraction with
denominator 1 is canonicalised to ``int`` so equality and hashing behave,
and the common integer paths stay fast).  The infinities are the ordinary
``float('inf')`` / ``float('-inf')`` sentinels; no other floats are allowed
to survive, so every comparison and every committed arithmetic result is
exact.

The single undefined operation, ``(+inf) + (-inf)``, is reported as ``None``
rather than raised: callers evaluating min/max candidate lists simply drop
the undefined term, which can only loosen a bound and is therefore sound.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Union

INF = float("inf")
NEG_INF = float("-inf")

Bound = Union[int, Fraction, float]


def is_infinite(x: Bound) -> bool:
    return isinstance(x, float) and math.isinf(x)


def _canonical(x: Bound) -> Bound:
    if isinstance(x, Fraction) and x.denominator == 1:
        return x.numerator
    return x


def as_bound(x) -> Bound:
    """Coerce ``x`` to an exact bound.

    Accepts ints, Fractions, the two float infinities, and strings such as
    ``"3"``, ``"-1/2"``, ``"inf"``.  Finite floats are converted exactly
    (every IEEE double is a dyadic rational); NaN is rejected.
    """
    if isinstance(x, bool):
        raise TypeError("bool is not a bound")
    if isinstance(x, int):
        return x
    if isinstance(x, Fraction):
        return _canonical(x)
    if isinstance(x, float):
        if math.isnan(x):
            raise ValueError("NaN is not a bound")
        if math.isinf(x):
            return x
        return _canonical(Fraction(x))
    if isinstance(x, str):
        token = x.strip()
        if token in ("inf", "+inf"):
            return INF
        if token == "-inf":
            return NEG_INF
        return _canonical(Fraction(token))
    raise TypeError(f"cannot interpret {x!r} as a bound")


def neg(x: Bound) -> Bound:
    return -x


def add(a: Bound, b: Bound):
    """Exact sum, or ``None`` for the undefined ``(+inf) + (-inf)``."""
    if is_infinite(a):
        if is_infinite(b) and (a > 0) != (b > 0):
            return None
        return a
    if is_infinite(b):
        return b
    return _canonical(a + b)


def sub(a: Bound, b: Bound):
    return add(a, -b)


def half(x):
    if x is None or is_infinite(x):
        return x
    if isinstance(x, int):
        if x % 2 == 0:
            return x // 2
        return Fraction(x, 2)
    return _canonical(x / 2)


def twice(x: Bound) -> Bound:
    if is_infinite(x):
        return x
    return _canonical(2 * x)


def largest(*terms):
    """Max of the defined terms; at least one term must be defined."""
    best = None
    for t in terms:
        if t is None:
            continue
        if best is None or t > best:
            best = t
    if best is None:
        raise ValueError("all candidate terms undefined")
    return best


def smallest(*terms):
    """Min of the defined terms; at least one term must be defined."""
    best = None
    for t in terms:
        if t is None:
            continue
        if best is None or t < best:
            best = t
    if best is None:
        raise ValueError("all candidate terms undefined")
    return best


def format_bound(x: Bound) -> str:
    if is_infinite(x):
        return "inf" if x > 0 else "-inf"
    return str(x)


def parse_bound(token: str) -> Bound:
    return as_bound(token)
