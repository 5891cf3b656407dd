"""Extended reals as Python floats with a guarded addition.

``math.inf`` and ``-math.inf`` stand for the two infinite values.  Plain
float addition turns ``inf + (-inf)`` into ``nan``; :func:`ext_add` refuses
instead.
"""

from __future__ import annotations

import math

from .errors import IndeterminateError

INF = math.inf
NEG_INF = -math.inf


def ext_add(*terms: float) -> float:
    has_pos = any(t == INF for t in terms)
    has_neg = any(t == NEG_INF for t in terms)
    if has_pos and has_neg:
        raise IndeterminateError("(+inf) + (-inf) is undefined")
    if has_pos:
        return INF
    if has_neg:
        return NEG_INF
    return float(sum(terms))


def ext_scale(t: float, a: float) -> float:
    """``t * a`` for ``t > 0``."""
    if t <= 0:
        raise ValueError("scaling factor must be positive")
    return t * a


def is_finite(a: float) -> bool:
    return math.isfinite(a)


def ext_close(a: float, b: float, tol: float) -> bool:
    if math.isinf(a) or math.isinf(b):
        return a == b
    return abs(a - b) <= tol * max(1.0, abs(a), abs(b))
