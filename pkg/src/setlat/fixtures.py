"""Small hand-checkable problems used by the tests, the CLI and the README."""

from __future__ import annotations

import numpy as np

from .duality import PSepInstance, ProblemInstance, psep_build
from .geometry import PolyCone, UpperSet, from_hrep, lattice_sup, upper_close
from .maps import SetValuedMap, affine_map

__all__ = [
    "running_instance", "segment_map", "segment_map_hrep", "segment_grid",
    "SEGMENT_FULL_SOLUTION", "SEGMENT_SOLUTION", "psep_fixture",
]


def running_instance() -> ProblemInstance:
    """``f(x) = {(x, x)} + R²₊`` on ``x >= 0`` with ``g(x) = {x - 1} + R₊``.

    The feasible set is ``[0, 1]`` and ``p = R²₊``.
    """
    C = PolyCone.orthant(2)
    D = PolyCone.orthant(1)
    f = affine_map([[1.0], [1.0]], [0.0, 0.0], upper_close([[0.0, 0.0]], [], C),
                   domain=([[-1.0]], [0.0]), name="f")
    g = affine_map([[1.0]], [-1.0], upper_close([[0.0]], [], D), name="g")
    return ProblemInstance(f, g, "running")


def _segment_value(x: np.ndarray) -> UpperSet:
    t = float(x[0])
    C = _SEG_CONE
    base = 3.0 + 2.0 * t
    ends = [[base - t * t, base + t * t], [base + t * t, base - t * t]]
    return lattice_sup([upper_close(ends, [], C), upper_close([[0.0, 0.0]], [], C)])


_SEG_CONE = PolyCone.orthant(2)


def segment_map() -> SetValuedMap:
    """``f(x) = R²₊ ∩ ({(3+2x+r, 3+2x-r) : |r| <= x²} + R²₊)`` for ``x >= 0``.

    Not affine in ``x``; evaluation only.  Its minimal values are attained
    exactly on ``{0} ∪ (2, 3]``, and ``{0, 3}`` already attains the infimum.
    """
    return SetValuedMap(_SEG_CONE, 1, evaluator=_segment_value, domain=([[-1.0]], [0.0]),
                        convex=False, name="segment")


def segment_map_hrep(x: float) -> UpperSet:
    """Closed-form H-representation of :func:`segment_map` at ``x >= 0``."""
    lo = max(3.0 + 2.0 * x - x * x, 0.0)
    return from_hrep([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]], [lo, lo, 6.0 + 4.0 * x], _SEG_CONE)


def segment_grid(start: float = 0.0, stop: float = 5.0, step: float = 0.1) -> list[np.ndarray]:
    """Grid ``start:stop:step`` (inclusive), rounded to the step's decimals."""
    count = int(round((stop - start) / step))
    digits = max(0, -int(np.floor(np.log10(step))) + 1)
    return [np.array([round(start + k * step, digits)]) for k in range(count + 1)]


SEGMENT_SOLUTION = (0.0, 3.0)
SEGMENT_FULL_SOLUTION = (0.0, 2.1, 2.2, 2.3, 2.4, 2.5, 2.6, 2.7, 2.8, 2.9, 3.0)


def psep_fixture() -> PSepInstance:
    """Two blocks ``f_n(x^n) = {(x^n, x^n)} + R²₊`` on ``x^n >= 0`` with the
    coupling constraint ``x^1 + x^2 <= 1``."""
    C = PolyCone.orthant(2)
    blocks = [affine_map([[1.0], [1.0]], [0.0, 0.0], upper_close([[0.0, 0.0]], [], C),
                         domain=([[-1.0]], [0.0]), name=f"f_{k + 1}") for k in range(2)]
    return psep_build([[[1.0]], [[1.0]]], [1.0], blocks, N=2, p=1, q=2, M=1)
