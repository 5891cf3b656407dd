"""Set-valued maps, the half-space functions ``S`` and set-valued conjugates."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import ConeMembershipError, DimensionError
from .extreal import ext_add
from .geometry import (
    PolyCone,
    UpperSet,
    dual_cone,
    halfspace,
    lattice_inf,
    lattice_sup,
    support,
    upper_close,
)
from .polyhedra import polyhedron_vrep
from .tolerances import EPS_GEOM

__all__ = [
    "Piece", "SetValuedMap", "DualPair", "dual_cone", "S_of", "S_pair",
    "conjugate", "conjugate_offset", "biconjugate", "facet_directions",
    "base_of", "base_conjugate",
]


@dataclass(frozen=True, eq=False)
class Piece:
    """One affine piece ``x -> {F x + c} ⊕ tail``."""

    F: np.ndarray
    c: np.ndarray
    tail: UpperSet

    def __post_init__(self):
        F = np.atleast_2d(np.asarray(self.F, dtype=float))
        c = np.asarray(self.c, dtype=float).reshape(-1)
        if F.shape[0] != c.size or c.size != self.tail.dim:
            raise DimensionError("piece matrix, offset and tail disagree in image dimension")
        object.__setattr__(self, "F", F)
        object.__setattr__(self, "c", c)


class SetValuedMap:
    """``x ↦ f(x) ∈ G(R^q, C)`` on the polyhedral domain ``{x : E x <= e}``.

    Either affine pieces (``value(x) = cl co ∪_i ({F_i x + c_i} ⊕ Q_i)``) or a
    parametric ``evaluator`` returning an :class:`UpperSet` or a
    ``(vertices, rays)`` pair.  Evaluator maps support evaluation only.
    """

    def __init__(self, cone: PolyCone, n: int, pieces: Sequence[Piece] = (),
                 domain=None, evaluator: Callable | None = None, convex: bool | None = None,
                 name: str = ""):
        if n < 1:
            raise DimensionError("domain dimension must be positive")
        if bool(pieces) == (evaluator is not None):
            raise ValueError("give either affine pieces or an evaluator")
        self.cone = cone
        self.n = n
        self.q = cone.dim
        self.pieces = tuple(pieces)
        for p in self.pieces:
            if p.F.shape != (self.q, n):
                raise DimensionError(f"piece matrix has shape {p.F.shape}, expected {(self.q, n)}")
            if p.tail.cone is not cone and not p.tail.cone.same_as(cone):
                raise ValueError("piece tail attached to a different cone")
        if domain is None:
            E, e = np.zeros((0, n)), np.zeros(0)
        else:
            E, e = domain
            E = np.asarray(E, dtype=float).reshape(-1, n) if np.size(E) else np.zeros((0, n))
            e = np.asarray(e, dtype=float).reshape(-1)
            if E.shape[0] != e.size:
                raise DimensionError("domain rows and right-hand side differ in length")
        self.E, self.e = E, e
        self.evaluator = evaluator
        self.convex = (len(self.pieces) == 1) if convex is None else convex
        self.name = name
        self._dom_v = None

    @property
    def is_affine(self) -> bool:
        return self.evaluator is None

    def require_affine(self) -> None:
        if not self.is_affine:
            raise TypeError("operation needs a map in affine-piece form")

    def in_domain(self, x, tol: float = EPS_GEOM) -> bool:
        x = self._point(x)
        if self.E.shape[0] == 0:
            return True
        return bool(np.all(self.E @ x <= self.e + tol * np.maximum(1.0, np.abs(self.e))))

    def domain_vrep(self):
        """``(points, rays, lines)`` of the domain, ``None`` when empty."""
        if self._dom_v is None:
            res = polyhedron_vrep(self.E, self.e, self.n)
            self._dom_v = res if res is not None else False
        return self._dom_v or None

    def _point(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float).reshape(-1)
        if x.size != self.n:
            raise DimensionError(f"point of length {x.size}, map expects {self.n}")
        return x

    def value(self, x) -> UpperSet:
        x = self._point(x)
        if not self.in_domain(x):
            return UpperSet.empty(self.cone)
        if self.evaluator is not None:
            out = self.evaluator(x)
            if isinstance(out, UpperSet):
                return out
            pts, rays = out
            return upper_close(pts, rays, self.cone)
        parts = []
        for p in self.pieces:
            if p.tail.is_empty:
                continue
            if p.tail.is_full:
                return UpperSet.full(self.cone)
            pts, rays = p.tail._vrep_any()
            parts.append(UpperSet(self.cone, raw_v=(pts + (p.F @ x + p.c), rays)))
        return lattice_inf(parts, cone=self.cone)

    def phi(self, zstar, x) -> float:
        """``inf_{z in f(x)} zstar.z`` evaluated piecewise."""
        x = self._point(x)
        zstar = np.asarray(zstar, dtype=float).reshape(-1)
        if not self.in_domain(x):
            return math.inf
        if self.evaluator is not None:
            return support(self.value(x), zstar)
        best = math.inf
        for p in self.pieces:
            s = support(p.tail, zstar)
            if s == math.inf:
                continue
            best = min(best, ext_add(float(zstar @ (p.F @ x + p.c)), s))
        return best

    def __call__(self, x) -> UpperSet:
        return self.value(x)

    def __repr__(self) -> str:
        kind = f"{len(self.pieces)} piece(s)" if self.is_affine else "evaluator"
        return f"SetValuedMap({self.name or 'f'}: R^{self.n} -> G(R^{self.q}), {kind})"


def affine_map(F, c, tail: UpperSet, domain=None, name: str = "") -> SetValuedMap:
    """Single-piece map ``x -> {F x + c} ⊕ tail``."""
    F = np.atleast_2d(np.asarray(F, dtype=float))
    return SetValuedMap(tail.cone, F.shape[1], [Piece(F, c, tail)], domain=domain, name=name)


@dataclass(frozen=True, eq=False)
class DualPair:
    ystar: np.ndarray
    zstar: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "ystar", np.asarray(self.ystar, dtype=float).reshape(-1))
        object.__setattr__(self, "zstar", np.asarray(self.zstar, dtype=float).reshape(-1))

    def validate(self, C: PolyCone) -> "DualPair":
        check_zstar(self.zstar, C)
        return self

    def normalized(self) -> "DualPair":
        """Representative with ``|zstar|_1 = 1``; the half-spaces are unchanged."""
        s = float(np.abs(self.zstar).sum())
        return DualPair(self.ystar / s, self.zstar / s)

    def key(self, digits: int = 9) -> tuple:
        return tuple(np.round(np.concatenate([self.ystar, self.zstar]), digits).tolist())

    def __repr__(self) -> str:
        return f"DualPair(y*={np.round(self.ystar, 6).tolist()}, z*={np.round(self.zstar, 6).tolist()})"


def check_zstar(zstar, C: PolyCone) -> np.ndarray:
    """Reject ``zstar`` unless it lies in ``C⁺∖{0}``."""
    zstar = np.asarray(zstar, dtype=float).reshape(-1)
    if zstar.size != C.dim:
        raise DimensionError("z* has the wrong dimension")
    if np.abs(zstar).sum() <= 1e-12:
        raise ConeMembershipError("z* must be nonzero")
    if not C.dual().contains(zstar, tol=1e-8):
        raise ConeMembershipError(f"z* = {zstar.tolist()} is not in the dual cone")
    return zstar


def S_of(zstar, cone: PolyCone) -> UpperSet:
    """``{z : 0 <= zstar.z}``."""
    zstar = check_zstar(zstar, cone)
    return halfspace(zstar, 0.0, cone)


def S_pair(ystar, zstar, y, cone: PolyCone) -> UpperSet:
    """``{z : ystar.y <= zstar.z}``; for ``zstar = 0`` this is Z or ∅."""
    ystar = np.asarray(ystar, dtype=float).reshape(-1)
    y = np.asarray(y, dtype=float).reshape(-1)
    zstar = np.asarray(zstar, dtype=float).reshape(-1)
    if ystar.size != y.size:
        raise DimensionError("y* and y differ in dimension")
    level = float(ystar @ y)
    if not np.any(zstar):
        return UpperSet.full(cone) if level <= 0 else UpperSet.empty(cone)
    return halfspace(zstar, level, cone)


def conjugate_offset(f: SetValuedMap, xstar, zstar) -> float:
    """``inf`` of ``zstar.z - xstar.x`` over the graph of ``f``.

    Computed from the generators of the graph (domain generators pushed
    through each piece), not by linear programming.
    """
    f.require_affine()
    xstar = np.asarray(xstar, dtype=float).reshape(-1)
    zstar = check_zstar(zstar, f.cone)
    dom = f.domain_vrep()
    if dom is None:
        return math.inf
    pts, rays, lines = dom
    best = math.inf
    for p in f.pieces:
        s = support(p.tail, zstar)
        if s == math.inf:
            continue
        if s == -math.inf:
            return -math.inf
        slope = p.F.T @ zstar - xstar
        scale = max(1.0, float(np.abs(slope).sum()))
        if rays.shape[0] and np.any(rays @ slope < -1e-9 * scale):
            return -math.inf
        if lines.shape[0] and np.any(np.abs(lines @ slope) > 1e-9 * scale):
            return -math.inf
        best = min(best, float(np.min(pts @ slope)) + float(zstar @ p.c) + s)
    return best


def conjugate(f: SetValuedMap, xstar, zstar) -> UpperSet:
    """Negative set-valued conjugate ``-f*(x*, z*)``: a half-space with normal
    ``z*``, or FULL / EMPTY."""
    return halfspace(zstar, conjugate_offset(f, xstar, zstar), f.cone)


def facet_directions(f: SetValuedMap, x) -> list[tuple[np.ndarray, np.ndarray]]:
    """Directions ``(x*, z*)`` whose half-spaces recover ``f(x)`` exactly.

    For a single-piece map ``F x + c + Q`` these are ``(F^T h, h)`` over the
    facet normals ``h`` of ``f(x)``.
    """
    f.require_affine()
    if len(f.pieces) != 1:
        raise ValueError("facet directions are defined for single-piece maps")
    val = f.value(x)
    if not val.is_proper:
        return []
    F = f.pieces[0].F
    return [(F.T @ h, h) for h in val.facet_normals()]


def biconjugate(f: SetValuedMap, x, directions, escalation: int = 10) -> UpperSet:
    """``∩ [-f*(x*, z*) ⊕ S_(x*, z*)(x)]`` over a finite direction family.

    Outside the (closed) domain the intersection over the full dual space is
    empty.  A finite family cannot show that, so the first direction is tilted
    by ``t`` times a violated domain row, ``t = 1, 2, ..., 2^escalation``; the
    offsets must grow without bound, and EMPTY is returned once that growth
    is observed.
    """
    directions = list(directions)
    if not directions:
        raise ValueError("empty direction family")
    x = f._point(x)
    if not f.in_domain(x):
        _escalate_domain(f, x, directions[0], escalation)
        return UpperSet.empty(f.cone)
    parts = []
    for xstar, zstar in directions:
        xstar = np.asarray(xstar, dtype=float)
        beta = conjugate_offset(f, xstar, zstar)
        parts.append(halfspace(zstar, ext_add(beta, float(xstar @ x)), f.cone))
    return lattice_sup(parts, cone=f.cone)


def _escalate_domain(f: SetValuedMap, x, direction, escalation: int) -> list[float]:
    viol = f.E @ x - f.e
    i = int(np.argmax(viol))
    gap = float(viol[i])
    xstar0, zstar = direction
    xstar0 = np.asarray(xstar0, dtype=float)
    offsets = []
    for k in range(escalation + 1):
        t = 2.0 ** k
        xs = xstar0 + t * f.E[i]
        offsets.append(ext_add(conjugate_offset(f, xs, zstar), float(xs @ x)))
    base = offsets[0]
    if base != math.inf:
        for k, o in enumerate(offsets):
            # offset(t) >= offset(0) + t * gap with gap > 0
            expected = base + (2.0 ** k - 1.0) * gap
            if o != math.inf and o < expected - 1e-7 * max(1.0, abs(expected)):
                from .errors import VerificationError
                raise VerificationError("domain escalation did not diverge", witness=(k, offsets))
    return offsets


def base_of(Kplus: PolyCone, z0) -> list[np.ndarray]:
    """Generators of ``Kplus`` rescaled onto ``{z* : z*.z0 = 1}``."""
    z0 = np.asarray(z0, dtype=float).reshape(-1)
    out = []
    for g in Kplus.generators:
        val = float(g @ z0)
        if val <= 1e-12:
            raise ConeMembershipError(f"z0 is not admissible: generator {g.tolist()} gives {val}")
        out.append(g / val)
    return out


def base_conjugate(f: SetValuedMap, xstar, z0) -> UpperSet:
    """``cl co ∪_x [f(x) - (x*.x) z0]``."""
    f.require_affine()
    base_of(f.cone.dual(), z0)
    xstar = np.asarray(xstar, dtype=float).reshape(-1)
    z0 = np.asarray(z0, dtype=float).reshape(-1)
    dom = f.domain_vrep()
    if dom is None:
        return UpperSet.empty(f.cone)
    pts, rays, lines = dom
    dirs = np.vstack([rays, lines, -lines]) if lines.shape[0] else rays
    parts = []
    for p in f.pieces:
        if p.tail.is_empty:
            continue
        if p.tail.is_full:
            return UpperSet.full(f.cone)
        qp, qr = p.tail._vrep_any()
        anchors = pts @ p.F.T + p.c - np.outer(pts @ xstar, z0)
        cand = (anchors[:, None, :] + qp[None, :, :]).reshape(-1, f.q)
        sweep = dirs @ p.F.T - np.outer(dirs @ xstar, z0) if dirs.shape[0] else np.zeros((0, f.q))
        parts.append(upper_close(cand, np.vstack([sweep, qr]), f.cone))
    return lattice_inf(parts, cone=f.cone)
