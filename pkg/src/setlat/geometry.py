"""Upper closed convex sets with polyhedral data.

An :class:`UpperSet` is an element of the lattice of sets ``A`` with
``A = cl co (A + C)`` for a polyhedral cone ``C``, ordered by ``⊇``.  Sets are
immutable; the V- and H-representations are computed on demand and memoized.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import polyhedra
from .errors import ConeMembershipError, DimensionError
from .lp import linprog
from .tolerances import EPS_GEOM, MAX_IMAGE_DIM


def _vectors(rows, dim: int, what: str = "vector") -> np.ndarray:
    arr = np.asarray(rows, dtype=float)
    if arr.size == 0:
        return np.zeros((0, dim))
    arr = np.atleast_2d(arr)
    if arr.shape[1] != dim:
        raise DimensionError(f"{what} of length {arr.shape[1]} in dimension {dim}")
    return arr


def _unit1(rows: np.ndarray) -> np.ndarray:
    if rows.shape[0] == 0:
        return rows
    norms = np.abs(rows).sum(axis=1)
    keep = norms > 1e-12
    rows, norms = rows[keep], norms[keep]
    # rows already normalized up to rounding are left untouched, which makes
    # the normalization idempotent (serialized data reloads bit-for-bit)
    norms = np.where(np.abs(norms - 1.0) <= 8 * np.finfo(float).eps, 1.0, norms)
    return rows / norms[:, None]


class PolyCone:
    """Convex cone generated by finitely many rays (``{0}`` when there are none)."""

    def __init__(self, generators, dim: int | None = None):
        if dim is None:
            arr = np.asarray(generators, dtype=float)
            if arr.size == 0:
                raise DimensionError("dimension required for a cone without generators")
            dim = np.atleast_2d(arr).shape[1]
        if dim < 1:
            raise DimensionError("cone dimension must be positive")
        gens = _vectors(generators, dim, "generator")
        if np.any(np.abs(gens).sum(axis=1) <= 1e-12):
            raise ValueError("cone generators must be nonzero")
        self.dim = dim
        self.generators = _unit1(gens)
        self._dual: PolyCone | None = None

    @classmethod
    def orthant(cls, dim: int) -> "PolyCone":
        return cls(np.eye(dim), dim)

    @classmethod
    def whole_space(cls, dim: int) -> "PolyCone":
        return cls(np.vstack([np.eye(dim), -np.eye(dim)]), dim)

    @classmethod
    def zero(cls, dim: int) -> "PolyCone":
        return cls(np.zeros((0, dim)), dim)

    def dual(self) -> "PolyCone":
        """The positive dual cone ``{w : w.z >= 0 for all z in self}``."""
        if self._dual is None:
            if self.generators.shape[0] == 0:
                self._dual = PolyCone.whole_space(self.dim)
            else:
                rays, lines = polyhedra.cone_generators(self.generators, self.dim)
                gens = [r for r in rays] + [ln for ln in lines] + [-ln for ln in lines]
                self._dual = PolyCone(np.array(gens) if gens else np.zeros((0, self.dim)), self.dim)
                self._dual._dual = self
        return self._dual

    def contains(self, z, tol: float = EPS_GEOM) -> bool:
        z = np.asarray(z, dtype=float).reshape(-1)
        if z.size != self.dim:
            raise DimensionError("vector dimension does not match cone")
        H = self.dual().generators
        scale = max(1.0, float(np.abs(z).sum()))
        return bool(np.all(H @ z >= -tol * scale))

    def contains_cone(self, other: "PolyCone", tol: float = EPS_GEOM) -> bool:
        return all(self.contains(g, tol) for g in other.generators)

    def same_as(self, other: "PolyCone", tol: float = EPS_GEOM) -> bool:
        if self is other:
            return True
        return self.dim == other.dim and self.contains_cone(other, tol) and other.contains_cone(self, tol)

    def is_pointed(self) -> bool:
        return self.generators.shape[0] == 0 or np.linalg.matrix_rank(self.dual().generators, tol=1e-9) == self.dim

    def is_solid(self) -> bool:
        """True when the cone has nonempty interior."""
        return self.generators.shape[0] > 0 and np.linalg.matrix_rank(self.generators, tol=1e-9) == self.dim

    def __repr__(self) -> str:
        return f"PolyCone(dim={self.dim}, generators={self.generators.tolist()})"


def dual_cone(K: PolyCone) -> PolyCone:
    return K.dual()


class Tag(enum.Enum):
    EMPTY = "empty"
    FULL = "full"
    PROPER = "proper"


class UpperSet:
    """A polyhedral element of ``G(R^q, C)``.

    Do not call the constructor directly; use :func:`upper_close`,
    :func:`from_hrep`, :meth:`empty` or :meth:`full`.
    """

    __slots__ = ("cone", "dim", "_raw_v", "_raw_h", "_v", "_h", "_tag")

    def __init__(self, cone: PolyCone, raw_v=None, raw_h=None, tag: Tag | None = None):
        self.cone = cone
        self.dim = cone.dim
        self._raw_v = raw_v  # (points, rays)
        self._raw_h = raw_h  # (A, b) with A z >= b
        self._v = None
        self._h = None
        self._tag = tag

    # constructors -----------------------------------------------------------

    @classmethod
    def empty(cls, cone: PolyCone) -> "UpperSet":
        return cls(cone, tag=Tag.EMPTY)

    @classmethod
    def full(cls, cone: PolyCone) -> "UpperSet":
        s = cls(cone, tag=Tag.FULL)
        s._h = (np.zeros((0, cone.dim)), np.zeros(0))
        return s

    # representations --------------------------------------------------------

    @property
    def tag(self) -> Tag:
        if self._tag is None:
            if self._raw_v is not None:
                if self._raw_v[0].shape[0] == 0:
                    self._tag = Tag.EMPTY
                else:
                    A, b = self._hrep()
                    self._tag = Tag.FULL if A.shape[0] == 0 else Tag.PROPER
            else:
                A, b = self._raw_h
                if A.shape[0] == 0:
                    self._tag = Tag.FULL
                elif self._vrep() is None:
                    self._tag = Tag.EMPTY
                else:
                    self._tag = Tag.PROPER
        return self._tag

    @property
    def is_empty(self) -> bool:
        return self.tag is Tag.EMPTY

    @property
    def is_full(self) -> bool:
        return self.tag is Tag.FULL

    @property
    def is_proper(self) -> bool:
        return self.tag is Tag.PROPER

    def _hrep(self):
        """Irredundant ``(A, b)``; only meaningful for nonempty sets."""
        if self._h is None:
            pts, rays = self._vrep_any()
            A, b = polyhedra.vrep_to_hrep(pts, rays, np.zeros((0, self.dim)), self.dim)
            b = b + 0.0
            self._h = (A, b)
        return self._h

    def _vrep(self):
        """Irredundant ``(points, rays)`` or ``None`` when empty."""
        if self._v is None:
            if self._raw_h is not None:
                A, b = self._raw_h
            else:
                pts, rays = self._raw_v
                if pts.shape[0] == 0:
                    return None
                A, b = self._hrep()
            res = polyhedra.hrep_to_vrep(A, b, self.dim)
            if res is None:
                self._v = False
            else:
                pts, rays, lines = res
                rays = np.vstack([rays, lines, -lines]) if lines.shape[0] else rays
                self._v = (pts, _unit1(rays))
        return self._v if self._v is not False else None

    def _vrep_any(self):
        """Some V-representation (possibly redundant) of a nonempty set."""
        if self._v:
            return self._v
        if self._raw_v is not None:
            return self._raw_v
        return self._vrep()

    def _hrep_any(self):
        if self._h is not None:
            return self._h
        if self._raw_h is not None:
            return self._raw_h
        return self._hrep()

    @property
    def vertices(self) -> np.ndarray:
        if self.tag is not Tag.PROPER:
            return np.zeros((0, self.dim))
        return self._vrep()[0]

    @property
    def rays(self) -> np.ndarray:
        if self.tag is not Tag.PROPER:
            return np.zeros((0, self.dim))
        return self._vrep()[1]

    @property
    def halfspaces(self) -> tuple[np.ndarray, np.ndarray]:
        """Irredundant ``(A, b)`` with the set equal to ``{z : A z >= b}``.

        Empty rows for FULL.  EMPTY has no H-representation in ``G(C)``
        (every finite family of upper half-spaces with normals in ``C⁺``
        may intersect), so it is reported as a single infeasible row
        ``0.z >= 1``.
        """
        if self.tag is Tag.EMPTY:
            return np.zeros((1, self.dim)), np.ones(1)
        if self.tag is Tag.FULL:
            return np.zeros((0, self.dim)), np.zeros(0)
        return self._hrep()

    def facet_normals(self) -> np.ndarray:
        return self.halfspaces[0] if self.is_proper else np.zeros((0, self.dim))

    def contains_point(self, z, tol: float = EPS_GEOM) -> bool:
        z = np.asarray(z, dtype=float).reshape(-1)
        if self.is_empty:
            return False
        if self.is_full:
            return True
        A, b = self._hrep_any()
        return bool(np.all(A @ z - b >= -tol * np.maximum(1.0, np.abs(b))))

    def __repr__(self) -> str:
        if self.tag is not Tag.PROPER:
            return f"UpperSet({self.tag.name})"
        A, b = self.halfspaces
        rows = ", ".join(
            f"{np.round(a, 6).tolist()}·z ≥ {round(float(bb), 6)}" for a, bb in zip(A, b)
        )
        return f"UpperSet({{{rows}}})"


ExtReal = float


# construction ----------------------------------------------------------------

def _check_cone(cone: PolyCone) -> None:
    if cone.dim > MAX_IMAGE_DIM:
        raise DimensionError(f"image dimension {cone.dim} exceeds {MAX_IMAGE_DIM}")


def upper_close(points, rays, cone: PolyCone) -> UpperSet:
    """``cl co(conv(points) + cone(rays) + C)``."""
    _check_cone(cone)
    P = _vectors(points, cone.dim, "point")
    R = _vectors(rays, cone.dim, "ray")
    if not np.all(np.isfinite(P)) or not np.all(np.isfinite(R)):
        raise ValueError("non-finite coordinates")
    if P.shape[0] == 0:
        return UpperSet.empty(cone)
    R = _unit1(np.vstack([R, cone.generators]))
    return UpperSet(cone, raw_v=(P, R))


def from_hrep(A, b, cone: PolyCone, tol: float = EPS_GEOM) -> UpperSet:
    """``{z : A z >= b}``; every row normal must lie in ``C⁺``."""
    _check_cone(cone)
    A = _vectors(A, cone.dim, "normal")
    b = np.asarray(b, dtype=float).reshape(-1)
    if A.shape[0] != b.size:
        raise DimensionError("normals and offsets differ in number")
    if np.any(np.isnan(b)):
        raise ValueError("nan offset")
    keep = np.ones(A.shape[0], dtype=bool)
    for i, a in enumerate(A):
        norm = np.abs(a).sum()
        if norm <= 1e-12:
            if b[i] > tol:
                return UpperSet.empty(cone)
            keep[i] = False
            continue
        if not cone.dual().contains(a, tol=max(tol, 1e-8)):
            raise ConeMembershipError(
                f"normal {np.round(a, 9).tolist()} is outside the dual cone; "
                "the half-space is not an upper set"
            )
    A, b = A[keep], b[keep]
    if np.any(b == math.inf):
        return UpperSet.empty(cone)
    finite = b > -math.inf
    A, b = A[finite], b[finite]
    norms = np.abs(A).sum(axis=1)
    if A.shape[0]:
        norms = np.where(np.abs(norms - 1.0) <= 8 * np.finfo(float).eps, 1.0, norms)
        A, b = A / norms[:, None], b / norms
    return UpperSet(cone, raw_h=(A, b))


def halfspace(normal, offset: float, cone: PolyCone) -> UpperSet:
    """``{z : offset <= normal.z}``; ``offset = -inf`` gives FULL, ``+inf`` EMPTY."""
    if offset == math.inf:
        return UpperSet.empty(cone)
    if offset == -math.inf:
        return UpperSet.full(cone)
    return from_hrep(np.atleast_2d(normal), [offset], cone)


def to_hrep(A: UpperSet):
    return A.halfspaces


def _same_cone(sets: Sequence[UpperSet]) -> PolyCone | None:
    if not sets:
        return None
    cone = sets[0].cone
    for s in sets[1:]:
        if s.dim != cone.dim:
            raise DimensionError("upper sets live in different dimensions")
        if s.cone is not cone and not s.cone.same_as(cone):
            raise ValueError("upper sets are attached to different cones")
    return cone


# lattice and conlinear operations -------------------------------------------

class LatticeMode(str, enum.Enum):
    F = "F"
    G = "G"


@dataclass(frozen=True)
class InfResult:
    value: UpperSet
    union_convex: bool


def lattice_inf(sets: Sequence[UpperSet], mode: LatticeMode | str = LatticeMode.G,
                cone: PolyCone | None = None):
    """Infimum with respect to ``⊇``.

    In G-mode this is ``cl co`` of the union.  In F-mode the closed union is
    returned wrapped in :class:`InfResult`; when the union is not convex the
    G-mode value is returned with ``union_convex=False``.
    """
    mode = LatticeMode(mode)
    sets = list(sets)
    c = _same_cone(sets) or cone
    if c is None:
        raise ValueError("a cone is needed to form the infimum of no sets")
    if any(s.is_full for s in sets):
        value = UpperSet.full(c)
    else:
        nonempty = [s for s in sets if not s.is_empty]
        if not nonempty:
            value = UpperSet.empty(c)
        elif len(nonempty) == 1:
            value = nonempty[0]
        else:
            pts = np.vstack([s._vrep_any()[0] for s in nonempty])
            rays = np.vstack([s._vrep_any()[1] for s in nonempty])
            value = UpperSet(c, raw_v=(pts, rays))
    if mode is LatticeMode.G:
        return value
    return InfResult(value, _union_is_convex([s for s in sets if not s.is_empty], value))


def _union_is_convex(members: list[UpperSet], hull: UpperSet) -> bool:
    """Decide ``hull ⊆ ∪ members`` by searching for a point of the hull
    strictly outside every member (one violated facet per member)."""
    if hull.is_empty or hull.is_full and any(m.is_full for m in members):
        return True
    if any(contains(m, hull) for m in members):
        return True
    if hull.is_full:
        return False
    HA, Hb = hull.halfspaces
    facet_lists = [list(zip(*m.halfspaces)) for m in members]
    q = hull.dim
    for choice in itertools.product(*facet_lists):
        # maximize s subject to hull rows and a.z <= b - s for each chosen facet
        rows, rhs = [], []
        for a, b in zip(HA, Hb):
            rows.append(np.concatenate([-a, [0.0]]))
            rhs.append(-b)
        for a, b in choice:
            rows.append(np.concatenate([a, [1.0]]))
            rhs.append(b)
        out = linprog(np.concatenate([np.zeros(q), [-1.0]]), np.array(rows), np.array(rhs),
                      upper=np.concatenate([np.full(q, np.inf), [1.0]]))
        if out.optimal and -out.value > 1e-7:
            return False
    return True


def lattice_sup(sets: Sequence[UpperSet], cone: PolyCone | None = None) -> UpperSet:
    """Supremum with respect to ``⊇``: the intersection (FULL for no sets)."""
    sets = list(sets)
    c = _same_cone(sets) or cone
    if c is None:
        raise ValueError("a cone is needed to form the supremum of no sets")
    if any(s.is_empty for s in sets):
        return UpperSet.empty(c)
    proper = [s for s in sets if not s.is_full]
    if not proper:
        return UpperSet.full(c)
    if len(proper) == 1:
        return proper[0]
    A = np.vstack([s._hrep_any()[0] for s in proper])
    b = np.concatenate([s._hrep_any()[1] for s in proper])
    return UpperSet(c, raw_h=(A, b))


def minkowski_add(A: UpperSet, B: UpperSet) -> UpperSet:
    """``cl(A + B)``; EMPTY absorbs, FULL absorbs every nonempty set."""
    c = _same_cone([A, B])
    if A.is_empty or B.is_empty:
        return UpperSet.empty(c)
    if A.is_full or B.is_full:
        return UpperSet.full(c)
    pa, ra = A._vrep_any()
    pb, rb = B._vrep_any()
    pts = (pa[:, None, :] + pb[None, :, :]).reshape(-1, c.dim)
    return UpperSet(c, raw_v=(pts, np.vstack([ra, rb])))


def scale(t: float, A: UpperSet) -> UpperSet:
    """``t·A`` with ``0·A = cl C`` (also for ``A = ∅``) and ``t·∅ = ∅``."""
    if t < 0:
        raise ValueError("scaling factor must be nonnegative")
    if t == 0:
        return upper_close(np.zeros((1, A.dim)), [], A.cone)
    if A.is_empty or A.is_full:
        return A
    pts, rays = A._vrep_any()
    s = UpperSet(A.cone, raw_v=(t * pts, rays))
    return s


def contains(A: UpperSet, B: UpperSet, tol: float = EPS_GEOM) -> bool:
    """``A ⊇ B``: every generator of ``B`` satisfies every inequality of ``A``."""
    _same_cone([A, B])
    if B.is_empty or A.is_full:
        return True
    if A.is_empty or B.is_full:
        return False
    HA, Hb = A._hrep_any()
    pts, rays = B._vrep_any()
    slack = pts @ HA.T - Hb[None, :]
    thr = tol * np.maximum(1.0, np.abs(Hb))[None, :] * np.maximum(1.0, np.abs(pts).max(axis=1))[:, None]
    if np.any(slack < -thr):
        return False
    if rays.shape[0] and HA.shape[0]:
        if np.any(rays @ HA.T < -tol * 10):
            return False
    return True


def equal(A: UpperSet, B: UpperSet, tol: float = EPS_GEOM) -> bool:
    return contains(A, B, tol) and contains(B, A, tol)


def strictly_contains(A: UpperSet, B: UpperSet, tol: float = EPS_GEOM) -> bool:
    """``A ⊋ B``; ties within tolerance count as equality."""
    return contains(A, B, tol) and not contains(B, A, tol)


def support(A: UpperSet, zstar) -> float:
    """``inf_{z in A} zstar.z`` as an extended real."""
    zstar = np.asarray(zstar, dtype=float).reshape(-1)
    if zstar.size != A.dim:
        raise DimensionError("functional and set dimensions differ")
    if A.is_empty:
        return math.inf
    if A.is_full:
        return 0.0 if not np.any(zstar) else -math.inf
    pts, rays = A._vrep_any()
    if rays.shape[0]:
        scale_ = max(1.0, float(np.abs(zstar).sum()))
        if np.any(rays @ zstar < -EPS_GEOM * scale_):
            return -math.inf
    return float(np.min(pts @ zstar))


def support_discrepancy(A: UpperSet, B: UpperSet, directions) -> float:
    """Largest gap between the supports of two sets over ``directions``."""
    worst = 0.0
    for w in np.atleast_2d(directions):
        sa, sb = support(A, w), support(B, w)
        if math.isinf(sa) or math.isinf(sb):
            if sa != sb:
                return math.inf
            continue
        worst = max(worst, abs(sa - sb))
    return worst
