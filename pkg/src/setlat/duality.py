"""Primal and dual problems with set-valued objectives.

The primal problem minimizes ``f`` over ``{x : 0 in g(x)}`` in the lattice
``(G(R^q, C), ⊇)``.  Its Lagrangian is

    l(x, y*, z*) = f(x) ⊕ inf_{y in g(x)} S_(y*, z*)(y),

the dual objective is ``h(y*, z*) = cl ∪_x l(x, y*, z*)`` and the dual problem
maximizes ``h`` over pairs ``(y*, z*)`` with ``z* in C⁺∖{0}``.  The functions
here compute the primal value ``p``, dual value ``d``, the dual solution set
``Δ`` and a number of cross-checks between set-level and scalar computations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, VerificationError
from .extreal import ext_add
from .geometry import (
    PolyCone,
    UpperSet,
    contains,
    equal,
    halfspace,
    lattice_inf,
    lattice_sup,
    minkowski_add,
    strictly_contains,
    support,
    support_discrepancy,
    upper_close,
)
from .lp import LPStatus, linprog
from .maps import DualPair, Piece, SetValuedMap, S_of, check_zstar, conjugate_offset
from .polyhedra import polyhedron_vrep
from .tolerances import DELTA_SLATER, EPS_DUAL, EPS_GEOM

__all__ = [
    "ProblemInstance", "feasible", "lagrangian", "reconstruct_primal", "infeasibility_certificate",
    "value_function", "primal_value", "dual_value", "dual_objective", "dual_objective_setlevel",
    "scalar_primal", "ScalarSolve", "weak_duality_check", "WeakDualityReport", "slater_check",
    "SlaterResult", "solve_strong", "ValueReport", "DualSolutionSet", "DeltaEntry", "DirectionRow",
    "MaximalityReport", "check_maximality", "in_delta", "primal_solution", "value_conjugate",
    "value_biconjugate", "PSepInstance", "psep_build", "psep_dual", "psep_identity",
]


# ---------------------------------------------------------------------------
# problem data

@dataclass(eq=False)
class ProblemInstance:
    """Objective ``f`` into ``G(R^q, C)`` and constraint ``g`` into ``G(R^m, D)``.

    ``g`` must be a single affine piece ``x -> {G x + c_g} ⊕ Q_g``.
    """

    f: SetValuedMap
    g: SetValuedMap
    name: str = ""

    def __post_init__(self):
        if self.f.n != self.g.n:
            raise DimensionError(f"f acts on R^{self.f.n} but g on R^{self.g.n}")
        self.g.require_affine()
        if len(self.g.pieces) != 1:
            raise ValueError("the constraint map must consist of one affine piece")

    @property
    def C(self) -> PolyCone:
        return self.f.cone

    @property
    def D(self) -> PolyCone:
        return self.g.cone

    @property
    def n(self) -> int:
        return self.f.n

    @property
    def m(self) -> int:
        return self.g.q

    @property
    def q(self) -> int:
        return self.f.q

    @property
    def g_piece(self) -> Piece:
        return self.g.pieces[0]

    def joint_rows(self):
        """``dom f ∩ dom g`` as ``(E, e)`` with ``E x <= e``."""
        return np.vstack([self.f.E, self.g.E]), np.concatenate([self.f.e, self.g.e])

    def feasibility_rows(self, y=None):
        """Rows of ``y in g(x)`` in ``x``; ``None`` if ``g`` is empty-valued."""
        gp = self.g_piece
        y = np.zeros(self.m) if y is None else np.asarray(y, dtype=float).reshape(-1)
        if y.size != self.m:
            raise DimensionError(f"y has length {y.size}, expected {self.m}")
        if gp.tail.is_empty:
            return None
        if gp.tail.is_full:
            return np.zeros((0, self.n)), np.zeros(0)
        H, k = gp.tail.halfspaces
        return H @ gp.F, H @ (y - gp.c) - k

    def section_rows(self, y=None):
        """``{x in dom f ∩ dom g : y in g(x)}`` as ``(E, e, start)``; rows from
        ``start`` on encode the constraint; ``None`` if ``g`` is empty-valued."""
        fr = self.feasibility_rows(y)
        if fr is None:
            return None
        E, e = self.joint_rows()
        return np.vstack([E, fr[0]]), np.concatenate([e, fr[1]]), E.shape[0]

    def __repr__(self) -> str:
        return f"ProblemInstance({self.name or 'P'}: n={self.n}, m={self.m}, q={self.q})"


def _pair(inst: ProblemInstance, pair) -> DualPair:
    if not isinstance(pair, DualPair):
        pair = DualPair(*pair)
    if pair.ystar.size != inst.m:
        raise DimensionError(f"y* has length {pair.ystar.size}, expected {inst.m}")
    pair.validate(inst.C)
    return pair


# ---------------------------------------------------------------------------
# feasibility, Lagrangian, primal reconstruction

def _meets_negative_cone(gx: UpperSet, D: PolyCone) -> bool:
    """``gx ∩ -D ≠ ∅`` by a feasibility LP over the generators of ``gx``."""
    if gx.is_empty:
        return False
    if gx.is_full:
        return True
    pts, rays = gx._vrep_any()
    k, r = pts.shape[0], rays.shape[0]
    Dp = D.dual().generators
    # variables: convex weights on points, nonnegative weights on rays
    rows = [np.hstack([Dp @ pts.T, Dp @ rays.T]) if r else Dp @ pts.T]
    rhs = [np.zeros(Dp.shape[0])]
    ones = np.concatenate([np.ones(k), np.zeros(r)])
    rows += [ones[None, :], -ones[None, :]]
    rhs += [np.ones(1), -np.ones(1)]
    out = linprog(np.zeros(k + r), np.vstack(rows), np.concatenate(rhs),
                  lower=np.zeros(k + r))
    return out.optimal


def feasible(inst: ProblemInstance, x) -> bool:
    """``0 in g(x)``, cross-checked against ``g(x) ∩ -D ≠ ∅``."""
    gx = inst.g.value(x)
    direct = gx.contains_point(np.zeros(inst.m))
    via_cone = _meets_negative_cone(gx, inst.D)
    if direct != via_cone:
        raise VerificationError(
            "the two feasibility characterizations disagree",
            witness={"x": np.asarray(x).tolist(), "zero_in_g": direct, "meets_minus_D": via_cone},
        )
    return direct


def lagrangian(inst: ProblemInstance, x, pair) -> UpperSet:
    """``f(x) ⊕ {z : inf_{y in g(x)} y*.y <= z*.z}``; EMPTY if ``f(x)`` or ``g(x)`` is.

    Adding a nonempty set ``A`` to the half-space ``{z*.z >= β}`` gives the
    half-space ``{z*.z >= inf_A z*.z + β}``, so the value is formed from the
    two supports directly (FULL when one of them is ``-inf``).
    """
    pair = _pair(inst, pair)
    fx = inst.f.value(x)
    gx = inst.g.value(x)
    if fx.is_empty or gx.is_empty:
        return UpperSet.empty(inst.C)
    level = ext_add(support(fx, pair.zstar), support(gx, pair.ystar))
    return halfspace(pair.zstar, level, inst.C)


@dataclass(frozen=True)
class InfeasibilityCertificate:
    """A functional ``ystar`` with ``inf_{y in g(x)} ystar.y = margin > 0`` and
    the supports ``phi_{l,z*}`` of the Lagrangian at ``(y*_0 + t ystar, z*_0)``
    for ``t = 1, 2, 4, ...``; each step adds at least ``margin`` times the
    increase of ``t``."""

    ystar: np.ndarray
    margin: float
    offsets: tuple


def infeasibility_certificate(inst: ProblemInstance, x, base, escalation: int = 10):
    """Separate ``0`` from ``g(x)`` and escalate along the separating functional."""
    base = _pair(inst, base)
    gx = inst.g.value(x)
    if gx.is_empty:
        return InfeasibilityCertificate(np.zeros(inst.m), math.inf, ())
    if gx.is_full:
        return None
    pts, rays = gx._vrep_any()
    m = inst.m
    # maximize t  s.t.  t <= y*.p_i,  y*.r_j >= 0,  -1 <= y* <= 1
    rows = [np.hstack([-pts, np.ones((pts.shape[0], 1))])]
    if rays.shape[0]:
        rows.append(np.hstack([-rays, np.zeros((rays.shape[0], 1))]))
    M = np.vstack(rows)
    out = linprog(np.concatenate([np.zeros(m), [-1.0]]), M, np.zeros(M.shape[0]),
                  lower=np.concatenate([-np.ones(m), [-np.inf]]),
                  upper=np.concatenate([np.ones(m), [np.inf]]))
    if not out.optimal or -out.value <= EPS_GEOM:
        return None
    ysep, margin = out.x[:m], -out.value
    offsets = []
    for k in range(escalation + 1):
        t = 2.0 ** k
        val = lagrangian(inst, x, DualPair(base.ystar + t * ysep, base.zstar))
        offsets.append(support(val, base.zstar))
    return InfeasibilityCertificate(ysep, margin, tuple(offsets))


def reconstruct_primal(inst: ProblemInstance, x, pairs, escalation: int = 10) -> UpperSet:
    """``∩`` of the Lagrangian over ``pairs``.

    For an infeasible ``x`` the result is EMPTY, certified by a separating
    functional whose Lagrangian offsets grow without bound under the scaling
    ``t = 1, 2, ..., 2^escalation``.
    """
    pairs = [_pair(inst, p) for p in pairs]
    if not pairs:
        raise ValueError("at least one dual pair is needed")
    if inst.f.value(x).is_empty or inst.g.value(x).is_empty:
        return UpperSet.empty(inst.C)
    if not feasible(inst, x):
        cert = infeasibility_certificate(inst, x, pairs[0], escalation)
        if cert is None:
            raise VerificationError("no separating functional for an infeasible point",
                                    witness={"x": np.asarray(x).tolist()})
        base = cert.offsets[0]
        for k, off in enumerate(cert.offsets):
            expected = base + (2.0 ** k - 1.0) * cert.margin
            if off < expected - 1e-7 * max(1.0, abs(expected)):
                raise VerificationError("Lagrangian offsets failed to diverge",
                                        witness={"x": np.asarray(x).tolist(), "offsets": cert.offsets})
        return UpperSet.empty(inst.C)
    return lattice_sup([lagrangian(inst, x, p) for p in pairs], cone=inst.C)


# ---------------------------------------------------------------------------
# value function, primal and dual values

def _image_of_polyhedron(f: SetValuedMap, vrep) -> UpperSet:
    """``cl co ∪_{x in P} f(x)`` for a polyhedron ``P`` given by generators."""
    pts, rays, lines = vrep
    dirs = np.vstack([rays, lines, -lines]) if lines.shape[0] else rays
    parts = []
    for p in f.pieces:
        if p.tail.is_empty:
            continue
        if p.tail.is_full:
            return UpperSet.full(f.cone)
        qp, qr = p.tail._vrep_any()
        anchors = pts @ p.F.T + p.c
        cand = (anchors[:, None, :] + qp[None, :, :]).reshape(-1, f.q)
        parts.append(upper_close(cand, np.vstack([dirs @ p.F.T, qr]), f.cone))
    return lattice_inf(parts, cone=f.cone)


def value_function(inst: ProblemInstance, y) -> UpperSet:
    """``v(y) = cl co ∪ {f(x) : y in g(x)}`` by vertex enumeration of the section."""
    inst.f.require_affine()
    sec = inst.section_rows(y)
    if sec is None:
        return UpperSet.empty(inst.C)
    E, e, _ = sec
    vrep = polyhedron_vrep(E, e, inst.n)
    if vrep is None:
        return UpperSet.empty(inst.C)
    return _image_of_polyhedron(inst.f, vrep)


def primal_value(inst: ProblemInstance) -> UpperSet:
    """``p = v(0)``."""
    return value_function(inst, np.zeros(inst.m))


def _lagrange_lp(inst: ProblemInstance, pair: DualPair) -> float:
    """``inf_x lambda_{z*}(x, y*)`` by one linear program per piece of ``f``."""
    gp = inst.g_piece
    sg = support(gp.tail, pair.ystar)
    if sg == math.inf:
        return math.inf
    E, e = inst.joint_rows()
    best = math.inf
    for p in inst.f.pieces:
        sf = support(p.tail, pair.zstar)
        if sf == math.inf:
            continue
        out = linprog(p.F.T @ pair.zstar + gp.F.T @ pair.ystar, E, e)
        if out.status is LPStatus.INFEASIBLE:
            continue
        if out.status is LPStatus.UNBOUNDED or sf == -math.inf or sg == -math.inf:
            return -math.inf
        if not out.optimal:
            raise ArithmeticError(f"Lagrangian LP failed: {out.status.value}")
        best = min(best, out.value + float(pair.zstar @ p.c) + float(pair.ystar @ gp.c) + sf + sg)
    return best


def dual_objective(inst: ProblemInstance, pair) -> UpperSet:
    """``h(y*, z*)``: the half-space ``{z : inf_x lambda_{z*}(x, y*) <= z*.z}``."""
    pair = _pair(inst, pair)
    return halfspace(pair.zstar, _lagrange_lp(inst, pair), inst.C)


def dual_objective_setlevel(inst: ProblemInstance, pair) -> UpperSet:
    """``h(y*, z*)`` assembled from Lagrangian values at the generators of
    ``dom f ∩ dom g``; an independent route to :func:`dual_objective`."""
    pair = _pair(inst, pair)
    inst.f.require_affine()
    E, e = inst.joint_rows()
    vrep = polyhedron_vrep(E, e, inst.n)
    if vrep is None:
        return UpperSet.empty(inst.C)
    pts, rays, lines = vrep
    values = [lagrangian(inst, x, pair) for x in pts]
    h = lattice_inf(values, cone=inst.C)
    if h.is_empty or h.is_full:
        return h
    dirs = np.vstack([rays, lines, -lines]) if lines.shape[0] else rays
    if dirs.shape[0] == 0:
        return h
    # along a direction r, l(x + t r) moves by t (F r + (y*.G r) z*/|z*|^2)
    if len(inst.f.pieces) != 1:
        raise ValueError("unbounded domains need a single-piece objective here")
    F, G = inst.f.pieces[0].F, inst.g_piece.F
    z = pair.zstar
    shift = dirs @ F.T + np.outer(dirs @ (G.T @ pair.ystar), z / float(z @ z))
    pts_h, rays_h = h._vrep_any()
    return upper_close(pts_h, np.vstack([rays_h, shift]), inst.C)


def dual_value(inst: ProblemInstance, pairs) -> UpperSet:
    """``d = ∩ h(y*, z*)`` over the given pairs."""
    pairs = list(pairs)
    if not pairs:
        raise ValueError("at least one dual pair is needed")
    return lattice_sup([dual_objective(inst, p) for p in pairs], cone=inst.C)


@dataclass(frozen=True)
class ScalarSolve:
    """Solution of the scalar primal problem for one functional ``z*``."""

    zstar: np.ndarray
    value: float
    x: np.ndarray | None
    ystar: np.ndarray | None
    status: LPStatus


def scalar_primal(inst: ProblemInstance, zstar, y=None) -> ScalarSolve:
    """``inf {phi_{f,z*}(x) : y in g(x)}`` by LP, with the multiplier
    ``y* = H^T mu`` read off the constraint rows ``H (y - G x - c_g) >= k``."""
    zstar = check_zstar(zstar, inst.C)
    inst.f.require_affine()
    sec = inst.section_rows(y)
    if sec is None:
        return ScalarSolve(zstar, math.inf, None, None, LPStatus.INFEASIBLE)
    E, e, start = sec
    gp = inst.g_piece
    H = gp.tail.halfspaces[0] if gp.tail.is_proper else np.zeros((0, inst.m))
    best = ScalarSolve(zstar, math.inf, None, None, LPStatus.INFEASIBLE)
    for p in inst.f.pieces:
        sf = support(p.tail, zstar)
        if sf == math.inf:
            continue
        out = linprog(p.F.T @ zstar, E, e)
        if out.status is LPStatus.INFEASIBLE:
            continue
        if out.status is LPStatus.UNBOUNDED or sf == -math.inf:
            return ScalarSolve(zstar, -math.inf, None, None, LPStatus.UNBOUNDED)
        if not out.optimal:
            raise ArithmeticError(f"scalar primal LP failed: {out.status.value}")
        val = out.value + float(zstar @ p.c) + sf
        if val < best.value:
            ystar = H.T @ out.multipliers[start:] if H.shape[0] else np.zeros(inst.m)
            best = ScalarSolve(zstar, val, out.x, ystar, LPStatus.OPTIMAL)
    return best


# ---------------------------------------------------------------------------
# weak duality and Slater

@dataclass
class WeakDualityReport:
    passed: bool
    checked: int
    skipped_infeasible: int
    violations: list = field(default_factory=list)
    disagreements: list = field(default_factory=list)

    @property
    def witness(self):
        return self.violations[0] if self.violations else None


def weak_duality_check(inst: ProblemInstance, samples, h=None) -> WeakDualityReport:
    """Check ``h(y*, z*) ⊇ f(x) ⊕ S(z*)`` (set form) and
    ``phi_{h,z*}(y*) <= phi_{f,z*}(x)`` (scalar form) on feasible samples.

    ``samples`` holds ``(x, pair)`` tuples; ``h`` overrides the dual objective
    (used for negative controls).  Infeasible ``x`` are skipped.
    """
    h = h or (lambda pair: dual_objective(inst, pair))
    report = WeakDualityReport(True, 0, 0)
    for x, pair in samples:
        pair = _pair(inst, pair).normalized()
        if not feasible(inst, x):
            report.skipped_infeasible += 1
            continue
        report.checked += 1
        hv = h(pair)
        fx = inst.f.value(x)
        set_form = contains(hv, minkowski_add(fx, S_of(pair.zstar, inst.C)))
        lhs, rhs = support(hv, pair.zstar), inst.f.phi(pair.zstar, x)
        if math.isinf(lhs) or math.isinf(rhs):
            scalar_form = lhs <= rhs
        else:
            scalar_form = lhs <= rhs + EPS_GEOM * max(1.0, abs(lhs), abs(rhs))
        if not (set_form and scalar_form):
            report.violations.append({"x": np.asarray(x).tolist(), "pair": pair,
                                      "h_offset": lhs, "phi_f": rhs})
        if set_form != scalar_form:
            report.disagreements.append({"x": np.asarray(x).tolist(), "pair": pair,
                                         "set_form": set_form, "scalar_form": scalar_form})
    report.passed = not report.violations and not report.disagreements
    return report


@dataclass(frozen=True)
class SlaterResult:
    applicable: bool
    holds: bool
    x: np.ndarray | None = None
    y: np.ndarray | None = None
    margin: float = 0.0

    def __bool__(self) -> bool:
        return self.applicable and self.holds


def slater_check(inst: ProblemInstance) -> SlaterResult:
    """Search ``x in dom f ∩ dom g`` and ``y in g(x)`` with ``d.y <= -s`` for
    every generator ``d`` of ``D⁺``, maximizing ``s <= 1``."""
    if not inst.D.is_solid():
        return SlaterResult(False, False)
    gp = inst.g_piece
    if gp.tail.is_empty:
        return SlaterResult(True, False)
    n, m = inst.n, inst.m
    E, e = inst.joint_rows()
    Dp = inst.D.dual().generators
    H, k = gp.tail.halfspaces if gp.tail.is_proper else (np.zeros((0, m)), np.zeros(0))
    # variables (x, qv, s) with y = G x + c_g + qv
    rows = [np.hstack([E, np.zeros((E.shape[0], m + 1))]),
            np.hstack([np.zeros((H.shape[0], n)), -H, np.zeros((H.shape[0], 1))]),
            np.hstack([Dp @ gp.F, Dp, np.ones((Dp.shape[0], 1))])]
    rhs = [e, -k, -Dp @ gp.c]
    M = np.vstack(rows)
    upper = np.concatenate([np.full(n + m, np.inf), [1.0]])
    out = linprog(np.concatenate([np.zeros(n + m), [-1.0]]), M, np.concatenate(rhs), upper=upper)
    if not out.optimal:
        return SlaterResult(True, False)
    s = -out.value
    x = out.x[:n]
    y = gp.F @ x + gp.c + out.x[n:n + m]
    return SlaterResult(True, s >= DELTA_SLATER, x, y, s)


# ---------------------------------------------------------------------------
# strong duality and the dual solution set

@dataclass(frozen=True)
class DirectionRow:
    zstar: np.ndarray
    p_z: float
    d_z: float
    ystar: np.ndarray | None


@dataclass(frozen=True)
class DeltaEntry:
    pair: DualPair
    offset: float
    p_value: float


@dataclass
class MaximalityReport:
    samples: int
    step_ii_violations: list = field(default_factory=list)
    step_iii_failures: list = field(default_factory=list)
    step_ii_comparisons: int = 0
    step_iii_checked: int = 0

    @property
    def passed(self) -> bool:
        return not self.step_ii_violations and not self.step_iii_failures


@dataclass
class DualSolutionSet:
    entries: list
    complete: bool
    flags: list = field(default_factory=list)
    maximality: MaximalityReport | None = None

    @property
    def pairs(self) -> list:
        return [e.pair for e in self.entries]

    def __len__(self) -> int:
        return len(self.entries)


@dataclass
class ValueReport:
    p: UpperSet
    d: UpperSet
    table: list
    slater: SlaterResult
    gap_certificate: float
    strong: bool
    flags: list = field(default_factory=list)


def in_delta(inst: ProblemInstance, p: UpperSet, pair, tol: float = EPS_DUAL) -> tuple[bool, bool]:
    """Both defining tests of ``Δ``: the set form ``Z ≠ p ⊕ S(z*) = h(y*, z*)``
    and the scalar form ``-inf < p_{z*} = phi_{h,z*}(y*)``."""
    pair = _pair(inst, pair)
    h = dual_objective(inst, pair)
    lifted = minkowski_add(p, S_of(pair.zstar, inst.C))
    set_form = (not lifted.is_full) and equal(lifted, h, tol)
    p_z, h_z = support(p, pair.zstar), support(h, pair.zstar)
    scalar_form = (p_z > -math.inf and h_z > -math.inf and
                   (p_z == h_z if math.isinf(p_z) or math.isinf(h_z)
                    else abs(p_z - h_z) <= tol * max(1.0, abs(p_z))))
    return set_form, scalar_form


def check_maximality(inst: ProblemInstance, p: UpperSet, delta: list, samples) -> MaximalityReport:
    """Maximality of ``h`` on ``Δ`` and non-maximality off ``Δ``.

    Step (ii): no sampled ``h(w)`` lies strictly above (is strictly smaller
    than) ``h`` at a ``Δ`` entry.  Step (iii): every sampled pair outside
    ``Δ`` with ``h(w) ≠ Z`` is dominated by ``h`` at the scalar-LP multiplier
    for its own ``z*``.
    """
    samples = [_pair(inst, w) for w in samples]
    rep = MaximalityReport(len(samples))
    hs = [dual_objective(inst, w) for w in samples]
    for entry in delta:
        he = dual_objective(inst, entry.pair)
        for w, hw in zip(samples, hs):
            rep.step_ii_comparisons += 1
            if strictly_contains(he, hw):
                rep.step_ii_violations.append({"delta": entry.pair, "pair": w})
    for w, hw in zip(samples, hs):
        if hw.is_full:
            continue
        set_form, scalar_form = in_delta(inst, p, w)
        if set_form != scalar_form:
            raise VerificationError("Δ characterizations disagree", witness=w)
        if set_form:
            continue
        rep.step_iii_checked += 1
        sol = scalar_primal(inst, w.zstar)
        if sol.status is not LPStatus.OPTIMAL:
            rep.step_iii_failures.append({"pair": w, "reason": f"scalar LP {sol.status.value}"})
            continue
        better = dual_objective(inst, DualPair(sol.ystar, w.zstar))
        if not strictly_contains(hw, better):
            rep.step_iii_failures.append({"pair": w, "reason": "no strictly dominating dual value"})
    return rep


def solve_strong(inst: ProblemInstance, maximality_samples=None) -> tuple[ValueReport, DualSolutionSet]:
    """Compute ``p``, the facet family of scalar problems, ``Δ`` and ``d = ∩_Δ h``.

    ``maximality_samples`` is an optional list of pairs outside ``Δ`` used for
    the maximality checks.
    """
    inst.f.require_affine()
    if len(inst.f.pieces) != 1 or not inst.f.convex:
        raise ValueError("strong duality is computed for single-piece (convex) objectives")
    slater = slater_check(inst)
    flags = []
    if not slater:
        flags.append("no strong-duality certificate: Slater condition not verified")
    p = primal_value(inst)
    if p.is_full:
        flags.append("p = Z: d = p by weak duality; Δ is empty")
        return (ValueReport(p, UpperSet.full(inst.C), [], slater, 0.0, True, flags),
                DualSolutionSet([], True, list(flags)))
    if p.is_empty:
        flags.append("primal infeasible: p = ∅ and d = ∅; Δ is empty")
        return (ValueReport(p, UpperSet.empty(inst.C), [], slater, 0.0, True, flags),
                DualSolutionSet([], True, list(flags)))

    table, entries = [], []
    for z in p.facet_normals():
        sol = scalar_primal(inst, z)
        p_z = support(p, z)
        if sol.status is not LPStatus.OPTIMAL:
            raise VerificationError("scalar problem at a facet normal is not solvable",
                                    witness={"zstar": z.tolist(), "status": sol.status.value})
        if abs(sol.value - p_z) > EPS_DUAL * max(1.0, abs(p_z)):
            raise VerificationError("scalar LP value differs from the support of p",
                                    witness={"zstar": z.tolist(), "lp": sol.value, "support": p_z})
        pair = DualPair(sol.ystar, z)
        h = dual_objective(inst, pair)
        d_z = support(h, z)
        table.append(DirectionRow(z, p_z, d_z, sol.ystar))
        set_form, scalar_form = in_delta(inst, p, pair)
        if set_form != scalar_form:
            raise VerificationError("Δ characterizations disagree", witness=pair)
        if set_form:
            entries.append(DeltaEntry(pair, d_z, p_z))
        else:
            flags.append(f"facet normal {np.round(z, 9).tolist()} produced no Δ entry")
    delta = DualSolutionSet(entries, complete=len(entries) == len(table))
    delta.flags.append("Δ restricted to the facet family of p; one multiplier per facet")
    if not entries:
        d = UpperSet.full(inst.C)
    else:
        d = dual_value(inst, delta.pairs)
    if not contains(d, p):
        raise VerificationError("weak duality failed: d does not contain p", witness=(p, d))
    normals = np.vstack([p.facet_normals(), d.facet_normals()])
    gap = support_discrepancy(p, d, normals) if normals.shape[0] else 0.0
    strong = equal(p, d) and gap <= EPS_DUAL
    if not strong:
        flags.append("strong duality not certified on the facet family")
    if maximality_samples is not None:
        delta.maximality = check_maximality(inst, p, entries, maximality_samples)
    return ValueReport(p, d, table, slater, gap, strong, flags), delta


def primal_solution(inst: ProblemInstance, p: UpperSet | None = None) -> list[np.ndarray]:
    """Feasible points whose values are minimal and jointly attain ``p``.

    For each vertex ``v`` of ``p`` the scalar problem is solved at the sum of
    the facet normals active at ``v``; its optimal point ``x`` has
    ``v in f(x)``.
    """
    p = primal_value(inst) if p is None else p
    if not p.is_proper:
        return []
    A, b = p.halfspaces
    out = []
    for v in p.vertices:
        active = np.abs(A @ v - b) <= 1e-7 * np.maximum(1.0, np.abs(b))
        z = A[active].sum(axis=0)
        sol = scalar_primal(inst, z / np.abs(z).sum())
        if sol.status is not LPStatus.OPTIMAL:
            raise VerificationError("no optimal point for a vertex of p", witness=v.tolist())
        if not any(np.allclose(sol.x, x, atol=1e-9) for x in out):
            out.append(sol.x)
    return out


# ---------------------------------------------------------------------------
# conjugates of the value function

def value_conjugate(inst: ProblemInstance, pair) -> UpperSet:
    """``-v*(y*, z*) = cl ∪_y [v(y) + S_(y*,z*)(-y)]`` as a half-space; the
    offset ``inf {phi_{f,z*}(x) - y*.y : y in g(x)}`` is one LP in ``(x, y)``."""
    pair = _pair(inst, pair)
    inst.f.require_affine()
    gp = inst.g_piece
    if gp.tail.is_empty:
        return UpperSet.empty(inst.C)
    n, m = inst.n, inst.m
    E, e = inst.joint_rows()
    rows = [np.hstack([E, np.zeros((E.shape[0], m))])]
    rhs = [e]
    if gp.tail.is_proper:
        H, k = gp.tail.halfspaces
        # H (y - G x - c_g) >= k
        rows.append(np.hstack([H @ gp.F, -H]))
        rhs.append(-H @ gp.c - k)
    M, r = np.vstack(rows), np.concatenate(rhs)
    best = math.inf
    for p in inst.f.pieces:
        sf = support(p.tail, pair.zstar)
        if sf == math.inf:
            continue
        out = linprog(np.concatenate([p.F.T @ pair.zstar, -pair.ystar]), M, r)
        if out.status is LPStatus.INFEASIBLE:
            continue
        if out.status is LPStatus.UNBOUNDED or sf == -math.inf:
            return UpperSet.full(inst.C)
        if not out.optimal:
            raise ArithmeticError(f"value conjugate LP failed: {out.status.value}")
        best = min(best, out.value + float(pair.zstar @ p.c) + sf)
    return halfspace(pair.zstar, best, inst.C)


def value_biconjugate(inst: ProblemInstance, pairs) -> UpperSet:
    """``v**(0) = ∩ [-v*(-y*, z*) ⊕ S_(-y*,z*)(0)]`` over the dual pairs
    ``(y*, z*)`` of the problem; the conjugate is taken at ``-y*``, where
    ``-v*(-y*, z*) = h(y*, z*)``."""
    pairs = [_pair(inst, p) for p in pairs]
    if not pairs:
        raise ValueError("at least one dual pair is needed")
    return lattice_sup([value_conjugate(inst, DualPair(-p.ystar, p.zstar)) for p in pairs],
                       cone=inst.C)


# ---------------------------------------------------------------------------
# problems with separated variables

@dataclass(eq=False)
class PSepInstance:
    """``min Σ f_n(x^n)`` subject to ``Σ A_n x^n <= b``."""

    instance: ProblemInstance
    blocks: tuple
    A: tuple
    b: np.ndarray

    @property
    def N(self) -> int:
        return len(self.blocks)


def psep_build(A_list, b, f_list, N=None, p=None, q=None, M=None, name: str = "psep") -> PSepInstance:
    """Assemble ``f(x) = Σ f_n(x^n)`` and ``g(x) = {Σ A_n x^n - b} + R^M_+``."""
    f_list = list(f_list)
    A_list = [np.atleast_2d(np.asarray(A, dtype=float)) for A in A_list]
    b = np.asarray(b, dtype=float).reshape(-1)
    if not f_list or len(f_list) != len(A_list):
        raise DimensionError("need one matrix per block")
    Mdim = b.size
    C = f_list[0].cone
    for fn, An in zip(f_list, A_list):
        fn.require_affine()
        if len(fn.pieces) != 1:
            raise ValueError("each block objective must be a single affine piece")
        if fn.cone.dim != C.dim or not fn.cone.same_as(C):
            raise DimensionError("block objectives use different image cones")
        if An.shape != (Mdim, fn.n):
            raise DimensionError(f"block matrix has shape {An.shape}, expected {(Mdim, fn.n)}")
    for label, given, actual in (("N", N, len(f_list)), ("q", q, C.dim), ("M", M, Mdim)):
        if given is not None and given != actual:
            raise DimensionError(f"{label} = {given} but the data imply {actual}")
    if p is not None and any(fn.n != p for fn in f_list):
        raise DimensionError("block dimensions differ from p")
    F = np.hstack([fn.pieces[0].F for fn in f_list])
    c = np.sum([fn.pieces[0].c for fn in f_list], axis=0)
    Q = f_list[0].pieces[0].tail
    for fn in f_list[1:]:
        Q = minkowski_add(Q, fn.pieces[0].tail)
    sizes = [fn.n for fn in f_list]
    ntot = sum(sizes)
    rows, rhs, off = [], [], 0
    for fn, sz in zip(f_list, sizes):
        blk = np.zeros((fn.E.shape[0], ntot))
        blk[:, off:off + sz] = fn.E
        rows.append(blk)
        rhs.append(fn.e)
        off += sz
    f = SetValuedMap(C, ntot, [Piece(F, c, Q)], domain=(np.vstack(rows), np.concatenate(rhs)),
                     name="Σ f_n")
    D = PolyCone.orthant(Mdim)
    g = SetValuedMap(D, ntot, [Piece(np.hstack(A_list), -b, upper_close(np.zeros((1, Mdim)), [], D))],
                     name="Σ A_n x^n - b")
    return PSepInstance(ProblemInstance(f, g, name), tuple(f_list), tuple(A_list), b)


def psep_dual(ps: PSepInstance, v, w, check: bool = True) -> UpperSet:
    """``h(v, w) = S_(v,w)(b) ⊕ Σ_n -f_n*(A_n^T v, w)`` for ``v <= 0``.

    For ``v`` with a positive entry the generic dual objective at ``y* = -v``
    is Z and so is the returned value.  With ``check`` the result is compared
    with :func:`dual_objective` at ``(-v, w)``.
    """
    v = np.asarray(v, dtype=float).reshape(-1)
    w = check_zstar(w, ps.instance.C)
    C = ps.instance.C
    if np.any(v > 0):
        out = UpperSet.full(C)
    else:
        offset = ext_add(float(v @ ps.b),
                         *[conjugate_offset(fn, An.T @ v, w) for fn, An in zip(ps.blocks, ps.A)])
        out = halfspace(w, offset, C)
    if check:
        generic = dual_objective(ps.instance, DualPair(-v, w))
        if not equal(out, generic, 1e-8):
            raise VerificationError("decomposed and generic dual objectives differ",
                                    witness={"v": v.tolist(), "w": w.tolist(),
                                             "decomposed": support(out, w),
                                             "generic": support(generic, w)})
    return out


def psep_identity(ps: PSepInstance, directions=None) -> list[tuple[np.ndarray, float, float]]:
    """Compare ``support(U(b), w)`` with ``sup_{v <= 0} [v.b + Σ_n β_n(A_n^T v, w)]``.

    The right side is a single LP in ``(v, t_1, ..., t_N)`` whose constraints
    come from the generators of the block domains.  Returns ``(w, lhs, rhs)``
    triples; by default ``w`` runs over the facet normals of ``U(b)``.
    """
    p = primal_value(ps.instance)
    if directions is None:
        directions = p.facet_normals()
    Mdim, N = ps.b.size, ps.N
    out = []
    for w in directions:
        w = check_zstar(w, ps.instance.C)
        rows, rhs = [], []
        for j, (fn, An) in enumerate(zip(ps.blocks, ps.A)):
            dom = fn.domain_vrep()
            if dom is None:
                rows, rhs = None, None
                break
            pts, rays, lines = dom
            pc = fn.pieces[0]
            sq = support(pc.tail, w)
            e_j = np.zeros(N)
            e_j[j] = 1.0
            for x in pts:
                # t_j + (A_n x).v <= w.(F_n x + c_n) + s_Q(w)
                rows.append(np.concatenate([An @ x, e_j]))
                rhs.append(float(w @ (pc.F @ x + pc.c)) + sq)
            for r in rays:
                rows.append(np.concatenate([An @ r, np.zeros(N)]))
                rhs.append(float(w @ (pc.F @ r)))
            for ln in lines:
                for s in (1.0, -1.0):
                    rows.append(np.concatenate([s * (An @ ln), np.zeros(N)]))
                    rhs.append(s * float(w @ (pc.F @ ln)))
        if rows is None:
            out.append((w, support(p, w), -math.inf))
            continue
        lp = linprog(np.concatenate([-ps.b, -np.ones(N)]), np.array(rows), np.array(rhs),
                     upper=np.concatenate([np.zeros(Mdim), np.full(N, np.inf)]))
        if lp.status is LPStatus.UNBOUNDED:
            rhs_val = math.inf
        elif lp.status is LPStatus.INFEASIBLE:
            rhs_val = -math.inf
        elif lp.optimal:
            rhs_val = -lp.value
        else:
            raise ArithmeticError("identity LP failed")
        out.append((w, support(p, w), rhs_val))
    return out
