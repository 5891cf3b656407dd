"""Minimizers, infimizers, (full) solutions, canonical extensions and saddle sets.

The domain of a set-valued function is infinite in general; every check here
runs over an explicit finite universe supplied by the caller, and verdicts
are relative to that universe.  Strict containment ``⊋`` means containment
that fails in the reverse direction within ``EPS_GEOM``; near-ties count as
equality, which favours declaring minimality.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Hashable, Sequence

import numpy as np

from .duality import ProblemInstance, dual_objective, feasible, lagrangian
from .errors import VerificationError
from .geometry import PolyCone, UpperSet, contains, equal, lattice_inf, lattice_sup
from .maps import DualPair, SetValuedMap

__all__ = [
    "CandidateSet", "Evaluator", "is_minimizer", "is_maximizer", "is_infimizer", "is_supremizer",
    "SolutionVerdict", "check_solution", "inf_extension", "sup_extension", "lower_ext",
    "upper_ext", "SaddleVerdict", "LagrangianGame", "saddle_check", "default_universes",
]


def _key(item) -> Hashable:
    if isinstance(item, DualPair):
        return ("pair",) + item.key()
    return tuple(np.round(np.asarray(item, dtype=float).reshape(-1), 12).tolist())


class CandidateSet:
    """A finite, deduplicated list of primal points or dual pairs."""

    def __init__(self, items=()):
        self.items: list = []
        seen = set()
        for it in items:
            k = _key(it)
            if k not in seen:
                seen.add(k)
                self.items.append(it)

    def __iter__(self):
        return iter(self.items)

    def __len__(self) -> int:
        return len(self.items)

    def union(self, other) -> "CandidateSet":
        return CandidateSet(list(self.items) + list(other))

    def __repr__(self) -> str:
        return f"CandidateSet({self.items!r})"


class Evaluator:
    """Memoizing wrapper turning a map or callable into ``x -> UpperSet``."""

    def __init__(self, f, cone: PolyCone | None = None):
        if isinstance(f, Evaluator):
            self._fn, self.cone = f._fn, f.cone
            self._cache, self._rel = f._cache, f._rel
            return
        if isinstance(f, SetValuedMap):
            self._fn, self.cone = f.value, f.cone
        else:
            self._fn, self.cone = f, cone
        self._cache: dict = {}
        self._rel: dict = {}

    def __call__(self, x) -> UpperSet:
        k = _key(x)
        if k not in self._cache:
            val = self._fn(x)
            if self.cone is None:
                self.cone = val.cone
            self._cache[k] = val
        return self._cache[k]

    def contains(self, a, b) -> bool:
        """``f(a) ⊇ f(b)``, memoized."""
        k = (_key(a), _key(b))
        if k not in self._rel:
            self._rel[k] = contains(self(a), self(b))
        return self._rel[k]

    def strictly_contains(self, a, b) -> bool:
        return self.contains(a, b) and not self.contains(b, a)

    def equal(self, a, b) -> bool:
        return self.contains(a, b) and self.contains(b, a)


def _universe(candidates, extra=()) -> CandidateSet:
    return CandidateSet(list(candidates) + list(extra))


def is_minimizer(f, x, candidates) -> bool:
    """No candidate value strictly contains ``f(x)``."""
    ev = Evaluator(f)
    return not any(ev.strictly_contains(c, x) for c in candidates)


def is_maximizer(f, x, candidates) -> bool:
    """No candidate value is strictly contained in ``f(x)``."""
    ev = Evaluator(f)
    return not any(ev.strictly_contains(x, c) for c in candidates)


def inf_extension(f, M, cone: PolyCone | None = None) -> UpperSet:
    """``inf_{x in M} f(x)``; EMPTY for empty ``M``."""
    ev = Evaluator(f, cone)
    return lattice_inf([ev(x) for x in M], cone=ev.cone or cone)


def sup_extension(f, M, cone: PolyCone | None = None) -> UpperSet:
    """``sup_{x in M} f(x)``; FULL for empty ``M``."""
    ev = Evaluator(f, cone)
    return lattice_sup([ev(x) for x in M], cone=ev.cone or cone)


def is_infimizer(f, candidate, universe) -> bool:
    """``inf f[candidate] = inf f[universe ∪ candidate]``."""
    ev = Evaluator(f)
    uni = _universe(universe, candidate)
    return equal(inf_extension(ev, candidate, ev.cone), inf_extension(ev, uni, ev.cone))


def is_supremizer(f, candidate, universe) -> bool:
    """``sup f[candidate] = sup f[universe ∪ candidate]``."""
    ev = Evaluator(f)
    uni = _universe(universe, candidate)
    return equal(sup_extension(ev, candidate, ev.cone), sup_extension(ev, uni, ev.cone))


class SolutionVerdict(str, enum.Enum):
    NOT = "not"
    SOLUTION = "solution"
    FULL_SOLUTION = "full_solution"


def _extremal_values(ev, universe, sense: str) -> list:
    test = is_minimizer if sense == "min" else is_maximizer
    return [u for u in universe if test(ev, u, universe)]


def check_solution(f, candidate, universe, sense: str = "min") -> SolutionVerdict:
    """Classify ``candidate`` against the finite ``universe`` (candidate points
    are added to it).

    A solution attains the infimum (supremum for ``sense="max"``) and has only
    minimal (maximal) values; a full solution's values are exactly the
    minimal (maximal) values over the universe.
    """
    if sense not in ("min", "max"):
        raise ValueError("sense must be 'min' or 'max'")
    ev = Evaluator(f)
    candidate = CandidateSet(candidate)
    uni = _universe(universe, candidate)
    if len(candidate) == 0:
        return SolutionVerdict.NOT
    attains = is_infimizer(ev, candidate, uni) if sense == "min" else is_supremizer(ev, candidate, uni)
    test = is_minimizer if sense == "min" else is_maximizer
    if not attains or not all(test(ev, x, uni) for x in candidate):
        return SolutionVerdict.NOT
    extremal = _extremal_values(ev, uni, sense)
    covered = all(any(ev.equal(u, x) for x in candidate) for u in extremal)
    return SolutionVerdict.FULL_SOLUTION if covered else SolutionVerdict.SOLUTION


def lower_ext(l: Callable, U, W, cone: PolyCone) -> UpperSet:
    """``sup_{w in W} inf_{x in U} l(x, w)``."""
    return lattice_sup([lattice_inf([l(x, w) for x in U], cone=cone) for w in W], cone=cone)


def upper_ext(l: Callable, U, W, cone: PolyCone) -> UpperSet:
    """``inf_{x in U} sup_{w in W} l(x, w)``."""
    return lattice_inf([lattice_sup([l(x, w) for w in W], cone=cone) for x in U], cone=cone)


# ---------------------------------------------------------------------------
# saddle sets of the Lagrangian

@dataclass
class SaddleVerdict:
    condition_a: bool
    condition_b: bool
    inf_sup_equal: bool
    is_full: bool
    solutions_and_zero_gap: bool
    full_solutions_and_zero_gap: bool
    universe: str
    details: dict = field(default_factory=dict)

    @property
    def is_saddle(self) -> bool:
        return self.condition_a and self.condition_b


class LagrangianGame:
    """The Lagrangian of a problem over finite universes.

    ``p(x) = sup_{w in V_u} l(x, w)`` for ``x`` in the primal universe (the
    dual universe should make ``p(x) = f(x)`` on feasible points) and
    ``d(w) = h(w)``, the exact infimum over all of ``X``.
    """

    def __init__(self, inst: ProblemInstance, X_universe, V_universe):
        self.inst = inst
        self.X = CandidateSet(X_universe)
        self.V = CandidateSet(V_universe)
        self.cone = inst.C
        self._l: dict = {}
        self._p: dict = {}
        self._d: dict = {}
        self.p_ev = Evaluator(self.p, self.cone)
        self.d_ev = Evaluator(self.d, self.cone)
        self._weak_checked = False
        for x in self.X:
            if not feasible(inst, x):
                raise ValueError(f"primal universe point {np.asarray(x).tolist()} is infeasible")

    def l(self, x, w) -> UpperSet:
        k = (_key(x), _key(w))
        if k not in self._l:
            self._l[k] = lagrangian(self.inst, x, w)
        return self._l[k]

    def p(self, x) -> UpperSet:
        k = _key(x)
        if k not in self._p:
            self._p[k] = lattice_sup([self.l(x, w) for w in self.V], cone=self.cone)
        return self._p[k]

    def d(self, w) -> UpperSet:
        k = _key(w)
        if k not in self._d:
            self._d[k] = dual_objective(self.inst, w)
        return self._d[k]

    def check_weak_duality(self) -> None:
        """Assert ``d(w) ⊇ p(x)`` on the universes (once per game)."""
        if self._weak_checked:
            return
        for w in self.V:
            dw = self.d(w)
            for x in self.X:
                if not contains(dw, self.p(x)):
                    raise VerificationError("d(w) does not contain p(x)", witness=(x, w))
        self._weak_checked = True


def saddle_check(inst: ProblemInstance, Xbar, Vbar, X_universe, V_universe,
                 game: LagrangianGame | None = None) -> SaddleVerdict:
    """Saddle-set test for ``(Xbar, Vbar)`` cross-checked against the solution verdicts.

    Condition (a): ``p[Xbar]`` consists of minimal and ``d[Vbar]`` of maximal
    values over the universes (both nonempty).  Condition (b): the chain
    ``Ľ(Xbar, W) ≤ Ľ(Xbar, Vbar) = L̂(Xbar, Vbar) ≤ L̂(U, Vbar)`` at the
    extreme choices ``W = V_u`` and ``U = X``, which imply all others by
    monotonicity.  The verdict is compared with the independent route
    "primal solution, dual solution and zero gap"; a mismatch raises.
    """
    Xbar, Vbar = CandidateSet(Xbar), CandidateSet(Vbar)
    if game is None:
        game = LagrangianGame(inst, CandidateSet(X_universe).union(Xbar),
                              CandidateSet(V_universe).union(Vbar))
    else:
        missing = [x for x in Xbar if _key(x) not in {_key(u) for u in game.X}]
        missing += [w for w in Vbar if _key(w) not in {_key(u) for u in game.V}]
        if missing:
            raise ValueError("candidates must belong to the game's universes")
    game.check_weak_duality()
    C = inst.C
    p_ev, d_ev = game.p_ev, game.d_ev

    # saddle side -----------------------------------------------------------
    min_ok = len(Xbar) > 0 and all(is_minimizer(p_ev, x, game.X) for x in Xbar)
    max_ok = len(Vbar) > 0 and all(is_maximizer(d_ev, w, game.V) for w in Vbar)
    condition_a = min_ok and max_ok
    upper_bar_V = upper_ext(game.l, Xbar, game.V, C)      # Ľ(Xbar, V_u) = inf_Xbar p
    upper_bar = upper_ext(game.l, Xbar, Vbar, C)          # Ľ(Xbar, Vbar)
    lower_bar = lower_ext(game.l, Xbar, Vbar, C)          # L̂(Xbar, Vbar)
    lower_X = lattice_sup([game.d(w) for w in Vbar], cone=C)  # L̂(X, Vbar) = sup_Vbar d
    condition_b = (len(Xbar) > 0 and len(Vbar) > 0 and contains(upper_bar_V, upper_bar)
                   and equal(upper_bar, lower_bar) and contains(lower_bar, lower_X))
    inf_p_bar = inf_extension(p_ev, Xbar, C)
    sup_d_bar = sup_extension(d_ev, Vbar, C)
    inf_sup_equal = len(Xbar) > 0 and len(Vbar) > 0 and equal(sup_d_bar, inf_p_bar)
    if condition_b != inf_sup_equal:
        raise VerificationError("condition (b) and the inf-sup equality disagree",
                                witness={"Xbar": Xbar.items, "Vbar": Vbar.items})
    min_all = [x for x in game.X if is_minimizer(p_ev, x, game.X)]
    max_all = [w for w in game.V if is_maximizer(d_ev, w, game.V)]
    full_a = condition_a and all(any(p_ev.equal(u, x) for x in Xbar) for u in min_all) \
        and all(any(d_ev.equal(u, w) for w in Vbar) for u in max_all)
    is_full = condition_a and condition_b and full_a

    # solution side ------------------------------------------------------------
    primal = check_solution(p_ev, Xbar, game.X, "min")
    dual = check_solution(d_ev, Vbar, game.V, "max")
    gap_zero = equal(inf_extension(p_ev, game.X, C), sup_extension(d_ev, game.V, C))
    solutions_and_zero_gap = primal is not SolutionVerdict.NOT and dual is not SolutionVerdict.NOT and gap_zero
    full_solutions_and_zero_gap = (primal is SolutionVerdict.FULL_SOLUTION and dual is SolutionVerdict.FULL_SOLUTION
                    and gap_zero)
    saddle = condition_a and condition_b
    if saddle != solutions_and_zero_gap or is_full != full_solutions_and_zero_gap:
        raise VerificationError(
            "saddle verdict contradicts the primal/dual solution verdicts",
            witness={"saddle": saddle, "solutions": solutions_and_zero_gap, "full": is_full,
                     "full_solutions_and_zero_gap": full_solutions_and_zero_gap, "primal": primal.value, "dual": dual.value,
                     "gap_zero": gap_zero},
        )
    return SaddleVerdict(
        condition_a, condition_b, inf_sup_equal, is_full, solutions_and_zero_gap, full_solutions_and_zero_gap,
        universe=f"grid-relative: |X_u| = {len(game.X)}, |V_u| = {len(game.V)}",
        details={"primal": primal.value, "dual": dual.value, "gap_zero": gap_zero,
                 "minimal": min_ok, "maximal": max_ok},
    )


def default_universes(inst: ProblemInstance, delta_pairs, rng: np.random.Generator | None = None,
                      extra_points: int = 5, extra_pairs: int = 5):
    """Finite universes for :func:`saddle_check`.

    Primal: the vertices of the feasible polyhedron plus random convex
    combinations.  Dual: the given pairs, ``(0, h)`` for every facet normal
    ``h`` of ``f(x)`` over the primal universe (these make ``p(x) = f(x)``),
    and random pairs.
    """
    from .generators import random_dual_pair, random_feasible_points
    from .polyhedra import polyhedron_vrep

    rng = np.random.default_rng(0) if rng is None else rng
    sec = inst.section_rows()
    X = []
    if sec is not None:
        vrep = polyhedron_vrep(sec[0], sec[1], inst.n)
        if vrep is not None:
            X = [v for v in vrep[0] if feasible(inst, v)]
            X += random_feasible_points(inst, rng, extra_points)
    V = list(delta_pairs)
    for x in X:
        for h in inst.f.value(x).facet_normals():
            V.append(DualPair(np.zeros(inst.m), h))
    V += [random_dual_pair(inst, rng) for _ in range(extra_pairs)]
    return CandidateSet(X), CandidateSet(V)
