"""Linear scalarizations of set-valued maps and their scalar Lagrangians."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .extreal import ext_add
from .geometry import UpperSet, halfspace, lattice_sup, support
from .lp import LPStatus, linprog
from .maps import SetValuedMap, check_zstar

__all__ = [
    "ScalarizationQuery", "phi", "reconstruct", "scalar_lagrangian", "lam",
    "scalar_conjugate",
]


@dataclass(frozen=True, eq=False)
class ScalarizationQuery:
    """A map together with a validated functional ``z* in C⁺∖{0}``."""

    map: SetValuedMap
    zstar: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "zstar", check_zstar(self.zstar, self.map.cone))

    def __call__(self, x) -> float:
        return self.map.phi(self.zstar, x)


def phi(f: SetValuedMap, zstar, x) -> float:
    """``inf_{z in f(x)} z*.z``; ``+inf`` off the domain.

    ``z*`` is used as given (values scale linearly with it); it need not lie
    in ``C⁺``, in which case the value is ``-inf`` wherever ``f(x)`` is
    nonempty.
    """
    zstar = np.asarray(zstar, dtype=float).reshape(-1)
    return f.phi(zstar, x)


def reconstruct(f: SetValuedMap, x, zstars) -> UpperSet:
    """``∩_{z*} {z : phi_{f,z*}(x) <= z*.z}``."""
    zstars = [check_zstar(z, f.cone) for z in zstars]
    if not zstars:
        raise ValueError("at least one functional is needed")
    return lattice_sup([halfspace(z, f.phi(z, x), f.cone) for z in zstars], cone=f.cone)


def scalar_lagrangian(inst, zstar, x, ystar) -> float:
    """``lambda_{z*}(x, y*) = phi_{f,z*}(x) + inf_{y in g(x)} y*.y``.

    ``inst`` is any object with maps ``f`` and ``g``.  The sum is taken in
    extended arithmetic; an undefined ``inf - inf`` raises
    :class:`~setlat.errors.IndeterminateError`.
    """
    zstar = check_zstar(zstar, inst.f.cone)
    return ext_add(inst.f.phi(zstar, x), inst.g.phi(np.asarray(ystar, dtype=float), x))


lam = scalar_lagrangian


def scalar_conjugate(f: SetValuedMap, zstar, xstar) -> float:
    """``inf_x [phi_{f,z*}(x) - x*.x]`` by one linear program per piece."""
    f.require_affine()
    zstar = check_zstar(zstar, f.cone)
    xstar = np.asarray(xstar, dtype=float).reshape(-1)
    best = math.inf
    for p in f.pieces:
        s = support(p.tail, zstar)
        if s == math.inf:
            continue
        out = linprog(p.F.T @ zstar - xstar, f.E, f.e)
        if out.status is LPStatus.INFEASIBLE:
            continue
        if out.status is LPStatus.UNBOUNDED or s == -math.inf:
            return -math.inf
        if not out.optimal:
            raise ArithmeticError(f"scalar conjugate LP failed: {out.status.value}")
        best = min(best, out.value + float(zstar @ p.c) + s)
    return best
