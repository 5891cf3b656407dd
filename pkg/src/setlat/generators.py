"""Seeded random cones, upper sets, problem instances and dual pairs."""

from __future__ import annotations

import numpy as np

from .duality import ProblemInstance, feasible, in_delta
from .geometry import PolyCone, UpperSet, upper_close
from .maps import DualPair, affine_map
from .polyhedra import polyhedron_vrep

__all__ = [
    "random_cone", "random_upper_set", "random_convex_instance", "random_feasible_points",
    "random_dual_pair", "random_cone_point", "non_delta_pairs",
]


def random_cone(q: int, rng: np.random.Generator, orthant_prob: float = 0.5) -> PolyCone:
    """The orthant or a random simplicial (pointed, solid) cone near it."""
    if rng.random() < orthant_prob:
        return PolyCone.orthant(q)
    gens = np.eye(q) + rng.uniform(-0.3, 0.3, size=(q, q))
    return PolyCone(gens, q)


def random_cone_point(K: PolyCone, rng: np.random.Generator) -> np.ndarray:
    """A random nonzero point of ``K``, scaled to unit 1-norm."""
    G = K.generators
    while True:
        w = rng.exponential(size=G.shape[0]) * (rng.random(G.shape[0]) < 0.8)
        v = w @ G
        if np.abs(v).sum() > 1e-6:
            return v / np.abs(v).sum()


def random_upper_set(cone: PolyCone, rng: np.random.Generator, max_points: int = 6,
                     special_prob: float = 0.0, extra_ray_prob: float = 0.2) -> UpperSet:
    """A random polyhedral upper set; EMPTY or FULL with ``special_prob`` each."""
    u = rng.random()
    if u < special_prob:
        return UpperSet.empty(cone)
    if u < 2 * special_prob:
        return UpperSet.full(cone)
    q = cone.dim
    k = int(rng.integers(1, max_points + 1))
    pts = np.round(rng.uniform(-2.0, 2.0, size=(k, q)), 3)
    rays = np.zeros((0, q))
    if rng.random() < extra_ray_prob:
        rays = rng.normal(size=(1, q))
    return upper_close(pts, rays, cone)


def random_convex_instance(rng: np.random.Generator, q: int | None = None, n: int | None = None,
                           m: int | None = None, cone_prob: float = 0.5) -> ProblemInstance:
    """A convex polyhedral problem with a built-in Slater point.

    ``f(x) = {F x + c} ⊕ Q`` on a box, ``g(x) = {G x - b} ⊕ D`` with
    ``b = G x̄ + s``, ``s > 0``, for an interior point ``x̄`` of the box.
    """
    q = int(rng.integers(2, 4)) if q is None else q
    n = int(rng.integers(1, 5)) if n is None else n
    m = int(rng.integers(1, 4)) if m is None else m
    C = random_cone(q, rng, orthant_prob=1.0 - cone_prob)
    D = random_cone(m, rng, orthant_prob=1.0 - cone_prob)
    F = np.round(rng.normal(size=(q, n)), 3)
    c = np.round(rng.normal(size=q), 3)
    Q = upper_close(np.round(rng.uniform(-1.0, 1.0, size=(int(rng.integers(1, 4)), q)), 3), [], C)
    half = np.round(rng.uniform(1.0, 2.0, size=n), 3)
    box = (np.vstack([np.eye(n), -np.eye(n)]), np.concatenate([half, half]))
    f = affine_map(F, c, Q, domain=box, name="f")
    G = np.round(rng.normal(size=(m, n)), 3)
    xbar = rng.uniform(-0.5, 0.5, size=n) * half
    s = rng.uniform(0.2, 1.0, size=m)
    # g(xbar) = -s_in_D lies in -int D
    s_in_D = D.generators.T @ s
    b = np.round(G @ xbar + s_in_D, 6)
    g = affine_map(G, -b, upper_close(np.zeros((1, m)), [], D), name="g")
    return ProblemInstance(f, g, "random")


def random_feasible_points(inst: ProblemInstance, rng: np.random.Generator, k: int,
                           tries: int = 400) -> list[np.ndarray]:
    """Up to ``k`` feasible points: random convex combinations of the vertices
    of the feasible polyhedron."""
    sec = inst.section_rows()
    if sec is None:
        return []
    E, e, _ = sec
    vrep = polyhedron_vrep(E, e, inst.n)
    if vrep is None:
        return []
    V = vrep[0]
    out = []
    for _ in range(tries):
        if len(out) >= k:
            break
        w = rng.dirichlet(np.ones(V.shape[0]))
        x = np.round(w @ V, 9)
        if feasible(inst, x):
            out.append(x)
    return out


def random_dual_pair(inst: ProblemInstance, rng: np.random.Generator, in_dual_cone: bool = True,
                     scale: float = 3.0) -> DualPair:
    """``z*`` random in ``C⁺``; ``y*`` random in ``D⁺`` (or anywhere)."""
    z = random_cone_point(inst.C.dual(), rng)
    if in_dual_cone:
        y = random_cone_point(inst.D.dual(), rng) * rng.uniform(0.0, scale)
    else:
        y = rng.normal(size=inst.m) * scale
    return DualPair(y, z)


def non_delta_pairs(inst: ProblemInstance, p: UpperSet, delta_pairs, rng: np.random.Generator,
                    k: int, max_tries: int = 2000) -> list[DualPair]:
    """``k`` pairs outside ``Δ``; about half share ``z*`` with a ``Δ`` entry."""
    out = []
    tries = 0
    while len(out) < k and tries < max_tries:
        tries += 1
        if delta_pairs and rng.random() < 0.5:
            base = delta_pairs[int(rng.integers(len(delta_pairs)))]
            pair = DualPair(base.ystar + rng.normal(size=inst.m) * rng.uniform(0.05, 1.0), base.zstar)
        else:
            pair = random_dual_pair(inst, rng, in_dual_cone=rng.random() < 0.8)
        set_form, _ = in_delta(inst, p, pair)
        if not set_form:
            out.append(pair)
    return out
