"""Independent reference computations used by the tests.

Everything here is written from scratch by brute force (subset enumeration)
or delegates to scipy's HiGHS solver, so it shares no code path with the
package under test.
"""

from __future__ import annotations

import itertools
import math

import numpy as np
from scipy.optimize import linprog as scipy_linprog

TOL = 1e-9


def _null_vector(M: np.ndarray) -> np.ndarray | None:
    """A unit vector spanning the null space of ``M`` when it is one-dimensional."""
    _, s, vt = np.linalg.svd(M)
    rank = int(np.sum(s > 1e-10 * max(1.0, s[0] if s.size else 1.0)))
    if rank != M.shape[1] - 1:
        return None
    return vt[-1]


def _dedupe(rows, digits: int = 7) -> np.ndarray:
    seen, out = set(), []
    for r in rows:
        key = tuple(np.round(r, digits) + 0.0)
        if key not in seen:
            seen.add(key)
            out.append(r)
    return np.array(out)


def brute_facets(points, rays, q: int) -> tuple[np.ndarray, np.ndarray]:
    """Facets ``a.z >= b`` (unit 1-norm ``a``) of ``conv(points) + cone(rays)``.

    Every ``q``-subset of homogenized generators ``(p, 1)``, ``(r, 0)``
    defines a candidate hyperplane through the origin of ``R^{q+1}``; it is
    kept when all generators lie on one side of it.
    """
    P = np.atleast_2d(np.asarray(points, dtype=float)).reshape(-1, q)
    R = np.asarray(rays, dtype=float).reshape(-1, q)
    G = np.vstack([np.hstack([P, np.ones((len(P), 1))]), np.hstack([R, np.zeros((len(R), 1))])])
    scale = max(1.0, float(np.abs(G).max()))
    rows = []
    for idx in itertools.combinations(range(len(G)), q):
        normal = _null_vector(G[list(idx)])
        if normal is None:
            continue
        vals = G @ normal
        if np.all(vals >= -1e-9 * scale):
            pass
        elif np.all(vals <= 1e-9 * scale):
            normal = -normal
        else:
            continue
        a, beta = normal[:q], normal[q]
        norm = np.abs(a).sum()
        if norm <= 1e-9:
            continue  # the homogenizing inequality t >= 0
        rows.append(np.concatenate([a / norm, [-beta / norm]]))
    if not rows:
        return np.zeros((0, q)), np.zeros(0)
    rows = _dedupe(rows)
    return rows[:, :q], rows[:, q]


def brute_vertices(A, b, q: int):
    """Vertices and extreme rays of ``{z : A z >= b}`` by subset enumeration.

    A lineality space (the null space of ``A``) is factored out first by
    adding equations that pin the orthogonal complement.  Returns
    ``(points, rays, lines)`` or ``None`` for an empty set.
    """
    A = np.asarray(A, dtype=float).reshape(-1, q)
    b = np.asarray(b, dtype=float).reshape(-1)
    if A.shape[0] == 0:
        return np.zeros((1, q)), np.zeros((0, q)), np.eye(q)
    _, s, vt = np.linalg.svd(A)
    rank = int(np.sum(s > 1e-10))
    lines = vt[rank:]
    Aeq = np.vstack([A] + [lines, -lines] if len(lines) else [A])
    beq = np.concatenate([b, np.zeros(2 * len(lines))])
    pts = []
    scale = max(1.0, float(np.abs(b).max()))
    for idx in itertools.combinations(range(len(Aeq)), q):
        M = Aeq[list(idx)]
        if abs(np.linalg.det(M)) < 1e-12:
            continue
        z = np.linalg.solve(M, beq[list(idx)])
        if np.all(Aeq @ z >= beq - 1e-9 * scale * max(1.0, np.abs(z).max())):
            pts.append(z)
    if not pts:
        return None
    ray_list = []
    for idx in itertools.combinations(range(len(Aeq)), q - 1):
        d = _null_vector(Aeq[list(idx)]) if q > 1 else np.ones(1)
        if d is None:
            continue
        for cand in (d, -d):
            if np.all(Aeq @ cand >= -1e-9):
                ray_list.append(cand / np.abs(cand).sum())
    rays = _dedupe(ray_list) if ray_list else np.zeros((0, q))
    return _dedupe(pts), rays, lines


def vrep_support(points, rays, zstar, tol: float = TOL) -> float:
    """``inf z*.z`` over ``conv(points) + cone(rays)``."""
    z = np.asarray(zstar, dtype=float)
    R = np.asarray(rays, dtype=float).reshape(-1, z.size)
    if R.shape[0] and np.any(R @ z < -tol * max(1.0, np.abs(z).sum())):
        return -math.inf
    P = np.asarray(points, dtype=float).reshape(-1, z.size)
    if P.shape[0] == 0:
        return math.inf
    return float(np.min(P @ z))


def hrep_support(A, b, zstar) -> float:
    """``inf z*.z`` over ``{z : A z >= b}`` by scipy."""
    A = np.asarray(A, dtype=float)
    z = np.asarray(zstar, dtype=float)
    if A.shape[0] == 0:
        return 0.0 if not np.any(z) else -math.inf
    return lp_min(z, -A, -np.asarray(b, dtype=float))


def lp_min(c, A_ub, b_ub) -> float:
    """``min c.x`` subject to ``A_ub x <= b_ub`` with free variables."""
    c = np.asarray(c, dtype=float)
    A_ub = np.asarray(A_ub, dtype=float).reshape(-1, c.size)
    b_ub = np.asarray(b_ub, dtype=float).reshape(-1)
    if A_ub.shape[0] == 0:
        return 0.0 if not np.any(c) else -math.inf
    res = scipy_linprog(c, A_ub=A_ub, b_ub=b_ub, bounds=[(None, None)] * c.size, method="highs")
    if res.status == 2:
        return math.inf
    if res.status == 3:
        return -math.inf
    if res.status != 0:
        raise RuntimeError(res.message)
    return float(res.fun)


def lp_solution(c, A_ub, b_ub):
    """``(value, x, duals)`` from scipy; duals are the nonnegative multipliers."""
    c = np.asarray(c, dtype=float)
    res = scipy_linprog(c, A_ub=A_ub, b_ub=b_ub, bounds=[(None, None)] * c.size, method="highs")
    if res.status != 0:
        return None
    return float(res.fun), res.x, -res.ineqlin.marginals


def dual_cone_generators(G: np.ndarray) -> np.ndarray:
    """Generators of ``{w : G w >= 0}`` by brute force (pointed cones only)."""
    q = G.shape[1]
    out = []
    for idx in itertools.combinations(range(G.shape[0]), q - 1):
        d = _null_vector(G[list(idx)]) if q > 1 else np.ones(1)
        if d is None:
            continue
        for cand in (d, -d):
            if np.all(G @ cand >= -1e-9):
                out.append(cand / np.abs(cand).sum())
    return _dedupe(out)


def same_rows(A, B, tol: float = 1e-7) -> bool:
    """Whether two row sets coincide up to order (and duplicates)."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    if A.shape[0] == 0 or B.shape[0] == 0:
        return A.shape[0] == B.shape[0]

    def covered(X, Y):
        return all(np.min(np.abs(Y - x).max(axis=1)) <= tol for x in X)

    return covered(A, B) and covered(B, A)
