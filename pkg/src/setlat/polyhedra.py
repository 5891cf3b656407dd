"""Double description for small polyhedra.

Everything here works on plain numpy arrays.  A polyhedron is either given by
inequalities ``A z >= b`` (H-representation) or by generators: points, rays
and lines (V-representation).  Both directions reduce to one primitive,
:func:`cone_generators`, which enumerates the extreme rays and a lineality
basis of ``{y : A y >= 0}`` by incremental insertion of the rows of ``A``.
"""

from __future__ import annotations

import numpy as np

from .tolerances import EPS_DD

MAX_DD_DIM = 10


def _as_matrix(rows, dim: int) -> np.ndarray:
    arr = np.asarray(rows, dtype=float)
    if arr.size == 0:
        return np.zeros((0, dim))
    arr = np.atleast_2d(arr)
    if arr.shape[1] != dim:
        raise ValueError(f"expected vectors of length {dim}, got {arr.shape[1]}")
    return arr


def _normalize_rows(M: np.ndarray) -> np.ndarray:
    if M.shape[0] == 0:
        return M
    scale = np.abs(M).max(axis=1)
    keep = scale > EPS_DD
    return M[keep] / scale[keep, None]


def cone_generators(A, dim: int | None = None, tol: float = EPS_DD):
    """Generators of the cone ``{y : A y >= 0}``.

    Returns ``(rays, lines)``: the extreme rays of the pointed part (scaled
    to unit max-norm) and an orthonormal basis of the lineality space.
    """
    A = np.asarray(A, dtype=float)
    if dim is None:
        dim = A.shape[1]
    A = _as_matrix(A, dim)
    if dim > MAX_DD_DIM:
        raise ValueError(f"double description limited to dimension {MAX_DD_DIM}")
    A = _normalize_rows(A)
    if A.shape[0] == 0:
        return np.zeros((0, dim)), np.eye(dim)

    _, s, vt = np.linalg.svd(A)
    rank = int(np.sum(s > 1e-9))
    lines = vt[rank:]
    if rank == 0:
        return np.zeros((0, dim)), lines
    basis = vt[:rank].T  # columns span the orthogonal complement of the lines
    Ap = A @ basis
    m = Ap.shape[0]

    # greedy choice of `rank` independent rows for the initial simplicial cone
    chosen: list[int] = []
    for i in range(m):
        trial = chosen + [i]
        if np.linalg.matrix_rank(Ap[trial], tol=1e-9) == len(trial):
            chosen = trial
            if len(chosen) == rank:
                break
    inv = np.linalg.inv(Ap[chosen])
    rays = [inv[:, j] / np.abs(inv[:, j]).max() for j in range(rank)]
    tight = [frozenset(chosen[k] for k in range(rank) if k != j) for j in range(rank)]
    done = set(chosen)

    for i in range(m):
        if i in done:
            continue
        a = Ap[i]
        vals = [float(a @ r) for r in rays]
        pos = [k for k, v in enumerate(vals) if v > tol]
        neg = [k for k, v in enumerate(vals) if v < -tol]
        zero = [k for k, v in enumerate(vals) if -tol <= v <= tol]
        new_rays = [rays[k] for k in pos]
        new_tight = [tight[k] for k in pos]
        for k in zero:
            new_rays.append(rays[k])
            new_tight.append(tight[k] | {i})
        for kp in pos:
            for kn in neg:
                common = tight[kp] & tight[kn]
                if len(common) < rank - 2:
                    continue
                # combinatorial adjacency: no third ray is tight on all of `common`
                if rank > 2 and any(
                    k != kp and k != kn and common <= tight[k] for k in range(len(rays))
                ):
                    continue
                r = vals[kp] * rays[kn] - vals[kn] * rays[kp]
                scale = np.abs(r).max()
                if scale <= tol:
                    continue
                new_rays.append(r / scale)
                new_tight.append(common | {i})
        rays, tight = new_rays, new_tight
        done.add(i)

    if not rays:
        return np.zeros((0, dim)), lines
    R = np.array(rays) @ basis.T
    R = R / np.abs(R).max(axis=1, keepdims=True)
    R[np.abs(R) < 1e-14] = 0.0
    return R, lines


def vrep_to_hrep(points, rays, lines, dim: int):
    """Facets ``(A, b)`` with ``A z >= b`` of ``conv(points) + cone(rays) + span(lines)``.

    Equalities come out as two opposite inequalities.  Rows are scaled to unit
    1-norm.  Requires at least one point.
    """
    P = _as_matrix(points, dim)
    R = _as_matrix(rays, dim)
    L = _as_matrix(lines, dim)
    if P.shape[0] == 0:
        raise ValueError("V-representation without points")
    gens = np.vstack([
        np.hstack([P, np.ones((P.shape[0], 1))]),
        np.hstack([R, np.zeros((R.shape[0], 1))]),
        np.hstack([L, np.zeros((L.shape[0], 1))]),
        np.hstack([-L, np.zeros((L.shape[0], 1))]),
    ])
    drays, dlines = cone_generators(gens, dim + 1)
    rows = [r for r in drays]
    for ln in dlines:
        rows.append(ln)
        rows.append(-ln)
    A, b = [], []
    for r in rows:
        a, beta = r[:dim], r[dim]
        norm = np.abs(a).sum()
        if norm <= 1e-9:
            continue  # the homogenizing facet t >= 0
        A.append(a / norm)
        b.append(-beta / norm)
    if not A:
        return np.zeros((0, dim)), np.zeros(0)
    return np.array(A), np.array(b)


def hrep_to_vrep(A, b, dim: int):
    """Generators ``(points, rays, lines)`` of ``{z : A z >= b}``.

    Returns ``None`` for an empty polyhedron.  Rays are scaled to unit
    1-norm; lines form an orthonormal basis.
    """
    A = _as_matrix(A, dim)
    b = np.asarray(b, dtype=float).reshape(-1)
    H = np.vstack([
        np.hstack([A, -b[:, None]]),
        np.hstack([np.zeros(dim), [1.0]])[None, :],
    ])
    rays, lines = cone_generators(H, dim + 1)
    points, out_rays = [], []
    for r in rays:
        t = r[dim]
        if t > 1e-9:
            points.append(r[:dim] / t)
        else:
            d = r[:dim]
            norm = np.abs(d).sum()
            if norm > 1e-12:
                out_rays.append(d / norm)
    out_lines = [ln[:dim] for ln in lines]
    if not points:
        return None
    return (
        np.array(points),
        np.array(out_rays) if out_rays else np.zeros((0, dim)),
        np.array(out_lines) if out_lines else np.zeros((0, dim)),
    )


def polyhedron_vrep(E, e, dim: int):
    """Generators of ``{x : E x <= e}`` (the ``<=`` convention of LP data)."""
    E = _as_matrix(E, dim)
    e = np.asarray(e, dtype=float).reshape(-1)
    return hrep_to_vrep(-E, -e, dim)
