"""Dense-tableau simplex with Bland's rule.

Problems have the form ``min c.x  s.t.  M x <= r`` with free variables and
optional bounds.  Optimal outcomes carry nonnegative row multipliers ``mu``
with ``c + M^T mu = 0`` and ``c.x* = -r.mu``, i.e. ``-mu`` is the usual
(nonpositive) dual vector of the ``<=`` rows.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .tolerances import EPS_LP

PIVOT_TOL = 1e-11
MAX_ITER = 20000


class LPStatus(str, enum.Enum):
    OPTIMAL = "optimal"
    UNBOUNDED = "unbounded"
    INFEASIBLE = "infeasible"
    NUMERICAL_FAILURE = "numerical_failure"


@dataclass(frozen=True)
class LinearProgram:
    c: np.ndarray
    M: np.ndarray
    r: np.ndarray
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float).reshape(-1)
        n = c.size
        M = np.asarray(self.M, dtype=float)
        M = M.reshape(-1, n) if M.size else np.zeros((0, n))
        r = np.asarray(self.r, dtype=float).reshape(-1)
        if M.shape[0] != r.size:
            raise ValueError(f"M has {M.shape[0]} rows but r has {r.size} entries")
        for name, arr in (("c", c), ("M", M), ("r", r)):
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"non-finite entries in {name}")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "M", M)
        object.__setattr__(self, "r", r)
        for name in ("lower", "upper"):
            val = getattr(self, name)
            if val is not None:
                val = np.asarray(val, dtype=float).reshape(-1)
                if val.size != n:
                    raise ValueError(f"{name} bound has wrong length")
                object.__setattr__(self, name, val)

    @property
    def n(self) -> int:
        return self.c.size

    def stacked(self):
        """Rows of ``M`` followed by the finite bound rows."""
        rows, rhs = [self.M], [self.r]
        if self.lower is not None:
            idx = np.flatnonzero(np.isfinite(self.lower))
            rows.append(-np.eye(self.n)[idx])
            rhs.append(-self.lower[idx])
        if self.upper is not None:
            idx = np.flatnonzero(np.isfinite(self.upper))
            rows.append(np.eye(self.n)[idx])
            rhs.append(self.upper[idx])
        return np.vstack(rows), np.concatenate(rhs)


@dataclass(frozen=True)
class LPOutcome:
    status: LPStatus
    value: float
    x: np.ndarray | None = None
    multipliers: np.ndarray | None = None
    bound_multipliers: np.ndarray | None = field(default=None, repr=False)

    @property
    def optimal(self) -> bool:
        return self.status is LPStatus.OPTIMAL


def _pivot(T: np.ndarray, row: int, col: int) -> None:
    T[row] /= T[row, col]
    col_vals = T[:, col].copy()
    col_vals[row] = 0.0
    T -= np.outer(col_vals, T[row])


def _run_simplex(T: np.ndarray, basis: list[int], ncols: int) -> str:
    """Bland-rule iterations on tableau ``T`` (last row = reduced costs).

    Only the first ``ncols`` columns may enter.  Returns 'optimal' or
    'unbounded'.
    """
    m = T.shape[0] - 1
    for _ in range(MAX_ITER):
        costs = T[-1, :ncols]
        scale = max(1.0, float(np.abs(costs).max(initial=0.0)))
        entering = next((j for j in range(ncols) if costs[j] < -1e-10 * scale), None)
        if entering is None:
            return "optimal"
        col = T[:m, entering]
        best, leave = math.inf, None
        for i in range(m):
            if col[i] > PIVOT_TOL:
                ratio = T[i, -1] / col[i]
                if ratio < best - 1e-12 or (abs(ratio - best) <= 1e-12 and basis[i] < basis[leave]):
                    best, leave = ratio, i
        if leave is None:
            return "unbounded"
        _pivot(T, leave, entering)
        basis[leave] = entering
    raise RuntimeError("iteration limit")


def solve_lp(lp: LinearProgram) -> LPOutcome:
    """Solve ``lp``; never reports OPTIMAL without a verified certificate."""
    M, r = lp.stacked()
    m, n = M.shape
    c = lp.c
    if m == 0:
        if np.all(np.abs(c) <= EPS_LP):
            return LPOutcome(LPStatus.OPTIMAL, 0.0, np.zeros(n), np.zeros(lp.M.shape[0]), np.zeros(0))
        return LPOutcome(LPStatus.UNBOUNDED, -math.inf)

    sign = np.where(r < 0, -1.0, 1.0)
    art_rows = np.flatnonzero(r < 0)
    n_struct = 2 * n + m
    n_art = art_rows.size
    A_std = np.hstack([M, -M, np.eye(m)]) * sign[:, None]
    rhs = r * sign
    art = np.zeros((m, n_art))
    art[art_rows, np.arange(n_art)] = 1.0
    T = np.zeros((m + 1, n_struct + n_art + 1))
    T[:m, :n_struct] = A_std
    T[:m, n_struct:-1] = art
    T[:m, -1] = rhs
    basis = [2 * n + i for i in range(m)]
    for k, i in enumerate(art_rows):
        basis[i] = n_struct + k

    try:
        if n_art:
            T[-1, n_struct:-1] = 1.0
            for i in art_rows:
                T[-1] -= T[i]
            _run_simplex(T, basis, n_struct + n_art)
            if -T[-1, -1] > EPS_LP * max(1.0, float(np.abs(rhs).max())):
                return LPOutcome(LPStatus.INFEASIBLE, math.inf)
            for i in range(m):
                if basis[i] >= n_struct:
                    j = next((j for j in range(n_struct) if abs(T[i, j]) > 1e-9), None)
                    if j is None:
                        return LPOutcome(LPStatus.NUMERICAL_FAILURE, math.nan)
                    _pivot(T, i, j)
                    basis[i] = j
            T = np.hstack([T[:, :n_struct], T[:, -1:]])

        cost = np.concatenate([c, -c, np.zeros(m)])
        T[-1, :] = 0.0
        T[-1, :n_struct] = cost
        for i in range(m):
            T[-1] -= cost[basis[i]] * T[i]
        if _run_simplex(T, basis, n_struct) == "unbounded":
            return LPOutcome(LPStatus.UNBOUNDED, -math.inf)
    except (RuntimeError, FloatingPointError, np.linalg.LinAlgError):
        return LPOutcome(LPStatus.NUMERICAL_FAILURE, math.nan)

    w = np.zeros(n_struct)
    for i in range(m):
        w[basis[i]] = T[i, -1]
    x = w[:n] - w[n:2 * n]
    try:
        y = np.linalg.solve(A_std[:, basis].T, cost[basis])
    except np.linalg.LinAlgError:
        return LPOutcome(LPStatus.NUMERICAL_FAILURE, math.nan)
    mu = -(sign * y)
    value = float(c @ x)

    scale = max(1.0, float(np.abs(r).max()), float(np.abs(c).max()))
    slack = r - M @ x
    ok = (
        slack.min(initial=0.0) >= -EPS_LP * scale
        and mu.min(initial=0.0) >= -EPS_LP * scale
        and np.abs(c + M.T @ mu).max(initial=0.0) <= EPS_LP * scale
        and abs(value + r @ mu) <= EPS_LP * scale * max(1.0, abs(value))
    )
    if not ok:
        return LPOutcome(LPStatus.NUMERICAL_FAILURE, math.nan)
    mu = np.maximum(mu, 0.0)
    k = lp.M.shape[0]
    return LPOutcome(LPStatus.OPTIMAL, value, x, mu[:k], mu[k:])


def linprog(c, M=None, r=None, lower=None, upper=None) -> LPOutcome:
    """Convenience wrapper: ``min c.x s.t. M x <= r``."""
    c = np.asarray(c, dtype=float).reshape(-1)
    if M is None:
        M, r = np.zeros((0, c.size)), np.zeros(0)
    return solve_lp(LinearProgram(c, M, r, lower, upper))
