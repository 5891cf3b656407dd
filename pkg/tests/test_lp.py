import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import lp_min
from setlat.lp import LinearProgram, LPStatus, linprog, solve_lp


def test_small_optimum_and_multipliers():
    # min -x - y  s.t.  x + 2y <= 4, 3x + y <= 6, x, y >= 0
    M = np.array([[1.0, 2.0], [3.0, 1.0], [-1.0, 0.0], [0.0, -1.0]])
    r = np.array([4.0, 6.0, 0.0, 0.0])
    out = linprog([-1.0, -1.0], M, r)
    assert out.status is LPStatus.OPTIMAL
    assert out.value == pytest.approx(-2.8)
    assert np.allclose(out.x, [1.6, 1.2])
    mu = out.multipliers
    assert np.all(mu >= -1e-12)
    assert np.allclose(np.array([-1.0, -1.0]) + M.T @ mu, 0.0)
    assert -r @ mu == pytest.approx(out.value)


def test_infeasible_and_unbounded():
    assert linprog([1.0], [[1.0], [-1.0]], [-1.0, -1.0]).status is LPStatus.INFEASIBLE
    out = linprog([-1.0], [[-1.0]], [0.0])
    assert out.status is LPStatus.UNBOUNDED and out.value == -math.inf


def test_no_constraints():
    assert linprog([0.0, 0.0]).status is LPStatus.OPTIMAL
    assert linprog([1.0, 0.0]).status is LPStatus.UNBOUNDED


def test_bounds():
    out = solve_lp(LinearProgram(np.array([1.0, -1.0]), np.zeros((0, 2)), np.zeros(0),
                                 lower=np.array([-1.0, -np.inf]), upper=np.array([np.inf, 2.0])))
    assert out.status is LPStatus.OPTIMAL
    assert out.value == pytest.approx(-3.0)


def test_rejects_bad_data():
    with pytest.raises(ValueError):
        LinearProgram(np.array([1.0]), np.array([[1.0]]), np.array([np.nan]))
    with pytest.raises(ValueError):
        LinearProgram(np.array([1.0, 2.0]), np.array([[1.0, 0.0]]), np.array([1.0, 2.0]))


def test_degenerate_cycling_example_terminates():
    # Beale's example cycles under the textbook pivot rule
    c = np.array([-0.75, 150.0, -0.02, 6.0])
    M = np.array([[0.25, -60.0, -0.04, 9.0], [0.5, -90.0, -0.02, 3.0], [0.0, 0.0, 1.0, 0.0]])
    r = np.array([0.0, 0.0, 1.0])
    out = linprog(c, M, r, lower=np.zeros(4))
    assert out.status is LPStatus.OPTIMAL
    assert out.value == pytest.approx(-0.05)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_agrees_with_scipy(seed):
    rng = np.random.default_rng(seed)
    n, m = int(rng.integers(1, 5)), int(rng.integers(1, 8))
    M = np.round(rng.normal(size=(m, n)), 2)
    r = np.round(rng.normal(size=m) + 1.0, 2)
    c = np.round(rng.normal(size=n), 2)
    # box keeps most problems bounded while leaving some infeasible ones
    M = np.vstack([M, np.eye(n), -np.eye(n)])
    r = np.concatenate([r, np.full(2 * n, 5.0)])
    out = linprog(c, M, r)
    ref = lp_min(c, M, r)
    if math.isinf(ref):
        assert out.status is LPStatus.INFEASIBLE
        return
    assert out.status is LPStatus.OPTIMAL
    assert out.value == pytest.approx(ref, abs=1e-8)
    assert np.all(M @ out.x <= r + 1e-8)
    mu = out.multipliers
    assert np.all(mu >= -1e-10)
    assert np.allclose(c + M.T @ mu, 0.0, atol=1e-8)
    assert -r @ mu == pytest.approx(out.value, abs=1e-8)
