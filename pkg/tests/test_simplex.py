import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import linprog

from kcore_ocs import simplex


def test_textbook_lp():
    # max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18  -> (2, 6), value 36
    res = simplex.solve([-3, -5], [[1, 0], [0, 2], [3, 2]], [4, 12, 18])
    assert res.status == simplex.OPTIMAL
    assert np.allclose(res.x, [2, 6]) and res.fun == pytest.approx(-36)


def test_equality_and_bounds():
    res = simplex.solve([1, 1], A_eq=[[1, 1]], b_eq=[3], lb=[1, 0], ub=[1.5, 10])
    assert res.status == simplex.OPTIMAL and res.fun == pytest.approx(3)
    assert 1 <= res.x[0] <= 1.5


def test_infeasible_and_unbounded():
    assert simplex.solve([1], A_ub=[[1]], b_ub=[-1]).status == simplex.INFEASIBLE
    assert simplex.solve([-1], A_ub=[[-1]], b_ub=[0]).status == simplex.UNBOUNDED


@given(st.integers(0, 2**31))
def test_matches_highs_on_random_bounded_lps(seed):
    rng = np.random.default_rng(seed)
    n, m = int(rng.integers(1, 7)), int(rng.integers(1, 7))
    A = rng.normal(size=(m, n))
    b = rng.normal(size=m) + 1.0
    c = rng.normal(size=n)
    ub = np.where(rng.random(n) < 0.7, rng.uniform(0.5, 4, n), np.inf)
    ours = simplex.solve(c, A, b, ub=ub)
    ref = linprog(c, A_ub=A, b_ub=b, bounds=list(zip(np.zeros(n), ub)), method="highs")
    if ref.status == 0:
        assert ours.status == simplex.OPTIMAL
        assert ours.fun == pytest.approx(ref.fun, rel=1e-6, abs=1e-7)
        assert np.all(A @ ours.x <= b + 1e-7)
    elif ref.status == 2:
        assert ours.status == simplex.INFEASIBLE
    else:
        # highs sometimes labels an unbounded problem infeasible; we only require non-optimal
        assert ours.status != simplex.OPTIMAL
