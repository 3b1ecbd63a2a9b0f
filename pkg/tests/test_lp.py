import numpy as np
import pytest
from scipy.optimize import linprog

from entropy_forge.lp import InfeasibleError, UnboundedError, simplex


def test_simple_problem():
    # max x + y s.t. x + 2y <= 4, 3x + y <= 6
    res = simplex([-1, -1], A_ub=[[1, 2], [3, 1]], b_ub=[4, 6])
    assert res.value == pytest.approx(-2.8)
    assert np.allclose(res.x, [1.6, 1.2])


def test_matches_scipy_on_random_problems():
    rng = np.random.default_rng(0)
    for _ in range(200):
        nv, nu, ne = rng.integers(1, 8), rng.integers(0, 6), rng.integers(0, 3)
        x0 = rng.random(nv)
        a_ub = rng.normal(size=(nu, nv))
        b_ub = a_ub @ x0 + rng.random(nu)
        a_eq = rng.normal(size=(ne, nv))
        b_eq = a_eq @ x0
        c = rng.random(nv) + 0.1  # positive costs keep the problem bounded
        ref = linprog(c, A_ub=a_ub if nu else None, b_ub=b_ub if nu else None,
                      A_eq=a_eq if ne else None, b_eq=b_eq if ne else None,
                      bounds=(0, None), method="highs")
        res = simplex(c, a_ub, b_ub, a_eq, b_eq)
        assert res.value == pytest.approx(ref.fun, abs=1e-8)
        if nu:
            assert np.all(a_ub @ res.x <= b_ub + 1e-8)
        if ne:
            assert np.allclose(a_eq @ res.x, b_eq, atol=1e-8)
        assert np.all(res.x >= -1e-12)


def test_degenerate_problem_terminates():
    # many redundant constraints through the optimum
    a = np.array([[1, 1]] * 5 + [[1, 0], [0, 1]], float)
    b = np.array([1] * 5 + [1, 1], float)
    assert simplex([-1, -1], a, b).value == pytest.approx(-1)


def test_infeasible_and_unbounded():
    with pytest.raises(InfeasibleError):
        simplex([1, 1], A_ub=[[1, 1]], b_ub=[-1])
    with pytest.raises(InfeasibleError):
        simplex([0], A_eq=[[1], [1]], b_eq=[1, 2])
    with pytest.raises(UnboundedError):
        simplex([-1, 0], A_ub=[[0, 1]], b_ub=[1])
