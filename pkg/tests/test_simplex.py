import numpy as np
import pytest

from blochsum.errors import Infeasible, Unbounded
from blochsum.simplex import simplex_min


def test_basic_ge_problem():
    # min w1 + w2 s.t. w1 + 0.64 w2 >= 1, w1 + 1.5625 w2 >= 1
    x, val = simplex_min([1.0, 1.0], A_ge=[[1.0, 0.64], [1.0, 1.5625]],
                         b_ge=[1.0, 1.0])
    assert abs(val - 1.0) < 1e-12
    assert np.allclose(x, [1.0, 0.0])


def test_basic_le_problem():
    # max 3x + 2y s.t. x + y <= 4, x <= 2  ->  min of the negation
    x, val = simplex_min([-3.0, -2.0], A_le=[[1.0, 1.0], [1.0, 0.0]],
                         b_le=[4.0, 2.0])
    assert abs(val + 10.0) < 1e-12
    assert np.allclose(x, [2.0, 2.0])


def test_mixed_constraints():
    x, val = simplex_min([2.0, 1.0], A_ge=[[1.0, 1.0]], b_ge=[2.0],
                         A_le=[[1.0, 0.0]], b_le=[0.5])
    assert abs(val - 2.0) < 1e-12  # all weight on the cheap variable


def test_infeasible():
    with pytest.raises(Infeasible):
        simplex_min([1.0], A_ge=[[1.0]], b_ge=[2.0], A_le=[[1.0]], b_le=[1.0])


def test_unbounded():
    with pytest.raises(Unbounded):
        simplex_min([-1.0, 0.0], A_ge=[[1.0, 0.0]], b_ge=[1.0])


def test_redundant_rows():
    x, val = simplex_min([1.0, 1.0],
                         A_ge=[[1.0, 1.0], [1.0, 1.0], [2.0, 2.0]],
                         b_ge=[1.0, 1.0, 2.0])
    assert abs(val - 1.0) < 1e-12


def test_against_scipy_on_random_instances():
    scipy_opt = pytest.importorskip("scipy.optimize")
    rng = np.random.default_rng(11)
    for trial in range(50):
        n = int(rng.integers(2, 8))
        m = int(rng.integers(1, 7))
        A = rng.random((m, n)) + 0.05  # positive rows keep it feasible
        b = rng.random(m) + 0.1
        c = rng.random(n) + 0.05
        x, val = simplex_min(c, A_ge=A, b_ge=b)
        ref = scipy_opt.linprog(c, A_ub=-A, b_ub=-b, bounds=(0, None))
        assert ref.status == 0
        assert abs(val - ref.fun) < 1e-8 * max(1.0, abs(ref.fun)), trial
        assert np.all(A @ x >= b - 1e-9)


def test_determinism():
    rng = np.random.default_rng(12)
    A = rng.random((5, 6)) + 0.1
    b = rng.random(5) + 0.1
    runs = [simplex_min(np.ones(6), A_ge=A, b_ge=b) for _ in range(2)]
    assert np.array_equal(runs[0][0], runs[1][0])
    assert runs[0][1] == runs[1][1]
