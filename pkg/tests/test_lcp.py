"""LCP solver tests: pivoting against enumeration and analytic cases."""

import numpy as np
import pytest

from ujointsim.lcp import (
    LcpProblem,
    LcpStatus,
    lemke_lists,
    residual,
    residual_lists,
    solve_enumerative,
    solve_lemke,
)
from ujointsim.checks import random_pd_problem


def test_nonnegative_b_is_trivial():
    # b >= 0 means z = 0 is already complementary
    problem = LcpProblem(np.array([[2.0]]), np.array([3.0]))
    sol = solve_lemke(problem)
    assert sol.status is LcpStatus.SOLVED
    assert sol.pivots == 0
    np.testing.assert_allclose(sol.z, [0.0])
    np.testing.assert_allclose(sol.w, [3.0])


def test_one_dimensional_forced():
    # 1-D with negative b: z = -b/a analytically
    problem = LcpProblem(np.array([[2.0]]), np.array([-4.0]))
    sol = solve_lemke(problem)
    assert sol.status is LcpStatus.SOLVED
    np.testing.assert_allclose(sol.z, [2.0], rtol=1e-14)
    np.testing.assert_allclose(sol.w, [0.0], atol=1e-14)


def test_two_dimensional_all_active():
    # enumeration over the 4 complementary index sets confirms the
    # all-active basis: A z = -b, z = (4/3, 7/3)
    a = np.array([[2.0, 1.0], [1.0, 2.0]])
    b = np.array([-5.0, -6.0])
    problem = LcpProblem(a, b)
    sol = solve_lemke(problem)
    assert sol.status is LcpStatus.SOLVED
    np.testing.assert_allclose(sol.z, [4.0 / 3.0, 7.0 / 3.0], rtol=1e-12)
    np.testing.assert_allclose(sol.w, [0.0, 0.0], atol=1e-12)
    enum = solve_enumerative(problem)
    assert enum.status is LcpStatus.SOLVED
    np.testing.assert_allclose(enum.z, sol.z, rtol=1e-12)


def test_enumeration_trivial_case():
    problem = LcpProblem(np.array([[2.0]]), np.array([3.0]))
    sol = solve_enumerative(problem)
    assert sol.status is LcpStatus.SOLVED
    np.testing.assert_allclose(sol.z, [0.0])
    np.testing.assert_allclose(sol.w, [3.0])


def test_residual_examples():
    problem = LcpProblem(np.array([[2.0]]), np.array([-4.0]))
    exact = solve_lemke(problem)
    assert residual(problem, exact) <= 1e-14

    perturbed = type(exact)(
        z=exact.z + 1e-3, w=exact.w, status=exact.status, pivots=exact.pivots
    )
    assert residual(problem, perturbed) >= 1e-3


def test_residual_dimension_mismatch():
    problem = LcpProblem(np.array([[2.0]]), np.array([-4.0]))
    sol = solve_lemke(LcpProblem(np.eye(2), np.array([1.0, 1.0])))
    with pytest.raises(ValueError):
        residual(problem, sol)


def test_problem_validation():
    with pytest.raises(ValueError):
        LcpProblem(np.ones((2, 3)), np.ones(2))
    with pytest.raises(ValueError):
        LcpProblem(np.ones((2, 2)), np.ones(3))
    with pytest.raises(ValueError):
        LcpProblem(np.array([[np.nan]]), np.array([1.0]))
    with pytest.raises(ValueError):
        LcpProblem(np.array([[1.0]]), np.array([np.inf]))


def test_solver_argument_validation():
    problem = LcpProblem(np.array([[2.0]]), np.array([-4.0]))
    with pytest.raises(ValueError):
        solve_lemke(problem, max_pivots=0)
    with pytest.raises(ValueError):
        solve_lemke(problem, tol=0.0)
    with pytest.raises(ValueError):
        solve_enumerative(problem, tol=-1.0)


def test_ray_termination_when_infeasible():
    # w = -1 + 0*z can never be nonnegative
    problem = LcpProblem(np.array([[0.0]]), np.array([-1.0]))
    sol = solve_lemke(problem)
    assert sol.status is LcpStatus.RAY_TERMINATION
    enum = solve_enumerative(problem)
    assert enum.status is LcpStatus.RAY_TERMINATION


def test_pivot_limit():
    problem = LcpProblem(np.array([[2.0]]), np.array([-4.0]))
    sol = solve_lemke(problem, max_pivots=1)
    assert sol.status is LcpStatus.PIVOT_LIMIT
    assert sol.pivots <= 1


def test_enumeration_dimension_cap():
    n = 15
    problem = LcpProblem(np.eye(n), np.ones(n))
    with pytest.raises(ValueError):
        solve_enumerative(problem)


def test_pd_battery_oracle_equivalence(rng):
    # spot-check here; the acceptance suite runs the full 1000 trials
    worst_res = 0.0
    worst_diff = 0.0
    for _ in range(200):
        n = int(rng.integers(1, 9))
        problem = random_pd_problem(rng, n)
        sol = solve_lemke(problem)
        assert sol.status is LcpStatus.SOLVED
        assert sol.pivots <= 100 * n
        assert np.isfinite(sol.z).all() and np.isfinite(sol.w).all()
        enum = solve_enumerative(problem)
        assert enum.status is LcpStatus.SOLVED
        worst_res = max(worst_res, residual(problem, sol))
        worst_diff = max(worst_diff, float(np.max(np.abs(sol.z - enum.z))))
    assert worst_res <= 1e-10
    assert worst_diff <= 1e-8


def test_scale_covariance(rng):
    # solving (A, s b) scales the solution of (A, b) by s
    for _ in range(50):
        n = int(rng.integers(1, 7))
        problem = random_pd_problem(rng, n)
        base = solve_lemke(problem)
        assert base.status is LcpStatus.SOLVED
        for s in (0.5, 2.0, 10.0):
            scaled = solve_lemke(LcpProblem(problem.a, s * problem.b))
            assert scaled.status is LcpStatus.SOLVED
            np.testing.assert_allclose(
                scaled.z, s * base.z, rtol=1e-9, atol=1e-12 * s
            )


def test_lemke_lists_matches_wrapper(rng):
    for _ in range(50):
        n = int(rng.integers(1, 7))
        problem = random_pd_problem(rng, n)
        sol = solve_lemke(problem)
        z, w, status, pivots = lemke_lists(
            problem.a.tolist(), problem.b.tolist(), 100 * n, 1e-10
        )
        assert status is sol.status
        assert pivots == sol.pivots
        np.testing.assert_array_equal(np.array(z), sol.z)
        np.testing.assert_array_equal(np.array(w), sol.w)


def test_residual_lists_matches_residual(rng):
    for _ in range(50):
        n = int(rng.integers(1, 7))
        problem = random_pd_problem(rng, n)
        sol = solve_lemke(problem)
        r_np = residual(problem, sol)
        r_ls = residual_lists(
            problem.a.tolist(), problem.b.tolist(),
            sol.z.tolist(), sol.w.tolist(),
        )
        assert r_ls == pytest.approx(r_np, rel=1e-12, abs=1e-15)


def test_degenerate_friction_structure_solves():
    # friction saturation block with mu = 0 produces structurally
    # duplicated rows; the tie-tolerant ratio test must still terminate
    a = np.array([
        [0.235339065, 4.99935220e-03, 0.0],
        [4.99935220e-03, 2.18693321e-04, 1.0],
        [0.0, -1.0, 0.0],
    ])
    b = np.array([-0.145, -0.00634293, 0.0])
    problem = LcpProblem(a, b)
    sol = solve_lemke(problem)
    assert sol.status is LcpStatus.SOLVED
    assert residual(problem, sol) <= 1e-12
    enum = solve_enumerative(problem)
    np.testing.assert_allclose(sol.z, enum.z, atol=1e-10)
