import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rabsplan.errors import InvalidInputError
from rabsplan.lp import LpProblem, LpStatus, solve_lp

from oracles.vertex_enum import random_bounded_lp, vertex_max


def test_box():
    sol = solve_lp(LpProblem([1, 1], [[1, 0], [0, 1]], [1, 2]))
    assert sol.status is LpStatus.OPTIMAL
    assert sol.objective_value == pytest.approx(3)
    np.testing.assert_allclose(sol.values, [1, 2])


def test_infeasible():
    assert solve_lp(LpProblem([1], [[-1], [1]], [-1, 0])).status is LpStatus.INFEASIBLE


def test_infeasible_zero_row():
    assert solve_lp(LpProblem([1], [[0]], [-1])).status is LpStatus.INFEASIBLE


def test_unbounded():
    assert solve_lp(LpProblem([1, 1], [[1, -1]], [1])).status is LpStatus.UNBOUNDED


def test_vertex_example():
    sol = solve_lp(LpProblem([1, 2], [[1, 1], [1, 0], [0, 1]], [4, 2, 3]))
    assert sol.objective_value == pytest.approx(7)
    np.testing.assert_allclose(sol.values, [1, 3], atol=1e-9)


def test_no_constraints():
    sol = solve_lp(LpProblem([-1, -2], np.zeros((0, 2)), []))
    assert sol.objective_value == 0
    assert solve_lp(LpProblem([1], np.zeros((0, 1)), [])).status is LpStatus.UNBOUNDED


def test_degenerate_cycling_example_terminates():
    # Beale's example cycles under the textbook largest-coefficient rule.
    c = [0.75, -150, 0.02, -6]
    A = [[0.25, -60, -0.04, 9], [0.5, -90, -0.02, 3], [0, 0, 1, 0]]
    sol = solve_lp(LpProblem(c, A, [0, 0, 1]))
    assert sol.objective_value == pytest.approx(0.05)


@pytest.mark.parametrize("A, b", [([[1, 2, 3]], [1]), ([[1, 2]], [1, 2])])
def test_dimension_mismatch(A, b):
    with pytest.raises(InvalidInputError):
        LpProblem([1, 1], A, b)


def test_non_finite_rejected():
    with pytest.raises(InvalidInputError):
        LpProblem([1], [[np.inf]], [1])


def test_text_round_trip():
    p = LpProblem([1.5, -2], [[1, 0.25], [-1, 3]], [4, -0.5])
    q = LpProblem.from_text(p.to_text())
    np.testing.assert_array_equal(q.objective, p.objective)
    np.testing.assert_array_equal(q.A, p.A)
    np.testing.assert_array_equal(q.b, p.b)


def test_matches_vertex_enumeration():
    rng = np.random.default_rng(99)
    for _ in range(150):
        c, A, b = random_bounded_lp(rng, max_vars=5, max_rows=8)
        sol = solve_lp(LpProblem(c, A, b))
        assert sol.is_optimal
        ref = vertex_max(c, A, b)
        assert abs(sol.objective_value - ref) <= 1e-6 * max(1.0, abs(ref))


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=100, deadline=None)
def test_primal_feasible_and_duals_certify(seed):
    c, A, b = random_bounded_lp(np.random.default_rng(seed))
    sol = solve_lp(LpProblem(c, A, b))
    assert sol.is_optimal
    x, u = sol.values, sol.duals
    scale = 1 + np.abs(b)
    assert np.all(x >= -1e-9)
    assert np.all(A @ x <= b + 1e-7 * scale)
    # dual feasibility and zero duality gap
    assert np.all(u >= -1e-9)
    assert np.all(A.T @ u >= c - 1e-7)
    assert b @ u == pytest.approx(sol.objective_value, rel=1e-7, abs=1e-7)


@given(st.integers(0, 2**32 - 1), st.floats(0.1, 100))
@settings(max_examples=40, deadline=None)
def test_scaling_invariance(seed, k):
    c, A, b = random_bounded_lp(np.random.default_rng(seed))
    base = solve_lp(LpProblem(c, A, b)).objective_value
    scaled = solve_lp(LpProblem(c, A * k, b * k)).objective_value
    assert scaled == pytest.approx(base, rel=1e-7, abs=1e-9)
