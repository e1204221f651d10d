"""Solver façade: frozen programs, status classification, oracle agreement."""

import numpy as np
import pytest

from cachegames.lp import LinearProgram, LpStatus, solve
from cachegames.oracle import lp_vertex_enumerate, random_lp

FEAS_TOL = 1e-9


def lp_of(c, a, h):
    return LinearProgram(objective=c, inequality_matrix=a, inequality_rhs=h)


class TestFrozenPrograms:
    def test_simplex_corner(self):
        # max x + y on the unit simplex slice x + y <= 1
        sol = solve(lp_of([1.0, 1.0], [[1.0, 1.0]], [1.0]))
        assert sol.status is LpStatus.OPTIMAL
        assert sol.value == pytest.approx(1.0, abs=1e-12)

    def test_box_vertex(self):
        sol = solve(lp_of([2.0, 3.0], [[1.0, 0.0], [0.0, 1.0]], [1.0, 2.0]))
        assert sol.status is LpStatus.OPTIMAL
        assert sol.value == pytest.approx(8.0, abs=1e-12)
        np.testing.assert_allclose(sol.x, [1.0, 2.0], atol=1e-12)

    def test_infeasible(self):
        # x <= -1 with x >= 0
        sol = solve(lp_of([1.0], [[1.0]], [-1.0]))
        assert sol.status is LpStatus.INFEASIBLE
        assert np.isnan(sol.value)

    def test_unbounded(self):
        # max x with no binding rows
        sol = solve(lp_of([1.0], [[-1.0]], [0.0]))
        assert sol.status is LpStatus.UNBOUNDED
        assert sol.value == np.inf

    def test_zero_rows_program(self):
        sol = solve(lp_of([-1.0, -2.0], np.zeros((0, 2)), np.zeros(0)))
        assert sol.status is LpStatus.OPTIMAL
        assert sol.value == pytest.approx(0.0, abs=0)


class TestSolutionQuality:
    def test_solution_is_feasible(self):
        rng = np.random.default_rng(42)
        for _ in range(50):
            lp = random_lp(rng)
            sol = solve(lp)
            if sol.status is LpStatus.OPTIMAL:
                assert np.all(sol.x >= 0.0)
                resid = lp.inequality_matrix @ sol.x - lp.inequality_rhs
                assert resid.max() <= FEAS_TOL

    def test_objective_scaling(self):
        """Scaling the objective by a positive factor scales the value."""
        rng = np.random.default_rng(7)
        for _ in range(20):
            lp = random_lp(rng)
            sol = solve(lp)
            if sol.status is not LpStatus.OPTIMAL:
                continue
            scaled = solve(
                lp_of(3.5 * lp.objective, lp.inequality_matrix, lp.inequality_rhs)
            )
            assert scaled.value == pytest.approx(3.5 * sol.value, abs=1e-9)

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ValueError):
            lp_of([1.0, 2.0], [[1.0]], [1.0])


class TestOracleAgreement:
    """The fast solver and exhaustive vertex enumeration must agree."""

    def test_status_and_value_match(self):
        rng = np.random.default_rng(2718)
        seen = set()
        for _ in range(150):
            lp = random_lp(rng)
            fast = solve(lp)
            slow = lp_vertex_enumerate(lp)
            seen.add(fast.status)
            assert fast.status is slow.status
            if fast.status is LpStatus.OPTIMAL:
                assert fast.value == pytest.approx(slow.value, abs=1e-8)
        # the draw distribution must actually exercise all three outcomes
        assert seen == {LpStatus.OPTIMAL, LpStatus.INFEASIBLE, LpStatus.UNBOUNDED}
