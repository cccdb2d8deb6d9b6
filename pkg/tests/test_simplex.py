from __future__ import annotations

import numpy as np
import pytest
from scipy.optimize import linprog

from bellexpand import simplex
from bellexpand.errors import InvalidArgument
from bellexpand.simplex import LpProblem, lp_solve


class TestSmallProblems:
    def test_single_equality(self):
        res = lp_solve(LpProblem([1.0], [[1.0]], [1.0]))
        assert res.ok
        assert res.optimum == pytest.approx(1.0)

    def test_infeasible(self):
        res = lp_solve(LpProblem([1.0, 1.0], [[1.0, 1.0]], [-1.0]))
        assert res.status == simplex.INFEASIBLE

    def test_unbounded(self):
        res = lp_solve(LpProblem([-1.0, 0.0], [[1.0, -1.0]], [0.0]))
        assert res.status == simplex.UNBOUNDED

    def test_free_variable(self):
        # min x s.t. x - y = -3, y >= 0, x free
        res = lp_solve(LpProblem([1.0, 0.0], [[1.0, -1.0]], [-3.0], [-np.inf, 0.0]))
        assert res.ok
        assert res.optimum == pytest.approx(-3.0)

    def test_shifted_bounds(self):
        res = lp_solve(LpProblem([1.0, 1.0], [[1.0, 1.0]], [5.0], [2.0, 1.0]))
        assert res.optimum == pytest.approx(5.0)
        assert np.all(res.x >= [2.0 - 1e-12, 1.0 - 1e-12])

    def test_redundant_rows(self):
        a = [[1.0, 1.0, 0.0], [2.0, 2.0, 0.0], [0.0, 1.0, 1.0]]
        res = lp_solve(LpProblem([1.0, 2.0, 3.0], a, [1.0, 2.0, 1.0]))
        assert res.ok
        assert res.optimum == pytest.approx(linprog([1, 2, 3], A_eq=a, b_eq=[1, 2, 1]).fun)

    def test_degenerate_duplicate_vertices(self):
        # Beale's cycling example in equality form with slacks
        c = [-0.75, 150.0, -0.02, 6.0, 0, 0, 0]
        a = [
            [0.25, -60.0, -0.04, 9.0, 1, 0, 0],
            [0.5, -90.0, -0.02, 3.0, 0, 1, 0],
            [0.0, 0.0, 1.0, 0.0, 0, 0, 1],
        ]
        b = [0.0, 0.0, 1.0]
        for rule in ("dantzig", "bland"):
            res = lp_solve(LpProblem(c, a, b), pivot_rule=rule)
            assert res.ok
            assert res.optimum == pytest.approx(-0.05)

    def test_iteration_limit(self):
        rng = np.random.default_rng(0)
        a = rng.uniform(size=(10, 30))
        res = lp_solve(LpProblem(rng.normal(size=30), a, a @ rng.uniform(size=30)), max_iter=1)
        assert res.status == simplex.ITERATION_LIMIT

    def test_validation(self):
        with pytest.raises(InvalidArgument):
            LpProblem([1.0, 2.0], [[1.0]], [1.0])
        with pytest.raises(InvalidArgument):
            LpProblem([1.0], [[np.nan]], [1.0])
        with pytest.raises(InvalidArgument):
            lp_solve(LpProblem([1.0], [[1.0]], [1.0]), pivot_rule="steepest")


class TestAgainstHighs:
    @pytest.mark.parametrize("seed", range(20))
    def test_random_feasible_bounded(self, seed):
        rng = np.random.default_rng(seed)
        m, n = int(rng.integers(3, 12)), int(rng.integers(12, 30))
        a = rng.normal(size=(m, n))
        b = a @ rng.uniform(0, 2, size=n)
        c = rng.uniform(0.1, 2.0, size=n)  # positive costs keep the LP bounded on x >= 0
        ours = lp_solve(LpProblem(c, a, b))
        ref = linprog(c, A_eq=a, b_eq=b, method="highs")
        assert ours.ok
        assert ours.optimum == pytest.approx(ref.fun, abs=1e-8)
        assert ours.residual < 1e-9
        assert np.all(ours.x >= -1e-12)
