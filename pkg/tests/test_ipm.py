from __future__ import annotations

import cvxpy as cp
import numpy as np
import pytest

from bellexpand.errors import InvalidArgument
from bellexpand.sosdp import ipm


def random_sdp(seed: int, dim: int, m: int):
    """A strictly feasible, bounded random SDP in standard form."""
    rng = np.random.default_rng(seed)
    mats = []
    for _ in range(m):
        a = rng.normal(size=(dim, dim))
        mats.append(0.5 * (a + a.T))
    x0 = rng.normal(size=(dim, dim))
    x0 = x0 @ x0.T + np.eye(dim)
    b = [float(np.sum(a * x0)) for a in mats]
    y0 = rng.normal(size=m)
    z0 = rng.normal(size=(dim, dim))
    c = z0 @ z0.T + np.eye(dim) + sum(yk * a for yk, a in zip(y0, mats))
    return c, mats, b


def to_sparse(mat: np.ndarray) -> ipm.SparseSym:
    rows, cols = np.nonzero(mat)
    return ipm.SparseSym(rows, cols, mat[rows, cols])


def cvxpy_value(c, mats, b) -> float:
    x = cp.Variable(c.shape, symmetric=True)
    cons = [x >> 0] + [cp.trace(a @ x) == bk for a, bk in zip(mats, b)]
    return cp.Problem(cp.Minimize(cp.trace(c @ x)), cons).solve(solver="CLARABEL")


class TestSolver:
    @pytest.mark.parametrize("seed", range(6))
    def test_matches_cvxpy(self, seed):
        c, mats, b = random_sdp(seed, 6, 5)
        data = ipm.SdpData(6, to_sparse(c), [to_sparse(a) for a in mats], b)
        res = ipm.solve_standard(data)
        assert res.status == ipm.CONVERGED
        assert res.primal_objective == pytest.approx(cvxpy_value(c, mats, b), rel=1e-6, abs=1e-6)
        assert np.linalg.eigvalsh(res.x)[0] >= -1e-10
        assert np.linalg.eigvalsh(res.z)[0] >= -1e-10

    def test_trace_constraint(self):
        # min <C, X> s.t. tr X = 1 is the smallest eigenvalue of C
        c = np.diag([3.0, 1.0, 2.0]) + 0.1
        data = ipm.SdpData(3, to_sparse(c), [to_sparse(np.eye(3))], [1.0])
        res = ipm.solve_standard(data)
        assert res.primal_objective == pytest.approx(np.linalg.eigvalsh(c)[0], abs=1e-7)

    def test_iteration_cap_reports_status(self):
        c, mats, b = random_sdp(1, 5, 4)
        data = ipm.SdpData(5, to_sparse(c), [to_sparse(a) for a in mats], b)
        res = ipm.solve_standard(data, max_iter=2)
        assert res.status == ipm.MAX_ITER
        assert res.iterations == 2

    def test_needs_constraints(self):
        with pytest.raises(InvalidArgument):
            ipm.SdpData(2, to_sparse(np.eye(2)), [], [])

    def test_sparse_from_upper(self):
        s = ipm.SparseSym.from_upper({(0, 1): 2.0, (1, 1): 1.0})
        np.testing.assert_array_equal(s.dense(2), [[0.0, 2.0], [2.0, 1.0]])
