from __future__ import annotations

import math

import cvxpy as cp
import numpy as np
import pytest

from bellexpand import analytic, bellexpr, reference
from bellexpand.errors import InvalidArgument, UnsupportedFunctional
from bellexpand.sosdp import program
from bellexpand.sosdp.words import Word

SQ2 = math.sqrt(2)


def anchor_rate(n: int) -> float:
    return n - 1 + analytic.hbin((1 - SQ2 / 2) / 2)


def cvxpy_bound(problem: program.SdpProblem) -> float:
    """Solve the same word-by-word identity with a complex Hermitian Gram matrix."""
    size = len(problem.basis)
    gram = cp.Variable((size, size), hermitian=True)
    t = cp.Variable()
    z = cp.Variable()
    cons = [gram >> 0]
    c = problem.a0_value
    a0 = Word.correlator([0] * problem.n_parties)
    for i, w in enumerate(problem.words):
        mask = (problem.word_index == i).astype(float)
        lhs = cp.sum(cp.multiply(mask, gram))
        rhs = problem.target(w, 0.0, 0.0)
        if w.is_identity():
            rhs = rhs + t + c * z
        elif w == a0:
            rhs = rhs - z
        cons.append(lhs == rhs)
    cp.Problem(cp.Minimize(t), cons).solve(solver="CLARABEL")
    return float(t.value)


class TestEpsilonForRate:
    def test_full_rate(self):
        assert program.epsilon_for_rate(2, 2.0) == 0.25
        assert program.epsilon_for_rate(4, 4.0) == 1 / 16

    def test_two_roots(self):
        r = 1 + analytic.hbin((1 - SQ2 / 2) / 2)
        lower = program.epsilon_for_rate(2, r, "lower")
        upper = program.epsilon_for_rate(2, r, "upper")
        assert upper == pytest.approx((2 + SQ2) / 8, abs=1e-12)
        assert lower == pytest.approx((2 - SQ2) / 8, abs=1e-12)
        assert 4 * upper - 1 == pytest.approx(SQ2 / 2, abs=1e-12)

    @pytest.mark.parametrize("n", [2, 3, 5])
    def test_inverts_entropy(self, n):
        for r in np.linspace(n - 1, n, 11):
            for branch in program.BRANCHES:
                eps = program.epsilon_for_rate(n, r, branch)
                assert analytic.rate_from_epsilon(n, eps) == pytest.approx(r, abs=1e-7)

    def test_out_of_range(self):
        with pytest.raises(InvalidArgument):
            program.epsilon_for_rate(2, 2.5)
        with pytest.raises(InvalidArgument):
            program.epsilon_for_rate(4, 2.0)
        with pytest.raises(InvalidArgument):
            program.epsilon_for_rate(2, 1.5, branch="middle")


class TestAssemble:
    def test_full_rate_fixes_zero_correlator(self):
        p = program.assemble(2, bellexpr.mabk(2), 2.0)
        assert p.epsilon == 0.25
        assert p.a0_value == 0.0
        p = program.assemble(4, bellexpr.mabk(4), 4.0)
        assert p.epsilon == 1 / 16
        assert p.a0_value == 0.0

    def test_upper_branch(self):
        r = 1 + analytic.hbin((1 - SQ2 / 2) / 2)
        p = program.assemble(2, bellexpr.mabk(2), r, branch="upper")
        assert p.epsilon == pytest.approx((2 + SQ2) / 8, abs=1e-12)
        assert p.a0_value == pytest.approx(SQ2 / 2, abs=1e-12)

    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_words_closed_under_adjoint(self, n):
        p = program.assemble(n, bellexpr.mabk(n), float(n))
        index = {w: i for i, w in enumerate(p.words)}
        for mu in range(len(p.basis)):
            for nu in range(len(p.basis)):
                w = p.words[p.word_index[mu, nu]]
                assert index[w.adjoint()] == p.word_index[nu, mu]

    def test_constraints_hermitian(self):
        p = program.assemble(3, bellexpr.facet("S2"), 3.0)
        assert p.words[0].is_identity()
        for con in p.constraints:
            np.testing.assert_allclose(con.hermitian, con.hermitian.conj().T)

    def test_marginal_functional_rejected(self):
        f = bellexpr.BellFunctional(2, {(0, 0): 1.0, (0, 1): 1.0})
        with pytest.raises(UnsupportedFunctional):
            program.assemble(2, f, 2.0)

    def test_party_mismatch(self):
        with pytest.raises(InvalidArgument):
            program.assemble(3, bellexpr.mabk(2), 3.0)

    def test_rate_out_of_range(self):
        with pytest.raises(InvalidArgument):
            program.assemble(2, bellexpr.mabk(2), 0.5)


class TestSolve:
    @pytest.mark.parametrize("n", [2, 4, 6])
    def test_reference_bounds(self, n):
        sol = program.solve(program.assemble(n, bellexpr.mabk(n), float(n)))
        assert sol.ok
        assert sol.t_opt == pytest.approx(reference.SOS_UPPER_DECIMALS[n], abs=1e-5)
        assert sol.t_opt >= analytic.m_star(n) - 1e-5
        assert sol.lower_bound <= sol.t_opt + 1e-9

    @pytest.mark.slow
    def test_eight_party_bound(self):
        sol = program.solve(program.assemble(8, bellexpr.mabk(8), 8.0))
        assert sol.t_opt == pytest.approx(reference.SOS_UPPER_DECIMALS[8], abs=1e-4)

    @pytest.mark.parametrize(
        "n,functional,r",
        [
            (2, bellexpr.mabk(2), 2.0),
            (2, bellexpr.mabk(2), 1.7),
            (4, bellexpr.mabk(4), 3.8),
            (3, bellexpr.facet("S1"), 3.0),
            (3, bellexpr.facet("S2"), 2.9),
        ],
    )
    def test_matches_cvxpy(self, n, functional, r):
        for branch in program.BRANCHES:
            p = program.assemble(n, functional, r, branch)
            assert program.solve(p).t_opt == pytest.approx(cvxpy_bound(p), abs=1e-6)

    @pytest.mark.parametrize("n", [2, 3, 4, 5])
    def test_certificate(self, n):
        for r in (n - 0.7, n - 0.2, float(n)):
            sol = program.solve(program.assemble(n, bellexpr.mabk(n), r))
            assert sol.certificate_error <= 1e-6
            assert sol.min_eigenvalue >= -1e-8

    @pytest.mark.parametrize("theta", [1.0, 1.3, 2.0])
    def test_expanded_functional_bound_dominates_quantum_value(self, theta):
        f = bellexpr.expand(bellexpr.SeedSpec.i_theta(theta), 4)
        sol = program.solve(program.assemble(4, f, 4.0))
        assert sol.certificate_error <= 1e-6
        assert sol.t_opt >= f.known_quantum_bound - 1e-6


class TestTradeoff:
    @pytest.mark.parametrize("n", [2, 4])
    def test_anchor_reaches_maximal_value(self, n):
        bound = program.sos_upper_bound(n, bellexpr.mabk(n), anchor_rate(n))
        assert bound.value == pytest.approx(analytic.max_quantum(n), abs=1e-6)

    @pytest.mark.parametrize("n", [2, 4, 6])
    def test_monotone_above_anchor(self, n):
        expr = bellexpr.mabk(n)
        grid = np.linspace(anchor_rate(n), n, 9)
        values = [p.s for p in program.tradeoff_upper(n, expr, grid)]
        assert np.all(np.diff(values) <= 1e-7)

    def test_facets_at_full_rate(self):
        for name in ("S1", "S2"):
            (point,) = program.tradeoff_upper(3, bellexpr.facet(name), [3.0])
            assert point.flag == "ok"
            assert point.s == pytest.approx(reference.FACET_TABLE[name]["s_star"], abs=1e-5)

    def test_worker_pool_keeps_order(self):
        grid = [3.9, 3.6, 4.0, 3.7]
        serial = program.tradeoff_upper(4, bellexpr.mabk(4), grid)
        pooled = program.tradeoff_upper(4, bellexpr.mabk(4), grid, workers=3)
        assert [p.r for p in pooled] == grid
        assert [p.s for p in pooled] == [p.s for p in serial]

    def test_degenerate_endpoint_flagged(self):
        (point,) = program.tradeoff_upper(2, bellexpr.mabk(2), [1.0])
        assert point.flag != "ok"

    def test_grid_out_of_range(self):
        with pytest.raises(InvalidArgument):
            program.tradeoff_upper(2, bellexpr.mabk(2), [0.5, 2.0])
