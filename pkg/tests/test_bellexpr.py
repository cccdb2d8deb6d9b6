from __future__ import annotations

import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bellexpand import analytic, bellexpr, bits, qstate
from bellexpand.errors import InvalidArgument, ResourceLimit

SQ2 = math.sqrt(2)


def naive_local_max(f) -> float:
    """Loop over every assignment of outputs to (party, input) pairs."""
    n = f.n_parties
    best = -math.inf
    for table in itertools.product((0, 1), repeat=2 * n):
        def out(x):
            return sum(table[2 * k + ((x >> k) & 1)] << k for k in range(n))

        if isinstance(f, bellexpr.CorrelatorExpression):
            val = sum(c * (-1) ** bits.popcount(out(x)) for x, c in f.coeffs.items())
        else:
            val = sum(c for (x, a), c in f.coeffs.items() if out(x) == a)
        best = max(best, val)
    return best


def permute_parties(f: bellexpr.CorrelatorExpression, perm) -> bellexpr.CorrelatorExpression:
    def move(x):
        return sum(((x >> k) & 1) << perm[k] for k in range(f.n_parties))

    return bellexpr.CorrelatorExpression(f.n_parties, {move(x): c for x, c in f.coeffs.items()})


class TestMabk:
    def test_two_party(self):
        f = bellexpr.mabk(2)
        assert f.coeffs == pytest.approx({0: 0.5, 1: 0.5, 2: 0.5, 3: -0.5})

    def test_three_party_support(self):
        f = bellexpr.mabk(3)
        expected = {bits.from_string(k): v for k, v in {"001": 0.5, "010": 0.5, "100": 0.5, "111": -0.5}.items()}
        assert f.coeffs == pytest.approx(expected)

    def test_four_party(self):
        c = bellexpr.mabk(4).dense()
        np.testing.assert_allclose(np.abs(c), 0.25)
        assert c[0] == pytest.approx(-0.25)

    @pytest.mark.parametrize("n", range(2, 9))
    def test_constant_on_weight_classes(self, n):
        c = bellexpr.mabk(n).dense()
        w = bits.hamming_weights(n)
        for weight in range(n + 1):
            vals = c[w == weight]
            np.testing.assert_allclose(vals, vals[0], atol=1e-15)
        nonzero = np.count_nonzero(np.abs(c) > 1e-12)
        assert nonzero == (1 << n if n % 2 == 0 else 1 << (n - 1))

    def test_rejects_small_n(self):
        with pytest.raises(InvalidArgument):
            bellexpr.mabk(1)

    @pytest.mark.parametrize("n", range(2, 7))
    def test_local_bound_is_one(self, n):
        assert bellexpr.local_bound(bellexpr.mabk(n)).value == pytest.approx(1.0, abs=1e-12)

    def test_sigma_x_strategy_at_right_angle_matches_closed_form(self):
        b = qstate.behavior(qstate.sigma_x_strategy(2, math.pi / 2))
        assert bellexpr.evaluate(bellexpr.mabk(2), b) == pytest.approx(
            analytic.mabk_of_theta(2, math.pi / 2), abs=1e-12
        )

    @pytest.mark.parametrize("n", [2, 3, 4, 5])
    def test_anticommuting_strategy_is_maximal(self, n):
        b = qstate.behavior(qstate.anticommuting_strategy(n))
        assert bellexpr.evaluate(bellexpr.mabk(n), b) == pytest.approx(2 ** ((n - 1) / 2), abs=1e-12)

    def test_four_party_maximal_value(self):
        phi = analytic.phi_star(4)
        b = qstate.behavior(qstate.tilted_strategy(4, phi, analytic.theta_of_phi(4, phi)))
        assert bellexpr.evaluate(bellexpr.mabk(4), b) == pytest.approx(2**1.5, abs=1e-12)


class TestRelabeledMabk:
    def test_five_party_value(self):
        b = qstate.behavior(qstate.sigma_x_strategy(5, math.pi / 2))
        assert bellexpr.evaluate(bellexpr.relabeled_mabk(5), b) == pytest.approx(4.0, abs=1e-10)

    @pytest.mark.parametrize("n", [3, 5])
    def test_local_bound(self, n):
        f = bellexpr.relabeled_mabk(n)
        assert bellexpr.local_bound(f).value == pytest.approx(1.0, abs=1e-12)
        assert naive_local_max(f) == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("n", [3, 5, 7])
    def test_is_signed_relabeling(self, n):
        plain = bellexpr.mabk(n).dense()
        relabeled = bellexpr.relabeled_mabk(n).dense()
        full = (1 << n) - 1
        np.testing.assert_allclose(np.abs(relabeled), np.abs(plain[full ^ np.arange(1 << n)]), atol=1e-15)

    def test_even_rejected(self):
        with pytest.raises(InvalidArgument):
            bellexpr.relabeled_mabk(4)


class TestSeeds:
    def test_i_theta_coefficients(self):
        f = bellexpr.seed(bellexpr.SeedSpec.i_theta(2 * math.pi / 3))
        # packed keys: A0B0=0, A0B1=2, A1B0=1, A1B1=3
        assert f.coeffs[0] == pytest.approx(0.25)
        assert f.coeffs[2] == pytest.approx(0.5)
        assert f.coeffs[1] == pytest.approx(0.5)
        assert f.coeffs[3] == pytest.approx(-0.5)
        assert f.known_quantum_bound == pytest.approx(3 * math.sqrt(3) / 4)

    def test_scaled_seed_matches_integer_form(self):
        f = bellexpr.seed(bellexpr.SeedSpec.i_theta(2 * math.pi / 3)).scaled(4)
        assert f.coeffs == pytest.approx({0: 1.0, 1: 2.0, 2: 2.0, 3: -2.0})
        assert f.known_quantum_bound == pytest.approx(3 * math.sqrt(3))

    @given(st.floats(0.8, 1.55) | st.floats(1.6, 2.34))
    def test_tilted_family_reduces_at_zero_tilt(self, theta):
        a = bellexpr.seed(bellexpr.SeedSpec.i_theta(theta))
        b = bellexpr.seed(bellexpr.SeedSpec.j_phitheta(0.0, theta))
        assert a.coeffs == pytest.approx(b.coeffs)
        assert a.known_local_bound == pytest.approx(b.known_local_bound)
        assert a.known_quantum_bound == pytest.approx(b.known_quantum_bound)

    def test_tilted_quantum_bound(self):
        phi, theta = 0.1, 1.2
        _, q = bellexpr.seed_bounds(bellexpr.SeedSpec.j_phitheta(phi, theta))
        assert q == pytest.approx(2 * math.sin(theta + phi) ** 2 * math.sin(theta - phi))

    @pytest.mark.parametrize("theta", np.linspace(0.8, 2.3, 12))
    def test_local_bound_matches_closed_form(self, theta):
        if not analytic.in_G(theta):
            pytest.skip("outside the self-testing region")
        f = bellexpr.seed(bellexpr.SeedSpec.i_theta(theta))
        assert bellexpr.local_bound(f).value == pytest.approx(f.known_local_bound, abs=1e-12)
        assert naive_local_max(f) == pytest.approx(f.known_local_bound, abs=1e-12)

    @pytest.mark.parametrize(
        "family,params,fragment",
        [
            ("I_theta", (math.pi / 2,), "cos(theta) != 0"),
            ("I_theta", (0.3,), "cos(2 theta) < 0"),
            ("J_phitheta", (0.1, 0.3), "cos(2 theta) cos(2 phi) < 0"),
            ("unknown", (1.0,), "unknown seed family"),
        ],
    )
    def test_invalid_parameters_named(self, family, params, fragment):
        with pytest.raises(InvalidArgument, match=fragment.replace("(", r"\(").replace(")", r"\)")):
            bellexpr.SeedSpec(family, params)


class TestExpand:
    def test_three_party_example(self):
        scaled_seed = bellexpr.seed(bellexpr.SeedSpec.i_theta(2 * math.pi / 3)).scaled(4)
        f = bellexpr.expand(scaled_seed, 3)
        b = qstate.behavior(qstate.sigma_x_strategy(3, 2 * math.pi / 3))
        assert bellexpr.evaluate(f, b) == pytest.approx(6 * math.sqrt(3), abs=1e-9)
        assert f.known_quantum_bound == pytest.approx(6 * math.sqrt(3))

    @pytest.mark.parametrize("theta", [0.9, 1.2, 1.8, 2.2, 4.2, 5.2])
    def test_four_party_value(self, theta):
        f = bellexpr.expand(bellexpr.SeedSpec.i_theta(theta), 4)
        b = qstate.behavior(qstate.sigma_x_strategy(4, theta))
        assert bellexpr.evaluate(f, b) == pytest.approx(6 * math.sin(theta) ** 3, abs=1e-9)
        assert bellexpr.evaluate(f, b) == pytest.approx(f.known_quantum_bound, abs=1e-9)

    @pytest.mark.parametrize("phi", [0.02, 0.1, 0.19])
    def test_four_party_tilted_value(self, phi):
        n = 4
        theta = analytic.theta_of_phi(n, phi)
        phi_s, theta_s = analytic.shifted_params(n, phi, theta)
        f = bellexpr.expand(bellexpr.SeedSpec.j_phitheta(phi_s, theta_s), n)
        b = qstate.behavior(qstate.tilted_strategy(n, phi, theta))
        expected = 2 * (n - 1) * math.sin(theta_s + phi_s) ** 2 * math.sin(theta_s - phi_s)
        assert bellexpr.evaluate(f, b) == pytest.approx(expected, abs=1e-9)

    @pytest.mark.parametrize("theta", [0.9, 1.3, 2.0])
    def test_local_bound_below_quantum(self, theta):
        f = bellexpr.expand(bellexpr.SeedSpec.i_theta(theta), 3)
        assert bellexpr.local_bound(f).value < f.known_quantum_bound - 1e-6

    def test_rejects(self):
        with pytest.raises(InvalidArgument):
            bellexpr.expand(bellexpr.SeedSpec.i_theta(2.0), 2)
        with pytest.raises(InvalidArgument):
            bellexpr.expand(bellexpr.SeedSpec.i_theta(2.0), 3, sign_rule="none")


class TestEvaluateAndLocalBound:
    def test_linear_on_mixtures(self):
        rng = np.random.default_rng(2)
        f = bellexpr.expand(bellexpr.SeedSpec.i_theta(1.2), 3)
        g = bellexpr.mabk(3)
        for _ in range(1000):
            b1 = qstate.behavior(qstate.sigma_x_strategy(3, rng.uniform(0, 6)))
            b2 = qstate.behavior(qstate.tilted_strategy(3, rng.uniform(-1, 1), rng.uniform(0, 6)))
            lam = rng.uniform()
            mix = b1.mix(b2, lam)
            for func in (f, g):
                expected = lam * bellexpr.evaluate(func, b1) + (1 - lam) * bellexpr.evaluate(func, b2)
                assert bellexpr.evaluate(func, mix) == pytest.approx(expected, abs=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(InvalidArgument):
            bellexpr.evaluate(bellexpr.mabk(3), qstate.behavior(qstate.sigma_x_strategy(2, 1.0)))

    def test_argmax_reproduces_value(self):
        f = bellexpr.expand(bellexpr.SeedSpec.i_theta(1.1), 3)
        opt = bellexpr.local_bound(f)
        table = np.zeros((8, 8))
        for x in range(8):
            table[x, opt.outputs(x)] = 1.0
        assert bellexpr.evaluate(f, qstate.Behavior(3, table)) == pytest.approx(opt.value)

    def test_matches_naive_enumeration(self):
        rng = np.random.default_rng(9)
        for _ in range(5):
            coeffs = {(int(x), int(a)): float(rng.normal()) for x, a in rng.integers(0, 8, size=(20, 2))}
            f = bellexpr.BellFunctional(3, coeffs)
            assert bellexpr.local_bound(f).value == pytest.approx(naive_local_max(f), abs=1e-12)

    def test_invariant_under_party_permutation(self):
        rng = np.random.default_rng(4)
        f = bellexpr.CorrelatorExpression(4, {x: float(rng.normal()) for x in range(16)})
        base = bellexpr.local_bound(f).value
        for perm in itertools.permutations(range(4)):
            assert bellexpr.local_bound(permute_parties(f, perm)).value == pytest.approx(base, abs=1e-12)

    def test_guard(self):
        with pytest.raises(ResourceLimit):
            bellexpr.local_bound(bellexpr.mabk(bellexpr.LOCAL_BOUND_MAX_PARTIES + 1))


class TestFacets:
    @pytest.mark.parametrize("name,local", [("M3", 1), ("S1", 1), ("S2", 2), ("S3", 2), ("S4", 1)])
    def test_local_bounds(self, name, local):
        f = bellexpr.facet(name)
        assert bellexpr.local_bound(f).value == pytest.approx(local, abs=1e-12)
        assert naive_local_max(f) == pytest.approx(local, abs=1e-12)

    def test_quantum_bounds(self):
        assert bellexpr.facet("S1").known_quantum_bound == pytest.approx(5 / 3)
        assert bellexpr.facet("S3").known_quantum_bound == pytest.approx(2 * SQ2)
        assert bellexpr.facet("S4").known_quantum_bound == pytest.approx(1.0)

    def test_s3_on_strategy_below_quantum(self):
        b = qstate.behavior(qstate.sigma_x_strategy(3, math.pi / 2))
        assert bellexpr.evaluate(bellexpr.facet("S3"), b) <= 2 * SQ2 + 1e-12

    def test_unknown(self):
        with pytest.raises(InvalidArgument):
            bellexpr.facet("S9")


class TestSerialization:
    def test_text_round_trip(self):
        f = bellexpr.expand(bellexpr.SeedSpec.i_theta(1.3), 3)
        g = bellexpr.BellFunctional.from_text(f.to_text())
        assert g.coeffs == f.coeffs
        assert g.known_quantum_bound == f.known_quantum_bound
        assert g.name == f.name

    def test_header_required(self):
        with pytest.raises(InvalidArgument):
            bellexpr.BellFunctional.from_text("000 000 1.0\n")

    def test_correlator_round_trip(self):
        f = bellexpr.mabk(4)
        const, expr, marginal = f.to_probabilities().correlator_form()
        assert const == pytest.approx(0.0, abs=1e-15)
        assert marginal == pytest.approx(0.0, abs=1e-15)
        np.testing.assert_allclose(expr.dense(), f.dense(), atol=1e-15)

    def test_marginal_detected(self):
        f = bellexpr.BellFunctional(2, {(0, 0): 1.0, (0, 1): 1.0})  # p(00|00) + p(10|00)
        _, _, marginal = f.correlator_form()
        assert marginal > 0.1
