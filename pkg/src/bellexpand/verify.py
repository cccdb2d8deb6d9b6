"""Cross-module invariant suite used by ``bellexpand verify``.

Each check compares a computed quantity against an independent route (a
simulation, a closed form or a stored reference value) at a stated
tolerance.  The whole suite runs in a few seconds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import analytic, bellexpr, dilution, qstate, reference
from .sosdp import program, words


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    error: float
    tolerance: float
    detail: str = ""


def _compare(name: str, pairs, tol: float, detail: str = "") -> CheckResult:
    """Pass iff every (computed, expected) pair agrees within ``tol``."""
    err = max(abs(float(a) - float(b)) for a, b in pairs)
    return CheckResult(name, err <= tol, err, tol, detail)


def check_m_star(fault: float = 0.0) -> CheckResult:
    pairs = [
        (analytic.m_star(n), reference.M_STAR_EXPRESSIONS[n]() + fault)
        for n in sorted(reference.M_STAR_EXPRESSIONS)
    ]
    return _compare("m_star closed forms vs radical expressions", pairs, 1e-8, "N=2..12")


def check_mabk_simulation() -> CheckResult:
    pairs = []
    for n in range(2, 7):
        for theta in np.linspace(0.1, 3.0, 7):
            sim = bellexpr.evaluate(bellexpr.mabk(n), qstate.behavior(qstate.sigma_x_strategy(n, theta)))
            pairs.append((sim, analytic.mabk_of_theta(n, theta)))
    for n in (2, 4, 6):
        for phi, theta in [(-0.3, 1.2), (0.1, 2.0), (0.2, 1.7)]:
            sim = bellexpr.evaluate(
                bellexpr.mabk(n), qstate.behavior(qstate.tilted_strategy(n, phi, theta))
            )
            pairs.append((sim, analytic.mabk_of_phitheta(n, phi, theta)))
    return _compare("simulated MABK vs closed forms", pairs, 1e-9, "N=2..6")


def check_local_bounds() -> CheckResult:
    pairs = [(bellexpr.local_bound(bellexpr.mabk(n)).value, 1.0) for n in range(2, 6)]
    pairs += [
        (bellexpr.local_bound(bellexpr.facet(name)).value, reference.FACET_TABLE[name]["local"])
        for name in bellexpr.FACET_NAMES
    ]
    return _compare("brute-force local bounds", pairs, 1e-12, "MABK N=2..5 and tripartite facets")


def check_even_max_point() -> CheckResult:
    pairs = []
    for n in (2, 4, 6, 8):
        phi = analytic.phi_star(n)
        theta = analytic.theta_of_phi(n, phi)
        strat = qstate.tilted_strategy(n, phi, theta)
        b = qstate.behavior(strat)
        pairs.append((bellexpr.evaluate(bellexpr.mabk(n), b), analytic.max_quantum(n)))
        rate = n + 0.5 - math.log2(1 + math.sqrt(2)) / math.sqrt(2)
        pairs.append((analytic.shannon(b.outcome_distribution(0)), rate))
    return _compare("even-N maximal violation value and entropy", pairs, 1e-9, "N=2,4,6,8")


def check_odd_max_point() -> CheckResult:
    pairs = []
    for n in (3, 5):
        expr = bellexpr.relabeled_mabk(n) if analytic.uses_relabeled(n) else bellexpr.mabk(n)
        b = qstate.behavior(qstate.sigma_x_strategy(n, math.pi / 2))
        pairs.append((bellexpr.evaluate(expr, b), analytic.max_quantum(n)))
        pairs.append((analytic.shannon(b.outcome_distribution(0)), float(n)))
    return _compare("odd-N maximal violation value and entropy", pairs, 1e-10, "N=3,5")


def check_expansion_chain() -> CheckResult:
    pairs = []
    n = 4
    for theta in (1.0, 1.3, 1.9):
        f = bellexpr.expand(bellexpr.SeedSpec.i_theta(theta), n)
        b = qstate.behavior(qstate.sigma_x_strategy(n, theta))
        pairs.append((bellexpr.evaluate(f, b), 2 * (n - 1) * math.sin(theta) ** 3))
        pairs.append((analytic.shannon(b.outcome_distribution(0)), float(n)))
    return _compare("expanded seed value and entropy on the optimal strategy", pairs, 1e-9, "N=4")


def check_dilution() -> CheckResult:
    n = 3
    noise = qstate.Behavior(n, np.full((8, 8), 1 / 8))
    eps_noise = dilution.dilution(noise).epsilon
    eps_nonlocal = dilution.dilution(qstate.behavior(qstate.sigma_x_strategy(2, analytic.theta_star(2)))).epsilon
    ok = eps_noise <= 1e-8 and eps_nonlocal > 1e-4
    return CheckResult(
        "dilution zero on noise and positive on a nonlocal point",
        ok,
        eps_noise,
        1e-8,
        f"noise eps={eps_noise:.3g}, nonlocal eps={eps_nonlocal:.6g}",
    )


def check_sdp() -> CheckResult:
    pairs = []
    worst_cert = 0.0
    worst_eig = math.inf
    for n in (2, 4):
        sol = program.solve(program.assemble(n, bellexpr.mabk(n), float(n)))
        pairs.append((sol.t_opt, reference.SOS_UPPER_DECIMALS[n]))
        worst_cert = max(worst_cert, sol.certificate_error)
        worst_eig = min(worst_eig, sol.min_eigenvalue)
    for name in ("S1", "S2"):
        sol = program.solve(program.assemble(3, bellexpr.facet(name), 3.0))
        pairs.append((sol.t_opt, reference.FACET_TABLE[name]["s_star"]))
        worst_cert = max(worst_cert, sol.certificate_error)
        worst_eig = min(worst_eig, sol.min_eigenvalue)
    res = _compare("SOS bounds at full randomness", pairs, 1e-5, "MABK N=2,4; S1, S2")
    cert_ok = worst_cert <= 1e-6 and worst_eig >= -1e-8
    detail = f"{res.detail}; certificate error {worst_cert:.2e}, min eigenvalue {worst_eig:.2e}"
    return CheckResult(res.name, res.passed and cert_ok, res.error, res.tolerance, detail)


def check_canonical_reduce(samples: int = 1000, seed: int = 7) -> CheckResult:
    rng = np.random.default_rng(seed)
    bad = 0
    for _ in range(samples):
        length = int(rng.integers(0, 12))
        factors = [(int(rng.integers(0, 4)), int(rng.integers(0, 2))) for _ in range(length)]
        once = words.canonical_reduce(factors)
        if words.canonical_reduce(once) != once or len(once) > length:
            bad += 1
    return CheckResult("canonical word reduction idempotent and shortening", bad == 0, float(bad), 0.0,
                       f"{samples} random words")


CHECKS: tuple[Callable[..., CheckResult], ...] = (
    check_m_star,
    check_mabk_simulation,
    check_local_bounds,
    check_even_max_point,
    check_odd_max_point,
    check_expansion_chain,
    check_dilution,
    check_sdp,
    check_canonical_reduce,
)


def run_all(inject_fault: bool = False) -> list[CheckResult]:
    """Run every check.  ``inject_fault`` perturbs one stored constant by 1e-6."""
    results = []
    for check in CHECKS:
        if check is check_m_star:
            results.append(check(fault=1e-6 if inject_fault else 0.0))
        else:
            results.append(check())
    return results


def format_report(results: list[CheckResult]) -> str:
    lines = []
    for r in results:
        mark = "PASS" if r.passed else "FAIL"
        lines.append(f"{mark}  {r.name}  error={r.error:.3e}  tol={r.tolerance:.1e}  {r.detail}".rstrip())
    passed = sum(r.passed for r in results)
    lines.append(f"{passed}/{len(results)} checks passed")
    return "\n".join(lines)
