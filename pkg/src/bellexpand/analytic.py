"""Closed-form values for the GHZ strategy families and the randomness curves.

All angles are radians.  The MABK values here are exact expressions for the
strategies built in :mod:`bellexpand.qstate`; the test-suite checks them
against direct simulation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq
from scipy.special import entr

from .errors import InvalidArgument, OutOfRange

QUARTER_PI = math.pi / 4
_SLACK = 1e-12
PHI_GRID_STEP = 1e-4

# Open subintervals of [0, 2 pi) where cos(2 theta) < 0 and cos(theta) != 0.
G_COMPONENTS = (
    (math.pi / 4, math.pi / 2),
    (math.pi / 2, 3 * math.pi / 4),
    (5 * math.pi / 4, 3 * math.pi / 2),
    (3 * math.pi / 2, 7 * math.pi / 4),
)


def max_quantum(n: int) -> float:
    return 2.0 ** ((n - 1) / 2)


def _require_even(n: int) -> None:
    if n < 2 or n % 2:
        raise InvalidArgument(f"expected an even number of parties >= 2, got {n}")


def _require_odd(n: int) -> None:
    if n < 3 or n % 2 == 0:
        raise InvalidArgument(f"expected an odd number of parties >= 3, got {n}")


# ---------------------------------------------------------------------------
# MABK values of the strategy families


def mabk_of_theta(n: int, theta: float) -> float:
    """MABK value of the sigma_X / angle-theta GHZ strategy."""
    if n < 2:
        raise InvalidArgument(f"n must be >= 2, got {n}")
    h = theta / 2
    return max_quantum(n) * (
        math.cos(h + QUARTER_PI) ** n * math.sin(n * h + QUARTER_PI)
        + math.cos(h - QUARTER_PI) ** n * math.sin(n * h - QUARTER_PI)
    )


def mabk_of_phitheta(n: int, phi: float, theta: float) -> float:
    """MABK value when input 0 is tilted to angle -phi and input 1 sits at theta."""
    if n < 2:
        raise InvalidArgument(f"n must be >= 2, got {n}")
    h = (theta + phi) / 2
    d = n * (theta - phi) / 2
    return max_quantum(n) * (
        math.cos(h + QUARTER_PI) ** n * math.sin(d + QUARTER_PI)
        + math.cos(h - QUARTER_PI) ** n * math.sin(d - QUARTER_PI)
    )


def mabk_relabeled_of_theta(n: int, theta: float) -> float:
    """Value of the relabeled MABK expression on the sigma_X / angle-theta strategy."""
    _require_odd(n)
    h = theta / 2
    return max_quantum(n) * (
        math.cos(h + QUARTER_PI) ** n * math.sin(-n * h + QUARTER_PI)
        - math.cos(h - QUARTER_PI) ** n * math.sin(n * h + QUARTER_PI)
    )


def uses_relabeled(n: int) -> bool:
    """Odd n = 1 (mod 4) are plotted with the relabeled expression."""
    return n % 2 == 1 and n % 4 == 1


def mabk_curve_value(n: int, theta: float) -> float:
    """The value plotted against theta: relabeled form for n = 1 (mod 4)."""
    if uses_relabeled(n):
        return mabk_relabeled_of_theta(n, theta)
    return mabk_of_theta(n, theta)


# ---------------------------------------------------------------------------
# Special angles


def t_seq(n: int) -> int:
    """Integer numerator t_N with theta*_N = 2 pi t_N / (N + 1)."""
    _require_even(n)
    r = n % 8
    if r == 2:
        return (n + 2) // 4
    if r == 4:
        return n // 4
    if r == 6:
        return (3 * n + 2) // 4
    return (3 * n) // 4 + 1


def theta_star(n: int) -> float:
    return 2 * math.pi * t_seq(n) / (n + 1)


def m_star(n: int) -> float:
    """Largest MABK value of the family that keeps all outputs on input 0 uniform."""
    return mabk_of_theta(n, theta_star(n))


def phi_star(n: int) -> float:
    """Tilt angle at which the tilted family reaches 2^((N-1)/2)."""
    _require_even(n)
    return math.copysign(1.0, math.sin(2 * theta_star(n))) * math.pi / (4 * n)


def theta_of_phi(n: int, phi: float) -> float:
    _require_even(n)
    return (n - 1) / (n + 1) * phi + theta_star(n)


def shifted_params(n: int, phi: float, theta: float) -> tuple[float, float]:
    """Seed parameters (phi', theta') matching the tilted strategy on n parties."""
    if n < 2:
        raise InvalidArgument(f"n must be >= 2, got {n}")
    return phi * n / 2, theta - (n - 2) * phi / 2


# ---------------------------------------------------------------------------
# Set membership


def in_G(theta: float) -> bool:
    return math.cos(2 * theta) < -_SLACK and abs(math.cos(theta)) > _SLACK


def in_F(phi: float, theta: float) -> bool:
    if not abs(phi) < QUARTER_PI - _SLACK:
        return False
    if not math.cos(2 * theta) < -_SLACK:
        return False
    # theta in {pi/2, 3pi/2} is allowed only away from phi = 0
    return abs(math.cos(theta)) > _SLACK or abs(phi) > _SLACK


# ---------------------------------------------------------------------------
# Entropies and rates


def hbin(p: float) -> float:
    """Binary entropy in bits."""
    p = float(p)
    if not (-_SLACK <= p <= 1 + _SLACK) or math.isnan(p):
        raise InvalidArgument(f"probability {p!r} outside [0, 1]")
    p = min(max(p, 0.0), 1.0)
    return float((entr(p) + entr(1 - p)) / math.log(2))


def shannon(dist) -> float:
    """Shannon entropy in bits of a probability vector."""
    arr = np.asarray(dist, dtype=float).reshape(-1)
    if arr.size == 0 or not np.all(np.isfinite(arr)):
        raise InvalidArgument("distribution must be a non-empty finite vector")
    if arr.min() < -_SLACK:
        raise InvalidArgument(f"negative probability {arr.min()!r}")
    if abs(arr.sum() - 1.0) > 1e-9:
        raise InvalidArgument(f"probabilities sum to {arr.sum()!r}, not 1")
    arr = np.clip(arr, 0.0, None)
    return float(entr(arr).sum() / math.log(2))


def rate_r(n: int, phi: float) -> float:
    """Entropy of the input-0 outputs of the tilted strategy on n parties."""
    return n - 1 + hbin((1 - math.sin(n * phi)) / 2)


def rate_from_epsilon(n: int, eps: float) -> float:
    """Entropy of a parity-symmetric p(.|0) whose all-zero-parity atoms weigh eps."""
    return n - 1 + hbin(2 ** (n - 1) * eps)


def rate_from_correlator(n: int, corr0: float) -> float:
    """Same entropy, parametrised by the input-0 full correlator <A_0...0>."""
    return n - 1 + hbin((1 + corr0) / 2)


# ---------------------------------------------------------------------------
# Root finding


def _roots_on(func, lo: float, hi: float, points: int) -> list[float]:
    grid = np.linspace(lo, hi, points)
    vals = np.array([func(t) for t in grid])
    roots = []
    for i in range(points - 1):
        a, b = vals[i], vals[i + 1]
        if a == 0.0:
            roots.append(float(grid[i]))
        elif a * b < 0:
            roots.append(float(brentq(func, grid[i], grid[i + 1], xtol=1e-15, rtol=4 * np.finfo(float).eps)))
    if vals[-1] == 0.0:
        roots.append(float(grid[-1]))
    return roots


def _peak_angle(n: int) -> float:
    if n % 2 == 0:
        return theta_star(n)
    # odd n: pi/2 for n = 3, 5 (mod 8), 3pi/2 for n = 7, 1 (mod 8)
    return math.pi / 2 if n % 8 in (3, 5) else 3 * math.pi / 2


def find_theta_for_mabk(n: int, s: float, points_per_component: int = 2001) -> float:
    """An angle theta in G where the plotted MABK curve takes the value s.

    Even n needs 1 < s <= m*_n and uses the plain expression; odd n needs
    1 < s < 2^((n-1)/2) and uses the relabeled expression when n = 1 (mod 4).
    The G component next to the curve's peak is searched first (lower side
    first for odd n), and the root closest to the peak is returned.
    """
    if n < 2:
        raise InvalidArgument(f"n must be >= 2, got {n}")
    if n % 2 == 0:
        top = m_star(n)
        if not (1 < s <= top + _SLACK):
            raise OutOfRange(f"s={s!r} outside (1, m*_{n}={top!r}]")
        if abs(s - top) <= _SLACK:
            return theta_star(n)
    else:
        top = max_quantum(n)
        if not (1 < s < top):
            raise OutOfRange(f"s={s!r} outside (1, {top!r})")
    peak = _peak_angle(n)

    def gap(t):
        return mabk_curve_value(n, t) - s

    eps = 1e-9
    def distance(comp):
        lo, hi = comp
        inside = 0.0 if lo < peak < hi else min(abs(peak - lo), abs(peak - hi))
        return (inside, lo)

    comps = sorted(G_COMPONENTS, key=distance)
    for lo, hi in comps:
        roots = [t for t in _roots_on(gap, lo + eps, hi - eps, points_per_component) if in_G(t)]
        if roots:
            return min(roots, key=lambda t: abs(t - peak))
    raise OutOfRange(f"no angle in G reaches s={s!r} for n={n}")


@dataclass(frozen=True)
class TradeoffPoint:
    """A (MABK value, randomness rate) pair, with root-finding metadata."""

    s: float
    r: float
    phi: float | None = None
    roots: tuple[float, ...] = field(default=())
    grid_step: float | None = None
    flag: str = "ok"
    epsilon: float | None = None
    gap: float | None = None


def conjectured_tradeoff(n: int, s: float, grid_step: float = PHI_GRID_STEP) -> TradeoffPoint:
    """Best known rate at MABK value s for even n.

    Up to m*_n the rate is n.  Above it, the tilt phi_s of smallest magnitude
    with MABK(phi, theta(phi)) = s is found on a grid over [0, phi*_n] and
    refined by bisection; every root seen on the grid is reported.
    """
    _require_even(n)
    top = max_quantum(n)
    if not (1 < s <= top + 1e-9):
        raise OutOfRange(f"s={s!r} outside (1, {top!r}]")
    s = min(s, top)
    if s <= m_star(n):
        return TradeoffPoint(s, float(n), 0.0, (), grid_step)
    end = phi_star(n)

    def gap(phi):
        return mabk_of_phitheta(n, phi, theta_of_phi(n, phi)) - s

    points = int(math.ceil(abs(end) / grid_step)) + 1
    roots = _roots_on(gap, 0.0, end, points)
    if not roots and abs(gap(end)) <= 1e-12:
        roots = [end]
    if not roots:
        raise OutOfRange(f"no tilt in [0, {end!r}] reaches s={s!r}")
    best = min(roots, key=abs)
    return TradeoffPoint(s, rate_r(n, best), best, tuple(roots), grid_step)


# ---------------------------------------------------------------------------
# Tripartite facets on the sigma_X / angle-theta strategy


def s1_value(theta: float) -> float:
    """Value of S1 = (1/4) sum_xyz A_x B_y C_z - A1 B1 C1 on the 3-party strategy.

    The averaged part contributes 2 sin(3 theta/2) cos^3(theta/2); the A1B1C1
    correction contributes -sin(3 theta).
    """
    return 2 * math.sin(1.5 * theta) * math.cos(theta / 2) ** 3 - math.sin(3 * theta)


def s2_value(theta: float) -> float:
    return math.sin(theta) - math.sin(2 * theta) + math.sin(3 * theta)
