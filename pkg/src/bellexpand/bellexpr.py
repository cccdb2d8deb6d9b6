"""Bell functionals: MABK, bipartite seeds, expansions and local bounds.

Two representations are used:

* ``CorrelatorExpression``: coefficients ``c_x`` on full N-party correlators
  ``<A_{x_1} ... A_{x_N}>``.
* ``BellFunctional``: coefficients on probabilities ``p(a|x)``.  Expanded
  functionals need this level because the projections of the spectator parties
  are not full-correlator objects.

Deterministic local strategies are packed base-4 integers (party 1 least
significant); the per-party response functions are ordered
``a=0, a=1, a=x, a=1-x``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Union

import numpy as np

from . import bits
from .errors import InvalidArgument, ResourceLimit
from .qstate import Behavior

LOCAL_BOUND_MAX_PARTIES = 10
_SLACK = 1e-12

# RESPONSES[f, x] is the output of response function f on input x.
RESPONSES = np.array([[0, 0], [1, 1], [0, 1], [1, 0]], dtype=np.int64)


def _clean_coeffs(coeffs: Mapping, n_keys: int, pair: bool) -> dict:
    out = {}
    for key, value in coeffs.items():
        v = float(value)
        if not math.isfinite(v):
            raise InvalidArgument(f"non-finite coefficient at {key!r}")
        if pair:
            x, a = (int(key[0]), int(key[1]))
            if not (0 <= x < n_keys and 0 <= a < n_keys):
                raise InvalidArgument(f"key {key!r} out of range")
            k = (x, a)
        else:
            k = int(key)
            if not 0 <= k < n_keys:
                raise InvalidArgument(f"input index {key!r} out of range")
        if v != 0.0:
            out[k] = out.get(k, 0.0) + v
    return out


@dataclass(frozen=True)
class CorrelatorExpression:
    """sum_x c_x <A_x> over packed input strings x."""

    n_parties: int
    coeffs: Mapping[int, float]
    known_local_bound: float | None = None
    known_quantum_bound: float | None = None
    name: str = ""

    def __post_init__(self):
        if self.n_parties < 1:
            raise InvalidArgument("n_parties must be positive")
        cleaned = _clean_coeffs(self.coeffs, 1 << self.n_parties, pair=False)
        if not cleaned:
            raise InvalidArgument("correlator expression has no nonzero coefficient")
        object.__setattr__(self, "coeffs", dict(sorted(cleaned.items())))

    def dense(self) -> np.ndarray:
        vec = np.zeros(1 << self.n_parties)
        for x, c in self.coeffs.items():
            vec[x] = c
        return vec

    def scaled(self, factor: float) -> "CorrelatorExpression":
        def sc(v):
            return None if v is None else factor * v

        lb, qb = sc(self.known_local_bound), sc(self.known_quantum_bound)
        if factor < 0:
            lb = qb = None
        return CorrelatorExpression(
            self.n_parties,
            {x: factor * c for x, c in self.coeffs.items()},
            lb,
            qb,
            self.name,
        )

    def to_probabilities(self) -> "BellFunctional":
        """Lossless conversion: <A_x> = sum_a (-1)^|a| p(a|x)."""
        signs = bits.parity_signs(self.n_parties)
        coeffs = {}
        for x, c in self.coeffs.items():
            for a, s in enumerate(signs):
                coeffs[(x, a)] = c * s
        return BellFunctional(
            self.n_parties,
            coeffs,
            self.known_local_bound,
            self.known_quantum_bound,
            self.name,
        )


@dataclass(frozen=True)
class BellFunctional:
    """sum_{x,a} c(x,a) p(a|x) with packed x and a."""

    n_parties: int
    coeffs: Mapping[tuple[int, int], float]
    known_local_bound: float | None = None
    known_quantum_bound: float | None = None
    name: str = ""

    def __post_init__(self):
        if self.n_parties < 1:
            raise InvalidArgument("n_parties must be positive")
        cleaned = _clean_coeffs(self.coeffs, 1 << self.n_parties, pair=True)
        object.__setattr__(self, "coeffs", dict(sorted(cleaned.items())))

    def dense(self) -> np.ndarray:
        size = 1 << self.n_parties
        mat = np.zeros((size, size))
        for (x, a), c in self.coeffs.items():
            mat[x, a] = c
        return mat

    def correlator_form(self) -> tuple[float, CorrelatorExpression | None, float]:
        """Split into constant + full-correlator part + leftover marginal weight.

        Writes p(a|x) = 2^-N sum_S (-1)^{a.S} <A_x^S> and collects terms.
        Returns ``(constant, full_correlator_part, max_marginal_coefficient)``;
        the functional lies in the full-correlator span exactly when the last
        value is zero.
        """
        n = self.n_parties
        size = 1 << n
        dense = self.dense()
        # Walsh-Hadamard along the outcome axis: row x, column S.
        had = np.array([[1.0]])
        for _ in range(n):
            had = np.block([[had, had], [had, -had]])
        # had[a, S] = (-1)^{popcount(a & S)} with packed indices.
        walsh = dense @ had / size
        constant = float(walsh[:, 0].sum())
        full = walsh[:, size - 1]
        worst = 0.0
        for subset in range(1, size - 1):
            # marginal terms only depend on x restricted to the subset
            agg: dict[int, float] = {}
            for x in range(size):
                key = x & subset
                agg[key] = agg.get(key, 0.0) + walsh[x, subset]
            if agg:
                worst = max(worst, max(abs(v) for v in agg.values()))
        expr = None
        if np.any(np.abs(full) > 0):
            expr = CorrelatorExpression(
                n, {x: c for x, c in enumerate(full) if abs(c) > 0}, name=self.name
            )
        return constant, expr, worst

    def to_text(self) -> str:
        lines = [f"bellfunctional v1 N={self.n_parties}"]
        if self.name:
            lines.append(f"# name={self.name}")
        if self.known_local_bound is not None:
            lines.append(f"# known_local_bound={self.known_local_bound!r}")
        if self.known_quantum_bound is not None:
            lines.append(f"# known_quantum_bound={self.known_quantum_bound!r}")
        for (x, a), c in self.coeffs.items():
            lines.append(
                f"{bits.to_string(x, self.n_parties)} {bits.to_string(a, self.n_parties)} {c!r}"
            )
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "BellFunctional":
        lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
        if not lines or not lines[0].startswith("bellfunctional v1 N="):
            raise InvalidArgument("missing 'bellfunctional v1 N=<n>' header")
        try:
            n = int(lines[0].split("N=", 1)[1])
        except ValueError as exc:
            raise InvalidArgument(f"bad header {lines[0]!r}") from exc
        meta: dict[str, str] = {}
        coeffs: dict[tuple[int, int], float] = {}
        for ln in lines[1:]:
            if ln.startswith("#"):
                key, _, value = ln[1:].strip().partition("=")
                meta[key.strip()] = value.strip()
                continue
            parts = ln.split()
            if len(parts) != 3 or len(parts[0]) != n or len(parts[1]) != n:
                raise InvalidArgument(f"malformed coefficient line {ln!r}")
            key = (bits.from_string(parts[0]), bits.from_string(parts[1]))
            coeffs[key] = coeffs.get(key, 0.0) + float(parts[2])

        def opt(name):
            return float(meta[name]) if name in meta else None

        return cls(n, coeffs, opt("known_local_bound"), opt("known_quantum_bound"), meta.get("name", ""))


Functional = Union[CorrelatorExpression, BellFunctional]


# ---------------------------------------------------------------------------
# MABK family


def mabk_coefficient(n: int, weight: int) -> float:
    return 2.0 ** ((1 - n) / 2) * math.cos(math.pi / 2 * ((n - 1) / 2 - weight))


def mabk(n: int) -> CorrelatorExpression:
    """The N-party MABK expression: local bound 1, quantum bound 2^((N-1)/2)."""
    if n < 2:
        raise InvalidArgument(f"MABK needs n >= 2, got {n}")
    coeffs = {}
    for x in range(1 << n):
        c = mabk_coefficient(n, bits.popcount(x))
        if abs(c) > 1e-13:
            coeffs[x] = c
    return CorrelatorExpression(n, coeffs, 1.0, 2.0 ** ((n - 1) / 2), f"M{n}")


def relabeled_mabk(n: int) -> CorrelatorExpression:
    """MABK with inputs swapped at every party and one output sign flip.

    The substitution A0 -> A1, A1 -> -A0 at every party, followed by an extra
    global sign (-1)^((n-1)/2) (one more output relabeling at a single party),
    maps c_x to (-1)^((n-1)/2 + |x|) c_{complement(x)}.  With this sign the
    strategy ``sigma_x_strategy(n, theta)`` reaches 2^((n-1)/2) at theta = pi/2
    for n = 5 (mod 8) and at theta = 3 pi/2 for n = 1 (mod 8).
    """
    if n < 3 or n % 2 == 0:
        raise InvalidArgument(f"relabeled MABK is defined for odd n >= 3, got {n}")
    full = (1 << n) - 1
    global_sign = -1.0 if ((n - 1) // 2) % 2 else 1.0
    coeffs = {}
    for x in range(1 << n):
        c = mabk_coefficient(n, bits.popcount(full ^ x))
        if abs(c) > 1e-13:
            coeffs[x] = global_sign * (-1.0) ** bits.popcount(x) * c
    return CorrelatorExpression(n, coeffs, 1.0, 2.0 ** ((n - 1) / 2), f"M{n}~")


# ---------------------------------------------------------------------------
# Bipartite seeds and the expansion


@dataclass(frozen=True)
class SeedSpec:
    """A bipartite seed: ``("I_theta", (theta,))`` or ``("J_phitheta", (phi, theta))``."""

    family: str
    params: tuple[float, ...]

    def __post_init__(self):
        params = tuple(float(p) for p in np.atleast_1d(self.params))
        object.__setattr__(self, "params", params)
        if self.family == "I_theta":
            if len(params) != 1:
                raise InvalidArgument("I_theta takes one parameter (theta)")
            (theta,) = params
            if not math.cos(2 * theta) < -_SLACK:
                raise InvalidArgument(f"I_theta needs cos(2 theta) < 0 (theta={theta!r})")
            if not abs(math.cos(theta)) > _SLACK:
                raise InvalidArgument(f"I_theta needs cos(theta) != 0 (theta={theta!r})")
        elif self.family == "J_phitheta":
            if len(params) != 2:
                raise InvalidArgument("J_phitheta takes two parameters (phi, theta)")
            phi, theta = params
            if not math.cos(2 * theta) * math.cos(2 * phi) < -_SLACK:
                raise InvalidArgument(
                    f"J_phitheta needs cos(2 theta) cos(2 phi) < 0 (phi={phi!r}, theta={theta!r})"
                )
            if not abs(math.cos(theta - phi)) > _SLACK:
                raise InvalidArgument(
                    f"J_phitheta needs cos(theta - phi) != 0 (phi={phi!r}, theta={theta!r})"
                )
        else:
            raise InvalidArgument(f"unknown seed family {self.family!r}")

    @classmethod
    def i_theta(cls, theta: float) -> "SeedSpec":
        return cls("I_theta", (theta,))

    @classmethod
    def j_phitheta(cls, phi: float, theta: float) -> "SeedSpec":
        return cls("J_phitheta", (phi, theta))

    def phi_theta(self) -> tuple[float, float]:
        if self.family == "I_theta":
            return 0.0, self.params[0]
        return self.params[0], self.params[1]


def seed_bounds(spec: SeedSpec) -> tuple[float, float]:
    """Closed-form (local, quantum) bounds of a seed."""
    phi, theta = spec.phi_theta()
    c2t, c2p, ctp = math.cos(2 * theta), math.cos(2 * phi), math.cos(theta - phi)
    local = max(
        abs(ctp * (c2t - c2p)),
        abs(ctp * (c2t + c2p)) + abs(2 * c2p * c2t),
    )
    quantum = 2 * math.sin(theta + phi) ** 2 * math.sin(theta - phi)
    return local, quantum


def seed(spec: SeedSpec) -> CorrelatorExpression:
    """Bipartite correlator coefficients on inputs (00, 01, 10, 11).

    Packed with the first party in bit 0, so keys are 0, 2, 1, 3 for
    A0B0, A0B1, A1B0, A1B1.
    """
    phi, theta = spec.phi_theta()
    c2t, c2p, ctp = math.cos(2 * theta), math.cos(2 * phi), math.cos(theta - phi)
    local, quantum = seed_bounds(spec)
    coeffs = {0b00: c2t * ctp, 0b10: -c2t * c2p, 0b01: -c2t * c2p, 0b11: c2p * ctp}
    return CorrelatorExpression(2, coeffs, local, quantum, spec.family)


def expand(spec: SeedSpec | CorrelatorExpression, n: int, sign_rule: str = "parity") -> BellFunctional:
    """Star-pattern expansion of a bipartite seed to n parties.

    Every pair (k, N) with k < N carries the seed, conditioned on the other
    N-2 parties measuring input 0 with outcomes mu; the seed copy is weighted by
    (-1)^{|mu|}.  The expanded quantum bound is (N-1) times the seed's.
    """
    if sign_rule != "parity":
        raise InvalidArgument(f"only the 'parity' sign rule is supported, got {sign_rule!r}")
    if n < 3:
        raise InvalidArgument(f"expansion needs n >= 3, got {n}")
    base = seed(spec) if isinstance(spec, SeedSpec) else spec
    if base.n_parties != 2:
        raise InvalidArgument("the seed must be bipartite")
    last = n - 1
    coeffs: dict[tuple[int, int], float] = {}
    for k in range(n - 1):
        spectators = [p for p in range(n) if p not in (k, last)]
        for mu in range(1 << (n - 2)):
            mu_sign = -1.0 if bits.popcount(mu) % 2 else 1.0
            a_rest = 0
            for j, p in enumerate(spectators):
                a_rest |= ((mu >> j) & 1) << p
            for xs, c in base.coeffs.items():
                x = (bits.bit(xs, 0) << k) | (bits.bit(xs, 1) << last)
                for ak in (0, 1):
                    for al in (0, 1):
                        a = a_rest | (ak << k) | (al << last)
                        val = mu_sign * c * (-1.0 if (ak + al) % 2 else 1.0)
                        coeffs[(x, a)] = coeffs.get((x, a), 0.0) + val
    qb = None if base.known_quantum_bound is None else (n - 1) * base.known_quantum_bound
    return BellFunctional(n, coeffs, None, qb, f"expanded-{base.name}")


# ---------------------------------------------------------------------------
# Evaluation and local bounds


def evaluate(f: Functional, b: Behavior) -> float:
    if f.n_parties != b.n_parties:
        raise InvalidArgument(
            f"functional has {f.n_parties} parties, behavior has {b.n_parties}"
        )
    if isinstance(f, CorrelatorExpression):
        signs = bits.parity_signs(b.n_parties)
        return float(sum(c * (b.table[x] @ signs) for x, c in f.coeffs.items()))
    return float(sum(c * b.table[x, a] for (x, a), c in f.coeffs.items()))


@dataclass(frozen=True)
class LocalOptimum:
    value: float
    strategy_index: int
    responses: tuple[int, ...] = field(default=())

    def outputs(self, x: int) -> int:
        """Packed outputs of this deterministic strategy on packed input x."""
        return sum(
            int(RESPONSES[f, (x >> k) & 1]) << k for k, f in enumerate(self.responses)
        )


def deterministic_values(f: Functional) -> np.ndarray:
    """Value of ``f`` on every deterministic strategy, indexed by packed strategy."""
    n = f.n_parties
    if n > LOCAL_BOUND_MAX_PARTIES:
        raise ResourceLimit(
            f"local bound enumeration limited to {LOCAL_BOUND_MAX_PARTIES} parties, got {n}"
        )
    if isinstance(f, CorrelatorExpression):
        # per party: sign of (-1)^{f(x)} for each response f and input x
        local = 1.0 - 2.0 * RESPONSES.astype(float)  # (4, 2)
        tens = f.dense().reshape((2,) * n)  # axis j = party n-1-j
        for j in range(n):
            tens = np.tensordot(tens, local, axes=([0], [1]))
    else:
        # per party: indicator [f(x) == a] for response f and the pair (x, a)
        local = np.zeros((4, 2, 2))
        for r in range(4):
            for x in (0, 1):
                local[r, x, RESPONSES[r, x]] = 1.0
        local = local.reshape(4, 4)
        dense = f.dense().reshape((2,) * (2 * n))  # x axes then a axes
        perm = []
        for j in range(n):
            perm.extend([j, n + j])
        tens = dense.transpose(perm).reshape((4,) * n)  # axis j = party n-1-j, (x,a) pairs
        for j in range(n):
            tens = np.tensordot(tens, local, axes=([0], [1]))
    # After contracting axis 0 each time the new axis is appended at the end, so
    # the final axes run from party n down to party 1; C-order flattening then
    # puts party 1 in the least significant base-4 digit.
    return tens.reshape(-1)


def local_bound(f: Functional) -> LocalOptimum:
    """Exact maximum over all 4^N deterministic strategies.

    Ties (values within 1e-12 of the maximum) go to the smallest packed index.
    """
    values = deterministic_values(f)
    best = float(values.max())
    idx = int(np.flatnonzero(values >= best - 1e-12)[0])
    responses = tuple((idx >> (2 * k)) & 3 for k in range(f.n_parties))
    return LocalOptimum(float(values[idx]), idx, responses)


# ---------------------------------------------------------------------------
# Tripartite facets


def _tripartite(terms: Mapping[str, float]) -> dict[int, float]:
    return {bits.from_string(key): val for key, val in terms.items()}


FACET_NAMES = ("M3", "S1", "S2", "S3", "S4")


def facet(name: str) -> CorrelatorExpression:
    """Tripartite full-correlator expressions with their known bounds.

    Keys are written A, B, C input bits from left to right.
    """
    if name == "M3":
        return mabk(3)
    if name == "S1":
        terms = {format(i, "03b"): 0.25 for i in range(8)}
        terms["111"] -= 1.0
        return CorrelatorExpression(3, _tripartite(terms), 1.0, 5.0 / 3.0, "S1")
    if name == "S2":
        terms = {"000": 1.0, "001": 1.0, "110": -1.0, "111": 1.0}
        return CorrelatorExpression(3, _tripartite(terms), 2.0, 2.0 * math.sqrt(2), "S2")
    if name == "S3":
        terms = {"000": 1.0, "001": 1.0, "010": 1.0, "011": -1.0}
        return CorrelatorExpression(3, _tripartite(terms), 2.0, 2.0 * math.sqrt(2), "S3")
    if name == "S4":
        return CorrelatorExpression(3, _tripartite({"000": 1.0}), 1.0, 1.0, "S4")
    raise InvalidArgument(f"unknown facet {name!r}; expected one of {FACET_NAMES}")
