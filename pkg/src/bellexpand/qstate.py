"""Dense statevector simulation of GHZ-type measurement strategies.

Amplitude index ``i`` encodes the computational basis state with party ``k``
(1-based) at bit ``k-1`` of ``i``.  Measurement outcomes and inputs use the
same packing, so ``Behavior.table[x, a]`` is ``p(a|x)`` with packed ``x`` and
``a``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import bits
from .errors import InternalError, InvalidArgument, ResourceLimit

MAX_QUBITS = 20
ZERO_PROBABILITY = 1e-14

_PAULI = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


def _check_qubits(n: int) -> None:
    if n < 1:
        raise InvalidArgument(f"need at least one qubit, got {n}")
    if n > MAX_QUBITS:
        raise ResourceLimit(f"dense statevector limited to {MAX_QUBITS} qubits, got {n}")


@dataclass(frozen=True)
class Statevector:
    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        _check_qubits(self.n_qubits)
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if amps.size != 1 << self.n_qubits:
            raise InvalidArgument(
                f"expected {1 << self.n_qubits} amplitudes, got {amps.size}"
            )
        norm2 = float(np.vdot(amps, amps).real)
        if abs(norm2 - 1.0) > 1e-12:
            raise InvalidArgument(f"state is not normalized (|psi|^2 = {norm2!r})")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    def tensor(self) -> np.ndarray:
        """Amplitudes as an n-axis tensor; axis ``j`` holds party ``n - j``."""
        return self.amplitudes.reshape((2,) * self.n_qubits)

    def fidelity(self, other: "Statevector") -> float:
        return float(abs(np.vdot(self.amplitudes, other.amplitudes)) ** 2)


@dataclass(frozen=True)
class Observable:
    """A +/-1 valued qubit observable b . sigma given by its Bloch vector."""

    bloch: tuple[float, float, float]

    def __post_init__(self):
        vec = tuple(float(c) for c in self.bloch)
        if len(vec) != 3:
            raise InvalidArgument("Bloch vector must have three components")
        if abs(math.sqrt(sum(c * c for c in vec)) - 1.0) > 1e-12:
            raise InvalidArgument(f"Bloch vector {vec} is not a unit vector")
        object.__setattr__(self, "bloch", vec)

    @classmethod
    def equatorial(cls, angle: float) -> "Observable":
        """cos(angle) sigma_X + sin(angle) sigma_Y."""
        return cls((math.cos(angle), math.sin(angle), 0.0))

    def matrix(self) -> np.ndarray:
        bx, by, bz = self.bloch
        return bx * _PAULI[0] + by * _PAULI[1] + bz * _PAULI[2]

    def eigenbasis(self) -> np.ndarray:
        """Rows are <phi_a| for outcome a=0 (eigenvalue +1) and a=1 (eigenvalue -1).

        Each eigenvector is phase-fixed so its first non-negligible component is
        real and positive; this makes post-measurement states reproducible.
        """
        _, vecs = np.linalg.eigh(self.matrix())
        kets = [vecs[:, 1], vecs[:, 0]]
        rows = []
        for ket in kets:
            lead = ket[0] if abs(ket[0]) > 1e-12 else ket[1]
            ket = ket * (abs(lead) / lead)
            rows.append(ket.conj())
        return np.array(rows)

    def projector(self, outcome: int) -> np.ndarray:
        sign = 1 if outcome == 0 else -1
        return 0.5 * (np.eye(2) + sign * self.matrix())


@dataclass(frozen=True)
class Strategy:
    """A shared state plus a pair of observables (inputs 0 and 1) per party."""

    n_parties: int
    state: Statevector
    observables: tuple[tuple[Observable, Observable], ...]

    def __post_init__(self):
        if self.state.n_qubits != self.n_parties:
            raise InvalidArgument(
                f"state has {self.state.n_qubits} qubits for {self.n_parties} parties"
            )
        obs = tuple(tuple(pair) for pair in self.observables)
        if len(obs) != self.n_parties or any(len(pair) != 2 for pair in obs):
            raise InvalidArgument("need exactly two observables for every party")
        object.__setattr__(self, "observables", obs)


@dataclass(frozen=True)
class Behavior:
    """Conditional distribution p(a|x) stored as ``table[x, a]``."""

    n_parties: int
    table: np.ndarray = field(repr=False)

    def __post_init__(self):
        size = 1 << self.n_parties
        tab = np.array(self.table, dtype=float)
        if tab.shape != (size, size):
            raise InvalidArgument(f"behavior table must be {size}x{size}, got {tab.shape}")
        if not np.all(np.isfinite(tab)):
            raise InvalidArgument("behavior table contains non-finite entries")
        if tab.min() < -1e-12:
            raise InvalidArgument(f"negative probability {tab.min()!r}")
        tab = np.clip(tab, 0.0, None)
        sums = tab.sum(axis=1)
        if np.max(np.abs(sums - 1.0)) > 1e-10:
            raise InvalidArgument("some p(.|x) does not sum to one")
        tab.setflags(write=False)
        object.__setattr__(self, "table", tab)

    def outcome_distribution(self, x: int | str | Sequence[int]) -> np.ndarray:
        return self.table[bits.as_index(x, self.n_parties)]

    def correlator(self, x: int | str | Sequence[int]) -> float:
        row = self.outcome_distribution(x)
        return float(row @ bits.parity_signs(self.n_parties))

    def signalling_violation(self) -> float:
        """Largest change in a marginal when one party's input flips.

        Checking every single-party removal suffices: marginals of smaller
        subsets are sums of these.
        """
        n = self.n_parties
        tens = self.table.reshape((2,) * (2 * n))
        worst = 0.0
        for p in range(n):
            x_axis = n - 1 - p
            a_axis = 2 * n - 1 - p
            marg = tens.sum(axis=a_axis)
            diff = np.take(marg, 0, axis=x_axis) - np.take(marg, 1, axis=x_axis)
            worst = max(worst, float(np.max(np.abs(diff))))
        return worst

    def mix(self, other: "Behavior", weight: float) -> "Behavior":
        """weight * self + (1 - weight) * other."""
        if other.n_parties != self.n_parties:
            raise InvalidArgument("cannot mix behaviors with different party counts")
        return Behavior(self.n_parties, weight * self.table + (1.0 - weight) * other.table)


def make_ghz(n: int) -> Statevector:
    """(|0...0> + i|1...1>)/sqrt(2) on n qubits."""
    if n < 1:
        raise InvalidArgument(f"GHZ state needs n >= 1, got {n}")
    _check_qubits(n)
    amps = np.zeros(1 << n, dtype=complex)
    amps[0] = 1 / math.sqrt(2)
    amps[-1] = 1j / math.sqrt(2)
    return Statevector(n, amps)


def angle_strategy(n: int, angle0: float, angle1: float) -> Strategy:
    """GHZ state with every party measuring equatorial observables at the given angles."""
    pair = (Observable.equatorial(angle0), Observable.equatorial(angle1))
    return Strategy(n, make_ghz(n), tuple(pair for _ in range(n)))


def sigma_x_strategy(n: int, theta: float) -> Strategy:
    """Input 0 measures sigma_X, input 1 measures at angle theta.

    Full correlators are sin(w * theta) for an input string of Hamming weight w.
    """
    return angle_strategy(n, 0.0, theta)


def tilted_strategy(n: int, phi: float, theta: float) -> Strategy:
    """Input 0 measures cos(phi) X - sin(phi) Y, input 1 measures at angle theta.

    Correlators are sin(w * theta - (n - w) * phi).
    """
    return angle_strategy(n, -phi, theta)


def anticommuting_strategy(n: int) -> Strategy:
    """Angles pi/(4n) +/- pi/4, which reach 2^((n-1)/2) on the MABK expression."""
    base = math.pi / (4 * n)
    return angle_strategy(n, base + math.pi / 4, base - math.pi / 4)


def _apply_single(tensor: np.ndarray, n: int, party: int, op: np.ndarray) -> np.ndarray:
    axis = n - 1 - party
    out = np.tensordot(op, tensor, axes=([1], [axis]))
    return np.moveaxis(out, 0, axis)


def correlator(strategy: Strategy, x: int | str | Sequence[int]) -> float:
    """<psi| A_{x_1} (x) ... (x) A_{x_N} |psi>."""
    n = strategy.n_parties
    xi = bits.as_index(x, n)
    psi = strategy.state.tensor()
    out = psi
    for p in range(n):
        out = _apply_single(out, n, p, strategy.observables[p][bits.bit(xi, p)].matrix())
    return float(np.vdot(psi.reshape(-1), out.reshape(-1)).real)


def behavior(strategy: Strategy) -> Behavior:
    """Born-rule probabilities for every input string.

    The inputs are branched one party at a time: after processing parties
    0..p-1 the batch axis indexes their packed inputs, so each party costs one
    batched 2x2 contraction instead of 2^N separate ones.
    """
    if not isinstance(strategy, Strategy):
        raise InvalidArgument("behavior() expects a Strategy")
    n = strategy.n_parties
    dim = 1 << n
    batch = strategy.state.amplitudes.reshape(1, dim)
    for p in range(n):
        branches = []
        for obs in strategy.observables[p]:
            rot = obs.eigenbasis()
            view = batch.reshape(batch.shape[0], dim >> (p + 1), 2, 1 << p)
            branches.append(np.einsum("ab,zhbl->zhal", rot, view).reshape(batch.shape[0], dim))
        batch = np.concatenate(branches, axis=0)
    table = np.abs(batch) ** 2
    return Behavior(n, table)


def project_parties(
    state: Statevector,
    parties: Sequence[int],
    outcomes: Sequence[int] | str,
    observables: Sequence[Observable],
) -> tuple[float, Statevector | None]:
    """Measure some parties and return (probability, state of the rest).

    ``parties`` are 1-based.  The remaining qubits keep their relative order.
    When the probability is at most 1e-14 no post-measurement state is
    returned.  Projecting every qubit returns ``None`` as the state as well.
    """
    n = state.n_qubits
    parties = [int(k) for k in parties]
    if len(set(parties)) != len(parties):
        raise InvalidArgument("projected parties must be distinct")
    if any(not 1 <= k <= n for k in parties):
        raise InvalidArgument(f"party index out of range 1..{n}")
    outs = [int(c) for c in outcomes]
    if len(outs) != len(parties) or len(observables) != len(parties):
        raise InvalidArgument("need one outcome and one observable per projected party")
    if any(o not in (0, 1) for o in outs):
        raise InvalidArgument("outcomes must be bits")
    if not parties:
        return 1.0, state

    psi = state.tensor()
    projected = psi
    contracted = psi
    for k, a, obs in zip(parties, outs, observables):
        p = k - 1
        projected = _apply_single(projected, n, p, obs.projector(a))
    # Contract the projected axes with <phi_a|.  Party k sits on axis n - k, so
    # going through parties in increasing k removes axes from the top down and
    # the remaining axis numbers stay valid.
    for k, a, obs in sorted(zip(parties, outs, observables), key=lambda t: t[0]):
        contracted = np.tensordot(obs.eigenbasis()[a], contracted, axes=([0], [n - k]))
    prob = float(np.vdot(projected.reshape(-1), projected.reshape(-1)).real)
    if prob <= ZERO_PROBABILITY:
        return max(prob, 0.0), None
    rest = contracted.reshape(-1)
    # Rank-one projectors always leave a product state; check it anyway.
    if abs(float(np.vdot(rest, rest).real) - prob) > 1e-10:
        raise InternalError("projection left an entangled residue across the cut")
    remaining = n - len(parties)
    if remaining == 0:
        return prob, None
    return prob, Statevector(remaining, rest / math.sqrt(prob))
