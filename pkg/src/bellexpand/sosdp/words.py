"""Words in the measurement-operator algebra.

Each party k has two letters A0, A1 with A_x^2 = I.  Letters of different
parties commute, so a word is determined by the ordered letter string of each
party separately.  Parties are 0-based internally and printed 1-based.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

from ..errors import InvalidArgument

Factor = tuple[int, int]  # (party, letter)


@dataclass(frozen=True, order=True)
class Word:
    """Per-party letter strings; ``parts`` is a tuple of (party, letters)."""

    parts: tuple[tuple[int, tuple[int, ...]], ...] = ()

    @classmethod
    def identity(cls) -> "Word":
        return cls(())

    @classmethod
    def from_factors(cls, factors: Iterable[Factor]) -> "Word":
        return canonical_reduce(factors)

    @classmethod
    def correlator(cls, inputs: Sequence[int]) -> "Word":
        """A_{x_1}^{(1)} ... A_{x_N}^{(N)} for the given input letters."""
        return cls(tuple((k, (int(x),)) for k, x in enumerate(inputs)))

    def factors(self) -> list[Factor]:
        return [(p, letter) for p, letters in self.parts for letter in letters]

    def adjoint(self) -> "Word":
        return Word(tuple((p, tuple(reversed(letters))) for p, letters in self.parts))

    def __mul__(self, other: "Word") -> "Word":
        return canonical_reduce(self.factors() + other.factors())

    def is_identity(self) -> bool:
        return not self.parts

    def is_self_adjoint(self) -> bool:
        return all(letters == letters[::-1] for _, letters in self.parts)

    def __len__(self) -> int:
        return sum(len(letters) for _, letters in self.parts)

    def __str__(self) -> str:
        if not self.parts:
            return "I"
        return " ".join(
            f"A{letter}^({p + 1})" for p, letters in self.parts for letter in letters
        )


WordLike = Union[Word, Iterable[Factor]]


def canonical_reduce(word: WordLike) -> Word:
    """Cancel adjacent equal letters within each party and sort parties.

    Cancellation uses a stack per party, so A0 A1 A1 A0 collapses fully.  The
    result is idempotent under a second reduction.
    """
    factors = word.factors() if isinstance(word, Word) else list(word)
    stacks: dict[int, list[int]] = {}
    for party, letter in factors:
        if letter not in (0, 1):
            raise InvalidArgument(f"letters must be 0 or 1, got {letter!r}")
        if party < 0:
            raise InvalidArgument(f"party index must be non-negative, got {party!r}")
        stack = stacks.setdefault(int(party), [])
        if stack and stack[-1] == letter:
            stack.pop()
        else:
            stack.append(int(letter))
    return Word(tuple((p, tuple(stacks[p])) for p in sorted(stacks) if stacks[p]))


def monomial_basis(n: int) -> list[Word]:
    """Products of one letter per party over each half of the parties.

    Parties 1..ceil(n/2) form the first half and the rest the second half,
    giving 2^ceil(n/2) + 2^floor(n/2) words.
    """
    if n < 2:
        raise InvalidArgument(f"monomial basis needs n >= 2, got {n}")
    half = (n + 1) // 2
    basis = []
    for group in (range(half), range(half, n)):
        group = list(group)
        for letters in itertools.product((0, 1), repeat=len(group)):
            basis.append(Word(tuple((p, (x,)) for p, x in zip(group, letters))))
    return basis
