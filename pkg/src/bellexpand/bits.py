"""Packed bit-string helpers.

Party ``k`` (0-based here, 1-based in user-facing text) lives at bit ``k`` of
a packed integer, so party 1 is the least significant bit.  Every module uses
these helpers so the index algebra is defined in one place.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidArgument


def popcount(value: int) -> int:
    return bin(value).count("1")


def bit(value: int, party: int) -> int:
    return (value >> party) & 1


def pack(bits: Sequence[int]) -> int:
    """Pack a per-party bit sequence (party 1 first) into an integer."""
    out = 0
    for k, b in enumerate(bits):
        if b not in (0, 1):
            raise InvalidArgument(f"bit values must be 0 or 1, got {b!r}")
        out |= int(b) << k
    return out


def unpack(value: int, n: int) -> tuple[int, ...]:
    return tuple((value >> k) & 1 for k in range(n))


def to_string(value: int, n: int) -> str:
    """Render as a string with party 1 as the leftmost character."""
    return "".join(str((value >> k) & 1) for k in range(n))


def from_string(text: str) -> int:
    return pack([int(ch) for ch in text])


def as_index(x: int | str | Sequence[int], n: int) -> int:
    """Accept an input/output string in any of the supported spellings."""
    if isinstance(x, (int, np.integer)):
        value = int(x)
    elif isinstance(x, str):
        if len(x) != n:
            raise InvalidArgument(f"bit string {x!r} does not have length {n}")
        value = from_string(x)
    else:
        seq = list(x)
        if len(seq) != n:
            raise InvalidArgument(f"bit sequence has length {len(seq)}, expected {n}")
        value = pack(seq)
    if not 0 <= value < (1 << n):
        raise InvalidArgument(f"index {value} out of range for {n} parties")
    return value


def parity_signs(n: int) -> np.ndarray:
    """Vector of (-1)^popcount(a) for all packed a in [0, 2^n)."""
    a = np.arange(1 << n)
    weights = np.zeros(1 << n, dtype=np.int64)
    for k in range(n):
        weights += (a >> k) & 1
    return 1.0 - 2.0 * (weights & 1)


def hamming_weights(n: int) -> np.ndarray:
    a = np.arange(1 << n)
    weights = np.zeros(1 << n, dtype=np.int64)
    for k in range(n):
        weights += (a >> k) & 1
    return weights


def iter_bits(values: Iterable[int], n: int):
    for v in values:
        yield unpack(v, n)
