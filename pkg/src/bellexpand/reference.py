"""Published reference numbers used by the verification commands.

The radical/trigonometric expressions for the maximal MABK value compatible
with uniform outputs are kept as independent expressions so they can be
checked against the generic closed form in :mod:`bellexpand.analytic`.
"""

from __future__ import annotations

import math

SQ2 = math.sqrt(2)
SQ3 = math.sqrt(3)
SQ5 = math.sqrt(5)
PI = math.pi
cos = math.cos


def _n8() -> float:
    c = cos(PI / 36)
    return 45 / 16 + 33 * SQ3 / 4 + (45 * SQ2 / 16) * (3 + SQ3) * c - (180 * SQ3 + 90) / 16 * c**2


# Exact expressions for m*_N, the uniform-output MABK maximum reached by the
# sigma_X / angle-theta GHZ strategy.
M_STAR_EXPRESSIONS = {
    2: lambda: 3 * SQ3 / 4,
    4: lambda: (5 / 8) * math.sqrt((5 / 2) * (5 + SQ5)),
    6: lambda: (7 / 8)
    * (cos(PI / 14) + 3 * SQ2 * cos(3 * PI / 28) - 3 * cos(PI / 7) + 5 * cos(3 * PI / 14)),
    8: _n8,
    10: lambda: (11 / 32)
    * (
        cos(PI / 22)
        + 30 * SQ2 * cos(3 * PI / 44)
        - 5 * cos(PI / 11)
        + 15 * cos(3 * PI / 22)
        + 5 * SQ2 * cos(7 * PI / 44)
        - 30 * cos(2 * PI / 11)
        + 42 * cos(5 * PI / 22)
    ),
    12: lambda: (429 * SQ2 / 16) * cos(PI / 52)
    + (39 * SQ2 / 32) * cos(9 * PI / 52)
    + (715 * SQ2 / 64) * cos(5 * PI / 52)
    + (13 / 64) * cos(PI / 26)
    + (1287 / 64) * cos(5 * PI / 26)
    - (715 / 64) * cos(2 * PI / 13)
    + (143 / 32) * cos(3 * PI / 26)
    - (39 / 32) * cos(PI / 13)
    - (429 / 16) * cos(3 * PI / 13),
}

# Eight-decimal values as published.
M_STAR_DECIMALS = {
    2: 1.29903811,
    4: 2.65828378,
    6: 5.41251947,
    8: 10.93208548,
    10: 22.00126184,
    12: 44.19316043,
}

# Published SOS upper bounds at full randomness (r = N).
SOS_UPPER_DECIMALS = {
    2: 1.29903810,
    4: 2.65828370,
    6: 5.41251940,
    8: 10.93208548,
    10: 22.00125885,
    12: 44.19316040,
}

_RATE_OFFSET = math.log2(1 + SQ2) / SQ2

# Tripartite facet table: local bound, quantum bound, SOS maximum at full
# randomness, and the rate at maximal violation.  The S1 rate is
# 2 + H_bin(2/3) = 2 + log2(3) - 2/3.
FACET_TABLE = {
    "M3": {"local": 1.0, "quantum": 2.0, "s_star": 2.0, "rate": 3.0},
    "S1": {"local": 1.0, "quantum": 5 / 3, "s_star": 1.64621108, "rate": 2 + math.log2(3) - 2 / 3},
    "S2": {"local": 2.0, "quantum": 2 * SQ2, "s_star": 2.59807617, "rate": 3.5 - _RATE_OFFSET},
    "S3": {"local": 2.0, "quantum": 2 * SQ2, "s_star": 3 * SQ3 / 2, "rate": 2.5 - _RATE_OFFSET},
    "S4": {"local": 1.0, "quantum": 1.0, "s_star": 0.0, "rate": 0.0},
}
