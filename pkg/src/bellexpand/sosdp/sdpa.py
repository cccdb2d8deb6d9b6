"""Sparse SDPA (.dat-s) export of an assembled SOS program.

The realified standard form  min <C, X>  s.t.  <A_k, X> = b_k,  X PSD  is
written in SDPA's layout, where the matrix variable Y solves

    max <F0, Y>  s.t.  <F_k, Y> = c_k,  Y PSD

with F0 = -C, F_k = A_k and c_k = b_k.  The Hermitian Gram matrix is one
real symmetric block of twice the basis size.  The bound t is recovered as

    t = offset - (optimal SDPA objective)

where ``offset`` is written in a comment line.  Entries are listed upper
triangle only, ordered by (constraint, block, row, col), so the text is
byte-stable for a fixed problem.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidArgument
from .program import SdpProblem, standard_form


@dataclass
class SdpaData:
    """Parsed .dat-s content for a single-block problem."""

    c: np.ndarray  # length m
    block_size: int
    matrices: list[np.ndarray]  # F0, F1, ..., Fm as dense symmetric arrays
    offset: float = 0.0


def _fmt(value: float) -> str:
    return repr(float(value) + 0.0)  # prints -0.0 as 0.0


def _upper_entries(dense: np.ndarray) -> list[tuple[int, int, float]]:
    rows, cols = np.nonzero(np.triu(dense))
    return [(int(i), int(j), float(dense[i, j])) for i, j in zip(rows, cols)]


def export_sdpa(problem: SdpProblem) -> str:
    """Render ``problem`` at its fixed epsilon as sparse SDPA text."""
    if not problem.constraints:
        raise InvalidArgument("cannot export a problem with no constraints")
    form = standard_form(problem)
    data = form.data
    dim = data.dim
    lines = [
        f'"bellexpand SOS program: n={problem.n_parties} rate={_fmt(problem.rate)} '
        f'branch={problem.branch} epsilon={_fmt(problem.epsilon)}"',
        f'"t = offset - objective; offset={_fmt(form.objective_constant)}"',
        f"{data.m} = mDIM",
        "1 = nBLOCK",
        f"{dim} = bLOCKsTRUCT",
        " ".join(_fmt(v) for v in data.b),
    ]
    neg_c = -data.c
    for i, j, v in _upper_entries(neg_c):
        lines.append(f"0 1 {i + 1} {j + 1} {_fmt(v)}")
    for k, a in enumerate(data.constraints, start=1):
        for i, j, v in _upper_entries(a.dense(dim)):
            lines.append(f"{k} 1 {i + 1} {j + 1} {_fmt(v)}")
    return "\n".join(lines) + "\n"


def read_sdpa(text: str) -> SdpaData:
    """Parse single-block sparse SDPA text produced by :func:`export_sdpa`."""
    offset = 0.0
    body = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line[0] in "\"*":
            if "offset=" in line:
                offset = float(line.split("offset=")[1].rstrip('"').split()[0])
            continue
        body.append(line.split("=")[0].replace(",", " ").replace("{", " ").replace("}", " "))
    if len(body) < 4:
        raise InvalidArgument("truncated SDPA text")
    m = int(body[0].split()[0])
    nblocks = int(body[1].split()[0])
    if nblocks != 1:
        raise InvalidArgument(f"only single-block files are supported, got {nblocks} blocks")
    size = int(body[2].split()[0])
    c = np.array([float(v) for v in body[3].split()], dtype=float)
    if c.size != m:
        raise InvalidArgument(f"objective vector has {c.size} entries, expected {m}")
    mats = [np.zeros((size, size)) for _ in range(m + 1)]
    for line in body[4:]:
        k, blk, i, j, v = line.split()
        mat = mats[int(k)]
        i, j, v = int(i) - 1, int(j) - 1, float(v)
        mat[i, j] = v
        mat[j, i] = v
    return SdpaData(c, size, mats, offset)
