"""Local dilution: how far the local polytope must be inflated to contain p.

A behavior p is written as an affine combination sum_l q_l d_l of the 4^N
deterministic vertices with sum q = 1; the dilution is the smallest eps such
that every weight satisfies q_l >= -eps.  Substituting w = q + eps >= 0 turns
this into a standard-form LP in (w, eps).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import qr

from .bellexpr import RESPONSES
from .errors import InvalidArgument, ResourceLimit, SolverFailure
from .qstate import Behavior
from .simplex import LpProblem, LpResult, lp_solve

VERTEX_MAX_PARTIES = 6
RANK_TOL = 1e-10


def _vertex_outputs(n: int) -> np.ndarray:
    """outputs[l, x]: packed outputs of deterministic strategy l on input x."""
    lam = np.arange(4**n)[:, None]
    x = np.arange(1 << n)[None, :]
    out = np.zeros((4**n, 1 << n), dtype=np.int64)
    for k in range(n):
        f = (lam >> (2 * k)) & 3
        out |= RESPONSES[f, (x >> k) & 1] << k
    return out


def vertex_matrix(n: int) -> np.ndarray:
    """Column l is the flattened table (row index x * 2^N + a) of vertex l."""
    if n < 1:
        raise InvalidArgument("need at least one party")
    if n > VERTEX_MAX_PARTIES:
        raise ResourceLimit(f"vertex enumeration limited to {VERTEX_MAX_PARTIES} parties, got {n}")
    size = 1 << n
    out = _vertex_outputs(n)
    mat = np.zeros((size * size, 4**n))
    rows = np.arange(size)[None, :] * size + out
    mat[rows, np.arange(4**n)[:, None]] = 1.0
    return mat


def deterministic_vertices(n: int) -> list[Behavior]:
    """All 4^N deterministic behaviors, ordered by packed strategy index."""
    mat = vertex_matrix(n)
    size = 1 << n
    return [Behavior(n, mat[:, l].reshape(size, size)) for l in range(mat.shape[1])]


@dataclass(frozen=True)
class DilutionResult:
    epsilon: float
    weights: np.ndarray
    residual: float
    iterations: int = 0

    def reconstruct(self, n: int) -> np.ndarray:
        size = 1 << n
        return (vertex_matrix(n) @ self.weights).reshape(size, size)


def independent_rows(a: np.ndarray, tol: float = RANK_TOL) -> np.ndarray:
    """Indices of a maximal linearly independent row subset (pivoted QR on A^T)."""
    _, r, perm = qr(a.T, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    if diag.size == 0 or diag[0] == 0:
        return np.array([], dtype=int)
    rank = int(np.count_nonzero(diag > tol * diag[0]))
    return np.sort(perm[:rank])


def dilution_problem(b: Behavior) -> tuple[LpProblem, np.ndarray]:
    """LP in (w, eps); returns the problem and the kept row indices."""
    n = b.n_parties
    verts = vertex_matrix(n)
    count = verts.shape[1]
    eps_col = -(1 << n) * np.ones((verts.shape[0], 1))
    eq = np.vstack(
        [
            np.hstack([verts, eps_col]),
            np.concatenate([np.ones(count), [-float(count)]])[None, :],
        ]
    )
    rhs = np.concatenate([b.table.reshape(-1), [1.0]])
    rows = independent_rows(eq)
    objective = np.zeros(count + 1)
    objective[-1] = 1.0
    return LpProblem(objective, eq[rows], rhs[rows], np.zeros(count + 1)), rows


def dilution(b: Behavior, pivot_rule: str = "dantzig") -> DilutionResult:
    """Minimal eps with b in the eps-diluted local polytope, plus certifying weights."""
    if not isinstance(b, Behavior):
        raise InvalidArgument("dilution() expects a Behavior")
    problem, _ = dilution_problem(b)
    result: LpResult = lp_solve(problem, pivot_rule=pivot_rule)
    if not result.ok:
        raise SolverFailure(
            f"dilution LP ended with status {result.status!r} after {result.iterations} pivots "
            f"({problem.equality_matrix.shape[0]} rows, {problem.objective.size} columns)"
        )
    w, eps = result.x[:-1], max(float(result.x[-1]), 0.0)
    weights = w - eps
    n = b.n_parties
    size = 1 << n
    recon = (vertex_matrix(n) @ weights).reshape(size, size)
    residual = max(float(np.abs(recon - b.table).max()), abs(float(weights.sum()) - 1.0))
    return DilutionResult(eps, weights, residual, result.iterations)
