"""Dense two-phase revised simplex for small equality-form LPs.

Problems are ``min c.x  s.t.  A x = b,  x >= lower`` where entries of
``lower`` may be ``-inf`` (free variables).  Entering columns follow Dantzig's
most-negative-reduced-cost rule.  When a run of degenerate pivots stalls at
one vertex, Bland's smallest-index rule takes over until the next step that
actually moves.  Bland's rule cannot cycle, so every stall ends, and a moving
step strictly lowers the objective, so no basis is ever revisited.  Setting
``pivot_rule="bland"`` uses Bland's rule throughout.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
ITERATION_LIMIT = "iteration_limit"

DEGENERATE_RUN_LIMIT = 50


@dataclass(frozen=True)
class LpProblem:
    objective: np.ndarray
    equality_matrix: np.ndarray
    equality_rhs: np.ndarray
    lower_bounds: np.ndarray | None = None

    def __post_init__(self):
        c = np.asarray(self.objective, dtype=float).reshape(-1)
        a = np.asarray(self.equality_matrix, dtype=float)
        if a.ndim == 1:
            a = a.reshape(1, -1)
        b = np.asarray(self.equality_rhs, dtype=float).reshape(-1)
        lb = (
            np.zeros_like(c)
            if self.lower_bounds is None
            else np.asarray(self.lower_bounds, dtype=float).reshape(-1)
        )
        if a.shape != (b.size, c.size):
            raise InvalidArgument(
                f"equality matrix shape {a.shape} does not match rhs {b.size} / objective {c.size}"
            )
        if lb.size != c.size:
            raise InvalidArgument("lower_bounds must have one entry per variable")
        if not (np.all(np.isfinite(c)) and np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise InvalidArgument("objective, matrix and rhs must be finite")
        if np.any(np.isnan(lb)) or np.any(lb == np.inf):
            raise InvalidArgument("lower bounds must be finite or -inf")
        object.__setattr__(self, "objective", c)
        object.__setattr__(self, "equality_matrix", a)
        object.__setattr__(self, "equality_rhs", b)
        object.__setattr__(self, "lower_bounds", lb)


@dataclass(frozen=True)
class LpResult:
    status: str
    optimum: float
    x: np.ndarray | None
    iterations: int
    residual: float

    @property
    def ok(self) -> bool:
        return self.status == OPTIMAL


class _RevisedSimplex:
    """Revised simplex on ``[A | I]`` with an explicit, periodically rebuilt B^-1.

    The trailing identity block holds the phase-1 artificials.  Rebuilding the
    basis inverse from the original columns every ``refactor_every`` pivots
    keeps rounding error from accumulating over long degenerate runs.
    """

    def __init__(self, a: np.ndarray, b: np.ndarray, pivot_tol: float, refactor_every: int = 64):
        m, n = a.shape
        self.cols = np.hstack([a, np.eye(m)])
        self.b = b
        self.n = n
        self.basis = list(range(n, n + m))
        self.pivot_tol = pivot_tol
        self.refactor_every = refactor_every
        self.since_refactor = 0
        self.refactor()

    def refactor(self) -> None:
        self.binv = np.linalg.inv(self.cols[:, self.basis])
        self.xb = self.binv @ self.b
        self.xb[np.abs(self.xb) < 1e-13] = 0.0
        self.since_refactor = 0

    def reduced_costs(self, cost: np.ndarray) -> np.ndarray:
        y = cost[self.basis] @ self.binv
        return cost - y @ self.cols

    def objective(self, cost: np.ndarray) -> float:
        return float(cost[self.basis] @ self.xb)

    def entering(self, cost, allowed, bland: bool, tol: float) -> int | None:
        reduced = np.where(allowed, self.reduced_costs(cost), 0.0)
        reduced[self.basis] = 0.0
        candidates = np.flatnonzero(reduced < -tol)
        if candidates.size == 0:
            return None
        if bland:
            return int(candidates[0])
        return int(candidates[np.argmin(reduced[candidates])])

    def direction(self, col: int) -> np.ndarray:
        return self.binv @ self.cols[:, col]

    def leaving(self, d: np.ndarray) -> int | None:
        rows = np.flatnonzero(d > self.pivot_tol)
        if rows.size == 0:
            return None
        ratios = np.maximum(self.xb[rows], 0.0) / d[rows]
        best = ratios.min()
        ties = rows[ratios <= best + 1e-12 * max(1.0, best)]
        # Bland tie-break: the basic variable with the smallest index leaves.
        return int(min(ties, key=lambda r: self.basis[r]))

    def pivot(self, row: int, col: int, d: np.ndarray) -> float:
        step = max(self.xb[row], 0.0) / d[row]
        self.xb -= step * d
        self.xb[row] = step
        pivot_row = self.binv[row] / d[row]
        self.binv -= np.outer(d, pivot_row)
        self.binv[row] = pivot_row
        self.basis[row] = col
        self.since_refactor += 1
        if self.since_refactor >= self.refactor_every:
            self.refactor()
        else:
            self.xb[np.abs(self.xb) < 1e-13] = 0.0
        return step


def _run_phase(lp: _RevisedSimplex, cost, allowed, rule: str, max_iter: int, tol: float, counter: list[int]):
    degenerate_run = 0
    while True:
        if counter[0] >= max_iter:
            return ITERATION_LIMIT
        bland = rule == "bland" or degenerate_run > DEGENERATE_RUN_LIMIT
        col = lp.entering(cost, allowed, bland, tol)
        if col is None:
            if lp.since_refactor:
                # confirm optimality with a fresh factorization
                lp.refactor()
                col = lp.entering(cost, allowed, bland, tol)
                if col is None:
                    return OPTIMAL
            else:
                return OPTIMAL
        d = lp.direction(col)
        row = lp.leaving(d)
        if row is None:
            if lp.since_refactor:
                # a drifted inverse can hide the blocking rows; retry from scratch
                lp.refactor()
                continue
            return UNBOUNDED
        step = lp.pivot(row, col, d)
        degenerate_run = degenerate_run + 1 if step <= 1e-12 else 0
        counter[0] += 1


def _standard_form(p: LpProblem):
    """Rewrite every variable as nonnegative: shift finite bounds, split free ones."""
    a, b, c, lb = p.equality_matrix, p.equality_rhs, p.objective, p.lower_bounds
    finite = np.isfinite(lb)
    shift = np.where(finite, lb, 0.0)
    b_std = b - a @ shift
    const = float(c @ shift)
    free = np.flatnonzero(~finite)
    a_std = np.hstack([a, -a[:, free]])
    c_std = np.concatenate([c, -c[free]])
    return a_std, b_std, c_std, const, shift, free


def lp_solve(
    p: LpProblem,
    pivot_rule: str = "dantzig",
    max_iter: int = 50_000,
    tol: float = 1e-10,
    pivot_tol: float = 1e-9,
) -> LpResult:
    """Solve ``p`` and return the optimum, a basic optimal point and a status."""
    if pivot_rule not in ("dantzig", "bland"):
        raise InvalidArgument(f"unknown pivot rule {pivot_rule!r}")
    a, b, c, const, shift, free = _standard_form(p)
    m, n = a.shape
    n_orig = p.objective.size

    def recover(y):
        x = y[:n_orig] + shift
        if free.size:
            x[free] -= y[n_orig:]
        return x

    if m == 0:
        if np.any(c < -tol):
            return LpResult(UNBOUNDED, -np.inf, None, 0, 0.0)
        x = recover(np.zeros(n))
        return LpResult(OPTIMAL, const, x, 0, 0.0)

    flip = b < 0
    a = np.where(flip[:, None], -a, a)
    b = np.where(flip, -b, b)
    scale = max(1.0, float(np.abs(b).max()))

    # Phase 1: artificial identity block, minimise the sum of artificials.
    lp = _RevisedSimplex(a, b, pivot_tol)
    counter = [0]
    phase1_cost = np.concatenate([np.zeros(n), np.ones(m)])
    status = _run_phase(lp, phase1_cost, np.ones(n + m, dtype=bool), pivot_rule, max_iter, tol, counter)
    if status == ITERATION_LIMIT:
        return LpResult(status, np.nan, None, counter[0], np.inf)
    infeasibility = lp.objective(phase1_cost)
    if infeasibility > 1e-9 * scale:
        return LpResult(INFEASIBLE, np.nan, None, counter[0], infeasibility)

    # Pivot zero-level artificials out where possible.  An artificial that
    # cannot leave marks a redundant row; it stays basic at zero.
    for row in range(m):
        if lp.basis[row] >= n:
            along = lp.binv[row] @ a
            nonbasic = np.setdiff1d(np.flatnonzero(np.abs(along) > pivot_tol), lp.basis)
            if nonbasic.size:
                col = int(nonbasic[0])
                lp.pivot(row, col, lp.direction(col))
    lp.refactor()

    # Phase 2 on the original columns only.
    phase2_cost = np.concatenate([c, np.zeros(m)])
    allowed = np.concatenate([np.ones(n, dtype=bool), np.zeros(m, dtype=bool)])
    status = _run_phase(lp, phase2_cost, allowed, pivot_rule, max_iter, tol, counter)
    if status != OPTIMAL:
        return LpResult(status, -np.inf if status == UNBOUNDED else np.nan, None, counter[0], np.inf)

    # Recompute the basic solution from the original data to shed accumulated
    # rounding error.
    lp.refactor()
    full = np.zeros(n + m)
    full[lp.basis] = np.maximum(lp.xb, 0.0)
    x = recover(full[:n])
    residual = float(np.abs(p.equality_matrix @ x - p.equality_rhs).max())
    return LpResult(OPTIMAL, float(p.objective @ x), x, counter[0], residual)
