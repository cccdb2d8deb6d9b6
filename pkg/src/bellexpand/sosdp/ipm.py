"""Primal-dual interior-point method for a single-block SDP.

Solves

    minimise <C, X>  subject to  <A_k, X> = b_k  (k = 1..m),  X PSD

together with its dual  max b.y  s.t.  C - sum_k y_k A_k = Z PSD.  Search
directions use Nesterov-Todd scaling with a Mehrotra predictor-corrector
step, starting from an infeasible scaled identity.  The constraint matrices
are sparse and symmetric; each one is given as coordinate lists.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from ..errors import InvalidArgument

CONVERGED = "optimal"
MAX_ITER = "max_iter"
NUMERICAL = "numerical_error"


@dataclass(frozen=True)
class SparseSym:
    """Symmetric matrix given by coordinates; both (i, j) and (j, i) listed."""

    rows: np.ndarray
    cols: np.ndarray
    vals: np.ndarray

    @classmethod
    def from_upper(cls, entries: dict[tuple[int, int], float]) -> "SparseSym":
        r, c, v = [], [], []
        for (i, j), val in entries.items():
            if val == 0.0:
                continue
            r.append(i)
            c.append(j)
            v.append(val)
            if i != j:
                r.append(j)
                c.append(i)
                v.append(val)
        return cls(np.array(r, dtype=np.int64), np.array(c, dtype=np.int64), np.array(v, dtype=float))

    def dense(self, dim: int) -> np.ndarray:
        out = np.zeros((dim, dim))
        np.add.at(out, (self.rows, self.cols), self.vals)
        return out


@dataclass
class IpmResult:
    status: str
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    primal_objective: float
    dual_objective: float
    primal_infeasibility: float
    dual_infeasibility: float
    relative_gap: float
    iterations: int


class SdpData:
    """Standard-form data with the operator A and its adjoint precomputed."""

    def __init__(self, dim: int, c: SparseSym, constraints: list[SparseSym], b):
        if not constraints:
            raise InvalidArgument("an SDP needs at least one equality constraint")
        self.dim = dim
        self.c_sparse = c
        self.c = c.dense(dim)
        self.constraints = constraints
        self.b = np.asarray(b, dtype=float)
        if self.b.size != len(constraints):
            raise InvalidArgument("rhs length does not match the number of constraints")
        rows, cols, vals = [], [], []
        for k, a in enumerate(constraints):
            rows.append(np.full(a.vals.size, k))
            cols.append(a.rows * dim + a.cols)
            vals.append(a.vals)
        self.amat = sp.csr_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(len(constraints), dim * dim),
        )
        self.amat_t = self.amat.T.tocsr()

    @property
    def m(self) -> int:
        return len(self.constraints)

    def op(self, x: np.ndarray) -> np.ndarray:
        return self.amat @ x.reshape(-1)

    def adjoint(self, y: np.ndarray) -> np.ndarray:
        out = (self.amat_t @ y).reshape(self.dim, self.dim)
        return out

    def schur(self, w: np.ndarray) -> np.ndarray:
        """H[k, l] = <A_k, W A_l W>."""
        cols = np.empty((self.dim * self.dim, self.m))
        for l, a in enumerate(self.constraints):
            block = (w[:, a.rows] * a.vals) @ w[a.cols, :]
            cols[:, l] = block.reshape(-1)
        h = self.amat @ cols
        return 0.5 * (h + h.T)


def _max_step(mat: np.ndarray, direction: np.ndarray, chol: np.ndarray) -> float:
    """Largest alpha with mat + alpha * direction PSD, given mat = chol chol^T."""
    tmp = sla.solve_triangular(chol, direction, lower=True)
    tmp = sla.solve_triangular(chol, tmp.T, lower=True)
    lam = np.linalg.eigvalsh(0.5 * (tmp + tmp.T))[0]
    return math.inf if lam >= 0 else -1.0 / lam


def solve_standard(
    data: SdpData,
    tol: float = 1e-8,
    feas_tol: float = 1e-9,
    max_iter: int = 500,
    step_fraction: float = 0.98,
) -> IpmResult:
    n = data.dim
    a_norms = [float(np.linalg.norm(a.vals)) for a in data.constraints]
    c_norm = float(np.linalg.norm(data.c))
    b_norm = float(np.linalg.norm(data.b))
    xi = max(10.0, math.sqrt(n), n * max((1 + abs(bk)) / (1 + ak) for bk, ak in zip(data.b, a_norms)))
    eta = max(10.0, math.sqrt(n), max(a_norms), c_norm)
    x = xi * np.eye(n)
    z = eta * np.eye(n)
    y = np.zeros(data.m)
    eye = np.eye(n)

    status = MAX_ITER
    it = 0
    best = None
    for it in range(1, max_iter + 1):
        rp = data.b - data.op(x)
        rd = data.c - z - data.adjoint(y)
        pobj = float(np.sum(data.c * x))
        dobj = float(data.b @ y)
        pinf = float(np.linalg.norm(rp)) / (1 + b_norm)
        dinf = float(np.linalg.norm(rd)) / (1 + c_norm)
        gap = abs(pobj - dobj) / (1 + abs(pobj) + abs(dobj))
        best = (pinf, dinf, gap, pobj, dobj)
        if gap <= tol and pinf <= feas_tol and dinf <= feas_tol:
            status = CONVERGED
            break
        mu = float(np.sum(x * z)) / n
        try:
            lx = np.linalg.cholesky(x)
            lz = np.linalg.cholesky(z)
        except np.linalg.LinAlgError:
            status = NUMERICAL
            break
        # Nesterov-Todd scaling point W = G G^T with G^-1 X G^-T = G^T Z G = diag(d).
        m_mid = lx.T @ z @ lx
        lam, q = np.linalg.eigh(0.5 * (m_mid + m_mid.T))
        if lam[0] <= 0:
            status = NUMERICAL
            break
        d = np.sqrt(lam)
        g = lx @ q / np.sqrt(d)
        g_inv = (np.sqrt(d)[:, None] * q.T) @ sla.solve_triangular(lx, eye, lower=True)
        w = g @ g.T
        try:
            schur = data.schur(w)
            schur_fac = sla.cho_factor(schur)
        except (np.linalg.LinAlgError, sla.LinAlgError):
            status = NUMERICAL
            break
        w_rd_w = w @ rd @ w
        op_w_rd_w = data.op(w_rd_w)
        denom = d[:, None] + d[None, :]

        def direction(rhs_scaled: np.ndarray):
            s = 2.0 * rhs_scaled / denom
            gsg = g @ s @ g.T
            dy = sla.cho_solve(schur_fac, rp - data.op(gsg) + op_w_rd_w)
            dz = rd - data.adjoint(dy)
            dx = gsg - w @ dz @ w
            dx = 0.5 * (dx + dx.T)
            dz = 0.5 * (dz + dz.T)
            return dx, dy, dz

        # predictor
        dx_a, dy_a, dz_a = direction(-np.diag(d * d))
        ap = min(1.0, _max_step(x, dx_a, lx))
        ad = min(1.0, _max_step(z, dz_a, lz))
        mu_aff = float(np.sum((x + ap * dx_a) * (z + ad * dz_a))) / n
        sigma = min(1.0, (mu_aff / mu) ** 3) if mu > 0 else 0.0
        # corrector with the second-order term in the scaled space
        xs = g_inv @ dx_a @ g_inv.T
        zs = g.T @ dz_a @ g
        cross = xs @ zs
        rhs = sigma * mu * np.eye(n) - np.diag(d * d) - 0.5 * (cross + cross.T)
        dx, dy, dz = direction(rhs)
        ap = min(1.0, step_fraction * _max_step(x, dx, lx))
        ad = min(1.0, step_fraction * _max_step(z, dz, lz))
        x = x + ap * dx
        y = y + ad * dy
        z = z + ad * dz
        x = 0.5 * (x + x.T)
        z = 0.5 * (z + z.T)

    if status != CONVERGED:
        rp = data.b - data.op(x)
        rd = data.c - z - data.adjoint(y)
        pobj = float(np.sum(data.c * x))
        dobj = float(data.b @ y)
        pinf = float(np.linalg.norm(rp)) / (1 + b_norm)
        dinf = float(np.linalg.norm(rd)) / (1 + c_norm)
        gap = abs(pobj - dobj) / (1 + abs(pobj) + abs(dobj))
    else:
        pinf, dinf, gap, pobj, dobj = best
    return IpmResult(status, x, y, z, pobj, dobj, pinf, dinf, gap, it)
