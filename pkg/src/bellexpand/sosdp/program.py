"""Gram-matrix SOS bounds on a Bell functional at fixed input-0 randomness.

For a full-correlator functional f and a rate r the program is

    minimise t  over  t, z real and a PSD Hermitian Gram matrix M  such that
    sum_{mu,nu} M[mu,nu] R_mu^dag R_nu
        = (t + z c) I - (f + z A_{0...0})

word by word after canonical reduction, where c = <A_{0...0}> is fixed by
the rate through  r = N - 1 + H_bin((1 + c)/2).  Any feasible t bounds f from
above over all quantum behaviors whose parity-symmetrised input-0 outputs
carry r bits.

The rate equation has two solutions c and -c.  ``assemble`` takes an explicit
branch; :func:`sos_upper_bound` solves both and keeps the larger value, which
is the bound that holds without assuming the sign of <A_{0...0}>.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..analytic import TradeoffPoint, hbin
from ..bellexpr import BellFunctional, CorrelatorExpression
from ..errors import InvalidArgument, SolverFailure, UnsupportedFunctional
from . import ipm
from .words import Word, canonical_reduce, monomial_basis

BRANCHES = ("lower", "upper")


def epsilon_for_rate(n: int, r: float, branch: str = "lower", tol: float = 1e-14) -> float:
    """Solve r = N - 1 + H_bin(2^(N-1) eps) for eps by bisection.

    ``branch="lower"`` returns the root with 2^(N-1) eps <= 1/2 and
    ``"upper"`` the root with 2^(N-1) eps >= 1/2.
    """
    if branch not in BRANCHES:
        raise InvalidArgument(f"branch must be one of {BRANCHES}, got {branch!r}")
    if not (n - 1 - 1e-12 <= r <= n + 1e-12):
        raise InvalidArgument(f"rate {r!r} outside [{n - 1}, {n}]")
    target = min(max(r - (n - 1), 0.0), 1.0)
    lo, hi = 0.0, 0.5  # p = 2^(N-1) eps on the lower branch; H_bin increasing
    if target >= 1.0:
        lo = hi  # H_bin is flat at its maximum, so bisection would stall short of 1/2
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if hbin(mid) < target:
            lo = mid
        else:
            hi = mid
    p = 0.5 * (lo + hi)
    if branch == "upper":
        p = 1.0 - p
    return p / 2 ** (n - 1)


def _correlator_terms(n: int, functional) -> tuple[float, dict[int, float]]:
    if isinstance(functional, CorrelatorExpression):
        if functional.n_parties != n:
            raise InvalidArgument("functional party count does not match n")
        return 0.0, dict(functional.coeffs)
    if isinstance(functional, BellFunctional):
        if functional.n_parties != n:
            raise InvalidArgument("functional party count does not match n")
        const, expr, marginal = functional.correlator_form()
        if marginal > 1e-12:
            raise UnsupportedFunctional(
                f"functional has marginal terms (largest coefficient {marginal:.3g}) "
                "outside the full-correlator span"
            )
        return const, ({} if expr is None else dict(expr.coeffs))
    raise InvalidArgument(f"unsupported functional type {type(functional).__name__}")


@dataclass
class WordConstraint:
    """<H, M> = const + t_coef * t + z_coef * z, with H Hermitian."""

    word: Word
    part: str  # "re" or "im"
    hermitian: np.ndarray
    const: float
    t_coef: float = 0.0
    z_coef: float = 0.0


@dataclass
class SdpProblem:
    n_parties: int
    basis: list[Word]
    words: list[Word]
    word_index: np.ndarray  # word_index[mu, nu] -> index into words
    constraints: list[WordConstraint]
    functional_terms: dict[int, float]
    constant: float
    epsilon: float
    rate: float
    branch: str
    name: str = ""

    @property
    def a0_value(self) -> float:
        """The fixed value of <A_{0...0}>, 2^N eps - 1."""
        return 2 ** self.n_parties * self.epsilon - 1.0

    def target(self, word: Word, t: float, z: float) -> float:
        """Coefficient of ``word`` in (t + z c) I - (f + z A_0)."""
        if word.is_identity():
            return t + z * self.a0_value - self.constant
        value = 0.0
        key = _correlator_key(word, self.n_parties)
        if key is not None:
            value -= self.functional_terms.get(key, 0.0)
            if key == 0:
                value -= z
        return value


def _correlator_key(word: Word, n: int) -> int | None:
    """Packed inputs if ``word`` is a full correlator, else None."""
    if len(word.parts) != n or any(len(letters) != 1 for _, letters in word.parts):
        return None
    return sum(letters[0] << p for p, letters in word.parts)


def assemble(n: int, functional, r: float, branch: str = "lower", name: str = "") -> SdpProblem:
    """Build the word-by-word equality constraints of the SOS program."""
    if n < 2:
        raise InvalidArgument(f"need n >= 2, got {n}")
    const, terms = _correlator_terms(n, functional)
    eps = epsilon_for_rate(n, r, branch)
    basis = monomial_basis(n)
    size = len(basis)
    words: list[Word] = [Word.identity()]
    lookup = {Word.identity(): 0}
    index = np.zeros((size, size), dtype=np.int64)
    for mu, left in enumerate(basis):
        left_adj = left.adjoint()
        for nu, right in enumerate(basis):
            w = canonical_reduce(left_adj.factors() + right.factors())
            if w not in lookup:
                lookup[w] = len(words)
                words.append(w)
            index[mu, nu] = lookup[w]
    for key in terms:
        w = Word.correlator([(key >> p) & 1 for p in range(n)])
        if w not in lookup:
            raise UnsupportedFunctional(f"word {w} is not reachable from the monomial basis")
    a0_word = Word.correlator([0] * n)
    if a0_word not in lookup:
        raise UnsupportedFunctional("the all-zero correlator is not reachable from the basis")

    problem = SdpProblem(n, basis, words, index, [], terms, const, eps, r, branch, name)
    c = problem.a0_value
    seen = set()
    for i, w in enumerate(words):
        if i in seen:
            continue
        adj = w.adjoint()
        j = lookup.get(adj)
        if j is None:
            raise UnsupportedFunctional(f"adjoint of {w} missing from the word set")
        seen.update((i, j))
        f_i = (index == i).astype(float)
        f_j = (index == j).astype(float)
        re_part = 0.5 * (f_i + f_j)
        t_coef = 1.0 if w.is_identity() else 0.0
        z_coef = c if w.is_identity() else (-1.0 if w == a0_word else 0.0)
        rhs = problem.target(w, 0.0, 0.0)
        problem.constraints.append(WordConstraint(w, "re", re_part.astype(complex), rhs, t_coef, z_coef))
        if j != i:
            im_part = 0.5j * (f_i - f_j)
            problem.constraints.append(WordConstraint(w, "im", im_part, 0.0))
    return problem


@dataclass
class SdpSolution:
    t_opt: float
    z_opt: float
    gram: np.ndarray
    primal_residual: float
    dual_gap: float
    status: str
    lower_bound: float
    iterations: int
    certificate_error: float = math.nan
    min_eigenvalue: float = math.nan

    @property
    def ok(self) -> bool:
        return self.status == ipm.CONVERGED


@dataclass
class StandardForm:
    data: ipm.SdpData
    objective_constant: float
    # t and z as affine functions of the realified X: value = w . <A_S, X> + const
    eliminated: dict = field(default_factory=dict)


def _realify(h: np.ndarray) -> np.ndarray:
    """Symmetric 2n matrix A with <A, X> = <H, M> for M recovered from X."""
    hr, hi = h.real, h.imag
    return 0.5 * np.block([[hr, -hi], [hi, hr]])


def _to_sparse(mat: np.ndarray) -> ipm.SparseSym:
    rows, cols = np.nonzero(mat)
    return ipm.SparseSym(rows.astype(np.int64), cols.astype(np.int64), mat[rows, cols].astype(float))


def standard_form(problem: SdpProblem) -> StandardForm:
    """Eliminate t and z and realify: min <C, X> s.t. <A_k, X> = b_k, X PSD.

    t and z appear only in the identity and all-zero-correlator constraints;
    those two rows are solved for (t, z) and substituted into the objective.
    """
    linked = [k for k, con in enumerate(problem.constraints) if con.t_coef or con.z_coef]
    if len(linked) != 2:
        raise InvalidArgument("expected exactly two constraints involving t and z")
    g = np.array([[problem.constraints[k].t_coef, problem.constraints[k].z_coef] for k in linked])
    h = np.array([problem.constraints[k].const for k in linked])
    g_inv = np.linalg.inv(g)
    # (t, z) = g_inv @ (<A_S, X> - h)
    t_weights = g_inv[0]
    z_weights = g_inv[1]
    c_mat = sum(w * _realify(problem.constraints[k].hermitian) for w, k in zip(t_weights, linked))
    const = -float(t_weights @ h)
    rest = [k for k in range(len(problem.constraints)) if k not in linked]
    if not rest:
        raise InvalidArgument("no equality constraints left after elimination")
    mats = [_to_sparse(_realify(problem.constraints[k].hermitian)) for k in rest]
    rhs = [problem.constraints[k].const for k in rest]
    dim = 2 * len(problem.basis)
    data = ipm.SdpData(dim, _to_sparse(c_mat), mats, rhs)
    elim = {
        "linked": linked,
        "t_weights": t_weights,
        "z_weights": z_weights,
        "h": h,
    }
    return StandardForm(data, const, elim)


def gram_from_realified(x: np.ndarray) -> np.ndarray:
    n = x.shape[0] // 2
    x11, x12, x21, x22 = x[:n, :n], x[:n, n:], x[n:, :n], x[n:, n:]
    return 0.5 * (x11 + x22) + 0.5j * (x21 - x12)


def reconstruct(problem: SdpProblem, gram: np.ndarray) -> dict[Word, complex]:
    """Coefficient of every canonical word in sum M[mu,nu] R_mu^dag R_nu."""
    sums = np.zeros(len(problem.words), dtype=complex)
    np.add.at(sums, problem.word_index.reshape(-1), gram.reshape(-1))
    return {w: complex(sums[i]) for i, w in enumerate(problem.words)}


def certificate_error(problem: SdpProblem, solution: SdpSolution) -> float:
    """Max |coefficient - target| over all words of the SOS identity."""
    coeffs = reconstruct(problem, solution.gram)
    return max(
        abs(coeffs[w] - problem.target(w, solution.t_opt, solution.z_opt)) for w in problem.words
    )


def solve(problem: SdpProblem, tol: float = 1e-8, max_iter: int = 500) -> SdpSolution:
    """Interior-point solve; ``t_opt`` is the primal (certificate) value."""
    form = standard_form(problem)
    res = ipm.solve_standard(form.data, tol=tol, feas_tol=max(tol * 0.1, 1e-10), max_iter=max_iter)
    x = res.x
    linked = form.eliminated["linked"]
    lin = np.array(
        [float(np.sum(_realify(problem.constraints[k].hermitian) * x)) for k in linked]
    )
    h = form.eliminated["h"]
    t = float(form.eliminated["t_weights"] @ (lin - h))
    z = float(form.eliminated["z_weights"] @ (lin - h))
    gram = gram_from_realified(x)
    sol = SdpSolution(
        t_opt=t,
        z_opt=z,
        gram=gram,
        primal_residual=res.primal_infeasibility,
        dual_gap=res.relative_gap,
        status=res.status,
        lower_bound=res.dual_objective + form.objective_constant,
        iterations=res.iterations,
    )
    sol.certificate_error = certificate_error(problem, sol)
    sol.min_eigenvalue = float(np.linalg.eigvalsh(gram)[0])
    return sol


@dataclass(frozen=True)
class BranchBound:
    value: float
    branch: str
    epsilon: float
    solution: SdpSolution


def sos_upper_bound(n: int, functional, r: float, tol: float = 1e-8, max_iter: int = 500) -> BranchBound:
    """Largest of the two branch bounds (one solve when r = N)."""
    results = []
    branches = ("lower",) if abs(r - n) <= 1e-14 else BRANCHES
    for branch in branches:
        prob = assemble(n, functional, r, branch)
        sol = solve(prob, tol=tol, max_iter=max_iter)
        results.append(BranchBound(sol.t_opt, branch, prob.epsilon, sol))
    return max(results, key=lambda b: b.value)


def _tradeoff_point(n: int, functional, r: float, tol: float, max_iter: int) -> TradeoffPoint:
    try:
        bound = sos_upper_bound(n, functional, r, tol=tol, max_iter=max_iter)
    except SolverFailure as exc:
        return TradeoffPoint(math.nan, r, flag=f"solver_failure: {exc}")
    sol = bound.solution
    return TradeoffPoint(
        bound.value,
        r,
        flag="ok" if sol.ok else sol.status,
        epsilon=bound.epsilon,
        gap=sol.dual_gap,
    )


def tradeoff_upper(
    n: int, functional, r_grid, tol: float = 1e-8, max_iter: int = 500, workers: int = 1
) -> list[TradeoffPoint]:
    """One SOS bound per rate in ``r_grid``, in grid order.

    Failed solves are flagged on their point rather than raised.  At the
    endpoint r = N - 1 the fixed correlator is +-1, the program has no
    interior point and the point is normally flagged.
    """
    rates = [float(r) for r in r_grid]
    for r in rates:
        if not (n - 1 - 1e-12 <= r <= n + 1e-12):
            raise InvalidArgument(f"rate {r!r} outside [{n - 1}, {n}]")
    if workers <= 1:
        return [_tradeoff_point(n, functional, r, tol, max_iter) for r in rates]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        # map preserves input order regardless of completion order
        return list(pool.map(lambda r: _tradeoff_point(n, functional, r, tol, max_iter), rates))
