"""Low-rank matrix recovery and the rank-decision query.

The real Bernoulli sketch feeds a nuclear-norm solver; the rounded solution is
accepted only after exact rank, entry-bound and SIS checks.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .oracle import MatrixId
from .outcome import RecoveryOutcome, RecoveryStats, Timer
from .params import SketchParams
from .sketch import RealSketch, SisSketch, StreamUpdate, check_same_stream


@dataclass(frozen=True)
class SolverConfig:
    """Knobs for the proximal solvers.

    ``tolerance`` is the relative residual ||A x - w|| / ||w|| at which the
    solvers stop. ``lambda_ratio`` sets the first shrink level as a fraction
    of the largest singular value of A^T w; it is halved whenever the iterate
    stagnates. ``polish`` runs a Gauss-Newton refinement on the detected
    low-rank (plus sparse) model at each stagnation point; after
    ``max_polish`` failed attempts the solver gives up and returns its best
    iterate flagged non-converged (inputs outside the class end up there).
    """

    measurement_multiplier: float = 3.0
    max_iters: int = 3000
    tolerance: float = 1e-10
    lambda_ratio: float = 0.1
    lambda_floor: float = 1e-12
    stagnation_tol: float = 1e-4
    rank_tol: float = 1e-6
    polish: bool = True
    polish_iters: int = 20
    polish_rank_tol: float = 1e-3
    max_polish: int = 8
    rpca_lambda: float | None = None
    als_sweeps: int = 50

    def __post_init__(self):
        if self.tolerance <= 0 or self.max_iters < 1:
            raise ParameterError("need tolerance > 0 and max_iters >= 1")


DEFAULT_CONFIG = SolverConfig()


@dataclass
class SolverResult:
    x: np.ndarray
    converged: bool
    iterations: int
    residual: float


def measurement_count(n: int, k: int, c: float = 3.0) -> int:
    """alpha = ceil(c n k log2 n), with k and log2 n floored at 1."""
    return math.ceil(c * n * max(k, 1) * max(math.log2(n), 1.0))


def integer_rank(m) -> int:
    """Exact rank of an integer matrix by fraction-free (Bareiss) elimination."""
    a = [[int(x) for x in row] for row in np.asarray(m)]
    if not a:
        return 0
    rows, cols = len(a), len(a[0])
    rank, prev = 0, 1
    for c in range(cols):
        piv = next((r for r in range(rank, rows) if a[r][c]), None)
        if piv is None:
            continue
        a[rank], a[piv] = a[piv], a[rank]
        p = a[rank][c]
        for r in range(rank + 1, rows):
            f = a[r][c]
            a[r] = [(p * x - f * y) // prev for x, y in zip(a[r], a[rank])]
        prev = p
        rank += 1
        if rank == rows:
            break
    return rank


def numerical_rank(m, rel_tol: float = 1e-6) -> int:
    s = np.linalg.svd(np.asarray(m, dtype=float), compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > rel_tol * s[0]))


def svt(y: np.ndarray, tau: float) -> np.ndarray:
    """Singular-value soft-thresholding, the proximal map of tau * nuclear norm."""
    u, s, vt = np.linalg.svd(y, full_matrices=False)
    s = np.maximum(s - tau, 0.0)
    keep = s > 0
    return (u[:, keep] * s[keep]) @ vt[keep]


def truncate(y: np.ndarray, r: int) -> np.ndarray:
    if r <= 0:
        return np.zeros_like(y)
    u, s, vt = np.linalg.svd(y, full_matrices=False)
    return (u[:, :r] * s[:r]) @ vt[:r]


def _residual(A, b, x) -> float:
    nb = np.linalg.norm(b)
    return float(np.linalg.norm(A @ x - b) / nb) if nb else float(np.linalg.norm(A @ x))


def gauss_newton_polish(A, b, shape, L, r, support=(), iters=20, tol=1e-13):
    """Refine L (rank r) plus a sparse part on ``support`` so that A vec(L + S) = b.

    Each step solves least squares over the tangent space of rank-r matrices
    at L (plus free values on the support), then retracts to rank r.
    """
    n1, n2 = shape
    A3 = A.reshape(A.shape[0], n1, n2)
    support = list(support)
    S = np.zeros(shape)
    best = (_residual(A, b, (L + S).ravel()), L, S)
    for _ in range(iters):
        u, _, vt = np.linalg.svd(L, full_matrices=False)
        U, V = u[:, :r], vt[:r].T
        blocks = []
        if r:
            blocks.append(np.einsum("aij,il->ajl", A3, U).reshape(A.shape[0], -1))
            blocks.append(np.einsum("aij,jl->ail", A3, V).reshape(A.shape[0], -1))
        if support:
            blocks.append(np.stack([A3[:, i, j] for i, j in support], axis=1))
        if not blocks:
            break
        D = np.concatenate(blocks, axis=1)
        coef, *_ = np.linalg.lstsq(D, b, rcond=None)
        off = 0
        Y = np.zeros(shape)
        if r:
            M = coef[: n2 * r].reshape(n2, r)
            N = coef[n2 * r: n2 * r + n1 * r].reshape(n1, r)
            Y = U @ M.T + N @ V.T
            off = n2 * r + n1 * r
        L = truncate(Y, r)
        S = np.zeros(shape)
        for (i, j), val in zip(support, coef[off:]):
            S[i, j] = val
        res = _residual(A, b, (L + S).ravel())
        if res < best[0]:
            best = (res, L, S)
        else:
            break
        if res <= tol:
            break
    return best


def nuclear_min(w: RealSketch, shape, config: SolverConfig = DEFAULT_CONFIG) -> SolverResult:
    """Approximate argmin ||X||_* subject to A vec(X) = w.

    Accelerated proximal gradient with singular-value thresholding and a
    halving continuation on the shrink level, followed by an optional
    Gauss-Newton polish on the detected rank.
    """
    A = w.matrix()
    return _nuclear_min_dense(A, w.w, tuple(shape), config)


def _nuclear_min_dense(A, b, shape, config) -> SolverResult:
    if not np.any(b):
        return SolverResult(np.zeros(shape), True, 0, 0.0)
    step = 1.0 / np.linalg.norm(A, 2) ** 2
    lam = config.lambda_ratio * np.linalg.norm((A.T @ b).reshape(shape), 2)
    lam_floor = lam * config.lambda_floor
    x = z = np.zeros(shape)
    t = 1.0
    res = _residual(A, b, x.ravel())
    it = attempts = 0
    for it in range(1, config.max_iters + 1):
        grad = (A.T @ (A @ z.ravel() - b)).reshape(shape)
        x_new = svt(z - step * grad, step * lam)
        t_new = (1 + math.sqrt(1 + 4 * t * t)) / 2
        z = x_new + ((t - 1) / t_new) * (x_new - x)
        change = np.linalg.norm(x_new - x) / max(np.linalg.norm(x_new), 1.0)
        x, t = x_new, t_new
        res = _residual(A, b, x.ravel())
        if res <= config.tolerance:
            break
        if change < config.stagnation_tol:
            if config.polish:
                x, res = _try_polish(A, b, shape, x, res, config)
                attempts += 1
                if res <= config.tolerance or attempts >= config.max_polish:
                    break
            lam = max(lam / 2, lam_floor)
            z, t = x, 1.0
    if config.polish and res > config.tolerance and attempts < config.max_polish:
        x, res = _try_polish(A, b, shape, x, res, config)
    converged = res <= config.tolerance
    return SolverResult(x, converged, it, res)


def _try_polish(A, b, shape, x, res, config):
    r = numerical_rank(x, config.polish_rank_tol)
    pres, px, _ = gauss_newton_polish(A, b, shape, x, r, iters=config.polish_iters)
    return (px, pres) if pres < res else (x, res)


def round_matrix(x) -> np.ndarray:
    return np.rint(x).astype(np.int64)


def recover_matrix(sis: SisSketch, w: RealSketch, k: int, beta: int,
                   config: SolverConfig = DEFAULT_CONFIG) -> RecoveryOutcome:
    check_same_stream(sis, w)
    shape = sis.params.shape
    stats = RecoveryStats()
    with Timer() as t:
        sol = nuclear_min(w, shape, config)
        stats.iterations, stats.converged = sol.iterations, sol.converged
        x0 = round_matrix(sol.x)
        ok = (
            np.abs(x0).max(initial=0) <= beta
            and integer_rank(x0) <= k
            and sis.verify(x0)
        )
        stats.candidates = 1
    stats.wall_time = t.elapsed
    return RecoveryOutcome.ok(x0, stats) if ok else RecoveryOutcome.none(stats)


@dataclass(frozen=True)
class RankDecision:
    at_most: bool
    k: int
    witness: np.ndarray | None = None

    def __str__(self):
        return f"RANK<={self.k}" if self.at_most else f"RANK>{self.k}"


def rank_decision(sis, w, k, beta, config: SolverConfig = DEFAULT_CONFIG) -> RankDecision:
    out = recover_matrix(sis, w, k, beta, config)
    if out.recovered:
        return RankDecision(True, k, out.value)
    return RankDecision(False, k)


class MatrixRecoverer:
    """Paired SIS and Bernoulli sketches of an n x n matrix stream."""

    def __init__(self, n: int, k: int, beta: int, seed=None,
                 config: SolverConfig = DEFAULT_CONFIG, **param_kw):
        self.params = SketchParams.for_matrix(n, k, beta, seed, **param_kw)
        self.n, self.k, self.beta, self.config = n, k, beta, config
        self.alpha = measurement_count(n, k, config.measurement_multiplier)
        self.sis = SisSketch(self.params)
        self.real = RealSketch(self.params, MatrixId.BERNOULLI_A, self.alpha)

    def update(self, index, delta=None):
        u = index if isinstance(index, StreamUpdate) else StreamUpdate.of(index, delta)
        self.sis.update(u)
        self.real.update(u)
        return self

    def recover(self) -> RecoveryOutcome:
        return recover_matrix(self.sis, self.real, self.k, self.beta, self.config)

    def rank_decision(self) -> RankDecision:
        return rank_decision(self.sis, self.real, self.k, self.beta, self.config)

    def state_bytes(self) -> bytes:
        return self.sis.to_bytes() + self.real.to_bytes()
