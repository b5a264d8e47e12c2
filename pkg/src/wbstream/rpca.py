"""Streaming robust PCA: low-rank plus sparse recovery with SIS verification."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .lowrank import (
    DEFAULT_CONFIG,
    SolverConfig,
    _residual,
    gauss_newton_polish,
    integer_rank,
    numerical_rank,
    round_matrix,
    svt,
)
from .oracle import MatrixId
from .outcome import RecoveryOutcome, RecoveryStats, Timer
from .params import SketchParams
from .sketch import RealSketch, SisSketch, StreamUpdate, check_same_stream


@dataclass
class RpcaDecomposition:
    L: np.ndarray
    S: np.ndarray


@dataclass
class PcpResult:
    L: np.ndarray
    S: np.ndarray
    converged: bool
    iterations: int
    residual: float


def rpca_measurement_count(n: int, k: int, r: int, c: float = 3.0) -> int:
    return max(1, math.ceil(c * (n * k + r) * max(math.log2(n), 1.0)))


def soft(y: np.ndarray, tau: float) -> np.ndarray:
    return np.sign(y) * np.maximum(np.abs(y) - tau, 0.0)


def default_lambda(n: int) -> float:
    return 1.0 / math.sqrt(n)


def pcp_solve(w: RealSketch, shape, k: int, r: int, lam: float | None = None,
              config: SolverConfig = DEFAULT_CONFIG) -> PcpResult:
    """Approximate argmin ||L||_* + lam ||S||_1 subject to A vec(L + S) = w.

    Accelerated proximal gradient on the penalized form with a halving
    continuation on the penalty weight. At each stagnation point the
    detected model (rank <= k, at most r spikes) is polished by Gauss-Newton.
    ``k == 0`` pins L to zero and ``r == 0`` pins S to zero.
    """
    A = w.matrix()
    return _pcp_dense(A, w.w, tuple(shape), k, r, lam, config)


def _pcp_dense(A, b, shape, k, r, lam, config) -> PcpResult:
    zero = np.zeros(shape)
    if not np.any(b):
        return PcpResult(zero, zero.copy(), True, 0, 0.0)
    if lam is None:
        lam = config.rpca_lambda or default_lambda(shape[0])
    step = 1.0 / (2 * np.linalg.norm(A, 2) ** 2)
    mu = config.lambda_ratio * np.linalg.norm((A.T @ b).reshape(shape), 2)
    mu_floor = mu * config.lambda_floor
    L, S = zero.copy(), zero.copy()
    zL, zS = L, S
    t = 1.0
    res = _residual(A, b, (L + S).ravel())
    it = attempts = 0
    for it in range(1, config.max_iters + 1):
        grad = (A.T @ (A @ (zL + zS).ravel() - b)).reshape(shape)
        L_new = svt(zL - step * grad, step * mu) if k > 0 else zero
        S_new = soft(zS - step * grad, step * mu * lam) if r > 0 else zero
        t_new = (1 + math.sqrt(1 + 4 * t * t)) / 2
        beta_m = (t - 1) / t_new
        zL = L_new + beta_m * (L_new - L)
        zS = S_new + beta_m * (S_new - S)
        change = (np.linalg.norm(L_new - L) + np.linalg.norm(S_new - S)) / max(
            np.linalg.norm(L_new + S_new), 1.0)
        L, S, t = L_new, S_new, t_new
        res = _residual(A, b, (L + S).ravel())
        if res <= config.tolerance:
            break
        if change < config.stagnation_tol:
            if config.polish:
                L, S, res = _polish(A, b, shape, L, S, k, r, res, config)
                attempts += 1
                if res <= config.tolerance or attempts >= config.max_polish:
                    break
            mu = max(mu / 2, mu_floor)
            zL, zS, t = L, S, 1.0
    if config.polish and res > config.tolerance and attempts < config.max_polish:
        L, S, res = _polish(A, b, shape, L, S, k, r, res, config)
    return PcpResult(L, S, res <= config.tolerance, it, res)


def _polish(A, b, shape, L, S, k, r, res, config):
    rank = min(k, numerical_rank(L, config.polish_rank_tol)) if np.any(L) else 0
    mags = np.abs(S).ravel()
    support = []
    if r > 0 and mags.max() > 0:
        order = np.argsort(-mags, kind="stable")[:r]
        cutoff = config.polish_rank_tol * mags.max()
        support = [np.unravel_index(int(i), shape) for i in order if mags[i] > cutoff]
    pres, pL, pS = gauss_newton_polish(A, b, shape, L, rank, support, config.polish_iters)
    if pres < res:
        return pL, pS, pres
    return L, S, res


def rpca_recover(sis: SisSketch, w: RealSketch, k: int, r: int, beta: int,
                 config: SolverConfig = DEFAULT_CONFIG, lam: float | None = None) -> RecoveryOutcome:
    check_same_stream(sis, w)
    shape = sis.params.shape
    stats = RecoveryStats()
    with Timer() as t:
        sol = pcp_solve(w, shape, k, r, lam, config)
        stats.iterations, stats.converged, stats.candidates = sol.iterations, sol.converged, 1
        L0, S0 = round_matrix(sol.L), round_matrix(sol.S)
        ok = (
            max(np.abs(L0).max(initial=0), np.abs(S0).max(initial=0)) <= beta
            and np.count_nonzero(S0) <= r
            and integer_rank(L0) <= k
            and sis.verify(L0 + S0)
        )
    stats.wall_time = t.elapsed
    if ok:
        return RecoveryOutcome.ok(RpcaDecomposition(L0, S0), stats)
    return RecoveryOutcome.none(stats)


class RpcaRecoverer:
    def __init__(self, n: int, k: int, r: int, beta: int, seed=None,
                 config: SolverConfig = DEFAULT_CONFIG, lam: float | None = None, **param_kw):
        self.params = SketchParams.for_rpca(n, k, r, beta, seed, **param_kw)
        self.n, self.k, self.r, self.beta = n, k, r, beta
        self.config, self.lam = config, lam
        self.alpha = rpca_measurement_count(n, k, r, config.measurement_multiplier)
        self.sis = SisSketch(self.params)
        self.real = RealSketch(self.params, MatrixId.BERNOULLI_A, self.alpha)

    def update(self, index, delta=None):
        u = index if isinstance(index, StreamUpdate) else StreamUpdate.of(index, delta)
        self.sis.update(u)
        self.real.update(u)
        return self

    def recover(self) -> RecoveryOutcome:
        return rpca_recover(self.sis, self.real, self.k, self.r, self.beta, self.config, self.lam)

    def state_bytes(self) -> bytes:
        return self.sis.to_bytes() + self.real.to_bytes()
