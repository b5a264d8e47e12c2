"""Low-CP-rank tensor recovery from grid-Gaussian measurements with SIS verification."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .lowrank import DEFAULT_CONFIG, SolverConfig, _residual
from .oracle import MatrixId
from .outcome import RecoveryOutcome, RecoveryStats, Timer
from .params import SketchParams
from .sketch import RealSketch, SisSketch, StreamUpdate, check_same_stream


@dataclass
class CpFactors:
    """k rank-one terms: ``factors[j]`` is the n_j x k matrix of mode-j columns."""

    dims: tuple[int, ...]
    factors: list[np.ndarray]

    @property
    def k(self) -> int:
        return self.factors[0].shape[1] if self.factors else 0

    def reconstruct(self) -> np.ndarray:
        return cp_reconstruct(self.factors, self.dims)


@dataclass
class TensorRecovery:
    tensor: np.ndarray
    factors: CpFactors


@dataclass
class CpFitResult:
    factors: CpFactors
    converged: bool
    iterations: int
    residual: float


def tensor_measurement_count(dims, k: int, c: float = 3.0) -> int:
    return math.ceil(c * max(k, 1) * sum(dims) * max(math.log2(math.prod(dims)), 1.0))


def cp_reconstruct(factors, dims) -> np.ndarray:
    if not factors or factors[0].shape[1] == 0:
        return np.zeros(dims)
    out = factors[0]
    for f in factors[1:]:
        out = np.einsum("ir,jr->ijr", out.reshape(-1, out.shape[-1]), f).reshape(-1, f.shape[1])
    return out.sum(axis=1).reshape(dims)


def _khatri_rao(mats) -> np.ndarray:
    out = mats[0]
    for m in mats[1:]:
        out = np.einsum("ir,jr->ijr", out, m).reshape(-1, m.shape[1])
    return out


def _unfold(t: np.ndarray, mode: int) -> np.ndarray:
    return np.moveaxis(t, mode, 0).reshape(t.shape[mode], -1)


def _rebalance(factors):
    norms = np.array([np.linalg.norm(f, axis=0) for f in factors])
    total = np.prod(norms, axis=0)
    d = len(factors)
    out = []
    for f, nrm in zip(factors, norms):
        safe = np.where(nrm > 0, nrm, 1.0)
        out.append(f / safe * total ** (1.0 / d))
    return out


def _init_factors(t: np.ndarray, k: int):
    out = []
    for mode in range(t.ndim):
        u, s, _ = np.linalg.svd(_unfold(t, mode), full_matrices=False)
        f = np.zeros((t.shape[mode], k))
        m = min(k, u.shape[1])
        f[:, :m] = u[:, :m]
        if m < k:
            # deterministic filler for k beyond the mode size
            f[:, m:] = np.random.default_rng(mode).standard_normal((t.shape[mode], k - m))
        out.append(f)
    scale = np.linalg.norm(t) ** (1.0 / t.ndim) if np.any(t) else 0.0
    return [f * scale for f in out]


def cp_als(t: np.ndarray, k: int, init=None, sweeps: int = 50, tol: float = 1e-13):
    """Rank-k CP approximation of a dense tensor by alternating least squares."""
    factors = [f.copy() for f in init] if init is not None else _init_factors(t, k)
    d = t.ndim
    nt = np.linalg.norm(t)
    prev = np.inf
    for _ in range(sweeps):
        for mode in range(d):
            others = [factors[j] for j in range(d) if j != mode]
            gram = np.ones((k, k))
            for f in others:
                gram *= f.T @ f
            mttkrp = _unfold(t, mode) @ _khatri_rao(others)
            factors[mode] = np.linalg.lstsq(gram, mttkrp.T, rcond=None)[0].T
        factors = _rebalance(factors)
        err = np.linalg.norm(cp_reconstruct(factors, t.shape) - t) / max(nt, 1e-300)
        if abs(prev - err) <= tol or err <= tol:
            break
        prev = err
    return factors


def cp_fit(w: RealSketch, dims, k: int, config: SolverConfig = DEFAULT_CONFIG) -> CpFitResult:
    """Iterative hard thresholding onto CP-rank <= k.

    Each step takes a gradient step on ||A vec(T) - w||^2 in dense tensor
    space, then projects back to a k-term CP model with warm-started ALS.
    """
    dims = tuple(dims)
    A = w.matrix()
    return _cp_fit_dense(A, w.w, dims, k, config)


def _cp_fit_dense(A, b, dims, k, config) -> CpFitResult:
    if k < 1:
        raise ParameterError("cp_fit needs k >= 1")
    zero = [np.zeros((n, k)) for n in dims]
    if not np.any(b):
        return CpFitResult(CpFactors(dims, zero), True, 0, 0.0)
    step = 1.0 / np.linalg.norm(A, 2) ** 2
    t = np.zeros(dims)
    factors = None
    res = 1.0
    it = 0
    for it in range(1, config.max_iters + 1):
        grad = (A.T @ (A @ t.ravel() - b)).reshape(dims)
        y = t - step * grad
        factors = cp_als(y, k, init=factors, sweeps=config.als_sweeps)
        t_new = cp_reconstruct(factors, dims)
        change = np.linalg.norm(t_new - t) / max(np.linalg.norm(t_new), 1.0)
        t = t_new
        res = _residual(A, b, t.ravel())
        if res <= config.tolerance or change < config.tolerance * 1e-2:
            break
    return CpFitResult(CpFactors(dims, factors), res <= config.tolerance, it, res)


def recover_tensor(sis: SisSketch, w: RealSketch, dims, k: int, beta: int,
                   config: SolverConfig = DEFAULT_CONFIG) -> RecoveryOutcome:
    dims = tuple(dims)
    if len(dims) < 2:
        raise ParameterError("tensor recovery needs order >= 2")
    check_same_stream(sis, w)
    stats = RecoveryStats()
    with Timer() as t:
        if k == 0:
            fit = CpFitResult(CpFactors(dims, [np.zeros((n, 0)) for n in dims]), True, 0, 0.0)
        else:
            fit = cp_fit(w, dims, k, config)
        stats.iterations, stats.converged, stats.candidates = fit.iterations, fit.converged, 1
        x = np.rint(fit.factors.reconstruct()).astype(np.int64)
        # CP-rank <= k is certified by the k-term factorization that produced x
        ok = np.abs(x).max(initial=0) <= beta and sis.verify(x)
    stats.wall_time = t.elapsed
    if ok:
        return RecoveryOutcome.ok(TensorRecovery(x, fit.factors), stats)
    return RecoveryOutcome.none(stats)


class TensorRecoverer:
    def __init__(self, dims, k: int, beta: int, seed=None,
                 config: SolverConfig = DEFAULT_CONFIG, **param_kw):
        self.dims = tuple(dims)
        self.params = SketchParams.for_tensor(self.dims, k, beta, seed, **param_kw)
        self.k, self.beta, self.config = k, beta, config
        self.alpha = tensor_measurement_count(self.dims, k, config.measurement_multiplier)
        self.sis = SisSketch(self.params)
        self.real = RealSketch(self.params, MatrixId.GAUSSIAN_A, self.alpha)

    def update(self, index, delta=None):
        u = index if isinstance(index, StreamUpdate) else StreamUpdate.of(index, delta)
        self.sis.update(u)
        self.real.update(u)
        return self

    def recover(self) -> RecoveryOutcome:
        return recover_tensor(self.sis, self.real, self.dims, self.k, self.beta, self.config)

    def state_bytes(self) -> bytes:
        return self.sis.to_bytes() + self.real.to_bytes()
