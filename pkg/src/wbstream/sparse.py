"""k-sparse vector recovery with dense-input detection, and l0 estimation.

Two recovery routes share the SIS fingerprint as the final arbiter:

* :func:`enumerate_recover` tries every k-sparse candidate (exponential, desk scale only);
* :func:`fast_recover` decodes a deterministic power-sum syndrome sketch and
  accepts the decoded vector only if it is k-sparse, bounded and matches the
  SIS sketch.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import CapacityError, ParameterError, SketchStateError, UpdateError
from .outcome import RecoveryOutcome, RecoveryStats, Timer
from .params import SketchParams, is_prime, signed_residue
from .sketch import Index, SisSketch, StreamUpdate, check_same_stream

DECODER_PRIME = 2**31 - 1
DECODER_GENERATOR = 7  # primitive root of 2**31 - 1

ENUMERATION_GUARD_BITS = 40


@dataclass(frozen=True)
class SparseVector:
    dim: int
    entries: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        idx = [i for i, _ in self.entries]
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise ValueError("indices must be strictly increasing")
        if any(v == 0 for _, v in self.entries):
            raise ValueError("stored values must be nonzero")
        if idx and not (0 <= idx[0] and idx[-1] < self.dim):
            raise ValueError("index outside dimension")

    @classmethod
    def from_dense(cls, x) -> SparseVector:
        x = np.asarray(x)
        nz = np.flatnonzero(x)
        return cls(int(x.size), tuple((int(i), int(x[i])) for i in nz))

    @classmethod
    def from_dict(cls, dim: int, values: dict[int, int]) -> SparseVector:
        return cls(dim, tuple(sorted((i, v) for i, v in values.items() if v)))

    def to_dense(self) -> np.ndarray:
        x = np.zeros(self.dim, dtype=np.int64)
        for i, v in self.entries:
            x[i] = v
        return x

    def as_dict(self) -> dict[int, int]:
        return dict(self.entries)

    @property
    def nnz(self) -> int:
        return len(self.entries)


# -- deterministic syndrome sketch ------------------------------------------------


@dataclass
class DetState:
    """Power-sum syndromes s_j = sum_i x_i g^(i j) mod p, j = 0 .. 2k-1.

    Exact for any k-sparse integer x whose entries lift uniquely from Z_p,
    i.e. |x_i| < p/2. Decoding is Berlekamp-Massey plus a Chien search.
    """

    n: int
    k: int
    p: int = DECODER_PRIME
    g: int = DECODER_GENERATOR
    syndromes: list[int] = field(default_factory=list)
    update_count: int = 0

    def __post_init__(self):
        if not is_prime(self.p) or self.p <= self.n + 1 or self.p > 2**31 - 1:
            raise ParameterError("decoder prime must satisfy n+1 < p < 2**31")
        if self.k < 0:
            raise ParameterError("k must be >= 0")
        if not self.syndromes:
            self.syndromes = [0] * (2 * self.k)
        self._inv_powers = None

    def update(self, index: Index | StreamUpdate, delta: int | None = None) -> DetState:
        u = index if isinstance(index, StreamUpdate) else StreamUpdate.of(index, delta)
        (i,) = u.index
        if not 0 <= i < self.n:
            raise UpdateError(f"index {i} outside [0, {self.n})")
        self.update_count += 1
        p = self.p
        a = pow(self.g, i, p)
        term = u.delta % p
        for j in range(2 * self.k):
            self.syndromes[j] = (self.syndromes[j] + term) % p
            term = term * a % p
        return self

    def inverse_powers(self) -> np.ndarray:
        if self._inv_powers is None:
            ginv = pow(self.g, self.p - 2, self.p)
            out = np.empty(self.n, dtype=np.int64)
            acc = 1
            for i in range(self.n):
                out[i] = acc
                acc = acc * ginv % self.p
            self._inv_powers = out
        return self._inv_powers

    def words(self) -> int:
        return len(self.syndromes)


def det_update(state: DetState, u: StreamUpdate) -> DetState:
    return state.update(u)


def berlekamp_massey(seq: list[int], p: int) -> list[int]:
    """Shortest connection polynomial C (C[0] = 1) generating ``seq`` over GF(p)."""
    C, B = [1], [1]
    L, m, b = 0, 1, 1
    for n, s in enumerate(seq):
        d = s
        for i in range(1, L + 1):
            d = (d + C[i] * seq[n - i]) % p
        if d == 0:
            m += 1
            continue
        coef = d * pow(b, p - 2, p) % p
        T = list(C)
        C = C + [0] * max(0, len(B) + m - len(C))
        for i, bi in enumerate(B):
            C[i + m] = (C[i + m] - coef * bi) % p
        if 2 * L <= n:
            L, B, b, m = n + 1 - L, T, d, 1
        else:
            m += 1
    return (C + [0] * (L + 1))[: L + 1]


def _poly_roots(coeffs: list[int], points: np.ndarray, p: int) -> np.ndarray:
    """Indices of ``points`` where the polynomial (low-to-high coeffs) vanishes mod p."""
    acc = np.zeros(points.shape, dtype=np.int64)
    for c in reversed(coeffs):
        acc = (acc * points + c) % p
    return np.flatnonzero(acc == 0)


def solve_mod(a: list[list[int]], b: list[int], p: int) -> list[int] | None:
    """Solve a square system over GF(p); None when singular."""
    n = len(b)
    m = [list(row) + [rhs] for row, rhs in zip(a, b)]
    for col in range(n):
        piv = next((r for r in range(col, n) if m[r][col] % p), None)
        if piv is None:
            return None
        m[col], m[piv] = m[piv], m[col]
        inv = pow(m[col][col], p - 2, p)
        m[col] = [x * inv % p for x in m[col]]
        for r in range(n):
            if r != col and m[r][col]:
                f = m[r][col]
                m[r] = [(x - f * y) % p for x, y in zip(m[r], m[col])]
    return [row[n] for row in m]


def det_decode(state: DetState, beta: int | None = None) -> SparseVector | None:
    """Decode the syndromes; None is the failure verdict."""
    p, s = state.p, state.syndromes
    if not any(s):
        return SparseVector(state.n)
    C = berlekamp_massey(s, p)
    L = len(C) - 1
    if L > state.k:
        return None
    roots = _poly_roots(C, state.inverse_powers(), p)
    if len(roots) != L:
        return None
    points = [pow(state.g, int(i), p) for i in roots]
    vander = [[pow(a, j, p) for a in points] for j in range(L)]
    vals = solve_mod(vander, s[:L], p)
    if vals is None:
        return None
    for j in range(L, len(s)):
        if sum(v * pow(a, j, p) for v, a in zip(vals, points)) % p != s[j]:
            return None
    lifted = [signed_residue(v, p) for v in vals]
    if any(v == 0 for v in lifted):
        return None
    if beta is not None and any(abs(v) > beta for v in lifted):
        return None
    return SparseVector(state.n, tuple(zip((int(i) for i in roots), lifted)))


# -- recovery --------------------------------------------------------------------


def fast_recover(sis: SisSketch, det: DetState, k: int, beta: int) -> RecoveryOutcome:
    check_same_stream(sis, det)
    stats = RecoveryStats(iterations=1)
    with Timer() as t:
        y = det_decode(det, beta)
        ok = False
        if y is not None and y.nnz <= k and all(abs(v) <= beta for _, v in y.entries):
            stats.candidates = 1
            ok = sis.verify(y.to_dense())
    stats.wall_time = t.elapsed
    return RecoveryOutcome.ok(y, stats) if ok else RecoveryOutcome.none(stats)


def enumeration_cost_bits(dim: int, k: int, beta: int) -> float:
    return k * (math.log2(max(dim, 2)) + math.log2(2 * beta + 1))


def _nonzero_values(beta: int, size: int) -> np.ndarray:
    vals = [v for v in range(-beta, beta + 1) if v]
    combos = list(itertools.product(vals, repeat=size))
    return np.array(combos, dtype=np.int64).reshape(len(combos), size)


def enumerate_recover(sis: SisSketch, k: int, beta: int) -> RecoveryOutcome:
    """First k-sparse y (support size, then support, then values, lexicographic) with H y = v."""
    n = sis.params.dim_m
    if enumeration_cost_bits(n, k, beta) > ENUMERATION_GUARD_BITS:
        raise CapacityError("enumeration too large; use fast_recover")
    q = sis.params.modulus_q
    stats = RecoveryStats()
    with Timer() as t:
        H = np.stack([sis.column(j) for j in range(n)], axis=1)
        found = None
        for size in range(0, min(k, n) + 1):
            values = _nonzero_values(beta, size)
            for support in itertools.combinations(range(n), size):
                stats.iterations += 1
                sketches = (values @ H[:, list(support)].T) % q
                stats.candidates += len(values)
                hits = np.flatnonzero((sketches == sis.v).all(axis=1))
                if hits.size:
                    row = values[hits[0]]
                    found = SparseVector(n, tuple(zip(support, (int(v) for v in row))))
                    break
            if found is not None:
                break
    stats.wall_time = t.elapsed
    return RecoveryOutcome.ok(found, stats) if found is not None else RecoveryOutcome.none(stats)


def l0_sparsity(n: int, eps) -> int:
    """floor(n^(1-eps)) computed exactly for rational eps."""
    e = Fraction(str(eps)) if isinstance(eps, float) else Fraction(eps)
    if not 0 < e < 1:
        raise ParameterError("eps must lie in (0, 1)")
    a, b = (1 - e).numerator, (1 - e).denominator
    target = n**a
    # integer b-th root of n^a
    lo, hi = 0, n
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if mid**b <= target:
            lo = mid
        else:
            hi = mid - 1
    return lo


def estimate_l0(sis: SisSketch, det: DetState, eps, beta: int) -> int:
    k = l0_sparsity(sis.params.dim_m, eps)
    if det.k != k:
        raise ParameterError(f"decoder built for k={det.k}, eps needs k={k}")
    out = fast_recover(sis, det, k, beta)
    return out.value.nnz if out.recovered else k


class SparseRecoverer:
    """SIS sketch and syndrome state fed from one stream."""

    def __init__(self, n: int, k: int, beta: int, seed=None, **param_kw):
        self.params = SketchParams.for_vector(n, k, beta, seed, **param_kw)
        self.k, self.beta = k, beta
        self.sis = SisSketch(self.params)
        self.det = DetState(n, k)

    def update(self, index, delta=None):
        u = index if isinstance(index, StreamUpdate) else StreamUpdate.of(index, delta)
        self.sis.update(u)
        self.det.update(u)
        return self

    def recover(self, fast: bool = True) -> RecoveryOutcome:
        if fast:
            return fast_recover(self.sis, self.det, self.k, self.beta)
        return enumerate_recover(self.sis, self.k, self.beta)

    def state_bytes(self) -> bytes:
        det = b"".join(s.to_bytes(8, "little") for s in self.det.syndromes)
        return self.sis.to_bytes() + det


class L0Estimator(SparseRecoverer):
    def __init__(self, n: int, eps, beta: int, seed=None, **param_kw):
        self.eps = eps
        super().__init__(n, l0_sparsity(n, eps), beta, seed, **param_kw)

    def estimate(self) -> int:
        return estimate_l0(self.sis, self.det, self.eps, self.beta)
