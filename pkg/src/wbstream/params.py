"""Sketch parameters, modulus selection and signed residue arithmetic over Z_q."""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from typing import Sequence

from .errors import ParameterError

# residues stay below 2**31 so a product of two fits in int64
MAX_MODULUS = 2**31 - 1

SEED_BYTES = 32
DEFAULT_SEED = hashlib.sha256(b"wbstream default oracle seed").digest()

_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, exact for n < 3.3e24."""
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def next_prime(n: int) -> int:
    """Smallest prime >= n."""
    n = max(n, 2)
    while not is_prime(n):
        n += 1
    return n


def choose_modulus(rows: int, beta: int, dim: int, max_updates: int) -> int:
    """Smallest prime q with q >= rows*beta and q > 2*beta*dim*max_updates."""
    if min(rows, beta, dim, max_updates) < 1:
        raise ParameterError("choose_modulus inputs must all be >= 1")
    bound = max(rows * beta, 2 * beta * dim * max_updates + 1)
    if bound > MAX_MODULUS:
        raise ParameterError(f"modulus bound {bound} exceeds {MAX_MODULUS}")
    q = next_prime(bound)
    if q > MAX_MODULUS:
        raise ParameterError(f"no prime modulus <= {MAX_MODULUS} above {bound}")
    return q


def signed_residue(value: int, q: int) -> int:
    """Representative of value mod q in (-q/2, q/2]."""
    r = value % q
    return r - q if 2 * r > q else r


def mod_add(a: int, b: int, q: int) -> int:
    return (a + b) % q


def mod_sub(a: int, b: int, q: int) -> int:
    return (a - b) % q


def mod_mul(a: int, b: int, q: int) -> int:
    return a * b % q


def log_factor(n: int) -> int:
    """ceil(log2 n), floored at 1 so degenerate shapes still get a row."""
    return max(1, math.ceil(math.log2(max(n, 2))))


def row_multiplier(k: int, dim: int) -> int:
    """f(k) = k * ceil(log2 max(dim, 4)); k = 0 is treated as k = 1."""
    return max(k, 1) * math.ceil(math.log2(max(dim, 4)))


def vector_rows(n: int, k: int) -> int:
    return row_multiplier(k, n) * log_factor(n)


def matrix_rows(n: int, k: int) -> int:
    return row_multiplier(k, n * n) * n * log_factor(n)


def rpca_rows(n: int, k: int, r: int) -> int:
    return (row_multiplier(k, n * n) * n + r) * log_factor(n)


def tensor_rows(dims: Sequence[int], k: int) -> int:
    total = math.prod(dims)
    return row_multiplier(k, total) * sum(dims) * log_factor(total)


def parse_seed(seed: str | bytes | None) -> bytes:
    if seed is None:
        return DEFAULT_SEED
    if isinstance(seed, str):
        try:
            seed = bytes.fromhex(seed)
        except ValueError as exc:
            raise ParameterError(f"seed is not hex: {exc}") from None
    if len(seed) != SEED_BYTES:
        raise ParameterError(f"seed must be {SEED_BYTES} bytes, got {len(seed)}")
    return bytes(seed)


@dataclass(frozen=True)
class SketchParams:
    """Integer parameters of one SIS sketch.

    ``shape`` is the stream object's shape; ``dim_m`` is its flattened length.
    ``max_updates`` is the per-coordinate update multiplicity budget that
    enters the modulus bound.
    """

    shape: tuple[int, ...]
    sparsity_k: int
    entry_bound_beta: int
    modulus_q: int
    rows: int
    oracle_seed: bytes = DEFAULT_SEED
    row_multiplier: int = 1
    max_updates: int = 1

    def __post_init__(self):
        object.__setattr__(self, "shape", tuple(int(s) for s in self.shape))
        if not self.shape or min(self.shape) < 1:
            raise ParameterError(f"bad shape {self.shape}")
        if self.rows < 1 or self.sparsity_k < 0 or self.entry_bound_beta < 1:
            raise ParameterError("need rows >= 1, k >= 0, beta >= 1")
        if len(self.oracle_seed) != SEED_BYTES:
            raise ParameterError("oracle seed must be 32 bytes")
        q = self.modulus_q
        if q > MAX_MODULUS or not is_prime(q):
            raise ParameterError(f"modulus {q} must be a prime <= {MAX_MODULUS}")
        if q < self.rows * self.entry_bound_beta:
            raise ParameterError(f"modulus {q} < rows*beta")
        if q <= 2 * self.entry_bound_beta * self.dim_m * self.max_updates:
            raise ParameterError(f"modulus {q} <= 2*beta*dim*max_updates")

    @property
    def dim_m(self) -> int:
        return math.prod(self.shape)

    @classmethod
    def build(
        cls,
        shape: Sequence[int],
        k: int,
        beta: int,
        rows: int,
        seed: str | bytes | None = None,
        q: int | None = None,
        max_updates: int = 1,
    ) -> SketchParams:
        dim = math.prod(shape)
        if q is None:
            q = choose_modulus(rows, beta, dim, max_updates)
        return cls(
            shape=tuple(shape),
            sparsity_k=k,
            entry_bound_beta=beta,
            modulus_q=q,
            rows=rows,
            oracle_seed=parse_seed(seed),
            row_multiplier=row_multiplier(k, dim),
            max_updates=max_updates,
        )

    @classmethod
    def for_vector(cls, n: int, k: int, beta: int, seed=None, **kw) -> SketchParams:
        rows = kw.pop("rows", None) or vector_rows(n, k)
        return cls.build((n,), k, beta, rows, seed, **kw)

    @classmethod
    def for_matrix(cls, n: int, k: int, beta: int, seed=None, **kw) -> SketchParams:
        rows = kw.pop("rows", None) or matrix_rows(n, k)
        return cls.build((n, n), k, beta, rows, seed, **kw)

    @classmethod
    def for_rpca(cls, n: int, k: int, r: int, beta: int, seed=None, **kw) -> SketchParams:
        rows = kw.pop("rows", None) or rpca_rows(n, k, r)
        return cls.build((n, n), k, beta, rows, seed, **kw)

    @classmethod
    def for_tensor(cls, dims: Sequence[int], k: int, beta: int, seed=None, **kw) -> SketchParams:
        rows = kw.pop("rows", None) or tensor_rows(dims, k)
        return cls.build(tuple(dims), k, beta, rows, seed, **kw)

    def to_config(self) -> str:
        lines = [
            f"shape={'x'.join(map(str, self.shape))}",
            f"k={self.sparsity_k}",
            f"beta={self.entry_bound_beta}",
            f"rows={self.rows}",
            f"q={self.modulus_q}",
            f"seed={self.oracle_seed.hex()}",
            f"max_updates={self.max_updates}",
        ]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_config(cls, text: str) -> SketchParams:
        cfg = parse_config(text)
        if "shape" in cfg:
            shape = tuple(int(s) for s in cfg["shape"].split("x"))
        elif "dim" in cfg:
            shape = (int(cfg["dim"]),)
        else:
            raise ParameterError("config needs dim= or shape=")
        try:
            k = int(cfg["k"])
            beta = int(cfg["beta"])
        except KeyError as exc:
            raise ParameterError(f"config missing {exc.args[0]}=") from None
        mu = int(cfg.get("max_updates", 1))
        rows = int(cfg["rows"]) if "rows" in cfg else None
        if rows is None:
            if len(shape) == 1:
                rows = vector_rows(shape[0], k)
            elif len(shape) == 2 and shape[0] == shape[1]:
                rows = matrix_rows(shape[0], k)
            else:
                rows = tensor_rows(shape, k)
        q = int(cfg["q"]) if "q" in cfg else None
        return cls.build(shape, k, beta, rows, cfg.get("seed"), q, mu)


def parse_config(text: str) -> dict[str, str]:
    """Parse ``key=value`` lines; ``#`` starts a comment."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep or not key.strip():
            raise ParameterError(f"config line {lineno}: expected key=value")
        out[key.strip()] = value.strip()
    return out
