"""Streamed linear sketches: the SIS fingerprint v = H x mod q and real measurements w = A x."""
from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import MergeError, ParameterError, SketchStateError, UpdateError, VerifyError
from .oracle import GAUSSIAN_PRECISION, MatrixId, OracleTag, bernoulli_signs, gaussian_grid, sis_column
from .params import SketchParams, parse_config

Index = Union[int, tuple]

_MAGIC = b"WBSK"
_VERSION = 1
# int64 accumulators: |grid step| < 2**36, so total |delta| mass must stay below 2**26
_GAUSSIAN_MASS_LIMIT = 2**26


@dataclass(frozen=True)
class StreamUpdate:
    index: tuple[int, ...]
    delta: int

    @classmethod
    def of(cls, index: Index, delta: int) -> StreamUpdate:
        if isinstance(index, (int, np.integer)):
            index = (int(index),)
        return cls(tuple(int(i) for i in index), int(delta))


def flat_index(params: SketchParams, index: Index) -> int:
    if isinstance(index, (int, np.integer)):
        index = (int(index),)
    if len(index) != len(params.shape):
        raise UpdateError(f"index {index} has wrong arity for shape {params.shape}")
    for i, n in zip(index, params.shape):
        if not 0 <= i < n:
            raise UpdateError(f"index {index} outside shape {params.shape}")
    return int(np.ravel_multi_index(tuple(index), params.shape))


class _Streamed:
    params: SketchParams
    update_count: int
    frozen: bool

    def _check_update(self, u: StreamUpdate) -> int:
        if self.frozen:
            raise SketchStateError("sketch is finalized")
        cap = self.params.entry_bound_beta * self.params.dim_m
        if abs(u.delta) > cap:
            raise UpdateError(f"|delta| {abs(u.delta)} exceeds cap {cap}")
        return flat_index(self.params, u.index)

    def update(self, index: Index | StreamUpdate, delta: int | None = None):
        u = index if isinstance(index, StreamUpdate) else StreamUpdate.of(index, delta)
        col = self._check_update(u)
        self.update_count += 1
        if u.delta:
            self._apply(col, u.delta)
        return self

    def extend(self, updates):
        for u in updates:
            self.update(u)
        return self

    def finalize(self):
        self.frozen = True
        return self

    def _apply(self, col: int, delta: int) -> None:
        raise NotImplementedError


class SisSketch(_Streamed):
    """v = H x mod q with H's columns drawn from the oracle at update time."""

    def __init__(self, params: SketchParams):
        self.params = params
        self.v = np.zeros(params.rows, dtype=np.int64)
        self.update_count = 0
        self.frozen = False

    def column(self, col: int) -> np.ndarray:
        tag = OracleTag(self.params.oracle_seed, MatrixId.SIS_H, col)
        return sis_column(tag, self.params.rows, self.params.modulus_q)

    def _apply(self, col, delta):
        q = self.params.modulus_q
        self.v = (self.v + (delta % q) * self.column(col)) % q

    def sketch_of(self, obj) -> np.ndarray:
        """H vec(obj) mod q, streaming obj's nonzeros through oracle columns."""
        arr = np.asarray(obj)
        if arr.shape != self.params.shape:
            raise VerifyError(f"candidate shape {arr.shape} != {self.params.shape}")
        q = self.params.modulus_q
        acc = np.zeros(self.params.rows, dtype=np.int64)
        flat = arr.reshape(-1)
        for col in np.flatnonzero(flat):
            acc = (acc + (int(flat[col]) % q) * self.column(int(col))) % q
        return acc

    def verify(self, candidate) -> bool:
        return bool(np.array_equal(self.sketch_of(candidate), self.v))

    def merge(self, other: SisSketch) -> SisSketch:
        if not isinstance(other, SisSketch) or other.params != self.params:
            raise MergeError("can only merge sketches with identical params and seed")
        out = SisSketch(self.params)
        out.v = (self.v + other.v) % self.params.modulus_q
        out.update_count = self.update_count + other.update_count
        return out

    def __eq__(self, other):
        return (
            isinstance(other, SisSketch)
            and self.params == other.params
            and np.array_equal(self.v, other.v)
        )

    def to_bytes(self) -> bytes:
        return _pack(MatrixId.SIS_H, self.params.to_config(), self.update_count, self.v)

    @classmethod
    def from_bytes(cls, data: bytes) -> SisSketch:
        kind, header, count, payload = _unpack(data)
        if kind is not MatrixId.SIS_H:
            raise ParameterError("not a SIS sketch")
        out = cls(SketchParams.from_config(header))
        out.v = payload
        out.update_count = count
        return out


class RealSketch(_Streamed):
    """w = A x for a Bernoulli or grid-Gaussian A.

    Entries of A are fixed multiples of a common scale, so the sketch keeps an
    exact integer accumulator and scales on read; w carries no rounding error
    beyond the final float conversion.
    """

    def __init__(self, params: SketchParams, kind: MatrixId, alpha: int,
                 precision: int = GAUSSIAN_PRECISION):
        if kind is MatrixId.SIS_H:
            raise ParameterError("RealSketch kind must be BERNOULLI_A or GAUSSIAN_A")
        if alpha < 1:
            raise ParameterError("alpha must be >= 1")
        self.params = params
        self.kind = kind
        self.alpha = alpha
        self.precision = precision
        self.acc = np.zeros(alpha, dtype=np.int64)
        self.update_count = 0
        self.frozen = False
        self._mass = 0

    @property
    def scale(self) -> float:
        if self.kind is MatrixId.BERNOULLI_A:
            return 1.0 / np.sqrt(self.alpha)
        return 1.0 / (self.precision * np.sqrt(self.alpha))

    @property
    def w(self) -> np.ndarray:
        return self.acc.astype(np.float64) * self.scale

    def integer_column(self, col: int) -> np.ndarray:
        tag = OracleTag(self.params.oracle_seed, self.kind, col)
        if self.kind is MatrixId.BERNOULLI_A:
            return bernoulli_signs(tag, self.alpha)
        return gaussian_grid(tag, self.alpha, self.precision)

    def column(self, col: int) -> np.ndarray:
        return self.integer_column(col) * self.scale

    def matrix(self) -> np.ndarray:
        """Dense A (alpha x dim). Regenerated from the oracle for offline solving only."""
        cols = [self.integer_column(j) for j in range(self.params.dim_m)]
        return np.stack(cols, axis=1) * self.scale

    def _apply(self, col, delta):
        if self.kind is MatrixId.GAUSSIAN_A:
            self._mass += abs(delta)
            if self._mass > _GAUSSIAN_MASS_LIMIT:
                raise SketchStateError("gaussian accumulator would overflow int64")
        self.acc = self.acc + delta * self.integer_column(col)

    def merge(self, other: RealSketch) -> RealSketch:
        if (
            not isinstance(other, RealSketch)
            or other.params != self.params
            or (other.kind, other.alpha, other.precision) != (self.kind, self.alpha, self.precision)
        ):
            raise MergeError("can only merge identically configured real sketches")
        out = RealSketch(self.params, self.kind, self.alpha, self.precision)
        out.acc = self.acc + other.acc
        out.update_count = self.update_count + other.update_count
        out._mass = self._mass + other._mass
        return out

    def to_bytes(self) -> bytes:
        header = self.params.to_config() + f"alpha={self.alpha}\nprecision={self.precision}\n"
        return _pack(self.kind, header, self.update_count, self.acc)

    @classmethod
    def from_bytes(cls, data: bytes) -> RealSketch:
        kind, header, count, payload = _unpack(data)
        cfg = parse_config(header)
        out = cls(SketchParams.from_config(header), kind, int(cfg["alpha"]), int(cfg["precision"]))
        out.acc = payload
        out.update_count = count
        return out


def update(sketch, u: StreamUpdate):
    return sketch.update(u)


def merge(a, b):
    return a.merge(b)


def verify(sketch: SisSketch, candidate) -> bool:
    return sketch.verify(candidate)


def check_same_stream(*sketches) -> None:
    counts = {s.update_count for s in sketches}
    if len(counts) > 1:
        raise SketchStateError(f"paired sketches saw different stream lengths {sorted(counts)}")


def _pack(kind: MatrixId, header: str, count: int, payload: np.ndarray) -> bytes:
    head = header.encode()
    return (
        _MAGIC
        + struct.pack("<BBI", _VERSION, int(kind), len(head))
        + head
        + struct.pack("<QI", count, payload.size)
        + payload.astype("<i8").tobytes()
    )


def _unpack(data: bytes):
    if data[:4] != _MAGIC:
        raise ParameterError("bad sketch magic")
    version, kind, hlen = struct.unpack_from("<BBI", data, 4)
    if version != _VERSION:
        raise ParameterError(f"unsupported sketch version {version}")
    off = 10
    header = data[off:off + hlen].decode()
    off += hlen
    count, size = struct.unpack_from("<QI", data, off)
    off += 12
    payload = np.frombuffer(data, dtype="<i8", count=size, offset=off).astype(np.int64)
    return MatrixId(kind), header, count, payload
