"""Seeded random-oracle stand-in that regenerates sketch matrix columns on demand.

Every output is a pure function of an :class:`OracleTag`: SHAKE-256 over a
domain-separated encoding of the tag, so repeated queries agree byte for byte
and no sketching matrix is ever stored.
"""
from __future__ import annotations

import enum
import hashlib
import struct
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

GAUSSIAN_PRECISION = 2**32

_DOMAIN = b"wbstream/oracle/v1"


class MatrixId(enum.IntEnum):
    SIS_H = 1
    BERNOULLI_A = 2
    GAUSSIAN_A = 3


@dataclass(frozen=True)
class OracleTag:
    seed: bytes
    matrix_id: MatrixId
    column_index: int
    row_block: int = 0

    def encode(self) -> bytes:
        return (
            _DOMAIN
            + self.seed
            + struct.pack("<BQQ", int(self.matrix_id), self.column_index, self.row_block)
        )


def oracle_bytes(tag: OracleTag, nbytes: int) -> bytes:
    # SHAKE output is prefix-consistent, so asking for more never changes earlier bytes
    return hashlib.shake_256(tag.encode()).digest(nbytes)


def _words(tag: OracleTag, count: int) -> np.ndarray:
    return np.frombuffer(oracle_bytes(tag, 8 * count), dtype="<u8")


def sis_column(tag: OracleTag, rows: int, q: int) -> np.ndarray:
    """``rows`` uniform residues in [0, q) by rejection sampling 64-bit words."""
    if tag.matrix_id is not MatrixId.SIS_H:
        raise ValueError("sis_column needs a SIS_H tag")
    limit = np.uint64((2**64 // q) * q)
    want = rows + 4
    while True:
        words = _words(tag, want)
        kept = words[words < limit]
        if kept.size >= rows:
            return (kept[:rows] % np.uint64(q)).astype(np.int64)
        want *= 2


def bernoulli_signs(tag: OracleTag, rows: int) -> np.ndarray:
    """``rows`` signs in {+1, -1}, one pseudorandom bit each."""
    if tag.matrix_id is not MatrixId.BERNOULLI_A:
        raise ValueError("bernoulli_signs needs a BERNOULLI_A tag")
    raw = np.frombuffer(oracle_bytes(tag, (rows + 7) // 8), dtype=np.uint8)
    bits = np.unpackbits(raw, bitorder="little")[:rows]
    return 1 - 2 * bits.astype(np.int64)


def bernoulli_column(tag: OracleTag, rows: int, alpha: int) -> np.ndarray:
    return bernoulli_signs(tag, rows) / np.sqrt(alpha)


def gaussian_grid(tag: OracleTag, rows: int, precision: int = GAUSSIAN_PRECISION) -> np.ndarray:
    """Standard normals rounded to multiples of 1/precision, returned as integer grid steps."""
    if tag.matrix_id is not MatrixId.GAUSSIAN_A:
        raise ValueError("gaussian_grid needs a GAUSSIAN_A tag")
    if precision < 2**16:
        raise ValueError("precision must be at least 2**16")
    words = _words(tag, rows)
    # top 53 bits give an exactly representable uniform strictly inside (0, 1)
    u = ((words >> np.uint64(11)).astype(np.float64) + 0.5) / 2.0**53
    return np.rint(ndtri(u) * precision).astype(np.int64)


def gaussian_column(tag: OracleTag, rows: int, precision: int = GAUSSIAN_PRECISION) -> np.ndarray:
    return gaussian_grid(tag, rows, precision) / (precision * np.sqrt(rows))


def materialize(seed: bytes, matrix_id: MatrixId, rows: int, cols: int, **kw) -> np.ndarray:
    """Dense ``rows x cols`` matrix, column by column. Only used by offline solvers and tests."""
    out = np.empty((rows, cols), dtype=np.float64 if matrix_id is not MatrixId.SIS_H else np.int64)
    for j in range(cols):
        tag = OracleTag(seed, matrix_id, j)
        if matrix_id is MatrixId.SIS_H:
            out[:, j] = sis_column(tag, rows, kw["q"])
        elif matrix_id is MatrixId.BERNOULLI_A:
            out[:, j] = bernoulli_column(tag, rows, kw.get("alpha", rows))
        else:
            out[:, j] = gaussian_column(tag, rows, kw.get("precision", GAUSSIAN_PRECISION))
    return out
