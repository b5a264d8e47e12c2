"""Text stream files.

A file is an optional header line followed by update lines, all indices 1-based::

    vector n=8          v <i> <delta>
    matrix n=8          m <row> <col> <delta>
    tensor dims=4,4,4   t <i1> ... <id> <delta>
    graph n=10          e <u> <v> <+1|-1>

``#`` starts a comment. Parsed updates use 0-based indices.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, TextIO

from .errors import BoundsError, StreamParseError
from .matching import EdgeUpdate
from .sketch import StreamUpdate

_TAGS = {"vector": "v", "matrix": "m", "tensor": "t", "graph": "e"}


@dataclass(frozen=True)
class StreamHeader:
    kind: str
    shape: tuple[int, ...]

    def __post_init__(self):
        if self.kind not in _TAGS:
            raise StreamParseError(f"unknown stream kind {self.kind!r}")
        if not self.shape or min(self.shape) < 1:
            raise StreamParseError(f"bad shape {self.shape}")

    @property
    def tag(self) -> str:
        return _TAGS[self.kind]

    def line(self) -> str:
        if self.kind == "tensor":
            return "tensor dims=" + ",".join(map(str, self.shape))
        return f"{self.kind} n={self.shape[0]}"

    @classmethod
    def of(cls, kind: str, n: int | None = None, dims=None) -> StreamHeader:
        if kind == "tensor":
            return cls(kind, tuple(dims))
        if kind == "matrix":
            return cls(kind, (n, n))
        return cls(kind, (n,))


def parse_header(line: str, lineno: int = 1) -> StreamHeader:
    parts = line.split()
    if len(parts) != 2 or "=" not in parts[1]:
        raise StreamParseError(f"malformed header {line!r}", lineno)
    kind = parts[0]
    key, _, value = parts[1].partition("=")
    try:
        if kind == "tensor" and key == "dims":
            return StreamHeader(kind, tuple(int(x) for x in value.split(",")))
        if kind in ("vector", "matrix", "graph") and key == "n":
            return StreamHeader.of(kind, int(value))
    except ValueError:
        pass
    raise StreamParseError(f"malformed header {line!r}", lineno)


def _strip(raw: str) -> str:
    return raw.split("#", 1)[0].strip()


def parse_stream(reader: Iterable[str], header: StreamHeader | None = None
                 ) -> tuple[StreamHeader, Iterator]:
    """Read the header (or use the given one) and return a lazy update iterator.

    When the file carries a header and ``header`` is also given, they must agree.
    """
    lines = iter(enumerate(reader, 1))
    first = None
    for lineno, raw in lines:
        text = _strip(raw)
        if text:
            first = (lineno, text)
            break
    if first is not None and first[1].split()[0] in _TAGS:
        found = parse_header(first[1], first[0])
        if header is not None and found != header:
            raise StreamParseError(f"header {found.line()!r} disagrees with {header.line()!r}",
                                   first[0])
        header, first = found, None
    if header is None:
        raise StreamParseError("missing stream header", first[0] if first else 1)

    def gen():
        if first is not None:
            yield _parse_line(header, *first)
        for lineno, raw in lines:
            text = _strip(raw)
            if text:
                yield _parse_line(header, lineno, text)

    return header, gen()


def _parse_line(header: StreamHeader, lineno: int, text: str):
    parts = text.split()
    if parts[0] != header.tag:
        raise StreamParseError(f"line tag {parts[0]!r} does not match {header.kind} stream", lineno)
    arity = 2 if header.kind == "graph" else len(header.shape)
    if len(parts) != arity + 2:
        raise StreamParseError(f"expected {arity} indices and a delta", lineno)
    try:
        nums = [int(p) for p in parts[1:]]
    except ValueError:
        raise StreamParseError(f"non-integer field in {text!r}", lineno) from None
    idx, delta = nums[:-1], nums[-1]
    bounds = (header.shape[0],) * 2 if header.kind == "graph" else header.shape
    for i, n in zip(idx, bounds):
        if not 1 <= i <= n:
            raise BoundsError(f"index {i} outside 1..{n}", lineno)
    zero = tuple(i - 1 for i in idx)
    if header.kind == "graph":
        u, v = zero
        if u == v or delta not in (1, -1):
            raise StreamParseError("edge needs distinct endpoints and delta +1/-1", lineno)
        return EdgeUpdate(min(u, v), max(u, v), delta)
    return StreamUpdate(zero, delta)


def format_update(header: StreamHeader, u) -> str:
    if isinstance(u, EdgeUpdate):
        return f"e {u.u + 1} {u.v + 1} {u.delta:+d}"
    return " ".join([header.tag, *(str(i + 1) for i in u.index), str(u.delta)])


def serialize_stream(header: StreamHeader, updates: Iterable) -> str:
    return "\n".join([header.line(), *(format_update(header, u) for u in updates)]) + "\n"


def read_stream(fh: TextIO, header: StreamHeader | None = None):
    return parse_stream(fh, header)
