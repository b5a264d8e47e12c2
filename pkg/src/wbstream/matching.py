"""Maximum matching on edge insert/delete streams via a deterministically filled Tutte matrix.

Every live edge {u, v} with u < v contributes +1 at (u, v) and -1 at (v, u).
The resulting skew matrix has rank at most twice the maximum matching size,
so a failed rank-2k' recovery certifies a matching larger than k'.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import IntegrityError, UpdateError
from .lowrank import DEFAULT_CONFIG, MatrixRecoverer, SolverConfig, recover_matrix
from .sketch import StreamUpdate


@dataclass(frozen=True)
class EdgeUpdate:
    u: int
    v: int
    delta: int = 1

    def __post_init__(self):
        if not self.u < self.v:
            raise UpdateError(f"edge ({self.u}, {self.v}) needs u < v")
        if self.delta not in (1, -1):
            raise UpdateError("edge delta must be +1 or -1")


@dataclass(frozen=True)
class LargerThan:
    k_prime: int

    def __str__(self):
        return f"LARGER_THAN {self.k_prime}"


@dataclass(frozen=True)
class MaximumMatching:
    edges: frozenset

    @property
    def size(self) -> int:
        return len(self.edges)


def tutte_stream_update(state, e: EdgeUpdate):
    state.update(StreamUpdate((e.u, e.v), e.delta))
    state.update(StreamUpdate((e.v, e.u), -e.delta))
    return state


def graph_from_tutte(a) -> list[tuple[int, int]]:
    a = np.asarray(a)
    if np.any(np.diag(a)) or not np.array_equal(a, -a.T):
        raise IntegrityError("recovered Tutte matrix is not skew-symmetric")
    upper = np.triu(a, 1)
    if np.any((upper != 0) & (upper != 1)):
        raise IntegrityError("recovered Tutte matrix has entries outside {0, 1} above the diagonal")
    return [(int(i), int(j)) for i, j in zip(*np.nonzero(upper))]


def blossom_matching(n: int, edges) -> set[tuple[int, int]]:
    """Maximum cardinality matching in a general graph (Edmonds, O(V^3))."""
    adj = [[] for _ in range(n)]
    for u, v in edges:
        if u != v:
            adj[u].append(v)
            adj[v].append(u)
    match = [-1] * n

    def find_path(root):
        used = [False] * n
        parent = [-1] * n
        base = list(range(n))
        used[root] = True
        queue = deque([root])

        def lca(a, b):
            seen = [False] * n
            while True:
                a = base[a]
                seen[a] = True
                if match[a] == -1:
                    break
                a = parent[match[a]]
            while True:
                b = base[b]
                if seen[b]:
                    return b
                b = parent[match[b]]

        def mark_path(v, b, child, blossom):
            while base[v] != b:
                blossom[base[v]] = blossom[base[match[v]]] = True
                parent[v] = child
                child = match[v]
                v = parent[match[v]]

        while queue:
            v = queue.popleft()
            for to in adj[v]:
                if base[v] == base[to] or match[v] == to:
                    continue
                if to == root or (match[to] != -1 and parent[match[to]] != -1):
                    cur = lca(v, to)
                    blossom = [False] * n
                    mark_path(v, cur, to, blossom)
                    mark_path(to, cur, v, blossom)
                    for i in range(n):
                        if blossom[base[i]]:
                            base[i] = cur
                            if not used[i]:
                                used[i] = True
                                queue.append(i)
                elif parent[to] == -1:
                    parent[to] = v
                    if match[to] == -1:
                        return to, parent
                    used[match[to]] = True
                    queue.append(match[to])
        return -1, parent

    for root in range(n):
        if match[root] != -1:
            continue
        end, parent = find_path(root)
        while end != -1:
            pv = parent[end]
            nxt = match[pv]
            match[end], match[pv] = pv, end
            end = nxt
    return {(v, match[v]) for v in range(n) if match[v] > v}


def max_matching(sis, w, n: int, k_prime: int, beta: int = 1,
                 config: SolverConfig = DEFAULT_CONFIG):
    out = recover_matrix(sis, w, 2 * k_prime, beta, config)
    if not out.recovered:
        return LargerThan(k_prime)
    edges = graph_from_tutte(out.value)
    return MaximumMatching(frozenset(blossom_matching(n, edges)))


class MatchingSketch:
    """Tutte-matrix sketches for a graph on vertices 0..n-1."""

    def __init__(self, n: int, k_prime: int, seed=None,
                 config: SolverConfig = DEFAULT_CONFIG, **param_kw):
        self.n, self.k_prime, self.config = n, k_prime, config
        self.matrix = MatrixRecoverer(n, 2 * k_prime, 1, seed, config, **param_kw)

    def update(self, u: int, v: int | None = None, delta: int = 1):
        e = u if isinstance(u, EdgeUpdate) else EdgeUpdate(u, v, delta)
        if e.v >= self.n:
            raise UpdateError(f"vertex {e.v} outside [0, {self.n})")
        tutte_stream_update(self.matrix, e)
        return self

    def query(self):
        m = self.matrix
        return max_matching(m.sis, m.real, self.n, self.k_prime, 1, self.config)

    def state_bytes(self) -> bytes:
        return self.matrix.state_bytes()
