from fractions import Fraction

import numpy as np
import pytest

from wbstream.sketch import StreamUpdate


def trial_division_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


def fraction_rank(m) -> int:
    """Rank over Q by plain Gaussian elimination on Fractions."""
    rows = [[Fraction(int(x)) for x in row] for row in np.atleast_2d(np.asarray(m))]
    rank, ncols = 0, len(rows[0]) if rows else 0
    for c in range(ncols):
        pivot = next((r for r in range(rank, len(rows)) if rows[r][c] != 0), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        for r in range(len(rows)):
            if r != rank and rows[r][c] != 0:
                f = rows[r][c] / rows[rank][c]
                rows[r] = [a - f * b for a, b in zip(rows[r], rows[rank])]
        rank += 1
    return rank


def churned_updates(rng, target: np.ndarray, extra_pairs: int = 3):
    """Shuffled updates summing to ``target``, split into pieces plus cancelling pairs."""
    shape = target.shape
    plan = []
    for idx in zip(*np.nonzero(target)):
        val = int(target[idx])
        cut = int(rng.integers(-abs(val), abs(val) + 1))
        plan += [(idx, cut), (idx, val - cut)]
    for _ in range(extra_pairs):
        idx = tuple(int(rng.integers(s)) for s in shape)
        d = int(rng.integers(1, 10))
        plan += [(idx, d), (idx, -d)]
    order = rng.permutation(len(plan))
    return [StreamUpdate(tuple(int(i) for i in plan[j][0]), plan[j][1]) for j in order]


def random_sparse(rng, n: int, nnz: int, beta: int) -> np.ndarray:
    x = np.zeros(n, dtype=np.int64)
    support = rng.choice(n, size=nnz, replace=False)
    x[support] = rng.integers(1, beta + 1, size=nnz) * rng.choice([-1, 1], size=nnz)
    return x


def planted_lowrank(rng, n: int, k: int, entry: int = 2) -> np.ndarray:
    """Integer matrix of rank exactly k with factor entries in [-entry, entry]."""
    while True:
        U = rng.integers(-entry, entry + 1, size=(n, k))
        V = rng.integers(-entry, entry + 1, size=(n, k))
        m = U @ V.T
        if fraction_rank(m) == k:
            return m.astype(np.int64)


@pytest.fixture
def rng():
    return np.random.default_rng(20261015)
