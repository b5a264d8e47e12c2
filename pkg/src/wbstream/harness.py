"""White-box game simulator, shadow ground truth, exhaustive oracles and memory accounting.

Each round the adversary sees every earlier update, serialized algorithm state,
per-round random bits and response, then emits the next update. The referee
compares each response against the algorithm's contract evaluated on a shadow
copy of the stream object that the algorithm never sees.
"""
from __future__ import annotations

import hashlib
import itertools
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Optional, Protocol

import numpy as np

from .errors import BudgetError, CapacityError
from .lowrank import MatrixRecoverer, RankDecision, integer_rank
from .params import SketchParams
from .sketch import RealSketch, SisSketch, StreamUpdate, _unpack, flat_index
from .sparse import DetState, L0Estimator, SparseRecoverer, SparseVector, l0_sparsity

BRUTE_FORCE_LIMIT = 10**7


# -- shadow and oracles -----------------------------------------------------------


class Shadow:
    """Exact replica of the streamed object, for adjudication only."""

    def __init__(self, shape):
        self.x = np.zeros(tuple(shape), dtype=np.int64)

    def apply(self, u: StreamUpdate) -> None:
        self.x[u.index] += u.delta


def brute_force_sparse_oracle(H, v, k: int, beta: int, q: int) -> list[np.ndarray]:
    """Every y with nnz(y) <= k, |y_i| <= beta and H y = v (mod q), by exhaustive search."""
    H = [[int(h) for h in row] for row in np.asarray(H)]
    rows, n = len(H), len(H[0])
    k = min(k, n)
    if (2 * beta + 1) ** k * math.comb(n, k) > BRUTE_FORCE_LIMIT:
        raise CapacityError("brute force oracle over its candidate limit")
    target = tuple(int(x) % q for x in v)
    found = set()
    for support in itertools.combinations(range(n), k):
        for vals in itertools.product(range(-beta, beta + 1), repeat=k):
            sk = tuple(
                sum(H[r][i] * val for i, val in zip(support, vals)) % q for r in range(rows)
            )
            if sk == target:
                y = [0] * n
                for i, val in zip(support, vals):
                    y[i] = val
                found.add(tuple(y))
    return [np.array(y, dtype=np.int64) for y in sorted(found)]


def brute_force_matching_size(n: int, edges) -> int:
    """Largest set of vertex-disjoint edges, by trying subsets from the largest size down."""
    edges = list(edges)
    for size in range(min(len(edges), n // 2), 0, -1):
        for combo in itertools.combinations(edges, size):
            verts = [x for e in combo for x in e]
            if len(set(verts)) == len(verts):
                return size
    return 0


# -- memory accounting ------------------------------------------------------------


@dataclass(frozen=True)
class MemoryReport:
    payload: int
    overhead: int

    @property
    def total(self) -> int:
        return self.payload + self.overhead


def memory_report(obj) -> MemoryReport:
    """Machine words held by a sketch or recoverer: sketch vectors plus per-sketch counters."""
    if isinstance(obj, SisSketch):
        return MemoryReport(obj.v.size, 1)
    if isinstance(obj, RealSketch):
        return MemoryReport(obj.acc.size, 1)
    if isinstance(obj, DetState):
        return MemoryReport(len(obj.syndromes), 1)
    parts = [getattr(obj, a) for a in ("sis", "real", "det") if hasattr(obj, a)]
    if not parts and hasattr(obj, "matrix"):
        return memory_report(obj.matrix)
    reports = [memory_report(p) for p in parts]
    return MemoryReport(sum(r.payload for r in reports), sum(r.overhead for r in reports))


# -- game -------------------------------------------------------------------------


class StreamAlgorithm(Protocol):
    shape: tuple[int, ...]

    def process(self, u: StreamUpdate, randomness: bytes) -> None: ...

    def state_bytes(self) -> bytes: ...

    def respond(self) -> Any: ...

    def is_correct(self, response: Any, truth: np.ndarray) -> bool: ...


def encode_response(a) -> str:
    if a is None:
        return "NONE"
    if isinstance(a, SparseVector):
        return "{" + ",".join(f"{i}:{v}" for i, v in a.entries) + "}"
    if isinstance(a, np.ndarray):
        return ";".join(",".join(map(str, row)) for row in np.atleast_2d(a))
    return str(a)


class SparseGameAlg:
    """k-sparse recovery answering every round; correct answer is x or None."""

    def __init__(self, n, k, beta, seed=None, fast=True, **param_kw):
        self.rec = SparseRecoverer(n, k, beta, seed, **param_kw)
        self.shape, self.k, self.beta, self.fast = (n,), k, beta, fast

    def process(self, u, randomness):
        self.rec.update(u)

    def state_bytes(self):
        return self.rec.state_bytes()

    def respond(self):
        out = self.rec.recover(fast=self.fast)
        return out.value if out.recovered else None

    def is_correct(self, response, truth):
        in_class = np.count_nonzero(truth) <= self.k and np.abs(truth).max(initial=0) <= self.beta
        if not in_class:
            return response is None
        return response is not None and np.array_equal(response.to_dense(), truth)


class L0GameAlg:
    def __init__(self, n, eps, beta, seed=None, **param_kw):
        self.rec = L0Estimator(n, eps, beta, seed, **param_kw)
        self.shape, self.n, self.eps = (n,), n, eps
        self.factor = n / l0_sparsity(n, eps)

    def process(self, u, randomness):
        self.rec.update(u)

    def state_bytes(self):
        return self.rec.state_bytes()

    def respond(self):
        return self.rec.estimate()

    def is_correct(self, response, truth):
        true = int(np.count_nonzero(truth))
        return true / self.factor <= response <= true * self.factor


class RankGameAlg:
    def __init__(self, n, k, beta, seed=None, **kw):
        self.rec = MatrixRecoverer(n, k, beta, seed, **kw)
        self.shape, self.k, self.beta = (n, n), k, beta

    def process(self, u, randomness):
        self.rec.update(u)

    def state_bytes(self):
        return self.rec.state_bytes()

    def respond(self):
        return self.rec.rank_decision()

    def is_correct(self, response, truth):
        at_most = integer_rank(truth) <= self.k and np.abs(truth).max(initial=0) <= self.beta
        if response.at_most != at_most:
            return False
        return not at_most or np.array_equal(response.witness, truth)


@dataclass(frozen=True)
class Round:
    update: Optional[StreamUpdate]
    state: bytes
    randomness: bytes
    response: str


@dataclass
class GameTranscript:
    initial_state: bytes
    rounds: list[Round] = field(default_factory=list)
    adversary_wins: bool = False
    first_wrong_round: Optional[int] = None

    def view(self) -> tuple[bytes, tuple[Round, ...]]:
        return self.initial_state, tuple(self.rounds)

    def lines(self) -> list[str]:
        out = [f"init state_sha256={hashlib.sha256(self.initial_state).hexdigest()}"]
        for t, r in enumerate(self.rounds, 1):
            upd = "-" if r.update is None else (
                ",".join(map(str, r.update.index)) + f":{r.update.delta}")
            out.append(
                f"round {t} update={upd} "
                f"state_sha256={hashlib.sha256(r.state).hexdigest()} "
                f"R={r.randomness.hex()} A={r.response}"
            )
        verdict = "ADVERSARY_WINS" if self.adversary_wins else "ADVERSARY_LOSES"
        tail = f" first_wrong_round={self.first_wrong_round}" if self.adversary_wins else ""
        out.append(f"VERDICT {verdict} rounds={len(self.rounds)}{tail}")
        return out


class Budget:
    def __init__(self, limit: int):
        self.limit, self.used = limit, 0

    def spend(self, n: int = 1) -> None:
        self.used += n
        if self.used > self.limit:
            raise BudgetError(f"strategy exceeded {self.limit} candidate evaluations")


@dataclass
class AdversaryStrategy:
    callback: Callable[[tuple, Budget], Optional[StreamUpdate]]
    time_budget: int = 10**6


def play_game(alg, strategy: AdversaryStrategy, rounds: int, seed: int = 0) -> GameTranscript:
    rng = np.random.default_rng(seed)
    transcript = GameTranscript(alg.state_bytes())
    shadow = Shadow(alg.shape)
    for t in range(1, rounds + 1):
        u = strategy.callback(transcript.view(), Budget(strategy.time_budget))
        r_t = rng.bytes(16)
        if u is not None:
            alg.process(u, r_t)
            shadow.apply(u)
        a_t = alg.respond()
        transcript.rounds.append(Round(u, alg.state_bytes(), r_t, encode_response(a_t)))
        if not transcript.adversary_wins and not alg.is_correct(a_t, shadow.x):
            transcript.adversary_wins = True
            transcript.first_wrong_round = t
    return transcript


def replay(transcript: GameTranscript, alg) -> bool:
    """Feed the recorded updates to a fresh algorithm; True iff states and responses match."""
    if alg.state_bytes() != transcript.initial_state:
        return False
    for r in transcript.rounds:
        if r.update is not None:
            alg.process(r.update, r.randomness)
        if alg.state_bytes() != r.state or encode_response(alg.respond()) != r.response:
            return False
    return True


# -- strategies -------------------------------------------------------------------


def empty_strategy() -> AdversaryStrategy:
    return AdversaryStrategy(lambda view, budget: None)


def oblivious_strategy(shape, k: int, beta: int, rounds: int, seed: int) -> AdversaryStrategy:
    """Updates fixed in advance from the strategy's own seed, ignoring the transcript.

    The target is a random object with between 0 and k+2 nonzeros, reached
    through shuffled updates that include cancelling pairs.
    """
    rng = np.random.default_rng(seed)
    dim = math.prod(shape)
    nnz = int(rng.integers(0, k + 3))
    support = rng.choice(dim, size=min(nnz, dim), replace=False)
    plan = []
    for i in support:
        val = int(rng.integers(1, beta + 1)) * int(rng.choice([-1, 1]))
        parts = int(rng.integers(1, 3))
        split = [val // parts] * (parts - 1)
        plan += [(int(i), d) for d in split + [val - sum(split)]]
    for _ in range(int(rng.integers(0, 3))):
        i, d = int(rng.integers(dim)), int(rng.integers(1, beta + 1))
        plan += [(i, d), (i, -d)]
    order = rng.permutation(len(plan))
    plan = [plan[j] for j in order]
    updates = [StreamUpdate(tuple(int(c) for c in np.unravel_index(i, shape)), d) for i, d in plan]
    updates = updates[:rounds]

    def step(view, budget):
        _, done = view
        return updates[len(done)] if len(done) < len(updates) else None

    return AdversaryStrategy(step)


def collision_strategy(time_budget: int = 10**6) -> AdversaryStrategy:
    """Search for a dense x whose SIS fingerprint equals that of some k-sparse y.

    Reads the sketch parameters and oracle seed from the exposed initial state,
    tabulates fingerprints of every k-sparse bounded vector, then scans
    (k+1)-sparse candidates until one collides, and streams it.
    Each fingerprint computed costs one evaluation.
    """
    plan: list[StreamUpdate] = []
    searched = [False]

    def step(view, budget):
        init, done = view
        if not searched[0]:
            searched[0] = True
            plan.extend(_find_collision(init, budget))
        return plan[len(done)] if len(done) < len(plan) else None

    return AdversaryStrategy(step, time_budget)


def _find_collision(state: bytes, budget: Budget) -> list[StreamUpdate]:
    _, header, _, _ = _unpack(state)
    params = SketchParams.from_config(header)
    sis = SisSketch(params)
    n, k, beta = params.dim_m, params.sparsity_k, params.entry_bound_beta
    cols = {}

    def fingerprint(entries):
        budget.spend()
        acc = np.zeros(params.rows, dtype=np.int64)
        for i, val in entries:
            if i not in cols:
                cols[i] = sis.column(i)
            acc = (acc + val * cols[i]) % params.modulus_q
        return acc.tobytes()

    nonzero = [v for v in range(-beta, beta + 1) if v]
    table = set()
    for size in range(k + 1):
        for support in itertools.combinations(range(n), size):
            for vals in itertools.product(nonzero, repeat=size):
                table.add(fingerprint(zip(support, vals)))
    for size in range(k + 1, n + 1):
        for support in itertools.combinations(range(n), size):
            for vals in itertools.product(nonzero, repeat=size):
                if fingerprint(zip(support, vals)) in table:
                    return [
                        StreamUpdate(tuple(int(c) for c in np.unravel_index(i, params.shape)), v)
                        for i, v in zip(support, vals)
                    ]
    return []


# -- registry used by the CLI -------------------------------------------------------

TOY_PARAMS = dict(rows=2, q=17)


def make_game(alg_name: str, strategy_name: str, rounds: int, seed: int, toy: bool = False,
              n: int | None = None, k: int | None = None, beta: int | None = None,
              eps=0.5, budget: int = 10**6):
    kw = dict(TOY_PARAMS) if toy else {}
    oracle_seed = hashlib.sha256(f"wbstream game {seed}".encode()).digest()
    if alg_name in ("fast-recover", "enumerate-recover"):
        n = n or (8 if toy else 1024)
        k = k if k is not None else (1 if toy else 8)
        beta = beta or (1 if toy else 100)
        alg = SparseGameAlg(n, k, beta, oracle_seed, fast=alg_name == "fast-recover", **kw)
    elif alg_name == "estimate-l0":
        n = n or 256
        beta = beta or 100
        alg = L0GameAlg(n, eps, beta, oracle_seed, **kw)
        k = alg.rec.k
    elif alg_name == "rank-decision":
        n = n or 8
        k = k if k is not None else 2
        beta = beta or 16
        alg = RankGameAlg(n, k, beta, oracle_seed)
    else:
        raise ValueError(f"unknown algorithm {alg_name!r}")
    if strategy_name == "oblivious":
        strat = oblivious_strategy(alg.shape, k, beta, rounds, seed)
    elif strategy_name == "empty":
        strat = empty_strategy()
    elif strategy_name == "collision":
        strat = collision_strategy(budget)
    else:
        raise ValueError(f"unknown strategy {strategy_name!r}")
    return alg, strat
