"""``wbstream`` command-line tool.

Exit codes: 0 recovered or decided, 3 not in class / larger than, 1 usage
error, 2 stream parse error.
"""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .errors import CapacityError, StreamParseError, WbStreamError
from .harness import encode_response, make_game, play_game
from .lowrank import MatrixRecoverer, SolverConfig
from .matching import LargerThan, MatchingSketch
from .params import parse_config
from .rpca import RpcaRecoverer
from .sparse import L0Estimator, SparseRecoverer
from .streamio import StreamHeader, parse_stream
from .tensor import TensorRecoverer

EXIT_OK, EXIT_USAGE, EXIT_PARSE, EXIT_NONE = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="wbstream", description="White-box robust turnstile stream recovery.")
    p.add_argument("--seed", help="oracle seed, 64 hex chars")
    p.add_argument("--config", help="key=value parameter file (dim, k, beta, rows, seed, q)")
    p.add_argument("--json", action="store_true", help="machine-readable output")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def cmd(name, help_):
        s = sub.add_parser(name, help=help_)
        s.add_argument("--input", "-i", help="stream file (default: stdin)")
        return s

    s = cmd("recover-vector", "k-sparse vector recovery")
    s.add_argument("--n", type=int)
    s.add_argument("--k", type=int)
    s.add_argument("--beta", type=int)
    s.add_argument("--fast", action="store_true", help="syndrome decoder instead of enumeration")

    s = cmd("estimate-l0", "l0 estimate within a factor n^eps")
    s.add_argument("--n", type=int)
    s.add_argument("--eps", required=True)
    s.add_argument("--beta", type=int, default=None)

    for name, help_ in (("recover-matrix", "rank-<=k matrix recovery"),
                        ("rank-decision", "decide rank <= k")):
        s = cmd(name, help_)
        s.add_argument("--n", type=int)
        s.add_argument("--k", type=int)
        s.add_argument("--beta", type=int)

    s = cmd("rpca", "low-rank plus sparse decomposition")
    s.add_argument("--n", type=int)
    s.add_argument("--k", type=int)
    s.add_argument("--r", type=int, required=True)
    s.add_argument("--beta", type=int)
    s.add_argument("--lambda", dest="lam", type=float)

    s = cmd("recover-tensor", "CP-rank-<=k tensor recovery")
    s.add_argument("--dims", help="comma separated, e.g. 4,4,4")
    s.add_argument("--k", type=int)
    s.add_argument("--beta", type=int)

    s = cmd("matching", "maximum matching or a large-matching declaration")
    s.add_argument("--n", type=int)
    s.add_argument("--kprime", type=int, required=True)

    s = sub.add_parser("game", help="simulate the white-box adversary game")
    s.add_argument("--alg", required=True,
                   choices=["fast-recover", "enumerate-recover", "estimate-l0", "rank-decision"])
    s.add_argument("--strategy", required=True, choices=["oblivious", "empty", "collision"])
    s.add_argument("--rounds", type=int, default=16)
    s.add_argument("--seed", dest="game_seed", type=int, default=0)
    s.add_argument("--toy", action="store_true", help="toy SIS parameters rows=2, q=17")
    s.add_argument("--budget", type=int, default=10**6)
    s.add_argument("--n", type=int)
    s.add_argument("--k", type=int)
    s.add_argument("--beta", type=int)
    return p


def _resolve(args, cfg, name, key=None, default=None):
    val = getattr(args, name, None)
    if val is None and (key or name) in cfg:
        val = int(cfg[key or name])
    if val is None:
        val = default
    if val is None:
        raise _Usage(f"--{name} is required (flag or config)")
    return val


class _Usage(Exception):
    pass


def _stream(args, cfg, src, kind):
    """Shape from flags/config, else from the file header; returns (n, updates)."""
    n = getattr(args, "n", None)
    if n is None and "dim" in cfg:
        n = int(cfg["dim"])
    header, updates = parse_stream(src, None if n is None else StreamHeader.of(kind, n))
    return header.shape[0], updates


def _param_kw(args, cfg) -> dict:
    kw = {}
    if "rows" in cfg:
        kw["rows"] = int(cfg["rows"])
    if "q" in cfg:
        kw["q"] = int(cfg["q"])
    return kw


def _matrix_lines(m) -> list[str]:
    return [" ".join(str(int(x)) for x in row) for row in m]


def _emit(args, out, verdict: str, text: list[str], payload=None) -> int:
    if args.json:
        doc = {"command": args.command, "verdict": verdict}
        if payload is not None:
            doc["value"] = payload
        out.write(json.dumps(doc, sort_keys=True) + "\n")
    else:
        out.write("".join(line + "\n" for line in text))
    return EXIT_OK if verdict in ("recovered", "decided") else EXIT_NONE


def run(argv=None, stdin=None, stdout=None) -> int:
    stdin = stdin or sys.stdin
    out = stdout or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = {}
        if args.config:
            with open(args.config) as fh:
                cfg = parse_config(fh.read())
        seed = args.seed or cfg.get("seed")
        if args.command == "game":
            return _game(args, out)
        src = open(args.input) if getattr(args, "input", None) else stdin
        try:
            return _dispatch(args, cfg, seed, src, out)
        finally:
            if src is not stdin:
                src.close()
    except StreamParseError as exc:
        print(f"wbstream: parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except CapacityError as exc:
        print(f"wbstream: {exc} (try --fast)", file=sys.stderr)
        return EXIT_USAGE
    except (_Usage, WbStreamError, OSError) as exc:
        print(f"wbstream: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def _dispatch(args, cfg, seed, src, out) -> int:
    c = args.command
    kw = _param_kw(args, cfg)
    if c in ("recover-vector", "estimate-l0"):
        n, updates = _stream(args, cfg, src, "vector")
        if c == "recover-vector":
            k = _resolve(args, cfg, "k")
            beta = _resolve(args, cfg, "beta")
            rec = SparseRecoverer(n, k, beta, seed, **kw)
        else:
            beta = _resolve(args, cfg, "beta", default=100)
            rec = L0Estimator(n, args.eps, beta, seed, **kw)
        for u in updates:
            rec.update(u)
        if c == "estimate-l0":
            est = rec.estimate()
            return _emit(args, out, "decided", [str(est)], est)
        res = rec.recover(fast=args.fast)
        if not res.recovered:
            return _emit(args, out, "not_in_class", ["NONE"])
        entries = res.value.entries
        return _emit(args, out, "recovered", [f"{i + 1} {v}" for i, v in entries],
                     [[i + 1, v] for i, v in entries])

    if c in ("recover-matrix", "rank-decision", "rpca"):
        n, updates = _stream(args, cfg, src, "matrix")
        k = _resolve(args, cfg, "k")
        beta = _resolve(args, cfg, "beta")
        if c == "rpca":
            rec = RpcaRecoverer(n, k, args.r, beta, seed, lam=args.lam, **kw)
        else:
            rec = MatrixRecoverer(n, k, beta, seed, **kw)
        for u in updates:
            rec.update(u)
        if c == "rank-decision":
            dec = rec.rank_decision()
            if not dec.at_most:
                return _emit(args, out, "not_in_class", [f"RANK>{k}"], {"rank_greater_than": k})
            return _emit(args, out, "recovered", [f"RANK<={k}", *_matrix_lines(dec.witness)],
                         {"rank_at_most": k, "witness": dec.witness.tolist()})
        res = rec.recover()
        if not res.recovered:
            return _emit(args, out, "not_in_class", ["NONE"])
        if c == "rpca":
            L, S = res.value.L, res.value.S
            return _emit(args, out, "recovered", ["L:", *_matrix_lines(L), "S:", *_matrix_lines(S)],
                         {"L": L.tolist(), "S": S.tolist()})
        return _emit(args, out, "recovered", _matrix_lines(res.value), res.value.tolist())

    if c == "recover-tensor":
        dims = None
        if args.dims:
            try:
                dims = tuple(int(x) for x in args.dims.split(","))
            except ValueError:
                raise _Usage(f"bad --dims {args.dims!r}") from None
        header, updates = parse_stream(src, None if dims is None else StreamHeader.of("tensor", dims=dims))
        dims = header.shape
        k = _resolve(args, cfg, "k")
        beta = _resolve(args, cfg, "beta")
        rec = TensorRecoverer(dims, k, beta, seed, **kw)
        for u in updates:
            rec.update(u)
        res = rec.recover()
        if not res.recovered:
            return _emit(args, out, "not_in_class", ["NONE"])
        lines = []
        for j, f in enumerate(res.value.factors.factors, 1):
            lines.append(f"mode {j}:")
            lines += [" ".join(f"{x:.12g}" for x in row) for row in f]
        return _emit(args, out, "recovered", lines, {
            "tensor": res.value.tensor.tolist(),
            "factors": [f.tolist() for f in res.value.factors.factors],
        })

    if c == "matching":
        n, updates = _stream(args, cfg, src, "graph")
        ms = MatchingSketch(n, args.kprime, seed, **kw)
        for e in updates:
            ms.update(e)
        res = ms.query()
        if isinstance(res, LargerThan):
            return _emit(args, out, "not_in_class", [str(res)], {"larger_than": res.k_prime})
        edges = sorted(res.edges)
        return _emit(args, out, "recovered", [f"{u + 1} {v + 1}" for u, v in edges],
                     [[u + 1, v + 1] for u, v in edges])
    raise _Usage(f"unknown command {c}")


def _game(args, out) -> int:
    try:
        alg, strat = make_game(args.alg, args.strategy, args.rounds, args.game_seed,
                               toy=args.toy, n=args.n, k=args.k, beta=args.beta,
                               budget=args.budget)
    except ValueError as exc:
        raise _Usage(str(exc)) from None
    tr = play_game(alg, strat, args.rounds, args.game_seed)
    if args.json:
        out.write(json.dumps({
            "command": "game",
            "adversary_wins": tr.adversary_wins,
            "first_wrong_round": tr.first_wrong_round,
            "rounds": [r.response for r in tr.rounds],
        }, sort_keys=True) + "\n")
    else:
        out.write("".join(line + "\n" for line in tr.lines()))
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
