"""Print stored word counts for every sketch family over a grid of (size, k)."""
from __future__ import annotations

import argparse

from wbstream.harness import memory_report
from wbstream.lowrank import MatrixRecoverer
from wbstream.rpca import RpcaRecoverer
from wbstream.sparse import SparseRecoverer
from wbstream.tensor import TensorRecoverer


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--ks", default="1,2,4,8", help="comma separated k values")
    args = ap.parse_args()
    ks = [int(k) for k in args.ks.split(",")]

    print(f"{'family':<8}{'size':>10}{'k':>4}{'sis':>8}{'real':>8}{'total':>8}")
    for n in (256, 1024, 4096):
        for k in ks:
            rec = SparseRecoverer(n, k, 100)
            r = memory_report(rec)
            print(f"{'vector':<8}{n:>10}{k:>4}{rec.params.rows:>8}{'-':>8}{r.total:>8}")
    for n in (8, 16):
        for k in ks:
            rec = MatrixRecoverer(n, k, 16)
            r = memory_report(rec)
            print(f"{'matrix':<8}{n:>10}{k:>4}{rec.params.rows:>8}{rec.alpha:>8}{r.total:>8}")
    for n in (8, 16):
        for k in ks:
            rec = RpcaRecoverer(n, k, 2, 64)
            r = memory_report(rec)
            print(f"{'rpca':<8}{n:>10}{k:>4}{rec.params.rows:>8}{rec.alpha:>8}{r.total:>8}")
    for dims in ((4, 4, 4), (8, 8, 8)):
        for k in ks:
            rec = TensorRecoverer(dims, k, 2)
            r = memory_report(rec)
            size = "x".join(map(str, dims))
            print(f"{'tensor':<8}{size:>10}{k:>4}{rec.params.rows:>8}{rec.alpha:>8}{r.total:>8}")


if __name__ == "__main__":
    main()
