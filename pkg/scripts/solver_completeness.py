"""Recovery rate of the matrix, RPCA and tensor pipelines against the measurement multiplier."""
from __future__ import annotations

import argparse

import numpy as np

from wbstream.lowrank import MatrixRecoverer, SolverConfig
from wbstream.rpca import RpcaRecoverer
from wbstream.tensor import TensorRecoverer


def planted_matrix(rng, n, k):
    U = rng.integers(-2, 3, size=(n, k))
    V = rng.integers(-2, 3, size=(n, k))
    return U @ V.T


def planted_tensor(rng, n):
    vecs = [rng.integers(-1, 2, size=n) for _ in range(3)]
    return np.einsum("i,j,k->ijk", *vecs)


def stream(rec, x):
    for idx in zip(*np.nonzero(x)):
        rec.update(tuple(int(i) for i in idx), int(x[idx]))
    return rec


def rate(make, target, trials, rng):
    good = 0
    for t in range(trials):
        x = target(rng)
        out = stream(make(f"{t:064x}"), x).recover()
        if out.recovered:
            val = out.value
            got = val.L + val.S if hasattr(val, "L") else getattr(val, "tensor", val)
            good += np.array_equal(got, x)
    return good


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--trials", type=int, default=30)
    ap.add_argument("--n", type=int, default=8)
    ap.add_argument("--multipliers", default="0.5,1,2,3")
    args = ap.parse_args()
    n, trials = args.n, args.trials
    print(f"{'c':>5}{'matrix k=1':>12}{'matrix k=2':>12}{'rpca':>8}{'tensor':>8}")
    for c in (float(x) for x in args.multipliers.split(",")):
        cfg = SolverConfig(measurement_multiplier=c)
        rng = np.random.default_rng(0)
        m1 = rate(lambda s: MatrixRecoverer(n, 1, 16, s, cfg), lambda r: planted_matrix(r, n, 1), trials, rng)
        m2 = rate(lambda s: MatrixRecoverer(n, 2, 16, s, cfg), lambda r: planted_matrix(r, n, 2), trials, rng)

        def rp_target(r):
            x = planted_matrix(r, n, 1)
            x.flat[r.choice(n * n, size=2, replace=False)] += 40
            return x

        rp = rate(lambda s: RpcaRecoverer(n, 1, 2, 64, s, cfg), rp_target, trials, rng)
        te = rate(lambda s: TensorRecoverer((4, 4, 4), 1, 2, s, cfg), lambda r: planted_tensor(r, 4), trials, rng)
        print(f"{c:>5g}{m1:>9}/{trials}{m2:>9}/{trials}{rp:>5}/{trials}{te:>5}/{trials}")


if __name__ == "__main__":
    main()
