"""White-box game at several SIS sizes: how often does each adversary win?

The oblivious adversary should never win. The collision adversary reads the
oracle seed and sketch parameters from the exposed state and brute-forces a
dense vector that shares its fingerprint with a sparse one; it succeeds only
when the sketch is tiny.
"""
from __future__ import annotations

import argparse

from wbstream.errors import BudgetError
from wbstream.harness import SparseGameAlg, collision_strategy, oblivious_strategy, play_game


def win_rate(rows, q, strategy, games, budget, n=8, k=1, beta=1):
    wins = exhausted = 0
    for seed in range(games):
        kw = {} if rows is None else dict(rows=rows, q=q)
        alg = SparseGameAlg(n, k, beta, f"{seed:064x}", fast=False, **kw)
        if strategy == "collision":
            strat = collision_strategy(budget)
        else:
            strat = oblivious_strategy(alg.shape, k, beta, 12, seed)
        try:
            wins += play_game(alg, strat, 12, seed).adversary_wins
        except BudgetError:
            exhausted += 1
    return wins, exhausted


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--games", type=int, default=20)
    ap.add_argument("--budget", type=int, default=10**6)
    args = ap.parse_args()
    print(f"{'rows':>6}{'q':>8}{'strategy':>12}{'wins':>8}{'budget hit':>12}")
    for rows, q in [(2, 17), (3, 17), (4, 101), (None, None)]:
        for strategy in ("oblivious", "collision"):
            wins, hit = win_rate(rows, q, strategy, args.games, args.budget)
            label = "honest" if rows is None else rows
            print(f"{label:>6}{q or '-':>8}{strategy:>12}{wins:>5}/{args.games:<3}{hit:>9}")


if __name__ == "__main__":
    main()
