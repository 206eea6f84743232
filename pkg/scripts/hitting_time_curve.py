"""Fraction of hitting-time snapshots D_{M*} that are Hamiltonian, as n grows.

Also counts the simplest obstruction: two vertices whose only out-neighbour
(or only in-neighbour) is the same vertex.
"""

import argparse
import csv
import sys

from hamres.oracle import HAM, held_karp
from hamres.process import hitting_time_min_degree, sample_process


def shared_unique_neighbour(D) -> bool:
    for sign in ("+", "-"):
        single = [next(iter(D.nbrs(v, sign))) for v in range(D.n) if D.degree(v, sign) == 1]
        if len(single) != len(set(single)):
            return True
    return False


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", type=int, nargs="+", default=[8, 10, 12, 14, 16, 18])
    ap.add_argument("--trials", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["n", "trials", "ham_fraction", "obstructed_fraction"])
    for n in args.sizes:
        ham = obstructed = 0
        for t in range(args.trials):
            trace = sample_process(n, args.seed, t)
            D = trace.digraph(hitting_time_min_degree(trace))
            ham += held_karp(D).decision == HAM
            obstructed += shared_unique_neighbour(D)
        w.writerow([n, args.trials, f"{ham / args.trials:.3f}", f"{obstructed / args.trials:.3f}"])
        sys.stdout.flush()


if __name__ == "__main__":
    main()
