"""Audited success rate of the bipartition attack on hitting-time snapshots."""

import argparse
import json
import time

from hamres.process import hitting_time_min_degree, sample_process, snapshot
from hamres.resilience import bipartition_attack


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", type=int, nargs="+", default=[50, 100, 200])
    ap.add_argument("--eps", type=float, nargs="+", default=[0.15, 0.25, 0.5])
    ap.add_argument("--seeds", type=int, default=30)
    args = ap.parse_args()
    for n in args.sizes:
        for eps in args.eps:
            t0, ok, phases = time.perf_counter(), 0, {}
            for seed in range(args.seeds):
                trace = sample_process(n, seed)
                snap = snapshot(trace, hitting_time_min_degree(trace))
                att = bipartition_attack(snap.digraph, eps, seed, low_threshold=snap.low_threshold)
                ok += att.ok
                phases[att.phase] = phases.get(att.phase, 0) + 1
            print(json.dumps({"n": n, "eps": eps, "seeds": args.seeds, "success": ok, "phases": phases,
                              "seconds": round(time.perf_counter() - t0, 1)}), flush=True)


if __name__ == "__main__":
    main()
