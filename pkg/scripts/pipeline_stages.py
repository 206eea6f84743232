"""Pipeline success rate and failed-attempt histogram by stage over (n, p) inputs."""

import argparse
import json
from collections import Counter

from hamres.digraph import Digraph, verify_hamilton
from hamres.errors import InputError, StageFailure
from hamres.pipeline import hamiltonize
from hamres.process import sample_gnp


def run(n: int, p: float, seeds: int, eps: float) -> dict:
    wins, stages, lengths = 0, Counter(), []
    for seed in range(seeds):
        D = Digraph.complete(n) if p >= 1 else sample_gnp(n, p, 500 + seed)
        try:
            res = hamiltonize(D, eps, seed=seed)
        except StageFailure as exc:
            stages.update(f["stage"] for f in exc.detail.get("failures", []))
            continue
        except InputError as exc:
            return {"n": n, "p": p, "error": str(exc)}
        assert verify_hamilton(D, res.cycle)
        stages.update(f["stage"] for f in res.report["failures"])
        lengths.append(res.report["reservoir"]["length"] / res.report["reservoir"]["budget"])
        wins += 1
    return {"n": n, "p": p, "seeds": seeds, "success": wins, "failed_attempts": dict(sorted(stages.items())),
            "reservoir_length_over_budget_max": max(lengths) if lengths else None}


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--grid", nargs="+", default=["60:1", "100:0.5", "200:0.4", "300:0.35"],
                    help="n:p pairs; p=1 means the complete digraph")
    ap.add_argument("--seeds", type=int, default=20)
    ap.add_argument("--eps", type=float, default=0.1)
    args = ap.parse_args()
    for item in args.grid:
        n, p = item.split(":")
        print(json.dumps(run(int(n), float(p), args.seeds, args.eps), sort_keys=True), flush=True)


if __name__ == "__main__":
    main()
