"""Command-line harness: every output starts with the configuration that produced it.

Exit codes: 0 success, 2 input error (including bad flags), 3 retryable
algorithm failure (stage failure, oracle timeout, failed attack).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Callable, Sequence

from . import __version__
from .certify import certify_pseudorandom
from .digraph import Digraph, read_edge_list, verify_hamilton, write_edge_list
from .errors import InputError, StageFailure
from .oracle import HAM, HELD_KARP_MAX_N, TIMEOUT, decide
from .params import ParameterProfile
from .pipeline import PipelineProfile, hamiltonize
from .process import hitting_time_min_degree, sample_gnp, sample_process, snapshot
from .resilience import bipartition_attack, removal_instance, resilience_trial

EXIT_OK, EXIT_INPUT, EXIT_RETRY = 0, 2, 3
JOBS_ENV = "HAMRES_JOBS"

HIT_COLUMNS = ["trial", "seed", "n", "M_star", "p_M", "low_count", "oracle_verdict"]
RESILIENCE_COLUMNS = ["n", "seed", "M_star", "attack_ok", "survival_alpha", "oracle_verdict",
                      "attack_phase", "attack_sides", "boost_size", "boost_desk_set", "pipeline", "reduction"]


class Retryable(Exception):
    """Raised by a command whose artifact was written but whose run did not succeed."""


# ---- output helpers --------------------------------------------------------

def _strip_timing(obj):
    if isinstance(obj, dict):
        return {k: _strip_timing(v) for k, v in obj.items() if k != "seconds"}
    if isinstance(obj, list):
        return [_strip_timing(v) for v in obj]
    return obj


def _config(args: argparse.Namespace) -> dict:
    skip = {"func", "out", "jobs"}
    cfg = {k: v for k, v in sorted(vars(args).items()) if k not in skip}
    cfg["version"] = __version__
    return cfg


def _header(cfg: dict) -> str:
    return "".join(f"# {k}={json.dumps(v, sort_keys=True)}\n" for k, v in cfg.items())


def _csv(rows: Sequence[dict], columns: Sequence[str]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(columns), extrasaction="ignore", lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: json.dumps(v) if isinstance(v, (list, dict)) else v for k, v in r.items()})
    return buf.getvalue()


def _emit(args: argparse.Namespace, text: str) -> None:
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _emit_table(args, rows: list[dict], columns: Sequence[str], summary: dict | None = None) -> None:
    cfg = _config(args)
    if args.format == "json":
        doc = {"config": cfg, "rows": rows}
        if summary is not None:
            doc["summary"] = summary
        _emit(args, json.dumps(doc, sort_keys=True, indent=1) + "\n")
        return
    text = _header(cfg)
    if summary is not None:
        text += "".join(f"# summary.{k}={json.dumps(v)}\n" for k, v in summary.items())
    _emit(args, text + _csv(rows, columns))


def _emit_doc(args, doc: dict) -> None:
    _emit(args, json.dumps({"config": _config(args), **_strip_timing(doc)}, sort_keys=True, indent=1) + "\n")


def _jobs(args) -> int:
    if args.jobs is not None:
        return max(1, args.jobs)
    try:
        return max(1, int(os.environ.get(JOBS_ENV, "1")))
    except ValueError:
        raise InputError(f"{JOBS_ENV} must be an integer")


def _map(fn: Callable, items: list, jobs: int) -> list:
    if jobs > 1 and len(items) > 1:
        with ProcessPoolExecutor(jobs) as ex:
            return list(ex.map(fn, items))
    return [fn(x) for x in items]


# ---- graph sources ---------------------------------------------------------

def _add_source(p: argparse.ArgumentParser, default_n: int | None = None) -> None:
    g = p.add_argument_group("input graph (an edge list, or a seeded sample)")
    g.add_argument("--edges", help="edge-list file: 'n <count>' then one 'u v' per line")
    g.add_argument("--n", type=int, default=default_n, help="vertices of the sampled digraph")
    g.add_argument("--p", type=float, help="edge probability of D(n, p)")
    g.add_argument("--M", type=int, help="edge count of the process snapshot D_M")
    g.add_argument("--complete", action="store_true", help="use the complete digraph on n vertices")
    p.add_argument("--seed", type=int, default=0)


def _load(args) -> Digraph:
    if args.edges:
        try:
            return read_edge_list(Path(args.edges).read_text())
        except OSError as exc:
            raise InputError(f"cannot read {args.edges}: {exc}")
    if args.n is None or args.n < 1:
        raise InputError("give --edges or a positive --n")
    if args.complete:
        return Digraph.complete(args.n)
    if args.p is not None:
        return sample_gnp(args.n, args.p, args.seed)
    trace = sample_process(args.n, args.seed)
    M = hitting_time_min_degree(trace) if args.M is None else args.M
    if not 0 <= M <= trace.total:
        raise InputError(f"M must lie in [0, {trace.total}]")
    return trace.digraph(M)


# ---- commands --------------------------------------------------------------

def cmd_gen(args) -> None:
    D = _load(args)
    _emit(args, _header(_config(args)) + write_edge_list(D))


def _hit_row(job: tuple[int, int, int, bool]) -> dict:
    n, seed, trial, with_oracle = job
    trace = sample_process(n, seed, trial)
    M = hitting_time_min_degree(trace)
    snap = snapshot(trace, M)
    verdict = decide(snap.digraph).decision if with_oracle else "skipped"
    return {"trial": trial, "seed": seed, "n": n, "M_star": M, "p_M": round(snap.p_M, 6),
            "low_count": len(snap.S_M), "oracle_verdict": verdict}


def cmd_hit(args) -> None:
    if args.n < 2 or args.trials < 1:
        raise InputError("need n >= 2 and trials >= 1")
    with_oracle = args.oracle and args.n <= HELD_KARP_MAX_N
    rows = _map(_hit_row, [(args.n, args.seed, t, with_oracle) for t in range(args.trials)], _jobs(args))
    rows.sort(key=lambda r: (r["trial"], r["seed"]))
    decided = [r for r in rows if r["oracle_verdict"] not in ("skipped", TIMEOUT)]
    summary = {"mean_M_star": sum(r["M_star"] for r in rows) / len(rows),
               "ham_fraction": (sum(r["oracle_verdict"] == HAM for r in decided) / len(decided)
                                if decided else None)}
    _emit_table(args, rows, HIT_COLUMNS, summary)


def cmd_certify(args) -> None:
    D = _load(args)
    d = args.d if args.d is not None else max(1.0, D.min_semidegree() / 2)
    profile = ParameterProfile(D.n, d, args.eps, m=args.m)
    certs = certify_pseudorandom(D, profile, seed=args.seed)
    _emit_doc(args, {"profile": profile.to_dict(), "certificates": [c.to_dict() for c in certs]})


def cmd_hamiltonize(args) -> None:
    D = _load(args)
    overrides = {k: v for k, v in (("r", args.r), ("ell", args.ell), ("a_size", args.a_size), ("m", args.m))
                 if v is not None}
    profile = PipelineProfile.desk(D, args.eps, **overrides)
    try:
        res = hamiltonize(D, args.eps, profile, seed=args.seed, retries=not args.no_retries)
    except StageFailure as exc:
        _emit_doc(args, {"status": "failed", "stage": exc.stage, "detail": exc.detail})
        raise Retryable(str(exc))
    ok = verify_hamilton(D, res.cycle)
    _emit_doc(args, {"status": "ok" if ok else "BROKEN", "cycle": res.cycle, "verified": ok,
                     "report": res.report})
    if not ok:
        raise RuntimeError("returned cycle failed verification")


def cmd_attack(args) -> None:
    if args.edges or args.p is not None or args.complete or args.M is not None:
        D, low = _load(args), None
    else:
        if args.n is None:
            raise InputError("give --edges or --n")
        trace = sample_process(args.n, args.seed)
        snap = snapshot(trace, hitting_time_min_degree(trace))
        D, low = snap.digraph, snap.low_threshold
    att = bipartition_attack(D, args.eps, args.seed, low_threshold=low)
    _emit_doc(args, {"ok": att.ok, "audit": att.audit, "phase": att.phase, "rounds": att.rounds,
                     "sides": [list(s) for s in att.sides], "low": att.low, "removed": att.H.edges()})
    if not att.ok:
        raise Retryable("attack did not reach an audited disconnection")


def cmd_oracle(args) -> None:
    D = _load(args)
    res = decide(D, budget=args.budget)
    if args.format == "json":
        _emit_doc(args, {"decision": res.decision, "cycle": list(res.cycle) if res.cycle else None,
                         "nodes_explored": res.nodes_explored})
    else:
        text = _header(_config(args)) + res.decision + "\n"
        if res.cycle:
            text += " ".join(map(str, res.cycle)) + "\n"
        _emit(args, text)
    if res.decision == TIMEOUT:
        raise Retryable("oracle budget exhausted")


def _resilience_row(job: tuple) -> dict:
    n, eps, seed, alpha = job
    return resilience_trial(n, eps, seed, alpha)


def cmd_resilience(args) -> None:
    if args.n < 2 or args.trials < 1 or not 0 < args.eps <= 0.5:
        raise InputError("need n >= 2, trials >= 1 and eps in (0, 1/2]")
    seeds = [args.seed + t for t in range(args.trials)]
    rows = _map(_resilience_row, [(args.n, args.eps, s, args.alpha) for s in seeds], _jobs(args))
    rows.sort(key=lambda r: r["seed"])
    total = len(rows)
    summary = {
        "hitting_time_ham": sum(r["oracle_verdict"] == HAM for r in rows) / total,
        "survival_rate": sum(r["survival_alpha"] == HAM for r in rows) / total,
        "attack_rate": sum(bool(r.get("attack_ok")) for r in rows) / total,
        "reduction_broken": sum(r["reduction"] == "BROKEN" for r in rows),
    }
    if args.dump:
        out = Path(args.dump)
        out.mkdir(parents=True, exist_ok=True)
        for s in seeds:
            snap, H = removal_instance(args.n, args.eps, s, args.alpha)
            DmH = snap.digraph.without_edges(H.edges())
            (out / f"seed{s}.edges").write_text(write_edge_list(DmH))
    _emit_table(args, rows, RESILIENCE_COLUMNS, summary)


def cmd_selftest(args) -> None:
    from .selftest import run_selftest

    results = run_selftest(seed=args.seed)
    text = _header(_config(args)) + "".join(
        f"{'PASS' if ok else 'FAIL'} {name}: {info}\n" for name, ok, info in results)
    _emit(args, text)
    if not all(ok for _, ok, _ in results):
        raise RuntimeError("self-test failed")


# ---- parser ----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hamres", description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def add(name: str, func, help: str, epilog: str = "") -> argparse.ArgumentParser:
        sp = sub.add_parser(name, help=help, description=help, epilog=epilog,
                            formatter_class=argparse.RawDescriptionHelpFormatter)
        sp.add_argument("--out", help="write here instead of stdout")
        sp.set_defaults(func=func)
        return sp

    sp = add("gen", cmd_gen, "sample a digraph and write it as an edge list",
             "Without --p/--M the process is stopped at its min-degree hitting time.")
    _add_source(sp)

    sp = add("hit", cmd_hit, "hitting-time table of the random digraph process",
             "CSV columns: " + ",".join(HIT_COLUMNS) + "\n"
             "Trial t samples the process with seed stream (seed, t).")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--trials", type=int, default=100)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--oracle", action="store_true", help=f"decide Hamiltonicity (n <= {HELD_KARP_MAX_N})")
    sp.add_argument("--format", choices=("csv", "json"), default="csv")
    sp.add_argument("--jobs", type=int, help=f"worker processes (default ${JOBS_ENV} or 1)")

    sp = add("certify", cmd_certify, "pseudorandomness certificates (JSON)")
    _add_source(sp)
    sp.add_argument("--d", type=float, help="density parameter (default: half the min semidegree)")
    sp.add_argument("--eps", type=float, default=0.1)
    sp.add_argument("--m", type=int)

    sp = add("hamiltonize", cmd_hamiltonize, "run the construction and report per stage (JSON)")
    _add_source(sp)
    sp.add_argument("--eps", type=float, default=0.1)
    sp.add_argument("--r", type=int, help="reservoir count override")
    sp.add_argument("--ell", type=int, help="final path count override")
    sp.add_argument("--a-size", dest="a_size", type=int, help="connector set size override")
    sp.add_argument("--m", type=int, help="expansion set size override")
    sp.add_argument("--no-retries", action="store_true")

    sp = add("attack", cmd_attack, "bipartition attack with audit (JSON)",
             "With only --n, attacks the process snapshot at its hitting time.")
    _add_source(sp)
    sp.add_argument("--eps", type=float, default=0.15)

    sp = add("oracle", cmd_oracle, "exact Hamiltonicity decision")
    _add_source(sp)
    sp.add_argument("--budget", type=int, default=2_000_000, help="backtracking node budget")
    sp.add_argument("--format", choices=("text", "json"), default="text")

    sp = add("resilience", cmd_resilience, "survival table for both directions",
             "CSV columns: " + ",".join(RESILIENCE_COLUMNS) + "\n"
             "Trial t uses seed + t. --dump writes each D - H for oracle replay.")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--eps", type=float, default=0.25)
    sp.add_argument("--alpha", type=float, help="removal fraction (default 1/2 - eps)")
    sp.add_argument("--trials", type=int, default=50)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--dump", help="directory for the D - H edge lists")
    sp.add_argument("--format", choices=("csv", "json"), default="csv")
    sp.add_argument("--jobs", type=int, help=f"worker processes (default ${JOBS_ENV} or 1)")

    sp = add("selftest", cmd_selftest, "quick invariant suite")
    sp.add_argument("--seed", type=int, default=0)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        args.func(args)
    except InputError as exc:
        print(f"hamres: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (Retryable, StageFailure) as exc:
        print(f"hamres: {exc}", file=sys.stderr)
        return EXIT_RETRY
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
