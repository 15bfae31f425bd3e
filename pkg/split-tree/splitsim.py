# splitsim.py
import argparse
import sys
from typing import List, Optional

import numpy as np

from adversary import RosterError, load_roster, save_roster
from construction import ConstructionConfig, ConstructionTrace, run
from scenarios import SCENARIOS, get_scenario, random_roster, scenario_roster
from strategies import ConstructionError
from trace_store import TraceDoc, TraceError, load_trace, save_trace
from tree import REGIMES, render_path
from verifier import CHECKS, CheckReport, count_speedup_witnesses, verify


def build_parser():
    parser = argparse.ArgumentParser(
        prog="splitsim",
        description="Stage-by-stage simulator of a tree-of-strategies priority construction.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="Run the construction and write a trace.")
    p_run.add_argument("--regime", choices=REGIMES, default="one-split", help="Which tree to build.")
    p_run.add_argument("--horizon", type=int, default=50, help="Last stage to run (>= 1).")
    p_run.add_argument("--roster", default=None, help="Adversary roster (JSON).")
    p_run.add_argument("--random", action="store_true",
                       help="Draw a random roster from --rng-seed instead of reading --roster.")
    p_run.add_argument("--rng-seed", type=int, default=0, help="Seed for --random rosters.")
    p_run.add_argument("--roster-out", default=None, help="Save the roster the run used (JSON).")
    p_run.add_argument("--trace-out", default="trace.jsonl", help="Where to write the trace.")
    p_run.add_argument("--true-path-threshold", type=int, default=3,
                       help="Visits a child needs to count on the approximate true path.")
    p_run.add_argument("--log-file", default=None, help="Append one CSV row per stage here.")
    p_run.add_argument("--verbosity", type=int, default=1, help="0 quiet, 1 summary, 2 per stage.")

    p_ver = sub.add_parser("verify", help="Run checks over a trace file.")
    p_ver.add_argument("--trace", required=True, help="Trace written by `run`.")
    p_ver.add_argument("--checks", default=None,
                       help=f"Comma-separated subset of: {', '.join(CHECKS)} (default: all).")

    p_sc = sub.add_parser("scenario", help="Run a canned scenario and compare with its expectations.")
    p_sc.add_argument("name", help=f"One of: {', '.join(SCENARIOS)}.")
    p_sc.add_argument("--trace-out", default=None, help="Also write the scenario's trace here.")

    sub.add_parser("list-scenarios", help="List the canned scenarios.")
    return parser


def print_reports(reports: List[CheckReport]) -> bool:
    for r in reports:
        print(f"[check] {r.line()}")
    return all(r.passed for r in reports)


def summarize(trace: ConstructionTrace, threshold: int) -> None:
    doc = TraceDoc.from_records(trace.records())
    switches = doc.of_type("switch")
    witnesses = count_speedup_witnesses(doc, "").counts.get("witnesses", 0)
    print(f"[done] stages={len(trace.stages)} |B|={len(trace.final['B'])} "
          f"true_path~{render_path(trace.true_path(threshold)) or '<root>'} "
          f"switches={len(switches)} witnesses={witnesses}")
    for ev in switches:
        print(f"[switch] s={ev['s']} {ev['path']}: {ev['before']} -> {ev['after']}")


# ---------- commands ----------
def cmd_run(args, parser) -> int:
    if not args.random and args.roster is None:
        parser.error("run needs --roster <file> or --random")
    cfg = ConstructionConfig(args.regime, args.horizon, args.roster, args.rng_seed,
                             args.true_path_threshold, args.verbosity, args.log_file)
    cfg.validate()
    if args.random:
        roster = random_roster(np.random.default_rng(args.rng_seed), args.regime, args.horizon)
    else:
        roster = load_roster(args.roster)
    if args.roster_out:
        save_roster(args.roster_out, roster)
    trace = run(cfg, roster)
    save_trace(args.trace_out, trace.records())
    print(f"[done] trace written to {args.trace_out}")
    summarize(trace, cfg.true_path_threshold)
    return 0


def cmd_verify(args, parser) -> int:
    names = None
    if args.checks:
        names = [n.strip() for n in args.checks.split(",") if n.strip()]
        unknown = [n for n in names if n not in CHECKS]
        if unknown:
            parser.error(f"unknown check(s) {', '.join(unknown)}; known: {', '.join(CHECKS)}")
    doc = load_trace(args.trace)
    return 0 if print_reports(verify(doc, names)) else 1


def cmd_scenario(args, parser) -> int:
    if args.name not in SCENARIOS:
        parser.error(f"unknown scenario {args.name!r}; known: {', '.join(SCENARIOS)}")
    spec = get_scenario(args.name)
    trace = run(spec.config, scenario_roster(spec))
    records = trace.records()
    if args.trace_out:
        save_trace(args.trace_out, records)
    reports = spec.reports(TraceDoc.from_records(records))
    print_reports(list(reports.values()))
    diffs = spec.compare(reports)
    for d in diffs:
        print(f"[warn] expectation missed: {d}")
    print(f"[done] scenario {spec.name}: {'ok' if not diffs else f'{len(diffs)} mismatch(es)'}")
    return 0 if not diffs else 1


def cmd_list(args, parser) -> int:
    for name in SCENARIOS:
        spec = get_scenario(name)
        print(f"{name:<6} {spec.config.regime:<10} H={spec.config.horizon:<4} {spec.about}")
    return 0


COMMANDS = {"run": cmd_run, "verify": cmd_verify, "scenario": cmd_scenario, "list-scenarios": cmd_list}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args, parser)
    except (RosterError, TraceError, ConstructionError) as e:
        print(f"[error] {e}", file=sys.stderr)
        return 1
    except ValueError as e:
        print(f"[error] {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
