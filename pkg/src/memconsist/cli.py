"""``memconsist`` command line.

Exit codes: 0 the model holds (or the command succeeded), 1 it fails (or
fuzzing found a problem), 2 the trace is invalid, 3 parse, usage or I/O
error, 4 the search budget ran out.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .linearizer import DEFAULT_BUDGET, COCycle, co_analysis
from .models import (
    CONJUNCTIONS,
    ORDINARY,
    SYNCHRONIZED,
    CheckOptions,
    ModelId,
    ProgramOrder,
    Verdict,
    check,
    classify,
)
from .orders import causal_relation, program_order
from .trace import Execution, InvalidExecution, writes_to
from .tracefmt import ALIASES, FIXTURE_NAMES, ParseError, load

EXIT_HOLDS, EXIT_FAILS, EXIT_INVALID, EXIT_USAGE, EXIT_BUDGET = 0, 1, 2, 3, 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _tri(value: bool | None):
    return "unknown" if value is None else value


def _mark(value: bool | None) -> str:
    return {True: "✓", False: "✗", None: "?"}[value]


def _co_report(exec: Execution, relation: str, opts: CheckOptions) -> dict:
    if relation == "cr":
        rel = causal_relation(exec, opts.lazy)
    else:
        rel = program_order(exec, opts.lazy) | writes_to(exec)
    analysis = co_analysis(exec, rel)
    steps = [
        {"ww": [[exec.describe(a), exec.describe(b)] for a, b in sorted(ww)],
         "rw": [[exec.describe(a), exec.describe(b)] for a, b in sorted(rw)]}
        for ww, rw in analysis.steps
    ]
    edges = [[exec.describe(a), exec.describe(b)] for a, b in sorted(analysis.all_dependencies())]
    out = {"edges": edges, "acyclic": analysis.acyclic, "steps": steps}
    if analysis.cycle is not None:
        out["cycle"] = [exec.describe(o) for o in analysis.cycle]
    return out


def _verdict_json(exec: Execution, verdict: Verdict) -> dict:
    out = {
        "holds": _tri(verdict.holds),
        "witnesses": [{"instance": k, "sequence": w.render(exec)} for k, w in verdict.witnesses.items()],
        "failing_instance": verdict.failing_instance,
    }
    if verdict.extension:
        out["extension"] = True
    if isinstance(verdict.refutation, COCycle):
        out["co_cycle"] = [exec.describe(o) for o in verdict.refutation.cycle]
    if verdict.write_orders:
        out["write_orders"] = {v: [exec.describe(o) for o in seq] for v, seq in verdict.write_orders.items()}
    if verdict.warnings:
        out["warnings"] = list(verdict.warnings)
    return out


def _print_verdict(exec: Execution, verdict: Verdict, witness: bool) -> None:
    line = f"{verdict.model.value}: {_mark(verdict.holds)}"
    if verdict.holds is False and verdict.failing_instance:
        line += f"  (fails at {verdict.failing_instance})"
    if verdict.holds is None:
        line += "  (budget exhausted)"
    if verdict.extension:
        line += "  [extension: lazy program order]"
    print(line)
    if isinstance(verdict.refutation, COCycle) and verdict.holds is False:
        print("  CO cycle: " + " -> ".join(exec.describe(o) for o in verdict.refutation.cycle))
    for warning in verdict.warnings:
        print(f"  warning: {warning}")
    if witness:
        for key, w in verdict.witnesses.items():
            print(f"  {key}: {w.render(exec)}")
        for v, seq in verdict.write_orders.items():
            print(f"  writes on {v}: " + " ".join(exec.describe(o) for o in seq))


def _load(source: str, as_json: bool) -> tuple[Execution | None, int]:
    try:
        return load(source), EXIT_HOLDS
    except (OSError, KeyError) as exc:
        print(f"error: cannot read {source}: {exc}", file=sys.stderr)
        return None, EXIT_USAGE
    except ParseError as exc:
        print(f"error: {source}: {exc}", file=sys.stderr)
        return None, EXIT_USAGE
    except InvalidExecution as exc:
        for err in exc.errors:
            print(f"invalid: {err}", file=sys.stderr)
        if as_json:
            print(json.dumps({"trace": source, "valid": False, "errors": [str(e) for e in exc.errors]}, indent=2))
        return None, EXIT_INVALID


def _options(args) -> CheckOptions:
    return CheckOptions(ProgramOrder(args.po), args.budget)


def cmd_check(args) -> int:
    exec, code = _load(args.trace, args.json)
    if exec is None:
        return code
    opts = _options(args)
    verdict = check(exec, args.model, opts)
    if args.json:
        print(json.dumps({
            "trace": args.trace, "valid": True,
            "models": {verdict.model.value: _verdict_json(exec, verdict)},
            "co": _co_report(exec, "po", opts),
        }, indent=2))
    else:
        _print_verdict(exec, verdict, args.witness)
    if verdict.holds is None:
        return EXIT_BUDGET
    return EXIT_HOLDS if verdict.holds else EXIT_FAILS


def cmd_classify(args) -> int:
    exec, code = _load(args.trace, args.json)
    if exec is None:
        return code
    opts = _options(args)
    models = ORDINARY + (SYNCHRONIZED if exec.has_sync or args.all else ())
    result = classify(exec, opts, models)
    if args.json:
        print(json.dumps({
            "trace": args.trace, "valid": True,
            "models": {m.value: _verdict_json(exec, v) for m, v in result.verdicts.items()},
            "conjunctions": {k: _tri(v) for k, v in result.conjunctions.items()},
            "co": _co_report(exec, "po", opts),
        }, indent=2))
        return EXIT_HOLDS
    width = max(len(name) for name in [m.value for m in result.verdicts] + list(result.conjunctions))
    for verdict in result.verdicts.values():
        if args.witness:
            _print_verdict(exec, verdict, True)
        else:
            tag = "  [extension]" if verdict.extension else ""
            print(f"{verdict.model.value:<{width}}  {_mark(verdict.holds)}{tag}")
    for name in CONJUNCTIONS:
        if name in result.conjunctions:
            print(f"{name:<{width}}  {_mark(result.conjunctions[name])}")
    return EXIT_HOLDS


def cmd_co(args) -> int:
    exec, code = _load(args.trace, args.json)
    if exec is None:
        return code
    report = _co_report(exec, args.relation, _options(args))
    if args.json:
        print(json.dumps({"trace": args.trace, "valid": True, "relation": args.relation, "co": report}, indent=2))
        return EXIT_HOLDS
    for n, step in enumerate(report["steps"], start=1):
        for kind in ("ww", "rw"):
            for a, b in step[kind]:
                print(f"step {n} {kind.upper()} {a} -> {b}")
    if not report["steps"]:
        print("no CO dependencies")
    if report["acyclic"]:
        print("acyclic")
    else:
        cycle = report["cycle"]
        print("cycle: " + " -> ".join(cycle + cycle[:1]))
    return EXIT_HOLDS


def cmd_fuzz(args) -> int:
    from .oracle import fuzz

    out = Path(args.out) if args.out else None
    report = fuzz(range(args.start, args.start + args.seeds), max_ops=args.ops, max_procs=args.procs,
                  max_vars=args.vars, sync_vars=args.sync_vars, out_dir=out, compare=not args.no_oracle)
    for v in report.violations:
        print(f"Violation: seed {v.index}: {v.premise.value} holds but {v.conclusion.value} fails")
    for m in report.mismatches:
        print(f"OracleMismatch: {m}")
    for m in report.necessary_condition:
        print(f"NecessaryCondition: {m}")
    where = f" in {out}" if out else ""
    print(f"{args.seeds} traces{where}: {len(report.violations)} violations, "
          f"{len(report.mismatches)} oracle mismatches, {len(report.necessary_condition)} CO exceptions")
    return EXIT_HOLDS if report.ok else EXIT_FAILS


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="memconsist", description="Check shared-memory traces against consistency models.")
    parser.add_argument("--fixtures", action="store_true", help="list the bundled example traces and exit")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    common = _Parser(add_help=False)
    common.add_argument("trace", help="memtrace file, or @fixture-name")
    common.add_argument("--po", choices=[p.value for p in ProgramOrder], default="strict",
                        help="program order used by every model (default strict)")
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="search expansions per relation")

    p = sub.add_parser("check", parents=[common], help="check one model")
    p.add_argument("--model", required=True, choices=[m.value for m in ModelId])
    p.add_argument("--witness", action="store_true", help="print witness sequences")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("classify", parents=[common], help="check every model")
    p.add_argument("--witness", action="store_true", help="print witness sequences")
    p.add_argument("--all", action="store_true", help="include synchronized models on traces without sync operations")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("co", parents=[common], help="show the CO dependencies and any cycle")
    p.add_argument("--relation", choices=("po", "cr"), default="po",
                   help="po: process order plus writes-to; cr: causal relation")
    p.set_defaults(func=cmd_co)

    p = sub.add_parser("fuzz", help="generate traces and cross-check the checkers")
    p.add_argument("--seeds", type=int, default=100)
    p.add_argument("--start", type=int, default=0, help="first seed")
    p.add_argument("--ops", type=int, default=8, help="maximum ordinary operations per trace")
    p.add_argument("--procs", type=int, default=3)
    p.add_argument("--vars", type=int, default=3)
    p.add_argument("--sync-vars", type=int, default=0)
    p.add_argument("--out", help="directory for the corpus and manifest.json")
    p.add_argument("--no-oracle", action="store_true", help="skip the brute-force comparison")
    p.set_defaults(func=cmd_fuzz)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.fixtures:
        for name in FIXTURE_NAMES:
            print(f"@{name}")
        for alias, target in ALIASES.items():
            print(f"@{alias} (= @{target})")
        return EXIT_HOLDS
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
