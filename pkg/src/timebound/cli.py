"""Command-line driver: ``timebound run|vcs|check|fuzz FILE``.

Exit codes:
  0  success (all goals Valid, no fuzz violations)
  1  runtime error while executing the program
  2  parse error, unreadable file or bad usage
  3  a loop lacks an oracle field required by the mode
  4  at least one goal is Invalid
  5  at least one goal ended in SolverError, Timeout or Unknown (and none Invalid)
  6  fuzzing found violations
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from pathlib import Path

from .core import MODES, CostModel
from .emit import default_solver, make_goal, run_solver_all, write_goals
from .harness import (
    SamplingConfig, SamplingExhausted, check_amortized_telescoping, check_bound, write_summary,
)
from .interp import DEFAULT_FUEL, ExecutionError, ProgramState, exec_stmt
from .parser import OracleMissingError, ParseError, parse_cost_model, parse_program
from .vcg import IF_COST_MODES, VCGError, vcg

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2
EXIT_ORACLE = 3
EXIT_INVALID = 4
EXIT_SOLVER = 5
EXIT_VIOLATIONS = 6


class UsageError(Exception):
    pass


_STATE_ITEM = re.compile(r"\s*([A-Za-z_][A-Za-z0-9_']*)\s*=\s*(\[[^\]]*\]|-?\d+)\s*(?:,|$)")


def parse_state(items: list[str]) -> ProgramState:
    """``x=3,y=10`` and ``A=[1,2,3]`` items, possibly spread over several flags."""
    scalars: dict[str, int] = {}
    arrays: dict[str, list[int]] = {}
    for item in items:
        pos = 0
        while pos < len(item):
            m = _STATE_ITEM.match(item, pos)
            if not m or m.end() == pos:
                raise UsageError(f"cannot parse state assignment near {item[pos:]!r}")
            name, val = m.group(1), m.group(2)
            if val.startswith("["):
                body = val[1:-1].strip()
                try:
                    arrays[name] = [int(v) for v in body.split(",")] if body else []
                except ValueError:
                    raise UsageError(f"bad array literal {val!r}") from None
            else:
                scalars[name] = int(val)
            pos = m.end()
    return ProgramState.of(scalars, arrays)


def _load(args) -> tuple[str, object]:
    path = Path(args.file)
    try:
        source = path.read_text()
    except OSError as e:
        raise UsageError(f"cannot read {args.file}: {e.strerror or e}") from None
    return path.stem, parse_program(source, getattr(args, "mode", None))


def _cost_model(args) -> CostModel:
    if args.cost_model:
        try:
            text = Path(args.cost_model).read_text()
        except OSError as e:
            raise UsageError(f"cannot read cost model {args.cost_model}: {e.strerror or e}") from None
        return parse_cost_model(text, args.sum_cost)
    return CostModel.unit().with_sum_cost(args.sum_cost)


def cmd_run(args) -> int:
    _, p = _load(args)
    m = _cost_model(args)
    sigma = parse_state(args.state or [])
    try:
        out = exec_stmt(p.body, sigma, m, args.fuel)
    except ExecutionError as e:
        print(f"runtime error: {e}", file=sys.stderr)
        return EXIT_RUNTIME
    rendered = out.final_state.render()
    if rendered:
        print(rendered)
    print(f"cost {out.cost}")
    return EXIT_OK


def _goals(args):
    name, p = _load(args)
    m = _cost_model(args)
    vcs = vcg(p, m, args.if_cost)
    return name, p, [make_goal(v) for v in vcs]


def cmd_vcs(args) -> int:
    name, p, goals = _goals(args)
    if args.out:
        write_goals(name, goals, args.out, args.format)
    else:
        for g in goals:
            print(f"== {g.vc_name}")
            print(g.smt_text.rstrip() if args.format == "smt" else g.logic_text)
    print(f"{len(goals)} VCs")
    return EXIT_OK


def cmd_check(args) -> int:
    name, p, goals = _goals(args)
    if args.jobs < 1:
        raise UsageError("--jobs must be at least 1")
    solved = run_solver_all(goals, args.solver, args.timeout, args.jobs)
    width = max(len(g.vc_name) for g in solved)
    for g in solved:
        line = f"{g.vc_name:<{width}}  {g.status}"
        if g.detail and g.status != "Valid":
            line += f"  ({g.detail})"
        print(line)
    if args.out:
        write_goals(name, solved, args.out, "smt")
    if args.summary:
        Path(args.summary).write_text(json.dumps(
            {"name": name, "goals": {g.vc_name: g.status for g in solved}}, indent=2, sort_keys=True))
    statuses = {g.status for g in solved}
    valid = sum(g.status == "Valid" for g in solved)
    print(f"{valid}/{len(solved)} Valid")
    if "Invalid" in statuses:
        return EXIT_INVALID
    if statuses != {"Valid"}:
        return EXIT_SOLVER
    return EXIT_OK


def cmd_fuzz(args) -> int:
    if args.trials < 1:
        raise UsageError("--trials must be at least 1")
    name, p = _load(args)
    m = _cost_model(args)
    cfg = SamplingConfig.from_program(p)
    try:
        reports = [check_bound(p, m, args.trials, args.seed, cfg, fuel=args.fuel, name=name,
                               if_cost=args.if_cost)]
        if p.mode == "amortized":
            reports.append(check_amortized_telescoping(p, m, args.trials, args.seed, cfg,
                                                       fuel=args.fuel, name=name))
    except SamplingExhausted as e:
        print(f"sampling failed: {e}", file=sys.stderr)
        return EXIT_VIOLATIONS
    for r in reports:
        print(r.text())
    if args.summary:
        write_summary(reports, args.summary)
    return EXIT_OK if all(r.ok for r in reports) else EXIT_VIOLATIONS


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="timebound", description="Cost-aware verification of small imperative programs.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, mode=True):
        sp.add_argument("file")
        if mode:
            sp.add_argument("--mode", choices=MODES, help="override the file's #mode header")
        sp.add_argument("--cost-model", help="file of NAME = cost lines")
        sp.add_argument("--sum-cost", choices=("inclusive", "paper"), default="inclusive",
                        help="iterations charged for sum(i, b, e, ...): e-b+1 or e-b")
        sp.add_argument("--if-cost", choices=IF_COST_MODES, default="max")

    run = sub.add_parser("run", help="execute and print final state and cost")
    common(run, mode=False)
    run.add_argument("--state", action="append", help="initial state, e.g. x=3,y=10,A=[1,2]")
    run.add_argument("--fuel", type=int, default=DEFAULT_FUEL)
    run.set_defaults(func=cmd_run)

    vcs = sub.add_parser("vcs", help="generate verification conditions")
    common(vcs)
    vcs.add_argument("--format", choices=("text", "smt"), default="text")
    vcs.add_argument("--out", help="directory for goal files and the index")
    vcs.set_defaults(func=cmd_vcs)

    check = sub.add_parser("check", help="discharge VCs with an SMT solver")
    common(check)
    check.add_argument("--solver", default=None, help="solver command (default $TIMEBOUND_SOLVER or 'z3 -in')")
    check.add_argument("--timeout", type=float, default=10.0, help="seconds per goal")
    check.add_argument("--jobs", type=int, default=1)
    check.add_argument("--out", help="also write goal files and a status index here")
    check.add_argument("--summary", help="write a JSON status summary here")
    check.set_defaults(func=cmd_check)

    fuzz = sub.add_parser("fuzz", help="check bounds on sampled states")
    common(fuzz)
    fuzz.add_argument("--trials", type=int, default=200)
    fuzz.add_argument("--seed", type=int, default=0)
    fuzz.add_argument("--fuel", type=int, default=DEFAULT_FUEL)
    fuzz.add_argument("--summary", help="write a JSON report summary here")
    fuzz.set_defaults(func=cmd_fuzz)
    return ap


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if getattr(args, "solver", "") is None:
            args.solver = default_solver()
        if getattr(args, "fuel", 1) < 1:
            raise UsageError("--fuel must be at least 1")
        return args.func(args)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except OracleMissingError as e:
        print(f"oracle missing: {e}", file=sys.stderr)
        return EXIT_ORACLE
    except ParseError as e:
        print(f"parse error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except VCGError as e:
        print(f"oracle error: {e}", file=sys.stderr)
        return EXIT_ORACLE


if __name__ == "__main__":
    sys.exit(main())
