"""Rendering of verification conditions as text and SMT-LIB, and solver driving."""

from __future__ import annotations

import itertools
import os
import shlex
import subprocess
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

from .core import (
    AAnd, ACmp, AExists, AFalse, AForall, AImpl, ANot, AOr, ATrue, ArrRead, ArithExpr,
    Assertion, BinArith, Div, IntConst, LogTwo, MaxExpr, Mul, Pow, Sub, Add, SumExpr, Var,
    array_names, free_vars, free_vars_assertion,
)
from .interp import ExecutionError, ProgramState, holds, int_log2
from .parser import show_assertion
from .vcg import VerificationCondition

STATUSES = ("Unknown", "Valid", "Invalid", "SolverError", "Timeout")
DEFAULT_SOLVER = "z3 -in"
SOLVER_ENV = "TIMEBOUND_SOLVER"


def default_solver() -> str:
    return os.environ.get(SOLVER_ENV, DEFAULT_SOLVER)


@dataclass(frozen=True)
class GoalDocument:
    vc_name: str
    logic_text: str
    smt_text: str
    status: str = "Unknown"
    detail: str = ""


def closed_formula(vc: VerificationCondition) -> Assertion:
    """Universally close the VC's free logic variables, sorted by name."""
    f = vc.formula
    free = free_vars_assertion(f)
    for v in sorted((set(vc.logic_vars) & free), reverse=True):
        f = AForall(v, f)
    return f


def render_text(vc: VerificationCondition) -> str:
    return show_assertion(closed_formula(vc))


# ---------------------------------------------------------------------------
# SMT-LIB

_HELPERS = {
    "tdiv": "(define-fun tdiv ((a Int) (b Int)) Int "
            "(ite (= (>= a 0) (>= b 0)) (div (abs a) (abs b)) (- (div (abs a) (abs b)))))",
    "ipow": "(define-fun-rec ipow ((b Int) (e Int)) Int (ite (<= e 0) 1 (* b (ipow b (- e 1)))))",
    "imax": "(define-fun imax ((a Int) (b Int)) Int (ite (>= a b) a b))",
    "log2": "(declare-fun log2 (Int) Int)",
}
_UNROLL_LIMIT = 64


def _num(v: int) -> str:
    return str(v) if v >= 0 else f"(- {-v})"


class _SmtEncoder:
    def __init__(self, arrays: set[str]):
        self.arrays = arrays
        self.helpers: set[str] = set()
        self.sums: dict[tuple, str] = {}
        self.sum_defs: list[str] = []
        self.log_args: list[tuple[ArithExpr, str]] = []

    def sym(self, name: str) -> str:
        return ("a_" if name in self.arrays else "v_") + name

    def term(self, e: ArithExpr, bound: frozenset) -> str:
        match e:
            case IntConst(v):
                return _num(v)
            case Var(name):
                return "v_" + name
            case ArrRead(arr, i):
                return f"(select a_{arr} {self.term(i, bound)})"
            case Div(l, r):
                self.helpers.add("tdiv")
                return f"(tdiv {self.term(l, bound)} {self.term(r, bound)})"
            case Pow(l, IntConst(k)) if 0 <= k <= _UNROLL_LIMIT:
                base = self.term(l, bound)
                if k == 0:
                    return "1"
                if k == 1:
                    return base
                return "(* " + " ".join([base] * k) + ")"
            case Pow(l, r):
                self.helpers.add("ipow")
                return f"(ipow {self.term(l, bound)} {self.term(r, bound)})"
            case BinArith(l, r):
                op = {Add: "+", Sub: "-", Mul: "*"}[type(e)]
                return f"({op} {self.term(l, bound)} {self.term(r, bound)})"
            case MaxExpr(l, r):
                self.helpers.add("imax")
                return f"(imax {self.term(l, bound)} {self.term(r, bound)})"
            case LogTwo(a):
                self.helpers.add("log2")
                t = self.term(a, bound)
                if not (free_vars(a) & bound):
                    self.log_args.append((a, t))
                return f"(log2 {t})"
            case SumExpr(b, IntConst(lo), IntConst(hi), body) if hi - lo < _UNROLL_LIMIT:
                from .core import subst_aexp
                parts = [self.term(subst_aexp(body, b, IntConst(v)), bound) for v in range(lo, hi + 1)]
                if not parts:
                    return "0"
                return parts[0] if len(parts) == 1 else "(+ " + " ".join(parts) + ")"
            case SumExpr(b, lo, hi, body) if b not in free_vars(body):
                # Binder-free body: count the terms instead of recursing.
                self.helpers.add("imax")
                lt, ht = self.term(lo, bound), self.term(hi, bound)
                return f"(* (imax 0 (+ (- {ht} {lt}) 1)) {self.term(body, bound)})"
            case SumExpr(b, lo, hi, body):
                fn, params = self.sum_function(b, body)
                args = " ".join(self.sym(p) for p in params)
                call = f"({fn} {self.term(lo, bound)} {self.term(hi, bound)}"
                return call + (f" {args})" if args else ")")
        raise TypeError(f"not an arithmetic expression: {e!r}")

    def sum_function(self, binder: str, body: ArithExpr) -> tuple[str, list[str]]:
        key = (binder, body)
        params = sorted(free_vars(body) - {binder})
        if key in self.sums:
            return self.sums[key], params
        name = f"sum_{len(self.sums)}"
        self.sums[key] = name
        inner = self.term(body, frozenset(params) | {binder})
        decls = " ".join(f"({self.sym(p)} {'(Array Int Int)' if p in self.arrays else 'Int'})"
                         for p in params)
        args = " ".join(self.sym(p) for p in params)
        b = "v_" + binder
        rec = f"({name} (+ {b} 1) hi" + (f" {args})" if args else ")")
        self.sum_defs.append(
            f"(define-fun-rec {name} (({b} Int) (hi Int){' ' + decls if decls else ''}) Int "
            f"(ite (> {b} hi) 0 (+ {inner} {rec})))")
        return name, params

    def formula(self, p: Assertion, bound: frozenset) -> str:
        match p:
            case ATrue():
                return "true"
            case AFalse():
                return "false"
            case ACmp(op, l, r):
                lt, rt = self.term(l, bound), self.term(r, bound)
                if op == "!=":
                    return f"(not (= {lt} {rt}))"
                return f"({op} {lt} {rt})"
            case ANot(i):
                return f"(not {self.formula(i, bound)})"
            case AAnd(AImpl(ACmp("=", u, v), hit), AImpl(ACmp("!=", u2, v2), miss)) if (u, v) == (u2, v2):
                # Case split produced by array substitution.
                g = self.formula(ACmp("=", u, v), bound)
                return f"(ite {g} {self.formula(hit, bound)} {self.formula(miss, bound)})"
            case AAnd(l, r):
                return f"(and {self.formula(l, bound)} {self.formula(r, bound)})"
            case AOr(l, r):
                return f"(or {self.formula(l, bound)} {self.formula(r, bound)})"
            case AImpl(l, r):
                return f"(=> {self.formula(l, bound)} {self.formula(r, bound)})"
            case AForall(b, body):
                return f"(forall ((v_{b} Int)) {self.formula(body, bound | {b})})"
            case AExists(b, body):
                return f"(exists ((v_{b} Int)) {self.formula(body, bound | {b})})"
        raise TypeError(f"not an assertion: {p!r}")

    def log_axioms(self) -> list[str]:
        seen: dict[str, ArithExpr] = {}
        for a, t in self.log_args:
            seen.setdefault(t, a)
        out = []
        for t, a in seen.items():
            if isinstance(a, IntConst):
                if a.value >= 1:
                    out.append(f"(assert (= (log2 {t}) {int_log2(a.value)}))")
                continue
            if isinstance(a, Pow) and a.left == IntConst(2):
                e = self.term(a.right, frozenset())
                out.append(f"(assert (=> (>= {e} 0) (= (log2 {t}) {e})))")
            self.helpers.add("ipow")
            out.append(f"(assert (=> (>= {t} 1) (and (>= (log2 {t}) 0) (<= (ipow 2 (log2 {t})) {t}) "
                       f"(< {t} (* 2 (ipow 2 (log2 {t})))))))")
        terms = list(seen)
        for s, t in itertools.permutations(terms, 2):
            out.append(f"(assert (=> (and (>= {s} 1) (<= {s} {t})) (<= (log2 {s}) (log2 {t}))))")
        return out


def render_smt(vc: VerificationCondition) -> str:
    f = closed_formula(vc)
    arrays = array_names(f)
    enc = _SmtEncoder(arrays)
    goal = enc.formula(f, frozenset())
    axioms = enc.log_axioms()
    scalars = sorted(free_vars_assertion(f) - arrays)
    lines = [f"; goal: {vc.name}", "(set-logic ALL)"]
    for h in ("log2", "imax", "tdiv", "ipow"):
        if h in enc.helpers:
            lines.append(_HELPERS[h])
    lines += [f"(declare-const v_{v} Int)" for v in scalars]
    lines += [f"(declare-const a_{a} (Array Int Int))" for a in sorted(arrays)]
    lines += enc.sum_defs
    lines += axioms
    lines.append(f"(assert (not {goal}))")
    lines.append("(check-sat)")
    return "\n".join(lines) + "\n"


def make_goal(vc: VerificationCondition) -> GoalDocument:
    return GoalDocument(vc.name, render_text(vc), render_smt(vc))


# ---------------------------------------------------------------------------
# Solver


def run_solver(goal: GoalDocument, solver_cmd: str | None = None, timeout: float = 10) -> GoalDocument:
    """Run an external solver on ``goal``; never raises."""
    cmd = shlex.split(solver_cmd or default_solver())
    try:
        proc = subprocess.run(cmd, input=goal.smt_text, capture_output=True, text=True,
                              timeout=timeout if timeout and timeout > 0 else None)
    except subprocess.TimeoutExpired:
        return replace(goal, status="Timeout", detail=f"no answer within {timeout}s")
    except (OSError, ValueError) as e:
        return replace(goal, status="SolverError", detail=str(e))
    lines = [l.strip() for l in proc.stdout.splitlines() if l.strip()]
    first = lines[0] if lines else ""
    if proc.returncode != 0 and first not in ("sat", "unsat", "unknown"):
        return replace(goal, status="SolverError",
                       detail=(proc.stderr.strip() or first or f"exit status {proc.returncode}")[:500])
    if first == "unsat":
        return replace(goal, status="Valid")
    if first == "sat":
        return replace(goal, status="Invalid")
    if first == "unknown":
        return replace(goal, status="Unknown", detail="solver answered unknown")
    if first == "timeout":
        return replace(goal, status="Timeout")
    return replace(goal, status="SolverError", detail=f"unrecognized solver output {first[:200]!r}")


def run_solver_all(goals: list[GoalDocument], solver_cmd: str | None = None, timeout: float = 10,
                   jobs: int = 1) -> list[GoalDocument]:
    if jobs <= 1:
        return [run_solver(g, solver_cmd, timeout) for g in goals]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(lambda g: run_solver(g, solver_cmd, timeout), goals))


# ---------------------------------------------------------------------------
# Goal files


def write_goals(program: str, goals: list[GoalDocument], out_dir: str | Path, fmt: str = "smt") -> list[Path]:
    """One file per goal plus ``<program>.index`` with ``name<TAB>status`` lines."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    ext = "smt2" if fmt == "smt" else "txt"
    paths = []
    for g in goals:
        path = out / f"{program}.{g.vc_name}.{ext}"
        path.write_text(g.smt_text if fmt == "smt" else g.logic_text + "\n")
        paths.append(path)
    index = out / f"{program}.index"
    index.write_text("".join(f"{g.vc_name}\t{g.status}\n" for g in goals))
    return paths + [index]


# ---------------------------------------------------------------------------
# Brute-force validity over a finite box


@dataclass(frozen=True)
class BruteResult:
    status: str  # Valid, Invalid, Unsupported
    counterexample: dict | None = None
    checked: int = 0
    undefined: int = 0
    reason: str = ""


def _strip_foralls(p: Assertion) -> Assertion:
    while isinstance(p, AForall):
        p = p.body
    return p


def _has_quantifier(p: Assertion) -> bool:
    match p:
        case AForall() | AExists():
            return True
        case ANot(i):
            return _has_quantifier(i)
        case AAnd(l, r) | AOr(l, r) | AImpl(l, r):
            return _has_quantifier(l) or _has_quantifier(r)
    return False


def brute_force_check(vc: VerificationCondition, ranges: dict[str, range] | None = None,
                      default: range = range(-8, 9), limit: int = 2_000_000) -> BruteResult:
    """Exhaustive check for quantifier-free, array-free VCs.

    Free variables range over ``ranges`` (default -8..8). Assignments on
    which the formula is undefined (division by zero, log of a
    non-positive value) are counted but not treated as counterexamples.
    """
    f = _strip_foralls(closed_formula(vc))
    if _has_quantifier(f):
        return BruteResult("Unsupported", reason="formula contains nested quantifiers")
    if array_names(f):
        return BruteResult("Unsupported", reason="formula reads arrays")
    names = sorted(free_vars_assertion(f))
    ranges = ranges or {}
    doms = [ranges.get(n, default) for n in names]
    total = 1
    for d in doms:
        total *= len(d)
    if total > limit:
        return BruteResult("Unsupported", reason=f"{total} assignments exceed the limit {limit}")
    checked = undefined = 0
    for values in itertools.product(*doms):
        sigma = ProgramState(dict(zip(names, values)))
        try:
            ok = holds(f, sigma, domain=range(0))
        except ExecutionError:
            undefined += 1
            continue
        checked += 1
        if not ok:
            return BruteResult("Invalid", dict(zip(names, values)), checked, undefined)
    return BruteResult("Valid", None, checked, undefined)


def is_linear(vc: VerificationCondition) -> bool:
    """Quantifier-free (below leading foralls) linear integer arithmetic."""
    f = _strip_foralls(closed_formula(vc))
    if _has_quantifier(f):
        return False
    ok = True

    def term(e) -> bool:
        match e:
            case IntConst() | Var():
                return True
            case ArrRead(_, i):
                return term(i)
            case Add(l, r) | Sub(l, r):
                return term(l) and term(r)
            case Mul(l, r):
                return term(l) and term(r) and (isinstance(l, IntConst) or isinstance(r, IntConst))
            case Div(l, IntConst(k)) if k != 0:
                return term(l)
            case SumExpr(_, IntConst(), IntConst(), body):
                return term(body)
            case SumExpr(b, lo, hi, IntConst()):
                return term(lo) and term(hi)
            case MaxExpr(l, r):
                return term(l) and term(r)
        return False

    def walk(p: Assertion) -> bool:
        match p:
            case ATrue() | AFalse():
                return True
            case ACmp(_, l, r):
                return term(l) and term(r)
            case ANot(i):
                return walk(i)
            case AAnd(l, r) | AOr(l, r) | AImpl(l, r):
                return walk(l) and walk(r)
        return False

    return ok and walk(f)
