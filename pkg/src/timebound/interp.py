"""Cost-instrumented big-step interpreter and assertion evaluation."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Protocol

from .core import (
    AAnd, ACmp, AExists, AFalse, AForall, AImpl, ANot, AOr, ATrue, And, ArrAssign,
    ArrRead, ArithExpr, Assertion, Assign, BFalse, BTrue, BinArith, BoolExpr, CMP_COST,
    Cmp, CostModel, For, If, IntConst, LogTwo, MaxExpr, Not, Or, Seq, Skip, Stmt,
    SumExpr, Var, While, Add, Sub, Mul, Div, Pow, free_vars,
)

DEFAULT_FUEL = 1_000_000


@dataclass(frozen=True)
class ProgramState:
    """Total map: unwritten scalars and cells read as 0."""

    scalars: Mapping[str, int] = field(default_factory=dict)
    arrays: Mapping[tuple[str, int], int] = field(default_factory=dict)

    def get(self, name: str) -> int:
        return self.scalars.get(name, 0)

    def read(self, array: str, index: int) -> int:
        return self.arrays.get((array, index), 0)

    def with_scalar(self, name: str, value: int) -> "ProgramState":
        s = dict(self.scalars)
        s[name] = value
        return ProgramState(s, self.arrays)

    def with_cell(self, array: str, index: int, value: int) -> "ProgramState":
        a = dict(self.arrays)
        a[(array, index)] = value
        return ProgramState(self.scalars, a)

    @classmethod
    def of(cls, scalars: Mapping[str, int] | None = None,
           arrays: Mapping[str, Iterable[int]] | None = None) -> "ProgramState":
        cells: dict[tuple[str, int], int] = {}
        for name, values in (arrays or {}).items():
            for i, v in enumerate(values):
                cells[(name, i)] = v
        return cls(dict(scalars or {}), cells)

    def normalized(self) -> tuple[tuple, tuple]:
        """Canonical form ignoring explicit zeros (states are total maps)."""
        return (tuple(sorted((k, v) for k, v in self.scalars.items() if v != 0)),
                tuple(sorted((k, v) for k, v in self.arrays.items() if v != 0)))

    def same_as(self, other: "ProgramState") -> bool:
        return self.normalized() == other.normalized()

    def array_extent(self, name: str) -> int:
        idx = [i for (a, i) in self.arrays if a == name]
        return max(idx) + 1 if idx else 0

    def render(self) -> str:
        lines = [f"{k} = {v}" for k, v in sorted(self.scalars.items())]
        names = sorted({a for a, _ in self.arrays})
        for a in names:
            hi = self.array_extent(a)
            lo = min(0, min(i for (b, i) in self.arrays if b == a))
            vals = ", ".join(str(self.read(a, i)) for i in range(lo, hi))
            lines.append(f"{a} = [{vals}]" if lo == 0 else f"{a}[{lo}..] = [{vals}]")
        return "\n".join(lines)


class ExecutionError(Exception):
    """Runtime failure of evaluation or execution."""

    KINDS = ("DivByZero", "NegativeExponent", "FuelExhausted", "LogDomain")

    def __init__(self, kind: str, message: str, location: str = "", fuel: int | None = None):
        assert kind in self.KINDS
        super().__init__(f"{kind}: {message}" + (f" at {location}" if location else ""))
        self.kind = kind
        self.location = location
        self.fuel = fuel


@dataclass(frozen=True)
class ExecOutcome:
    final_state: ProgramState
    cost: int
    steps: int


# ---------------------------------------------------------------------------
# Integer operations shared by every evaluator in the package


def int_div(a: int, b: int) -> int:
    if b == 0:
        raise ExecutionError("DivByZero", f"{a} / 0")
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b >= 0) else -q


def int_pow(a: int, b: int) -> int:
    if b < 0:
        raise ExecutionError("NegativeExponent", f"{a} ^ {b}")
    return a ** b


def int_log2(a: int) -> int:
    if a < 1:
        raise ExecutionError("LogDomain", f"log({a})")
    return a.bit_length() - 1


ARITH_OPS = {
    Add: lambda a, b: a + b,
    Sub: lambda a, b: a - b,
    Mul: lambda a, b: a * b,
    Div: int_div,
    Pow: int_pow,
}

CMP_FUNCS = {
    "=": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
    "<": lambda a, b: a < b,
    ">": lambda a, b: a > b,
    "<=": lambda a, b: a <= b,
    ">=": lambda a, b: a >= b,
}


# ---------------------------------------------------------------------------
# Expression evaluation


def eval_aexp(a: ArithExpr, sigma: ProgramState, env: Mapping[str, int] | None = None) -> int:
    """Value of ``a``; ``env`` overrides scalars (sum and quantifier binders)."""
    env = env or {}
    match a:
        case IntConst(v):
            return v
        case Var(name):
            return env[name] if name in env else sigma.scalars.get(name, 0)
        case ArrRead(arr, idx):
            return sigma.arrays.get((arr, eval_aexp(idx, sigma, env)), 0)
        case BinArith(l, r):
            return ARITH_OPS[type(a)](eval_aexp(l, sigma, env), eval_aexp(r, sigma, env))
        case SumExpr(b, lo, hi, body):
            l, u = eval_aexp(lo, sigma, env), eval_aexp(hi, sigma, env)
            inner = dict(env)
            total = 0
            for v in range(l, u + 1):
                inner[b] = v
                total += eval_aexp(body, sigma, inner)
            return total
        case MaxExpr(l, r):
            return max(eval_aexp(l, sigma, env), eval_aexp(r, sigma, env))
        case LogTwo(arg):
            return int_log2(eval_aexp(arg, sigma, env))
    raise TypeError(f"not an arithmetic expression: {a!r}")


def eval_bexp(b: BoolExpr, sigma: ProgramState, env: Mapping[str, int] | None = None) -> bool:
    match b:
        case BTrue():
            return True
        case BFalse():
            return False
        case Cmp(op, l, r):
            return CMP_FUNCS[op](eval_aexp(l, sigma, env), eval_aexp(r, sigma, env))
        case Not(i):
            return not eval_bexp(i, sigma, env)
        case And(l, r):
            return eval_bexp(l, sigma, env) and eval_bexp(r, sigma, env)
        case Or(l, r):
            return eval_bexp(l, sigma, env) or eval_bexp(r, sigma, env)
    raise TypeError(f"not a boolean expression: {b!r}")


class _Costed:
    """Evaluates executable expressions returning (value, cost) in one pass."""

    def __init__(self, m: CostModel):
        self.c = m.as_dict()
        self.paper_sums = m.sum_cost == "paper"

    def aexp(self, a: ArithExpr, scalars, cells, env) -> tuple[int, int]:
        c = self.c
        match a:
            case IntConst(v):
                return v, c["C_CST"]
            case Var(name):
                return (env[name] if name in env else scalars.get(name, 0)), c["C_VAR"]
            case ArrRead(arr, idx):
                i, t = self.aexp(idx, scalars, cells, env)
                return cells.get((arr, i), 0), t + c["C_ARR"]
            case BinArith(l, r):
                lv, lt = self.aexp(l, scalars, cells, env)
                rv, rt = self.aexp(r, scalars, cells, env)
                return ARITH_OPS[type(a)](lv, rv), lt + rt + c[a.cost_name]
            case SumExpr(b, lo, hi, body):
                # Bounds are evaluated but not charged.
                l = eval_aexp(lo, ProgramState(scalars, cells), env)
                u = eval_aexp(hi, ProgramState(scalars, cells), env)
                inner = dict(env)
                total = cost = 0
                last = u - 1 if self.paper_sums else u
                for v in range(l, u + 1):
                    inner[b] = v
                    val, t = self.aexp(body, scalars, cells, inner)
                    total += val
                    if v <= last:
                        cost += t
                return total, cost
            case MaxExpr() | LogTwo():
                raise TypeError("max/log are not executable")
        raise TypeError(f"not an arithmetic expression: {a!r}")

    def bexp(self, b: BoolExpr, scalars, cells, env) -> tuple[bool, int]:
        c = self.c
        match b:
            case BTrue() | BFalse():
                return isinstance(b, BTrue), c["C_CST"]
            case Cmp(op, l, r):
                lv, lt = self.aexp(l, scalars, cells, env)
                rv, rt = self.aexp(r, scalars, cells, env)
                return CMP_FUNCS[op](lv, rv), lt + rt + c[CMP_COST[op]]
            case Not(i):
                v, t = self.bexp(i, scalars, cells, env)
                return not v, t + c["C_NOT"]
            case And(l, r) | Or(l, r):
                # Both operands are always evaluated and charged.
                lv, lt = self.bexp(l, scalars, cells, env)
                rv, rt = self.bexp(r, scalars, cells, env)
                v = (lv and rv) if isinstance(b, And) else (lv or rv)
                return v, lt + rt + c["C_AND" if isinstance(b, And) else "C_OR"]
        raise TypeError(f"not a boolean expression: {b!r}")


def eval_aexp_cost(a: ArithExpr, sigma: ProgramState, m: CostModel) -> tuple[int, int]:
    return _Costed(m).aexp(a, sigma.scalars, sigma.arrays, {})


def eval_bexp_cost(b: BoolExpr, sigma: ProgramState, m: CostModel) -> tuple[bool, int]:
    return _Costed(m).bexp(b, sigma.scalars, sigma.arrays, {})


# ---------------------------------------------------------------------------
# Statements


class Tracer(Protocol):
    """Optional observer of loop and conditional execution."""

    def loop_entry(self, loop: While | For, state: ProgramState) -> None: ...

    def loop_iteration(self, loop: While | For, before: ProgramState,
                       after: ProgramState, body_cost: int) -> None: ...

    def branch(self, stmt: If, state: ProgramState, taken: bool) -> None: ...


class _Machine:
    def __init__(self, m: CostModel, fuel: int, tracer: Tracer | None):
        if fuel < 1:
            raise ValueError("fuel must be at least 1")
        self.m = m
        self.ev = _Costed(m)
        self.fuel = fuel
        self.left = fuel
        self.steps = 0
        self.tracer = tracer
        self.scalars: dict[str, int] = {}
        self.cells: dict[tuple[str, int], int] = {}

    def snapshot(self) -> ProgramState:
        return ProgramState(dict(self.scalars), dict(self.cells))

    def tick(self, where: str) -> None:
        self.left -= 1
        if self.left < 0:
            raise ExecutionError("FuelExhausted", f"more than {self.fuel} loop iterations",
                                 where, fuel=self.fuel)

    def run(self, s: Stmt, path: str) -> int:
        self.steps += 1
        c = self.m
        ev = self.ev
        try:
            match s:
                case Skip():
                    return c["C_SKIP"]
                case Assign(x, a):
                    v, t = ev.aexp(a, self.scalars, self.cells, {})
                    self.scalars[x] = v
                    return t + c["C_ASSIGN_V"]
                case ArrAssign(x, i, a):
                    iv, it = ev.aexp(i, self.scalars, self.cells, {})
                    v, t = ev.aexp(a, self.scalars, self.cells, {})
                    self.cells[(x, iv)] = v
                    return it + t + c["C_ASSIGN_A"]
                case Seq(s1, s2):
                    return self.run(s1, path + ".1") + self.run(s2, path + ".2")
                case If(b, s1, s2):
                    v, t = ev.bexp(b, self.scalars, self.cells, {})
                    if self.tracer is not None:
                        self.tracer.branch(s, self.snapshot(), v)
                    return t + (self.run(s1, path + ".then") if v else self.run(s2, path + ".else"))
                case While(lid, b, body):
                    return self.run_while(s, path)
                case For():
                    return self.run_for(s, path)
        except ExecutionError as e:
            if not e.location:
                e.location = path
                e.args = (f"{e.args[0]} at {path}",)
            raise
        raise TypeError(f"not a statement: {s!r}")

    def run_while(self, s: While, path: str) -> int:
        where = f"{path}(while{s.loop_id})"
        total = 0
        tr = self.tracer
        if tr is not None:
            tr.loop_entry(s, self.snapshot())
        while True:
            v, t = self.ev.bexp(s.cond, self.scalars, self.cells, {})
            total += t
            if not v:
                return total
            self.tick(where)
            before = self.snapshot() if tr is not None else None
            bt = self.run(s.body, where)
            total += bt
            if tr is not None:
                tr.loop_iteration(s, before, self.snapshot(), bt)

    def run_for(self, s: For, path: str) -> int:
        where = f"{path}(for{s.loop_id})"
        total = 0
        tr = self.tracer
        lower = s.lower
        if tr is not None:
            tr.loop_entry(s, self.snapshot())
        counter = self.ev.c["C_CST"] + self.ev.c["C_ASSIGN_V"]
        while True:
            # Condition `lower < upper` with lower a literal.
            uv, ut = self.ev.aexp(s.upper, self.scalars, self.cells, {})
            total += self.ev.c["C_CST"] + ut + self.ev.c["C_LT"]
            if not lower < uv:
                self.scalars[s.binder] = lower
                return total
            self.tick(where)
            before = self.snapshot() if tr is not None else None
            self.scalars[s.binder] = lower
            bt = self.run(s.body, where)
            total += counter + bt
            if tr is not None:
                tr.loop_iteration(s, before, self.snapshot(), counter + bt)
            lower += 1


def exec_stmt(s: Stmt, sigma: ProgramState, m: CostModel | None = None,
              fuel: int = DEFAULT_FUEL, tracer: Tracer | None = None) -> ExecOutcome:
    """Run ``s`` from ``sigma``; raises ExecutionError on runtime failure."""
    mach = _Machine(m or CostModel.unit(), fuel, tracer)
    mach.scalars = dict(sigma.scalars)
    mach.cells = dict(sigma.arrays)
    cost = mach.run(s, "body")
    return ExecOutcome(ProgramState(mach.scalars, mach.cells), cost, mach.steps)


# Short alias; the name `exec` would shadow the builtin.
execute = exec_stmt


# ---------------------------------------------------------------------------
# Assertion satisfaction


def default_domain(sigma: ProgramState, extra: int = 2) -> range:
    """Finite quantifier domain large enough to cover the state's arrays."""
    d = 8
    for (name, i) in sigma.arrays:
        d = max(d, abs(i) + 1)
    for v in sigma.scalars.values():
        d = max(d, min(abs(v), 256))
    return range(-d - extra, d + extra + 1)


def holds(p: Assertion, sigma: ProgramState, domain: range | None = None,
          env: Mapping[str, int] | None = None) -> bool:
    """Satisfaction with quantifiers ranging over a finite ``domain``.

    Implications short-circuit, so a false antecedent never evaluates its
    consequent. Quantified implications and conjunctions whose guard pins
    the binder to an interval only enumerate that interval.
    """
    if domain is None:
        domain = default_domain(sigma)
    return _holds(p, sigma, domain, dict(env or {}))


def _holds(p: Assertion, sigma: ProgramState, dom: range, env: dict) -> bool:
    match p:
        case ATrue():
            return True
        case AFalse():
            return False
        case ACmp(op, l, r):
            return CMP_FUNCS[op](eval_aexp(l, sigma, env), eval_aexp(r, sigma, env))
        case ANot(i):
            return not _holds(i, sigma, dom, env)
        case AAnd(l, r):
            return _holds(l, sigma, dom, env) and _holds(r, sigma, dom, env)
        case AOr(l, r):
            return _holds(l, sigma, dom, env) or _holds(r, sigma, dom, env)
        case AImpl(l, r):
            return (not _holds(l, sigma, dom, env)) or _holds(r, sigma, dom, env)
        case AForall(b, body):
            guard = body.left if isinstance(body, AImpl) else None
            for v in _guarded_range(b, guard, sigma, dom, env):
                inner = dict(env)
                inner[b] = v
                if not _holds(body, sigma, dom, inner):
                    return False
            return True
        case AExists(b, body):
            guard = body.left if isinstance(body, AAnd) else None
            for v in _guarded_range(b, guard, sigma, dom, env):
                inner = dict(env)
                inner[b] = v
                if _holds(body, sigma, dom, inner):
                    return True
            return False
    raise TypeError(f"not an assertion: {p!r}")


def _conjuncts(p: Assertion) -> list[Assertion]:
    if isinstance(p, AAnd):
        return _conjuncts(p.left) + _conjuncts(p.right)
    return [p]


def _guarded_range(b: str, guard: Assertion | None, sigma, dom: range, env) -> range:
    lo, hi = dom.start, dom.stop - 1
    if guard is None:
        return dom
    for c in _conjuncts(guard):
        if not isinstance(c, ACmp):
            continue
        op, l, r = c.op, c.left, c.right
        if r == Var(b) and b not in free_vars(l):
            op, l, r = {"<": ">", ">": "<", "<=": ">=", ">=": "<=", "=": "=", "!=": "!="}[op], r, l
        if l != Var(b) or b in free_vars(r):
            continue
        try:
            k = eval_aexp(r, sigma, env)
        except ExecutionError:
            continue
        if op == "<":
            hi = min(hi, k - 1)
        elif op == "<=":
            hi = min(hi, k)
        elif op == ">":
            lo = max(lo, k + 1)
        elif op == ">=":
            lo = max(lo, k)
        elif op == "=":
            lo, hi = max(lo, k), min(hi, k)
    return range(lo, hi + 1)
