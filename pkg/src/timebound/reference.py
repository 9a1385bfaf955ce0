"""A second, deliberately naive evaluator used as a test oracle for ``interp``.

It shares nothing with the main interpreter except the AST classes: values
and costs are computed by separate recursive functions and the state is a
plain dict keyed by ``name`` or ``(array, index)``.
"""

from __future__ import annotations

from .core import (
    Add, And, ArrAssign, ArrRead, Assign, BFalse, BTrue, Cmp, CostModel, Div, For, If,
    IntConst, Mul, Not, Or, Pow, Seq, Skip, Sub, SumExpr, Var, While,
)
from .interp import ExecOutcome, ExecutionError, ProgramState


class _Counter:
    def __init__(self, model: CostModel, fuel: int):
        self.model = model
        self.total = 0
        self.steps = 0
        self.fuel = fuel

    def charge(self, name: str) -> None:
        self.total += self.model[name]


def _value(e, store: dict, binders: dict):
    kind = type(e).__name__
    if kind == "IntConst":
        return e.value
    if kind == "Var":
        if e.name in binders:
            return binders[e.name]
        return store.get(e.name, 0)
    if kind == "ArrRead":
        return store.get((e.array, _value(e.index, store, binders)), 0)
    if kind == "SumExpr":
        acc = 0
        k = _value(e.lower, store, binders)
        top = _value(e.upper, store, binders)
        while k <= top:
            acc = acc + _value(e.body, store, {**binders, e.binder: k})
            k = k + 1
        return acc
    a = _value(e.left, store, binders)
    b = _value(e.right, store, binders)
    if kind == "Add":
        return a + b
    if kind == "Sub":
        return a - b
    if kind == "Mul":
        return a * b
    if kind == "Div":
        if b == 0:
            raise ExecutionError("DivByZero", "division by zero")
        sign = -1 if (a < 0) != (b < 0) else 1
        return sign * (abs(a) // abs(b))
    if kind == "Pow":
        if b < 0:
            raise ExecutionError("NegativeExponent", "negative exponent")
        r = 1
        for _ in range(b):
            r = r * a
        return r
    raise TypeError(f"cannot evaluate {kind}")


_CHARGE = {Add: "C_ADD", Sub: "C_SUB", Mul: "C_MUL", Div: "C_DIV", Pow: "C_POW"}


def _price(e, store: dict, binders: dict, c: _Counter) -> None:
    """Charge the cost of evaluating ``e`` without computing its value."""
    if isinstance(e, IntConst):
        c.charge("C_CST")
    elif isinstance(e, Var):
        c.charge("C_VAR")
    elif isinstance(e, ArrRead):
        _price(e.index, store, binders, c)
        c.charge("C_ARR")
    elif isinstance(e, SumExpr):
        k = _value(e.lower, store, binders)
        top = _value(e.upper, store, binders)
        if c.model.sum_cost == "paper":
            top = top - 1
        while k <= top:
            _price(e.body, store, {**binders, e.binder: k}, c)
            k = k + 1
    else:
        _price(e.left, store, binders, c)
        _price(e.right, store, binders, c)
        c.charge(_CHARGE[type(e)])


_RELATIONS = {"=": "C_EQ", "!=": "C_NEQ", "<": "C_LT", ">": "C_GT", "<=": "C_LE", ">=": "C_GE"}


def _truth(b, store: dict, c: _Counter) -> bool:
    if isinstance(b, (BTrue, BFalse)):
        c.charge("C_CST")
        return isinstance(b, BTrue)
    if isinstance(b, Cmp):
        _price(b.left, store, {}, c)
        _price(b.right, store, {}, c)
        c.charge(_RELATIONS[b.op])
        x, y = _value(b.left, store, {}), _value(b.right, store, {})
        return {"=": x == y, "!=": x != y, "<": x < y, ">": x > y, "<=": x <= y, ">=": x >= y}[b.op]
    if isinstance(b, Not):
        r = _truth(b.inner, store, c)
        c.charge("C_NOT")
        return not r
    l = _truth(b.left, store, c)
    r = _truth(b.right, store, c)
    if isinstance(b, And):
        c.charge("C_AND")
        return l and r
    c.charge("C_OR")
    return l or r


def _run(s, store: dict, c: _Counter) -> None:
    c.steps += 1
    if isinstance(s, Skip):
        c.charge("C_SKIP")
    elif isinstance(s, Assign):
        _price(s.rhs, store, {}, c)
        store[s.target] = _value(s.rhs, store, {})
        c.charge("C_ASSIGN_V")
    elif isinstance(s, ArrAssign):
        _price(s.index, store, {}, c)
        _price(s.rhs, store, {}, c)
        where = _value(s.index, store, {})
        store[(s.array, where)] = _value(s.rhs, store, {})
        c.charge("C_ASSIGN_A")
    elif isinstance(s, Seq):
        _run(s.first, store, c)
        _run(s.second, store, c)
    elif isinstance(s, If):
        _run(s.then_branch if _truth(s.cond, store, c) else s.else_branch, store, c)
    elif isinstance(s, While):
        while _truth(s.cond, store, c):
            c.fuel -= 1
            if c.fuel < 0:
                raise ExecutionError("FuelExhausted", "fuel exhausted")
            _run(s.body, store, c)
    elif isinstance(s, For):
        k = s.lower
        while _truth(Cmp("<", IntConst(k), s.upper), store, c):
            c.fuel -= 1
            if c.fuel < 0:
                raise ExecutionError("FuelExhausted", "fuel exhausted")
            _run(Assign(s.binder, IntConst(k)), store, c)
            c.steps -= 1
            _run(s.body, store, c)
            k += 1
        store[s.binder] = k
    else:
        raise TypeError(f"cannot run {type(s).__name__}")


def reference_exec(s, sigma: ProgramState, m: CostModel | None = None,
                   fuel: int = 1_000_000) -> ExecOutcome:
    store: dict = dict(sigma.scalars)
    store.update(sigma.arrays)
    c = _Counter(m or CostModel.unit(), fuel)
    _run(s, store, c)
    scalars = {k: v for k, v in store.items() if isinstance(k, str)}
    cells = {k: v for k, v in store.items() if isinstance(k, tuple)}
    return ExecOutcome(ProgramState(scalars, cells), c.total, c.steps)
