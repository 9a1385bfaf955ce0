"""Symbolic cost of expressions, plus numeric evaluation of cost terms."""

from __future__ import annotations

from .core import (
    Add, And, ArrRead, ArithExpr, BFalse, BTrue, BinArith, BoolExpr, CMP_COST, Cmp,
    CostModel, IntConst, LogTwo, MaxExpr, Mul, Not, Or, Sub, SumExpr, Var, free_vars,
)
from .interp import ProgramState, eval_aexp


def plus(a: ArithExpr, b: ArithExpr) -> ArithExpr:
    if isinstance(a, IntConst) and isinstance(b, IntConst):
        return IntConst(a.value + b.value)
    return Add(a, b)


def minus(a: ArithExpr, b: ArithExpr) -> ArithExpr:
    if isinstance(a, IntConst) and isinstance(b, IntConst):
        return IntConst(a.value - b.value)
    return Sub(a, b)


def times(a: ArithExpr, b: ArithExpr) -> ArithExpr:
    if isinstance(a, IntConst) and isinstance(b, IntConst):
        return IntConst(a.value * b.value)
    return Mul(a, b)


def maximum(a: ArithExpr, b: ArithExpr) -> ArithExpr:
    if isinstance(a, IntConst) and isinstance(b, IntConst):
        return IntConst(max(a.value, b.value))
    return MaxExpr(a, b)


def time_aexp(a: ArithExpr, m: CostModel) -> ArithExpr:
    match a:
        case IntConst():
            return IntConst(m["C_CST"])
        case Var():
            return IntConst(m["C_VAR"])
        case ArrRead(_, idx):
            return plus(time_aexp(idx, m), IntConst(m["C_ARR"]))
        case BinArith(l, r):
            return plus(plus(time_aexp(l, m), time_aexp(r, m)), IntConst(m[a.cost_name]))
        case SumExpr(b, lo, hi, body):
            tb = time_aexp(body, m)
            top = minus(hi, IntConst(1)) if m.sum_cost == "paper" else hi
            if b in free_vars(tb):
                return SumExpr(b, lo, top, tb)
            count = maximum(plus(minus(top, lo), IntConst(1)), IntConst(0))
            return times(count, tb)
        case MaxExpr() | LogTwo():
            raise ValueError("max/log are annotation-only and have no execution cost")
    raise TypeError(f"not an arithmetic expression: {a!r}")


def time_bexp(b: BoolExpr, m: CostModel) -> ArithExpr:
    match b:
        case BTrue() | BFalse():
            return IntConst(m["C_CST"])
        case Cmp(op, l, r):
            return plus(plus(time_aexp(l, m), time_aexp(r, m)), IntConst(m[CMP_COST[op]]))
        case Not(i):
            return plus(time_bexp(i, m), IntConst(m["C_NOT"]))
        case And(l, r):
            return plus(plus(time_bexp(l, m), time_bexp(r, m)), IntConst(m["C_AND"]))
        case Or(l, r):
            return plus(plus(time_bexp(l, m), time_bexp(r, m)), IntConst(m["C_OR"]))
    raise TypeError(f"not a boolean expression: {b!r}")


def cost_value(t: ArithExpr, sigma: ProgramState) -> int:
    """Integer value of a cost term; max is max, log is floor log2."""
    return eval_aexp(t, sigma)
