"""Hypothesis strategies for ASTs and states."""

from hypothesis import strategies as st

from timebound.core import (
    AAnd, ACmp, AExists, AFalse, AForall, AImpl, ANot, AOr, ATrue, Add, And, ArrAssign,
    ArrRead, Assign, BFalse, BTrue, CMP_OPS, Cmp, Div, If, IntConst, LogTwo, MaxExpr, Mul,
    Not, Or, Pow, Seq, Skip, Sub, SumExpr, Var,
)
from timebound.interp import ProgramState

SCALARS = ("x", "y", "z", "w")
ARRAYS = ("A", "B")

names = st.sampled_from(SCALARS)
small_ints = st.integers(-6, 6)


def aexps(executable: bool = False, max_leaves: int = 8):
    leaves = st.one_of(small_ints.map(IntConst), names.map(Var))

    def extend(children):
        bins = st.one_of(
            st.builds(Add, children, children), st.builds(Sub, children, children),
            st.builds(Mul, children, children), st.builds(Div, children, children),
            st.builds(Pow, children, st.integers(0, 3).map(IntConst)),
            st.builds(ArrRead, st.sampled_from(ARRAYS), children),
            st.builds(SumExpr, names, st.integers(-2, 1).map(IntConst),
                      st.one_of(small_ints.map(IntConst), names.map(Var)), children),
        )
        if executable:
            return bins
        return st.one_of(bins, st.builds(MaxExpr, children, children), st.builds(LogTwo, children))

    return st.recursive(leaves, extend, max_leaves=max_leaves)


def bexps():
    atoms = st.one_of(st.just(BTrue()), st.just(BFalse()),
                      st.builds(Cmp, st.sampled_from(CMP_OPS), aexps(True, 3), aexps(True, 3)))
    return st.recursive(atoms, lambda c: st.one_of(st.builds(Not, c), st.builds(And, c, c),
                                                   st.builds(Or, c, c)), max_leaves=4)


def assertions(max_leaves: int = 6):
    atoms = st.one_of(st.just(ATrue()), st.just(AFalse()),
                      st.builds(ACmp, st.sampled_from(CMP_OPS), aexps(max_leaves=4), aexps(max_leaves=4)))
    return st.recursive(atoms, lambda c: st.one_of(
        st.builds(ANot, c), st.builds(AAnd, c, c), st.builds(AOr, c, c), st.builds(AImpl, c, c),
        st.builds(AForall, names, c), st.builds(AExists, names, c)), max_leaves=max_leaves)


def _seq(parts):
    s = parts[-1]
    for p in reversed(parts[:-1]):
        s = Seq(p, s)
    return s


def loop_free_stmts():
    atoms = st.one_of(st.just(Skip()), st.builds(Assign, names, aexps(True, 4)),
                      st.builds(ArrAssign, st.sampled_from(ARRAYS), aexps(True, 2), aexps(True, 4)))

    def extend(children):
        unseq = children.filter(lambda s: not isinstance(s, Seq))
        return st.one_of(st.lists(unseq, min_size=2, max_size=3).map(_seq),
                         st.builds(If, bexps(), children, children))

    return st.recursive(atoms, extend, max_leaves=6)


def states(lo: int = -5, hi: int = 5):
    return st.builds(
        lambda sc, cells: ProgramState(dict(zip(SCALARS, sc)),
                                       {(a, i): v for a, row in zip(ARRAYS, cells) for i, v in zip(range(-3, 4), row)}),
        st.lists(st.integers(lo, hi), min_size=len(SCALARS), max_size=len(SCALARS)),
        st.lists(st.lists(st.integers(lo, hi), min_size=7, max_size=7), min_size=2, max_size=2),
    )
