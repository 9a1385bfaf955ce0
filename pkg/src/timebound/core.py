"""Abstract syntax, free variables, substitution and fresh names.

Every node is an immutable dataclass, so ASTs compare structurally and can be
shared freely between threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import ClassVar, Iterable, Iterator, Mapping, Union

# ---------------------------------------------------------------------------
# Arithmetic expressions


@dataclass(frozen=True)
class IntConst:
    value: int


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class ArrRead:
    array: str
    index: "ArithExpr"


@dataclass(frozen=True)
class BinArith:
    left: "ArithExpr"
    right: "ArithExpr"
    symbol: ClassVar[str] = "?"
    cost_name: ClassVar[str] = "?"


@dataclass(frozen=True)
class Add(BinArith):
    symbol: ClassVar[str] = "+"
    cost_name: ClassVar[str] = "C_ADD"


@dataclass(frozen=True)
class Sub(BinArith):
    symbol: ClassVar[str] = "-"
    cost_name: ClassVar[str] = "C_SUB"


@dataclass(frozen=True)
class Mul(BinArith):
    symbol: ClassVar[str] = "*"
    cost_name: ClassVar[str] = "C_MUL"


@dataclass(frozen=True)
class Div(BinArith):
    symbol: ClassVar[str] = "/"
    cost_name: ClassVar[str] = "C_DIV"


@dataclass(frozen=True)
class Pow(BinArith):
    symbol: ClassVar[str] = "^"
    cost_name: ClassVar[str] = "C_POW"


@dataclass(frozen=True)
class SumExpr:
    """Inclusive bounded sum: body summed for binder = lower .. upper."""

    binder: str
    lower: "ArithExpr"
    upper: "ArithExpr"
    body: "ArithExpr"


@dataclass(frozen=True)
class MaxExpr:
    left: "ArithExpr"
    right: "ArithExpr"


@dataclass(frozen=True)
class LogTwo:
    arg: "ArithExpr"


ArithExpr = Union[IntConst, Var, ArrRead, BinArith, SumExpr, MaxExpr, LogTwo]

BIN_ARITH: dict[str, type[BinArith]] = {c.symbol: c for c in (Add, Sub, Mul, Div, Pow)}

# ---------------------------------------------------------------------------
# Boolean expressions (conditions of executable statements)

CMP_OPS = ("=", "!=", "<", ">", "<=", ">=")
CMP_COST = {"=": "C_EQ", "!=": "C_NEQ", "<": "C_LT", ">": "C_GT", "<=": "C_LE", ">=": "C_GE"}
CMP_NEGATION = {"=": "!=", "!=": "=", "<": ">=", ">=": "<", ">": "<=", "<=": ">"}


@dataclass(frozen=True)
class BTrue:
    pass


@dataclass(frozen=True)
class BFalse:
    pass


@dataclass(frozen=True)
class Cmp:
    op: str
    left: ArithExpr
    right: ArithExpr

    def __post_init__(self) -> None:
        if self.op not in CMP_OPS:
            raise ValueError(f"unknown comparison {self.op!r}")


@dataclass(frozen=True)
class Not:
    inner: "BoolExpr"


@dataclass(frozen=True)
class And:
    left: "BoolExpr"
    right: "BoolExpr"


@dataclass(frozen=True)
class Or:
    left: "BoolExpr"
    right: "BoolExpr"


BoolExpr = Union[BTrue, BFalse, Cmp, Not, And, Or]

# ---------------------------------------------------------------------------
# Statements


@dataclass(frozen=True)
class Skip:
    pass


@dataclass(frozen=True)
class Assign:
    target: str
    rhs: ArithExpr


@dataclass(frozen=True)
class ArrAssign:
    array: str
    index: ArithExpr
    rhs: ArithExpr


@dataclass(frozen=True)
class Seq:
    first: "Stmt"
    second: "Stmt"


@dataclass(frozen=True)
class If:
    cond: BoolExpr
    then_branch: "Stmt"
    else_branch: "Stmt"


@dataclass(frozen=True)
class While:
    loop_id: int
    cond: BoolExpr
    body: "Stmt"


@dataclass(frozen=True)
class For:
    loop_id: int
    binder: str
    lower: int
    upper: ArithExpr
    body: "Stmt"


Stmt = Union[Skip, Assign, ArrAssign, Seq, If, While, For]

# ---------------------------------------------------------------------------
# Assertions


@dataclass(frozen=True)
class ATrue:
    pass


@dataclass(frozen=True)
class AFalse:
    pass


@dataclass(frozen=True)
class ACmp:
    op: str
    left: ArithExpr
    right: ArithExpr

    def __post_init__(self) -> None:
        if self.op not in CMP_OPS:
            raise ValueError(f"unknown comparison {self.op!r}")


@dataclass(frozen=True)
class ANot:
    inner: "Assertion"


@dataclass(frozen=True)
class AAnd:
    left: "Assertion"
    right: "Assertion"


@dataclass(frozen=True)
class AOr:
    left: "Assertion"
    right: "Assertion"


@dataclass(frozen=True)
class AImpl:
    left: "Assertion"
    right: "Assertion"


@dataclass(frozen=True)
class AForall:
    binder: str
    body: "Assertion"


@dataclass(frozen=True)
class AExists:
    binder: str
    body: "Assertion"


Assertion = Union[ATrue, AFalse, ACmp, ANot, AAnd, AOr, AImpl, AForall, AExists]

# ---------------------------------------------------------------------------
# Programs, oracles, cost models

MODES = ("classic", "amortized", "exact")

COST_NAMES = (
    "C_CST", "C_VAR", "C_ARR", "C_ADD", "C_SUB", "C_MUL", "C_DIV", "C_POW",
    "C_EQ", "C_NEQ", "C_LT", "C_GT", "C_LE", "C_GE", "C_NOT", "C_AND", "C_OR",
    "C_SKIP", "C_ASSIGN_V", "C_ASSIGN_A",
)

SUM_COST_MODES = ("inclusive", "paper")


@dataclass(frozen=True)
class CostModel:
    """Atomic operation costs.

    ``sum_cost`` selects how many body evaluations a bounded sum is charged:
    ``inclusive`` charges upper - lower + 1, ``paper`` charges upper - lower.
    """

    costs: tuple[tuple[str, int], ...] = tuple((n, 1) for n in COST_NAMES)
    sum_cost: str = "inclusive"

    def __post_init__(self) -> None:
        names = [n for n, _ in self.costs]
        if sorted(names) != sorted(COST_NAMES):
            raise ValueError("cost model must define every atomic cost exactly once")
        if any(v < 0 for _, v in self.costs):
            raise ValueError("atomic costs must be non-negative")
        if self.sum_cost not in SUM_COST_MODES:
            raise ValueError(f"unknown sum cost mode {self.sum_cost!r}")

    @classmethod
    def unit(cls) -> "CostModel":
        return cls()

    @classmethod
    def from_mapping(cls, values: Mapping[str, int], sum_cost: str = "inclusive") -> "CostModel":
        unknown = set(values) - set(COST_NAMES)
        if unknown:
            raise ValueError(f"unknown cost names: {sorted(unknown)}")
        return cls(tuple((n, int(values.get(n, 1))) for n in COST_NAMES), sum_cost)

    def __getitem__(self, name: str) -> int:
        for n, v in self.costs:
            if n == name:
                return v
        raise KeyError(name)

    def as_dict(self) -> dict[str, int]:
        return dict(self.costs)

    def with_sum_cost(self, mode: str) -> "CostModel":
        return CostModel(self.costs, mode)


@dataclass(frozen=True)
class OracleInfo:
    invariant: Assertion
    variant: ArithExpr | None = None
    bound: ArithExpr | None = None
    cost_fn: tuple[str, ArithExpr] | None = None
    amortized: ArithExpr | None = None
    potential: ArithExpr | None = None


@dataclass(frozen=True)
class AnnotatedProgram:
    precondition: Assertion
    body: Stmt
    postcondition: Assertion
    cost_bound: ArithExpr
    mode: str
    oracle: tuple[tuple[int, OracleInfo], ...] = ()
    # `#key: value` header lines other than `#mode`, kept for the sampler.
    headers: tuple[tuple[str, str], ...] = field(default=())

    def oracle_for(self, loop_id: int) -> OracleInfo:
        for lid, info in self.oracle:
            if lid == loop_id:
                return info
        raise KeyError(loop_id)

    @property
    def oracle_map(self) -> dict[int, OracleInfo]:
        return dict(self.oracle)

    def header(self, key: str, default: str | None = None) -> str | None:
        for k, v in self.headers:
            if k == key:
                return v
        return default


# ---------------------------------------------------------------------------
# Small constructors


def conj(*parts: Assertion) -> Assertion:
    """Right-nested conjunction; ATrue for no parts."""
    parts = tuple(parts)
    if not parts:
        return ATrue()
    out = parts[-1]
    for p in reversed(parts[:-1]):
        out = AAnd(p, out)
    return out


def bexp_to_assertion(b: BoolExpr) -> Assertion:
    match b:
        case BTrue():
            return ATrue()
        case BFalse():
            return AFalse()
        case Cmp(op, l, r):
            return ACmp(op, l, r)
        case Not(i):
            return ANot(bexp_to_assertion(i))
        case And(l, r):
            return AAnd(bexp_to_assertion(l), bexp_to_assertion(r))
        case Or(l, r):
            return AOr(bexp_to_assertion(l), bexp_to_assertion(r))
    raise TypeError(f"not a boolean expression: {b!r}")


# ---------------------------------------------------------------------------
# Free variables


def free_vars(e: ArithExpr) -> set[str]:
    match e:
        case IntConst():
            return set()
        case Var(name):
            return {name}
        case ArrRead(arr, idx):
            return {arr} | free_vars(idx)
        case BinArith(l, r) | MaxExpr(l, r):
            return free_vars(l) | free_vars(r)
        case SumExpr(b, lo, hi, body):
            return free_vars(lo) | free_vars(hi) | (free_vars(body) - {b})
        case LogTwo(a):
            return free_vars(a)
    raise TypeError(f"not an arithmetic expression: {e!r}")


def free_vars_bexp(b: BoolExpr) -> set[str]:
    match b:
        case BTrue() | BFalse():
            return set()
        case Cmp(_, l, r):
            return free_vars(l) | free_vars(r)
        case Not(i):
            return free_vars_bexp(i)
        case And(l, r) | Or(l, r):
            return free_vars_bexp(l) | free_vars_bexp(r)
    raise TypeError(f"not a boolean expression: {b!r}")


def free_vars_assertion(p: Assertion) -> set[str]:
    match p:
        case ATrue() | AFalse():
            return set()
        case ACmp(_, l, r):
            return free_vars(l) | free_vars(r)
        case ANot(i):
            return free_vars_assertion(i)
        case AAnd(l, r) | AOr(l, r) | AImpl(l, r):
            return free_vars_assertion(l) | free_vars_assertion(r)
        case AForall(b, body) | AExists(b, body):
            return free_vars_assertion(body) - {b}
    raise TypeError(f"not an assertion: {p!r}")


def array_names(e) -> set[str]:
    """Names used as arrays anywhere in an expression, assertion or statement."""
    out: set[str] = set()
    for node in walk(e):
        if isinstance(node, ArrRead):
            out.add(node.array)
        elif isinstance(node, ArrAssign):
            out.add(node.array)
    return out


def walk(node) -> Iterator[object]:
    """Pre-order traversal over every AST node reachable from ``node``."""
    stack = [node]
    while stack:
        n = stack.pop()
        yield n
        children = []
        match n:
            case ArrRead(_, idx):
                children = [idx]
            case BinArith(l, r) | MaxExpr(l, r) | Cmp(_, l, r) | ACmp(_, l, r):
                children = [l, r]
            case And(l, r) | Or(l, r) | AAnd(l, r) | AOr(l, r) | AImpl(l, r):
                children = [l, r]
            case SumExpr(_, lo, hi, body):
                children = [lo, hi, body]
            case LogTwo(a) | Not(a) | ANot(a):
                children = [a]
            case AForall(_, body) | AExists(_, body):
                children = [body]
            case Assign(_, rhs):
                children = [rhs]
            case ArrAssign(_, idx, rhs):
                children = [idx, rhs]
            case Seq(a, b):
                children = [a, b]
            case If(c, a, b):
                children = [c, a, b]
            case While(_, c, body):
                children = [c, body]
            case For(_, _, _, hi, body):
                children = [hi, body]
        stack.extend(reversed(children))


def identifiers(node) -> set[str]:
    """Every identifier mentioned anywhere, bound or free, scalar or array."""
    out: set[str] = set()
    for n in walk(node):
        match n:
            case Var(name):
                out.add(name)
            case ArrRead(arr, _) | ArrAssign(arr, _, _):
                out.add(arr)
            case Assign(t, _):
                out.add(t)
            case SumExpr(b, _, _, _) | AForall(b, _) | AExists(b, _) | For(_, b, _, _, _):
                out.add(b)
    return out


def program_identifiers(p: AnnotatedProgram) -> set[str]:
    out = identifiers(p.precondition) | identifiers(p.body) | identifiers(p.postcondition)
    out |= identifiers(p.cost_bound)
    for _, info in p.oracle:
        out |= oracle_identifiers(info)
    return out


def oracle_identifiers(info: OracleInfo) -> set[str]:
    out = identifiers(info.invariant)
    for e in (info.variant, info.bound, info.amortized, info.potential):
        if e is not None:
            out |= identifiers(e)
    if info.cost_fn is not None:
        out.add(info.cost_fn[0])
        out |= identifiers(info.cost_fn[1])
    return out


def assigned_vars(s: Stmt) -> tuple[set[str], set[str]]:
    """Scalars and arrays that ``s`` may write."""
    scalars: set[str] = set()
    arrays: set[str] = set()
    for n in walk(s):
        match n:
            case Assign(t, _):
                scalars.add(t)
            case ArrAssign(a, _, _):
                arrays.add(a)
            case For(_, b, _, _, _):
                scalars.add(b)
    return scalars, arrays


def loops(s: Stmt) -> list[While | For]:
    return [n for n in walk(s) if isinstance(n, (While, For))]


# ---------------------------------------------------------------------------
# Fresh names and substitution


def fresh_name(base: str, avoid: Iterable[str]) -> str:
    avoid = set(avoid)
    if base not in avoid:
        return base
    n = 1
    while f"{base}{n}" in avoid:
        n += 1
    return f"{base}{n}"


def subst_aexp(e: ArithExpr, x: str, a: ArithExpr) -> ArithExpr:
    """Replace free occurrences of scalar ``x`` in ``e`` by ``a``."""
    return _subst_a(e, x, a, free_vars(a))


def _subst_a(e: ArithExpr, x: str, a: ArithExpr, fva: set[str]) -> ArithExpr:
    match e:
        case IntConst():
            return e
        case Var(name):
            return a if name == x else e
        case ArrRead(arr, idx):
            return ArrRead(arr, _subst_a(idx, x, a, fva))
        case BinArith(l, r):
            return type(e)(_subst_a(l, x, a, fva), _subst_a(r, x, a, fva))
        case MaxExpr(l, r):
            return MaxExpr(_subst_a(l, x, a, fva), _subst_a(r, x, a, fva))
        case LogTwo(arg):
            return LogTwo(_subst_a(arg, x, a, fva))
        case SumExpr(b, lo, hi, body):
            lo2, hi2 = _subst_a(lo, x, a, fva), _subst_a(hi, x, a, fva)
            if b == x or x not in free_vars(body):
                return SumExpr(b, lo2, hi2, body)
            if b in fva:
                nb = fresh_name(b, fva | identifiers(body) | {x})
                body = _subst_a(body, b, Var(nb), {nb})
                b = nb
            return SumExpr(b, lo2, hi2, _subst_a(body, x, a, fva))
    raise TypeError(f"not an arithmetic expression: {e!r}")


def subst_bexp(b: BoolExpr, x: str, a: ArithExpr) -> BoolExpr:
    match b:
        case BTrue() | BFalse():
            return b
        case Cmp(op, l, r):
            return Cmp(op, subst_aexp(l, x, a), subst_aexp(r, x, a))
        case Not(i):
            return Not(subst_bexp(i, x, a))
        case And(l, r):
            return And(subst_bexp(l, x, a), subst_bexp(r, x, a))
        case Or(l, r):
            return Or(subst_bexp(l, x, a), subst_bexp(r, x, a))
    raise TypeError(f"not a boolean expression: {b!r}")


def subst_assertion(p: Assertion, x: str, a: ArithExpr) -> Assertion:
    """Capture-avoiding ``p[a/x]``."""
    return _subst_p(p, x, a, free_vars(a))


def _subst_p(p: Assertion, x: str, a: ArithExpr, fva: set[str]) -> Assertion:
    match p:
        case ATrue() | AFalse():
            return p
        case ACmp(op, l, r):
            return ACmp(op, _subst_a(l, x, a, fva), _subst_a(r, x, a, fva))
        case ANot(i):
            return ANot(_subst_p(i, x, a, fva))
        case AAnd(l, r) | AOr(l, r) | AImpl(l, r):
            return type(p)(_subst_p(l, x, a, fva), _subst_p(r, x, a, fva))
        case AForall(b, body) | AExists(b, body):
            if b == x or x not in free_vars_assertion(body):
                return p
            if b in fva:
                nb = fresh_name(b, fva | identifiers(body) | {x})
                body = _subst_p(body, b, Var(nb), {nb})
                b = nb
            return type(p)(b, _subst_p(body, x, a, fva))
    raise TypeError(f"not an assertion: {p!r}")


def rename_bound(p: Assertion, old: str, new: str) -> Assertion:
    return subst_assertion(p, old, Var(new))


# Array substitution -------------------------------------------------------
#
# A read x[e] below the assignment x[idx] := rhs is equal to rhs when e = idx
# and to the old x[e] otherwise. Reads whose index is independent of every
# enclosing sum binder are resolved by case-splitting the enclosing atomic
# formula. Reads under a sum binder cannot be lifted out of the sum, so they
# become the arithmetic selector  x[e] + (rhs - x[e]) * eq(idx, e)  where
# eq(u, v) = 1 + max(-1, -(u - v) * (u - v)) is 1 when u = v and 0 otherwise.


def eq_indicator(u: ArithExpr, v: ArithExpr) -> ArithExpr:
    d = Sub(u, v)
    return Add(IntConst(1), MaxExpr(IntConst(-1), Sub(IntConst(0), Mul(d, d))))


def conditional_read(x: str, e: ArithExpr, idx: ArithExpr, rhs: ArithExpr) -> ArithExpr:
    old = ArrRead(x, e)
    return Add(old, Mul(Sub(rhs, old), eq_indicator(idx, e)))


def subst_array(p: Assertion, x: str, idx: ArithExpr, rhs: ArithExpr) -> Assertion:
    """``p`` evaluated after ``x[idx] := rhs``, expressed over the old array."""
    # Reads already known to denote the old array are moved to a fresh
    # array name while rewriting, then renamed back.
    old = fresh_name(x + "_old", identifiers(p) | identifiers(idx) | identifiers(rhs))
    idx_o, rhs_o = rename_array(idx, x, old), rename_array(rhs, x, old)
    out = _subst_arr_p(p, x, old, idx_o, rhs_o, free_vars(idx) | free_vars(rhs))
    return rename_array(out, old, x)


def rename_array(node, old: str, new: str):
    """Rename array ``old`` to ``new`` in an expression or assertion."""
    match node:
        case IntConst() | Var() | ATrue() | AFalse():
            return node
        case ArrRead(arr, i):
            return ArrRead(new if arr == old else arr, rename_array(i, old, new))
        case BinArith(l, r) | MaxExpr(l, r) | AAnd(l, r) | AOr(l, r) | AImpl(l, r):
            return type(node)(rename_array(l, old, new), rename_array(r, old, new))
        case LogTwo(a) | ANot(a):
            return type(node)(rename_array(a, old, new))
        case SumExpr(b, lo, hi, body):
            return SumExpr(b, rename_array(lo, old, new), rename_array(hi, old, new),
                           rename_array(body, old, new))
        case ACmp(op, l, r):
            return ACmp(op, rename_array(l, old, new), rename_array(r, old, new))
        case AForall(b, body) | AExists(b, body):
            return type(node)(b, rename_array(body, old, new))
    raise TypeError(f"cannot rename arrays in {node!r}")


def _subst_arr_p(p: Assertion, x: str, old: str, idx, rhs, fv: set[str]) -> Assertion:
    match p:
        case ATrue() | AFalse():
            return p
        case ACmp():
            return _split_atom(p, x, old, idx, rhs)
        case ANot(i):
            return ANot(_subst_arr_p(i, x, old, idx, rhs, fv))
        case AAnd(l, r) | AOr(l, r) | AImpl(l, r):
            return type(p)(_subst_arr_p(l, x, old, idx, rhs, fv), _subst_arr_p(r, x, old, idx, rhs, fv))
        case AForall(b, body) | AExists(b, body):
            if b in fv:
                nb = fresh_name(b, fv | identifiers(body) | {x, old})
                body = _subst_p(body, b, Var(nb), {nb})
                b = nb
            return type(p)(b, _subst_arr_p(body, x, old, idx, rhs, fv))
    raise TypeError(f"not an assertion: {p!r}")


def _sum_safe(e: ArithExpr, x: str, old: str, idx, rhs) -> ArithExpr:
    """Rewrite reads of ``x`` inside sums whose index depends on the sum binder."""
    fv = free_vars(idx) | free_vars(rhs)

    def go(e, bound: frozenset):
        match e:
            case IntConst() | Var():
                return e
            case ArrRead(arr, i):
                i2 = go(i, bound)
                if arr == x:
                    return conditional_read(old, i2, idx, rhs)
                return ArrRead(arr, i2)
            case BinArith(l, r):
                return type(e)(go(l, bound), go(r, bound))
            case MaxExpr(l, r):
                return MaxExpr(go(l, bound), go(r, bound))
            case LogTwo(a):
                return LogTwo(go(a, bound))
            case SumExpr(b, lo, hi, body):
                if b in fv:
                    nb = fresh_name(b, fv | identifiers(body) | {x, old})
                    body = _subst_a(body, b, Var(nb), {nb})
                    b = nb
                return SumExpr(b, go(lo, bound), go(hi, bound), go(body, bound | {b}))
        raise TypeError(f"not an arithmetic expression: {e!r}")

    return go(e, frozenset())


def _first_liftable(e: ArithExpr, x: str, bound: frozenset = frozenset()) -> ArrRead | None:
    """Innermost read of ``x`` whose index mentions no enclosing sum binder."""
    match e:
        case ArrRead(arr, i):
            inner = _first_liftable(i, x, bound)
            if inner is not None:
                return inner
            if arr == x and not (free_vars(i) & bound):
                return e
            return None
        case BinArith(l, r) | MaxExpr(l, r):
            return _first_liftable(l, x, bound) or _first_liftable(r, x, bound)
        case LogTwo(a):
            return _first_liftable(a, x, bound)
        case SumExpr(b, lo, hi, body):
            return (_first_liftable(lo, x, bound) or _first_liftable(hi, x, bound)
                    or _first_liftable(body, x, bound | {b}))
    return None


def _replace_read(e: ArithExpr, target: ArrRead, by: ArithExpr, bound: frozenset = frozenset()) -> ArithExpr:
    """Replace occurrences of ``target`` that are not captured by a sum binder."""
    if e == target and not (free_vars(target.index) & bound):
        return by
    match e:
        case IntConst() | Var():
            return e
        case ArrRead(arr, i):
            return ArrRead(arr, _replace_read(i, target, by, bound))
        case BinArith(l, r):
            return type(e)(_replace_read(l, target, by, bound), _replace_read(r, target, by, bound))
        case MaxExpr(l, r):
            return MaxExpr(_replace_read(l, target, by, bound), _replace_read(r, target, by, bound))
        case LogTwo(a):
            return LogTwo(_replace_read(a, target, by, bound))
        case SumExpr(b, lo, hi, body):
            return SumExpr(b, _replace_read(lo, target, by, bound), _replace_read(hi, target, by, bound),
                           _replace_read(body, target, by, bound | {b}))
    raise TypeError(f"not an arithmetic expression: {e!r}")


def _split_atom(atom: ACmp, x: str, old: str, idx, rhs) -> Assertion:
    read = _first_liftable(atom.left, x) or _first_liftable(atom.right, x)
    if read is None:
        return ACmp(atom.op, _sum_safe(atom.left, x, old, idx, rhs), _sum_safe(atom.right, x, old, idx, rhs))
    hit = _split_atom(_map_atom(atom, read, rhs), x, old, idx, rhs)
    if read.index == idx:
        return hit
    miss = _split_atom(_map_atom(atom, read, ArrRead(old, read.index)), x, old, idx, rhs)
    return AAnd(AImpl(ACmp("=", idx, read.index), hit),
                AImpl(ACmp("!=", idx, read.index), miss))


def _map_atom(atom: ACmp, read: ArrRead, by: ArithExpr) -> ACmp:
    return ACmp(atom.op, _replace_read(atom.left, read, by), _replace_read(atom.right, read, by))


def subst_array_aexp(e: ArithExpr, x: str, idx: ArithExpr, rhs: ArithExpr) -> ArithExpr:
    """Arithmetic-only array substitution using conditional reads everywhere."""
    match e:
        case IntConst() | Var():
            return e
        case ArrRead(arr, i):
            i2 = subst_array_aexp(i, x, idx, rhs)
            if arr != x:
                return ArrRead(arr, i2)
            if i2 == idx:
                return rhs
            return conditional_read(x, i2, idx, rhs)
        case BinArith(l, r):
            return type(e)(subst_array_aexp(l, x, idx, rhs), subst_array_aexp(r, x, idx, rhs))
        case MaxExpr(l, r):
            return MaxExpr(subst_array_aexp(l, x, idx, rhs), subst_array_aexp(r, x, idx, rhs))
        case LogTwo(a):
            return LogTwo(subst_array_aexp(a, x, idx, rhs))
        case SumExpr(b, lo, hi, body):
            fv = free_vars(idx) | free_vars(rhs)
            if b in fv:
                nb = fresh_name(b, fv | identifiers(body) | {x})
                body = _subst_a(body, b, Var(nb), {nb})
                b = nb
            return SumExpr(b, subst_array_aexp(lo, x, idx, rhs), subst_array_aexp(hi, x, idx, rhs),
                           subst_array_aexp(body, x, idx, rhs))
    raise TypeError(f"not an arithmetic expression: {e!r}")
