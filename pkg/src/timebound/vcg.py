"""Weakest preconditions with costs and verification-condition generation.

Three calculi share one traversal and differ at loops and conditionals:

* classic: worst-case upper bounds, while loops with a per-iteration cost function;
* amortized: while loops with an amortized cost and a potential function;
* exact: for loops and cost-balanced conditionals, bound checked by equality.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .core import (
    AAnd, ACmp, AForall, AImpl, ANot, AnnotatedProgram, ArrAssign, Assertion, Assign,
    Cmp, CostModel, For, If, IntConst, OracleInfo, Seq, Skip, Stmt, SumExpr, Var, While,
    bexp_to_assertion, conj, fresh_name, loops, program_identifiers, subst_aexp,
    subst_array, subst_assertion,
)
from .costsem import maximum, minus, plus, time_aexp, time_bexp, times

PROVENANCES = (
    "correctness", "cost-bound", "invariant-preservation", "loop-exit", "termination-bound",
    "potential-nonneg", "amortized-cost", "exact-branch-balance", "exit-implies-post",
)

IF_COST_MODES = ("max", "sum")


class VCGError(Exception):
    """Statement not allowed in the selected calculus."""


class OracleError(VCGError):
    """A loop has no oracle entry, or the entry lacks a field the mode needs."""


@dataclass(frozen=True)
class WpResult:
    pre: Assertion
    cost: object  # ArithExpr


@dataclass(frozen=True)
class VerificationCondition:
    name: str
    formula: Assertion
    provenance: str
    loop_id: int | None = None
    # Logic variables introduced by the generator; free occurrences are
    # universally closed by the emitter.
    logic_vars: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.provenance not in PROVENANCES:
            raise ValueError(f"unknown provenance {self.provenance!r}")


@dataclass
class _Ctx:
    mode: str
    model: CostModel
    oracle: dict[int, OracleInfo]
    if_cost: str = "max"
    names: dict[tuple[str, int], str] = field(default_factory=dict)
    avoid: set[str] = field(default_factory=set)

    def info(self, loop_id: int, *fields: str) -> OracleInfo:
        if loop_id not in self.oracle:
            raise OracleError(f"no oracle entry for loop {loop_id}")
        info = self.oracle[loop_id]
        for f in fields:
            if getattr(info, f) is None:
                raise OracleError(f"loop {loop_id} is missing oracle field '{f}' for {self.mode} mode")
        return info

    def logic(self, base: str, loop_id: int, role: str | None = None) -> str:
        key = (role or base, loop_id)
        if key not in self.names:
            name = fresh_name(base, self.avoid)
            self.avoid.add(name)
            self.names[key] = name
        return self.names[key]


def _prepare(body: Stmt, ctx: _Ctx) -> None:
    # Allocate every loop's logic variables up front so names depend on
    # loop ids only, not on traversal order.
    for lp in sorted(loops(body), key=lambda l: l.loop_id):
        ctx.logic("k", lp.loop_id)
        if ctx.mode == "amortized":
            ctx.logic("pk", lp.loop_id)
        if ctx.mode == "classic" and lp.loop_id in ctx.oracle and ctx.oracle[lp.loop_id].cost_fn:
            ctx.logic(ctx.oracle[lp.loop_id].cost_fn[0], lp.loop_id, "sum")


def _instantiate(fn: tuple[str, object], arg) -> object:
    binder, body = fn
    return subst_aexp(body, binder, arg)


# ---------------------------------------------------------------------------
# wpc


def _wpc(s: Stmt, q: Assertion, ctx: _Ctx) -> WpResult:
    m = ctx.model
    match s:
        case Skip():
            return WpResult(q, IntConst(m["C_SKIP"]))
        case Assign(x, a):
            return WpResult(subst_assertion(q, x, a), plus(time_aexp(a, m), IntConst(m["C_ASSIGN_V"])))
        case ArrAssign(x, i, a):
            cost = plus(plus(time_aexp(i, m), time_aexp(a, m)), IntConst(m["C_ASSIGN_A"]))
            return WpResult(subst_array(q, x, i, a), cost)
        case Seq(s1, s2):
            r2 = _wpc(s2, q, ctx)
            r1 = _wpc(s1, r2.pre, ctx)
            return WpResult(r1.pre, plus(r1.cost, r2.cost))
        case If(b, s1, s2):
            r1, r2 = _wpc(s1, q, ctx), _wpc(s2, q, ctx)
            cond = bexp_to_assertion(b)
            branches = AAnd(AImpl(cond, r1.pre), AImpl(ANot(cond), r2.pre))
            tb = time_bexp(b, m)
            if ctx.mode == "exact":
                return WpResult(AAnd(branches, ACmp("=", r1.cost, r2.cost)), plus(r1.cost, tb))
            if ctx.if_cost == "sum":
                return WpResult(branches, plus(plus(r1.cost, r2.cost), tb))
            return WpResult(branches, plus(maximum(r1.cost, r2.cost), tb))
        case While(lid, b, _):
            if ctx.mode == "exact":
                raise VCGError("while loops are not allowed in exact mode")
            tb = time_bexp(b, m)
            if ctx.mode == "classic":
                info = ctx.info(lid, "variant", "bound", "cost_fn")
                i = ctx.logic(info.cost_fn[0], lid, "sum")
                total = SumExpr(i, IntConst(0), minus(info.bound, IntConst(1)),
                                _instantiate(info.cost_fn, Var(i)))
                pre = AAnd(info.invariant, ACmp(">=", info.variant, IntConst(0)))
            else:
                info = ctx.info(lid, "variant", "bound", "amortized", "potential")
                total = times(info.bound, info.amortized)
                pre = conj(info.invariant, ACmp(">=", info.variant, IntConst(0)),
                           ACmp("=", info.potential, IntConst(0)))
            cond_cost = times(plus(info.bound, IntConst(1)), tb)
            return WpResult(pre, plus(total, cond_cost))
        case For(lid, i, lo, hi, body):
            if ctx.mode != "exact":
                raise VCGError("for loops are only allowed in exact mode")
            info = ctx.info(lid)
            inv = info.invariant
            rb = _wpc(body, subst_assertion(inv, i, plus(Var(i), IntConst(1))), ctx)
            n = minus(hi, IntConst(lo))
            per_iter = plus(plus(IntConst(m["C_CST"]), IntConst(m["C_ASSIGN_V"])), rb.cost)
            cond = time_bexp(Cmp("<", IntConst(lo), hi), m)
            cost = plus(times(n, per_iter), times(plus(n, IntConst(1)), cond))
            return WpResult(subst_assertion(inv, i, IntConst(lo)), cost)
    raise TypeError(f"not a statement: {s!r}")


# ---------------------------------------------------------------------------
# vc


def _vc(s: Stmt, q: Assertion, ctx: _Ctx) -> list[VerificationCondition]:
    match s:
        case Skip() | Assign() | ArrAssign():
            return []
        case Seq(s1, s2):
            return _vc(s1, _wpc(s2, q, ctx).pre, ctx) + _vc(s2, q, ctx)
        case If(_, s1, s2):
            return _vc(s1, q, ctx) + _vc(s2, q, ctx)
        case While():
            if ctx.mode == "exact":
                raise VCGError("while loops are not allowed in exact mode")
            return _vc_while(s, q, ctx)
        case For():
            if ctx.mode != "exact":
                raise VCGError("for loops are only allowed in exact mode")
            return _vc_for(s, q, ctx)
    raise TypeError(f"not a statement: {s!r}")


def _vc_while(s: While, q: Assertion, ctx: _Ctx) -> list[VerificationCondition]:
    lid = s.loop_id
    amort = ctx.mode == "amortized"
    fields = ("variant", "bound", "amortized", "potential") if amort else ("variant", "bound", "cost_fn")
    info = ctx.info(lid, *fields)
    inv, f, bound = info.invariant, info.variant, info.bound
    b = bexp_to_assertion(s.cond)
    k = ctx.logic("k", lid)
    tag = f"while{lid}"
    body_post = AAnd(inv, ACmp(">", f, Var(k)))
    if amort:
        pk = ctx.logic("pk", lid)
        body_post = AAnd(body_post, ACmp("=", info.potential, Var(pk)))
    rb = _wpc(s.body, body_post, ctx)
    entry = conj(inv, b, ACmp("=", f, Var(k)))
    out = [VerificationCondition(f"{tag}.invariant-preservation", AForall(k, AImpl(entry, rb.pre)),
                                 "invariant-preservation", lid, (k, pk) if amort else (k,))]
    if amort:
        gain = minus(plus(info.amortized, info.potential), Var(pk))
        out.append(VerificationCondition(
            f"{tag}.amortized-cost",
            AForall(k, AForall(pk, AImpl(entry, ACmp(">=", gain, rb.cost)))),
            "amortized-cost", lid, (k, pk)))
    else:
        tk = _instantiate(info.cost_fn, Var(k))
        out.append(VerificationCondition(f"{tag}.cost-bound",
                                         AForall(k, AImpl(entry, ACmp(">=", tk, rb.cost))),
                                         "cost-bound", lid, (k,)))
    out.append(VerificationCondition(f"{tag}.loop-exit", AImpl(AAnd(inv, ANot(b)), q), "loop-exit", lid))
    out.append(VerificationCondition(f"{tag}.termination-bound",
                                     AImpl(AAnd(inv, b), ACmp("<=", f, bound)), "termination-bound", lid))
    if amort:
        out.append(VerificationCondition(f"{tag}.potential-nonneg",
                                         AImpl(inv, ACmp(">=", info.potential, IntConst(0))),
                                         "potential-nonneg", lid))
    return out + _vc(s.body, body_post, ctx)


def _vc_for(s: For, q: Assertion, ctx: _Ctx) -> list[VerificationCondition]:
    lid, i, lo, hi = s.loop_id, s.binder, s.lower, s.upper
    inv = ctx.info(lid).invariant
    step_post = subst_assertion(inv, i, plus(Var(i), IntConst(1)))
    rb = _wpc(s.body, step_post, ctx)
    tag = f"for{lid}"
    low = IntConst(lo)
    in_range = conj(inv, ACmp("<=", low, Var(i)), ACmp("<", Var(i), hi))
    return [
        VerificationCondition(f"{tag}.exit-implies-post", AImpl(subst_assertion(inv, i, hi), q),
                              "exit-implies-post", lid),
        VerificationCondition(f"{tag}.invariant-preservation", AImpl(in_range, rb.pre),
                              "invariant-preservation", lid),
        VerificationCondition(f"{tag}.loop-exit", AImpl(AAnd(inv, ANot(ACmp("<", low, hi))), q),
                              "loop-exit", lid),
    ] + _vc(s.body, step_post, ctx)


# ---------------------------------------------------------------------------
# Public entry points


def _ctx(mode: str, m: CostModel | None, oracle, if_cost: str, avoid=()) -> _Ctx:
    if if_cost not in IF_COST_MODES:
        raise ValueError(f"unknown if-cost mode {if_cost!r}")
    if hasattr(oracle, "items"):
        oracle = dict(oracle)
    else:
        oracle = dict(oracle or ())
    return _Ctx(mode, m or CostModel.unit(), oracle, if_cost, avoid=set(avoid))


def _stmt_ctx(mode, s, oracle, m, if_cost) -> _Ctx:
    from .core import identifiers, oracle_identifiers
    ctx = _ctx(mode, m, oracle, if_cost)
    ctx.avoid = identifiers(s)
    for info in ctx.oracle.values():
        ctx.avoid |= oracle_identifiers(info)
    return ctx


def wpc(s: Stmt, q: Assertion, m: CostModel | None = None, oracle=None, mode: str = "classic",
        if_cost: str = "max") -> WpResult:
    from .core import identifiers
    ctx = _stmt_ctx(mode, s, oracle, m, if_cost)
    ctx.avoid |= identifiers(q)
    _prepare(s, ctx)
    return _wpc(s, q, ctx)


def vc(s: Stmt, q: Assertion, m: CostModel | None = None, oracle=None, mode: str = "classic",
       if_cost: str = "max") -> list[VerificationCondition]:
    from .core import identifiers
    ctx = _stmt_ctx(mode, s, oracle, m, if_cost)
    ctx.avoid |= identifiers(q)
    _prepare(s, ctx)
    return _vc(s, q, ctx)


def wpc_classic(s, q, m=None, oracle=None, if_cost="max"):
    return wpc(s, q, m, oracle, "classic", if_cost)


def wpc_amortized(s, q, m=None, oracle=None):
    return wpc(s, q, m, oracle, "amortized")


def wpc_exact(s, q, m=None, oracle=None):
    return wpc(s, q, m, oracle, "exact")


def vc_classic(s, q, m=None, oracle=None, if_cost="max"):
    return vc(s, q, m, oracle, "classic", if_cost)


def vc_amortized(s, q, m=None, oracle=None):
    return vc(s, q, m, oracle, "amortized")


def vc_exact(s, q, m=None, oracle=None):
    return vc(s, q, m, oracle, "exact")


def program_wpc(p: AnnotatedProgram, m: CostModel | None = None, if_cost: str = "max") -> WpResult:
    """wp and cost of the whole body against the postcondition."""
    ctx = _ctx(p.mode, m, p.oracle, if_cost, program_identifiers(p))
    _prepare(p.body, ctx)
    return _wpc(p.body, p.postcondition, ctx)


def vcg(p: AnnotatedProgram, m: CostModel | None = None, if_cost: str = "max") -> list[VerificationCondition]:
    """All VCs for a program in its declared mode."""
    ctx = _ctx(p.mode, m, p.oracle, if_cost, program_identifiers(p))
    _prepare(p.body, ctx)
    r = _wpc(p.body, p.postcondition, ctx)
    rel = "=" if p.mode == "exact" else ">="
    top = [
        VerificationCondition("correctness", AImpl(p.precondition, r.pre), "correctness"),
        VerificationCondition("cost-bound", AImpl(p.precondition, ACmp(rel, p.cost_bound, r.cost)),
                              "cost-bound"),
    ]
    return top + _vc(p.body, p.postcondition, ctx)


def _checked(p: AnnotatedProgram, mode: str) -> AnnotatedProgram:
    if p.mode != mode:
        raise VCGError(f"program is in {p.mode} mode, not {mode}")
    return p


def vcg_classic(p, m=None, if_cost="max"):
    return vcg(_checked(p, "classic"), m, if_cost)


def vcg_amortized(p, m=None):
    return vcg(_checked(p, "amortized"), m)


def vcg_exact(p, m=None):
    return vcg(_checked(p, "exact"), m)


def expected_vc_count(p: AnnotatedProgram) -> int:
    """2 top-level VCs plus a fixed number per loop."""
    per = {"classic": 4, "amortized": 5, "exact": 3}[p.mode]
    return 2 + per * len(loops(p.body))
