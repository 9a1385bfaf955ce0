"""Empirical soundness checks: sampling, bound checks, telescoping, fuzzing."""

from __future__ import annotations

import json
import random
import re
from dataclasses import asdict, dataclass, field
from typing import Iterable

from .core import (
    AAnd, ACmp, AExists, AFalse, AForall, AImpl, ANot, AOr, ATrue, Add, And,
    AnnotatedProgram, ArrAssign, ArrRead, ArithExpr, Assertion, Assign, BFalse, BTrue,
    BoolExpr, CMP_OPS, Cmp, CostModel, Div, For, If, IntConst, LogTwo, MaxExpr, Mul, Not,
    OracleInfo, Or, Pow, Seq, Skip, Stmt, Sub, SumExpr, Var, While, array_names,
    free_vars, free_vars_assertion, program_identifiers, subst_assertion,
)
from .costsem import cost_value
from .interp import (
    DEFAULT_FUEL, ExecutionError, ProgramState, eval_aexp, exec_stmt, holds,
)
from .reference import reference_exec
from .vcg import program_wpc


class SamplingExhausted(Exception):
    pass


# ---------------------------------------------------------------------------
# Sampling


@dataclass(frozen=True)
class SamplingConfig:
    """Boxes for rejection sampling. Bounds are inclusive."""

    scalar_box: tuple[int, int] = (-16, 16)
    cell_box: tuple[int, int] = (0, 16)
    size_box: tuple[int, int] = (0, 16)
    overrides: tuple[tuple[str, tuple[int, int]], ...] = ()
    length_var: str | None = None
    attempts_per_trial: int = 10_000

    def box(self, name: str) -> tuple[int, int]:
        for n, b in self.overrides:
            if n == name:
                return b
        return self.scalar_box

    def has_override(self, name: str) -> bool:
        return any(n == name for n, _ in self.overrides)

    @classmethod
    def from_program(cls, p: AnnotatedProgram, **kw) -> "SamplingConfig":
        """Read ``#sample:``, ``#cells:`` and ``#length:`` headers."""
        overrides = []
        sample = p.header("sample")
        if sample:
            for part in sample.split(","):
                m = re.fullmatch(r"\s*([A-Za-z_][A-Za-z0-9_]*)\s+in\s+(-?\d+)\s*\.\.\s*(-?\d+)\s*", part)
                if not m:
                    raise ValueError(f"bad #sample entry {part!r}")
                overrides.append((m.group(1), (int(m.group(2)), int(m.group(3)))))
        opts = dict(kw)
        cells = p.header("cells")
        if cells and "cell_box" not in opts:
            lo, hi = (int(v) for v in cells.split(".."))
            opts["cell_box"] = (lo, hi)
        length = p.header("length")
        if length and "length_var" not in opts:
            opts["length_var"] = length.strip()
        extra = opts.pop("overrides", ())
        return cls(overrides=tuple(overrides) + tuple(extra), **opts)

    def pinned(self, name: str, value: int) -> "SamplingConfig":
        rest = tuple((n, b) for n, b in self.overrides if n != name)
        return SamplingConfig(self.scalar_box, self.cell_box, self.size_box,
                              rest + ((name, (value, value)),), self.length_var,
                              self.attempts_per_trial)


@dataclass(frozen=True)
class SampleResult:
    states: list
    attempts: int
    accepted: int

    @property
    def acceptance_rate(self) -> float:
        return self.accepted / self.attempts if self.attempts else 0.0


def _conjuncts(p: Assertion) -> list[Assertion]:
    if isinstance(p, AAnd):
        return _conjuncts(p.left) + _conjuncts(p.right)
    return [p]


def _definitions(pre: Assertion, scalars: set[str]) -> list[tuple[str, ArithExpr]]:
    """Top-level conjuncts ``x = e`` usable to compute x from the others."""
    out = []
    taken: set[str] = set()
    for c in _conjuncts(pre):
        if not (isinstance(c, ACmp) and c.op == "="):
            continue
        for lhs, rhs in ((c.left, c.right), (c.right, c.left)):
            if (isinstance(lhs, Var) and lhs.name in scalars and lhs.name not in taken
                    and lhs.name not in free_vars(rhs)):
                out.append((lhs.name, rhs))
                taken.add(lhs.name)
                break
    # Order so that each definition only uses already-known values.
    ordered, pending = [], list(out)
    known_dependent = {n for n, _ in out}
    while pending:
        progress = False
        for d in list(pending):
            deps = free_vars(d[1]) & known_dependent
            if deps <= {n for n, _ in ordered}:
                ordered.append(d)
                pending.remove(d)
                progress = True
        if not progress:
            # Cyclic definitions: keep the acyclic ones, sample the rest.
            break
    return ordered


def _draw_array(rng: random.Random, length: int, box: tuple[int, int]) -> list[int]:
    lo, hi = box
    strategy = rng.randrange(5)
    if strategy == 0 or length == 0:
        return [rng.randint(lo, hi) for _ in range(length)]
    if strategy == 1:
        return sorted(rng.randint(lo, hi) for _ in range(length))
    if strategy == 2 and hi - lo + 1 >= length:
        return sorted(rng.sample(range(lo, hi + 1), length))
    if strategy == 3:
        return [lo] * length
    bit_lo, bit_hi = max(lo, 0), min(hi, 1)
    if bit_lo > bit_hi:
        return [rng.randint(lo, hi) for _ in range(length)]
    return [rng.randint(bit_lo, bit_hi) for _ in range(length)]


def _state_vars(p: AnnotatedProgram) -> tuple[set[str], set[str]]:
    ids = program_identifiers(p)
    arrays = set()
    for node in (p.precondition, p.body, p.postcondition, p.cost_bound):
        arrays |= array_names(node)
    for _, info in p.oracle:
        arrays |= array_names(info.invariant)
        for e in (info.variant, info.bound, info.amortized, info.potential):
            if e is not None:
                arrays |= array_names(e)
    bound_only = _bound_names(p)
    return (ids - arrays - bound_only) | (free_vars_assertion(p.precondition) - arrays), arrays


def _bound_names(p: AnnotatedProgram) -> set[str]:
    """Names that occur only as quantifier, sum or cost-function binders."""
    from .core import identifiers, walk
    binders: set[str] = set()
    for node in walk(p.precondition):
        if isinstance(node, (AForall, AExists, SumExpr)):
            binders.add(node.binder)
    for root in (p.postcondition, p.cost_bound, p.body):
        for node in walk(root):
            if isinstance(node, (AForall, AExists, SumExpr)):
                binders.add(node.binder)
    for _, info in p.oracle:
        for root in (info.invariant, info.variant, info.bound, info.amortized, info.potential):
            if root is None:
                continue
            for node in walk(root):
                if isinstance(node, (AForall, AExists, SumExpr)):
                    binders.add(node.binder)
        if info.cost_fn:
            binders.add(info.cost_fn[0])
    free: set[str] = set()
    free |= free_vars_assertion(p.precondition) | free_vars_assertion(p.postcondition)
    free |= free_vars(p.cost_bound)
    from .core import assigned_vars, free_vars_bexp
    sc, _ = assigned_vars(p.body)
    free |= sc
    for node in walk(p.body):
        if isinstance(node, (Assign, ArrAssign)):
            free |= free_vars(node.rhs)
        if isinstance(node, ArrAssign):
            free |= free_vars(node.index)
        if isinstance(node, (If, While)):
            free |= free_vars_bexp(node.cond)
        if isinstance(node, For):
            free |= free_vars(node.upper)
    for _, info in p.oracle:
        free |= free_vars_assertion(info.invariant)
        for e in (info.variant, info.bound, info.amortized, info.potential):
            if e is not None:
                free |= free_vars(e)
    return binders - free


def sample_state(pre: Assertion, scalars: Iterable[str], trials: int, seed: int,
                 arrays: Iterable[str] = (), config: SamplingConfig | None = None,
                 domain: range | None = None) -> SampleResult:
    """Rejection-sample ``trials`` states satisfying ``pre``."""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    cfg = config or SamplingConfig()
    rng = random.Random(seed)
    scalars = sorted(set(scalars))
    arrays = sorted(set(arrays))
    defs = _definitions(pre, set(scalars))
    dependent = {n for n, _ in defs}
    free = [v for v in scalars if v not in dependent]
    length_var = cfg.length_var if cfg.length_var in free else None
    max_attempts = cfg.attempts_per_trial * trials
    if isinstance(pre, AFalse):
        raise SamplingExhausted(f"precondition is false; 0 of {max_attempts} attempts accepted")
    states, attempts = [], 0
    while len(states) < trials and attempts < max_attempts:
        attempts += 1
        values: dict[str, int] = {}
        if length_var:
            lo, hi = cfg.box(length_var) if cfg.has_override(length_var) else cfg.size_box
            values[length_var] = rng.randint(lo, hi)
        cells: dict[tuple[str, int], int] = {}
        for a in arrays:
            if length_var:
                n = max(values[length_var], 0)
            else:
                n = rng.randint(*cfg.size_box)
            for i, v in enumerate(_draw_array(rng, n, cfg.cell_box)):
                cells[(a, i)] = v
        for v in free:
            if v == length_var:
                continue
            values[v] = rng.randint(*cfg.box(v))
            # Sometimes pick an existing array element, for membership preconditions.
            if cells and not cfg.has_override(v) and rng.random() < 0.3:
                values[v] = rng.choice(list(cells.values()))
        sigma = ProgramState(values, cells)
        ok = True
        for name, expr in defs:
            try:
                val = eval_aexp(expr, sigma)
            except ExecutionError:
                ok = False
                break
            lo, hi = cfg.box(name)
            if not lo <= val <= hi:
                ok = False
                break
            values[name] = val
            sigma = ProgramState(values, cells)
        if not ok:
            continue
        try:
            if holds(pre, sigma, domain):
                states.append(sigma)
        except ExecutionError:
            continue
    if not states:
        raise SamplingExhausted(f"0 of {attempts} attempts satisfied the precondition")
    return SampleResult(states, attempts, len(states))


def sample_program_states(p: AnnotatedProgram, trials: int, seed: int,
                          config: SamplingConfig | None = None) -> SampleResult:
    scalars, arrays = _state_vars(p)
    cfg = config or SamplingConfig.from_program(p)
    return sample_state(p.precondition, scalars, trials, seed, arrays, cfg)


# ---------------------------------------------------------------------------
# Reports


@dataclass(frozen=True)
class Violation:
    kind: str
    trial: int
    state: dict
    measured_cost: int | None = None
    bound_value: int | None = None
    message: str = ""

    def line(self) -> str:
        parts = [f"[{self.kind}] trial {self.trial}"]
        if self.measured_cost is not None:
            parts.append(f"cost={self.measured_cost}")
        if self.bound_value is not None:
            parts.append(f"bound={self.bound_value}")
        if self.message:
            parts.append(self.message)
        parts.append(f"state={json.dumps(self.state, sort_keys=True)}")
        return " ".join(parts)


def state_witness(sigma: ProgramState) -> dict:
    out: dict = {k: v for k, v in sorted(sigma.scalars.items())}
    for (a, i), v in sorted(sigma.arrays.items()):
        out[f"{a}[{i}]"] = v
    return out


@dataclass
class Report:
    name: str
    check: str
    trials: int
    seed: int
    violations: list[Violation] = field(default_factory=list)
    stats: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.violations

    def text(self) -> str:
        head = (f"{self.check} {self.name}: {self.trials} trials, seed {self.seed}, "
                f"{len(self.violations)} violations")
        extra = [f"  {k}: {v}" for k, v in sorted(self.stats.items())]
        witnesses = []
        seen: set[str] = set()
        for v in self.violations:
            if v.kind in seen:
                continue
            seen.add(v.kind)
            witnesses.append("  " + v.line())
        return "\n".join([head] + extra + witnesses)

    def summary(self) -> dict:
        return {"name": self.name, "check": self.check, "trials": self.trials, "seed": self.seed,
                "violations": len(self.violations), "stats": self.stats,
                "witnesses": [asdict(v) for v in self.violations[:20]]}


class _BranchProbe:
    """Tracer that re-runs both branches of every executed conditional."""

    def __init__(self, m: CostModel, fuel: int):
        self.m = m
        self.fuel = fuel
        self.imbalances: list[tuple[If, ProgramState, int, int]] = []
        self.checked = 0

    def loop_entry(self, loop, state):
        pass

    def loop_iteration(self, loop, before, after, body_cost):
        pass

    def branch(self, stmt: If, state: ProgramState, taken: bool) -> None:
        self.checked += 1
        t1 = exec_stmt(stmt.then_branch, state, self.m, self.fuel).cost
        t2 = exec_stmt(stmt.else_branch, state, self.m, self.fuel).cost
        if t1 != t2:
            self.imbalances.append((stmt, state, t1, t2))


def check_bound(p: AnnotatedProgram, m: CostModel | None = None, trials: int = 200, seed: int = 0,
                config: SamplingConfig | None = None, states: list[ProgramState] | None = None,
                fuel: int = DEFAULT_FUEL, name: str = "program", check_wp: bool = True,
                if_cost: str = "max") -> Report:
    """Run the program from sampled pre-states and compare against its bounds.

    Besides the user bound T this also checks the VCG's own cost expression
    (``static-cost``), the weakest precondition when it holds initially, and
    in exact mode the cost balance of every executed conditional.
    """
    m = m or CostModel.unit()
    if states is None:
        sampled = sample_program_states(p, trials, seed, config)
        states = sampled.states
        acceptance = sampled.acceptance_rate
    else:
        acceptance = None
    exact = p.mode == "exact"
    report = Report(name, "bound", len(states), seed)
    wp = program_wpc(p, m, if_cost)
    wp_states = 0
    branches = 0
    max_ratio = 0.0
    for trial, s0 in enumerate(states):
        w = state_witness(s0)
        probe = _BranchProbe(m, fuel) if exact else None
        try:
            out = exec_stmt(p.body, s0, m, fuel, tracer=probe)
        except ExecutionError as e:
            report.violations.append(Violation("runtime", trial, w, message=str(e)))
            continue
        cost = out.cost
        if not holds(p.postcondition, out.final_state):
            report.violations.append(Violation("postcondition", trial, w, cost,
                                               message="postcondition fails in final state"))
        try:
            bound = cost_value(p.cost_bound, s0)
        except ExecutionError as e:
            report.violations.append(Violation("bound-undefined", trial, w, cost, message=str(e)))
            bound = None
        if bound is not None:
            if exact and bound != cost:
                report.violations.append(Violation("exact", trial, w, cost, bound, "T != measured cost"))
            elif not exact and bound < cost:
                report.violations.append(Violation("bound", trial, w, cost, bound, "T < measured cost"))
            if bound > 0:
                max_ratio = max(max_ratio, cost / bound)
        try:
            static = cost_value(wp.cost, s0)
        except ExecutionError as e:
            report.violations.append(Violation("static-undefined", trial, w, cost, message=str(e)))
            static = None
        if static is not None and ((exact and static != cost) or (not exact and static < cost)):
            report.violations.append(Violation("static-cost", trial, w, cost, static,
                                               "VCG cost expression disagrees with measured cost"))
        if check_wp:
            try:
                if holds(wp.pre, s0):
                    wp_states += 1
                    if not holds(p.postcondition, out.final_state):
                        report.violations.append(Violation("wp", trial, w, cost,
                                                           message="wp held but postcondition fails"))
            except ExecutionError:
                pass
        if probe is not None:
            branches += probe.checked
            for stmt, st, t1, t2 in probe.imbalances:
                report.violations.append(Violation(
                    "branch-imbalance", trial, w, t1, t2,
                    f"then-branch cost {t1} != else-branch cost {t2} at {state_witness(st)}"))
    report.stats = {"mode": p.mode, "states_satisfying_wp": wp_states,
                    "max_cost_to_bound_ratio": round(max_ratio, 4)}
    if acceptance is not None:
        report.stats["acceptance_rate"] = round(acceptance, 4)
    if exact:
        report.stats["branches_probed"] = branches
    return report


class _Telescope:
    def __init__(self, p: AnnotatedProgram, sink: list, trial: int, witness: dict):
        self.info = p.oracle_map
        self.sink = sink
        self.trial = trial
        self.w = witness
        self.amortized: dict[int, int] = {}
        self.totals: dict[int, list[int]] = {}
        self.iterations = 0

    def _phi(self, lid: int, state: ProgramState) -> int:
        return eval_aexp(self.info[lid].potential, state)

    def loop_entry(self, loop, state):
        if not isinstance(loop, While):
            return
        lid = loop.loop_id
        self.amortized[lid] = eval_aexp(self.info[lid].amortized, state)
        phi = self._phi(lid, state)
        if phi != 0:
            self.sink.append(Violation("entry-potential", self.trial, self.w, message=(
                f"loop {lid}: potential {phi} != 0 at entry")))

    def loop_iteration(self, loop, before, after, body_cost):
        if not isinstance(loop, While):
            return
        self.iterations += 1
        lid = loop.loop_id
        a = self.amortized[lid]
        pb, pa = self._phi(lid, before), self._phi(lid, after)
        tot = self.totals.setdefault(lid, [0, 0])
        tot[0] += a
        tot[1] += body_cost
        if a + pb - pa < body_cost:
            self.sink.append(Violation("amortized-step", self.trial, self.w, body_cost, a + pb - pa, (
                f"loop {lid}: a + phi_before - phi_after = {a} + {pb} - {pa} < {body_cost}")))
        if pa < 0:
            self.sink.append(Violation("negative-potential", self.trial, self.w, message=(
                f"loop {lid}: potential {pa} < 0 after an iteration")))

    def branch(self, stmt, state, taken):
        pass


def check_amortized_telescoping(p: AnnotatedProgram, m: CostModel | None = None, trials: int = 200,
                                seed: int = 0, config: SamplingConfig | None = None,
                                states: list[ProgramState] | None = None,
                                fuel: int = DEFAULT_FUEL, name: str = "program") -> Report:
    """Check the per-iteration potential-method inequality on real runs."""
    if p.mode != "amortized":
        raise ValueError("telescoping check needs an amortized-mode program")
    m = m or CostModel.unit()
    if states is None:
        states = sample_program_states(p, trials, seed, config).states
    report = Report(name, "telescoping", len(states), seed)
    iterations = 0
    for trial, s0 in enumerate(states):
        tracer = _Telescope(p, report.violations, trial, state_witness(s0))
        try:
            exec_stmt(p.body, s0, m, fuel, tracer=tracer)
        except ExecutionError as e:
            report.violations.append(Violation("runtime", trial, state_witness(s0), message=str(e)))
            continue
        iterations += tracer.iterations
        for lid, (sa, st) in tracer.totals.items():
            if sa < st:
                report.violations.append(Violation("amortized-total", trial, state_witness(s0), st, sa,
                                                   f"loop {lid}: total amortized {sa} < total actual {st}"))
    report.stats = {"iterations": iterations}
    return report


def states_for_values(p: AnnotatedProgram, var: str, values: Iterable[int], seed: int = 0,
                      config: SamplingConfig | None = None) -> list[ProgramState]:
    """One sampled pre-state per value of ``var`` (other variables random)."""
    cfg = config or SamplingConfig.from_program(p)
    out = []
    for v in values:
        out.extend(sample_program_states(p, 1, seed + v, cfg.pinned(var, v)).states)
    return out


# ---------------------------------------------------------------------------
# Random generators


@dataclass
class RandomGen:
    """Random ASTs over a small vocabulary. All choices come from ``rng``."""

    rng: random.Random
    scalars: tuple[str, ...] = ("x", "y", "z", "w")
    arrays: tuple[str, ...] = ("A", "B")
    annotations: bool = True  # allow max/log

    def aexp(self, depth: int, executable: bool = False, sums: bool = True) -> ArithExpr:
        r = self.rng
        if depth <= 0 or r.random() < 0.25:
            k = r.randrange(3)
            if k == 0:
                return IntConst(r.randint(-5, 5))
            if k == 1:
                return Var(r.choice(self.scalars))
            return ArrRead(r.choice(self.arrays), self.aexp(0, executable, sums))
        k = r.randrange(10)
        d = depth - 1
        if k < 2:
            return Add(self.aexp(d, executable, sums), self.aexp(d, executable, sums))
        if k < 4:
            return Sub(self.aexp(d, executable, sums), self.aexp(d, executable, sums))
        if k == 4:
            return Mul(self.aexp(d, executable, sums), self.aexp(d, executable, sums))
        if k == 5:
            return Div(self.aexp(d, executable, sums), self.aexp(d, executable, sums))
        if k == 6:
            return Pow(self.aexp(d, executable, sums), IntConst(r.randint(0, 3)))
        if k == 7:
            return ArrRead(r.choice(self.arrays), self.aexp(d, executable, sums))
        if k == 8 and sums:
            b = r.choice(self.scalars)
            return SumExpr(b, IntConst(r.randint(-2, 1)), self.aexp(0, executable, False),
                           self.aexp(d, executable, False))
        if not executable and self.annotations:
            if r.random() < 0.5:
                return MaxExpr(self.aexp(d), self.aexp(d))
            return LogTwo(self.aexp(d))
        return Add(self.aexp(d, executable, sums), IntConst(r.randint(0, 3)))

    def bexp(self, depth: int) -> BoolExpr:
        r = self.rng
        if depth <= 0 or r.random() < 0.3:
            k = r.randrange(8)
            if k == 0:
                return BTrue()
            if k == 1:
                return BFalse()
            return Cmp(r.choice(CMP_OPS), self.aexp(1, True), self.aexp(1, True))
        k = r.randrange(3)
        if k == 0:
            return Not(self.bexp(depth - 1))
        if k == 1:
            return And(self.bexp(depth - 1), self.bexp(depth - 1))
        return Or(self.bexp(depth - 1), self.bexp(depth - 1))

    def assertion(self, depth: int, arith_depth: int = 2) -> Assertion:
        r = self.rng
        if depth <= 0 or r.random() < 0.2:
            k = r.randrange(8)
            if k == 0:
                return ATrue()
            if k == 1:
                return AFalse()
            return ACmp(r.choice(CMP_OPS), self.aexp(arith_depth), self.aexp(arith_depth))
        d = depth - 1
        k = r.randrange(7)
        if k == 0:
            return ANot(self.assertion(d, arith_depth))
        if k == 1:
            return AAnd(self.assertion(d, arith_depth), self.assertion(d, arith_depth))
        if k == 2:
            return AOr(self.assertion(d, arith_depth), self.assertion(d, arith_depth))
        if k == 3:
            return AImpl(self.assertion(d, arith_depth), self.assertion(d, arith_depth))
        if k == 4:
            return AForall(r.choice(self.scalars), self.assertion(d, arith_depth))
        if k == 5:
            return AExists(r.choice(self.scalars), self.assertion(d, arith_depth))
        return ACmp(r.choice(CMP_OPS), self.aexp(arith_depth), self.aexp(arith_depth))

    def stmt(self, depth: int, mode: str | None = None, loop_counter: list[int] | None = None) -> Stmt:
        """Random statements; loops only when ``mode`` is given."""
        r = self.rng
        if depth <= 0 or r.random() < 0.3:
            k = r.randrange(5)
            if k == 0:
                return Skip()
            if k < 3:
                return Assign(r.choice(self.scalars), self.aexp(2, True))
            return ArrAssign(r.choice(self.arrays), self.aexp(1, True), self.aexp(2, True))
        d = depth - 1
        k = r.randrange(5 if mode else 3)
        if k == 0:
            return Seq(self._non_seq(d, mode, loop_counter), self.stmt(d, mode, loop_counter))
        if k == 1:
            return If(self.bexp(2), self.stmt(d, mode, loop_counter), self.stmt(d, mode, loop_counter))
        if k == 2:
            return Seq(self._non_seq(d, mode, loop_counter), self._non_seq(d, mode, loop_counter))
        lid = loop_counter[0]
        loop_counter[0] += 1
        if mode == "exact":
            return For(lid, r.choice(self.scalars), r.randint(-2, 2), self.aexp(1, True),
                       self.stmt(d, mode, loop_counter))
        return While(lid, self.bexp(2), self.stmt(d, mode, loop_counter))

    def _non_seq(self, depth: int, mode, loop_counter) -> Stmt:
        s = self.stmt(depth, mode, loop_counter)
        while isinstance(s, Seq):
            s = s.first
        return s

    def oracle(self, mode: str) -> OracleInfo:
        inv = self.assertion(2)
        if mode == "exact":
            return OracleInfo(inv)
        variant, bound = self.aexp(2), self.aexp(2)
        if mode == "classic":
            b = self.rng.choice(("k", "i", "t"))
            return OracleInfo(inv, variant, bound, cost_fn=(b, self.aexp(2)))
        return OracleInfo(inv, variant, bound, amortized=self.aexp(2), potential=self.aexp(2))

    def program(self, mode: str | None = None, depth: int = 3) -> AnnotatedProgram:
        mode = mode or self.rng.choice(("classic", "amortized", "exact"))
        counter = [0]
        body = _renumber(self.stmt(depth, mode, counter), [0])
        from .core import loops
        oracle = tuple((i, self.oracle(mode)) for i in range(len(loops(body))))
        return AnnotatedProgram(self.assertion(3), body, self.assertion(3), self.aexp(2), mode, oracle)

    def state(self, lo: int = -5, hi: int = 5, cells: range = range(-3, 4)) -> ProgramState:
        r = self.rng
        scalars = {v: r.randint(lo, hi) for v in self.scalars}
        arr = {(a, i): r.randint(lo, hi) for a in self.arrays for i in cells}
        return ProgramState(scalars, arr)


def _renumber(s: Stmt, next_id: list[int]) -> Stmt:
    """Assign loop ids in left-to-right order, as the parser does."""
    match s:
        case Seq(a, b):
            first = _renumber(a, next_id)
            return Seq(first, _renumber(b, next_id))
        case If(c, a, b):
            then = _renumber(a, next_id)
            return If(c, then, _renumber(b, next_id))
        case While(_, c, body):
            lid = next_id[0]
            next_id[0] += 1
            return While(lid, c, _renumber(body, next_id))
        case For(_, i, lo, hi, body):
            lid = next_id[0]
            next_id[0] += 1
            return For(lid, i, lo, hi, _renumber(body, next_id))
    return s


# ---------------------------------------------------------------------------
# Substitution lemma and interpreter differential

LEMMA_DOMAIN = range(-3, 4)


def check_substitution_lemma(trials: int = 10_000, seed: int = 0, depth: int = 4) -> Report:
    """sigma |= P[a/x]  iff  sigma[x := a(sigma)] |= P, over a fixed quantifier domain."""
    rng = random.Random(seed)
    gen = RandomGen(rng)
    report = Report("substitution-lemma", "lemma", trials, seed)
    skipped = 0
    for trial in range(trials):
        p = gen.assertion(depth, arith_depth=2)
        x = rng.choice(gen.scalars)
        a = gen.aexp(2)
        sigma = gen.state()
        try:
            lhs = holds(subst_assertion(p, x, a), sigma, LEMMA_DOMAIN)
            rhs = holds(p, sigma.with_scalar(x, eval_aexp(a, sigma)), LEMMA_DOMAIN)
        except ExecutionError:
            skipped += 1
            continue
        if lhs != rhs:
            from .parser import show_aexp, show_assertion
            report.violations.append(Violation("lemma", trial, state_witness(sigma), message=(
                f"P = {show_assertion(p)}; x = {x}; a = {show_aexp(a)}; lhs={lhs} rhs={rhs}")))
    report.stats = {"skipped_undefined": skipped}
    return report


def check_interpreter_differential(trials: int = 10_000, seed: int = 0,
                                   m: CostModel | None = None) -> Report:
    """exec versus the reference evaluator on random loop-free programs."""
    rng = random.Random(seed)
    gen = RandomGen(rng, annotations=False)
    m = m or CostModel.unit()
    report = Report("interpreter-differential", "differential", trials, seed)
    errors = 0
    for trial in range(trials):
        s = gen.stmt(4)
        sigma = gen.state()
        a = b = None
        try:
            a = exec_stmt(s, sigma, m)
        except ExecutionError as e:
            a = e.kind
        try:
            b = reference_exec(s, sigma, m)
        except ExecutionError as e:
            b = e.kind
        if isinstance(a, str) or isinstance(b, str):
            errors += 1
            if a != b:
                report.violations.append(Violation("error-mismatch", trial, state_witness(sigma),
                                                   message=f"exec: {a!r}, reference: {b!r}"))
            continue
        if a.cost != b.cost or not a.final_state.same_as(b.final_state):
            from .parser import show_stmt
            report.violations.append(Violation("mismatch", trial, state_witness(sigma), a.cost, b.cost,
                                               f"program: {show_stmt(s)}"))
    report.stats = {"both_raised": errors}
    return report


def write_summary(reports: list[Report], path: str) -> None:
    with open(path, "w") as fh:
        json.dump([r.summary() for r in reports], fh, indent=2, sort_keys=True)
