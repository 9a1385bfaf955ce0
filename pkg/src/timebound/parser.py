"""Recursive-descent parser and pretty-printer for annotated programs.

File layout::

    #mode: classic            optional header lines (`#key: value`)
    { P }
    S
    { Q | T }

Loops carry their proof data in a bracketed block between the header and
``do``; see the README for the grammar.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .core import (
    AAnd, ACmp, AExists, AFalse, AForall, AImpl, ANot, AOr, ATrue, Add, And,
    AnnotatedProgram, ArrAssign, ArrRead, ArithExpr, Assertion, Assign, BFalse, BTrue,
    BinArith, BoolExpr, COST_NAMES, CMP_OPS, Cmp, CostModel, Div, For, If, IntConst,
    LogTwo, MODES, MaxExpr, Mul, Not, OracleInfo, Or, Pow, Seq, Skip, Stmt, Sub,
    SumExpr, Var, While,
)

KEYWORDS = {
    "if", "then", "else", "end", "while", "do", "for", "to", "skip", "true", "false",
    "and", "or", "not", "forall", "exists", "sum", "log", "max", "fun",
    "invariant", "variant", "bound", "cost", "amortized", "potential",
}
ANNOTATION_KEYS = ("invariant", "variant", "bound", "cost", "amortized", "potential")
HEADER_KEYS = ("mode", "sample", "cells", "length")

REQUIRED_FIELDS = {
    "classic": ("invariant", "variant", "bound", "cost"),
    "amortized": ("invariant", "variant", "bound", "amortized", "potential"),
    "exact": ("invariant",),
}

_SYMBOLS = ("=>", "->", "<=", ">=", "!=", "{", "}", "[", "]", "(", ")", ";", ",", ".",
            "|", "=", "<", ">", "+", "-", "*", "/", "^", ":")
_TOKEN_RE = re.compile(
    r"(?P<ws>[ \t\r]+)|(?P<nl>\n)|(?P<comment>#[^\n]*)|(?P<int>\d+)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_']*)|(?P<sym>" + "|".join(re.escape(s) for s in _SYMBOLS) + ")"
)
_HEADER_RE = re.compile(r"^\s*#\s*([A-Za-z_]+)\s*:\s*(.*?)\s*$")


@dataclass(frozen=True)
class SourceSpan:
    line: int
    column: int
    length: int = 1

    def __str__(self) -> str:
        return f"{self.line}:{self.column}"


class ParseError(Exception):
    def __init__(self, span: SourceSpan, message: str, expected: list[str] | None = None):
        assert message
        self.span = span
        self.message = message
        self.expected = list(expected or [])
        text = f"{span}: {message}"
        if self.expected:
            text += f" (expected {', '.join(self.expected)})"
        super().__init__(text)


class OracleMissingError(ParseError):
    """A loop lacks an annotation field required by the selected mode."""

    def __init__(self, span: SourceSpan, loop_id: int, field_name: str, mode: str):
        self.loop_id = loop_id
        self.field_name = field_name
        super().__init__(span, f"loop {loop_id} is missing oracle field '{field_name}' "
                               f"required in {mode} mode")


@dataclass(frozen=True)
class Token:
    kind: str  # int, ident, kw, sym, eof
    text: str
    span: SourceSpan

    def describe(self) -> str:
        return "end of input" if self.kind == "eof" else repr(self.text)


def tokenize(source: str) -> list[Token]:
    toks: list[Token] = []
    line, col, pos = 1, 1, 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise ParseError(SourceSpan(line, col), f"unexpected character {source[pos]!r}")
        kind = m.lastgroup
        text = m.group()
        if kind == "nl":
            line, col = line + 1, 1
        else:
            if kind == "ident" and text in KEYWORDS:
                kind = "kw"
            if kind not in ("ws", "comment"):
                toks.append(Token(kind, text, SourceSpan(line, col, len(text))))
            col += len(text)
        pos = m.end()
    toks.append(Token("eof", "", SourceSpan(line, col, 0)))
    return toks


@dataclass
class _LoopAnn:
    span: SourceSpan
    fields: dict = field(default_factory=dict)


class _Parser:
    def __init__(self, source: str, mode: str):
        self.toks = tokenize(source)
        self.pos = 0
        self.mode = mode
        self.next_loop = 0
        self.oracle: list[tuple[int, OracleInfo]] = []
        self.memo: dict[tuple[int, bool], tuple[ArithExpr, int]] = {}

    # token helpers -------------------------------------------------------
    @property
    def tok(self) -> Token:
        return self.toks[self.pos]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.pos + k, len(self.toks) - 1)]

    def at(self, *texts: str) -> bool:
        t = self.tok
        return t.kind in ("sym", "kw") and t.text in texts

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.pos += 1
            return True
        return False

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.fail(f"unexpected {self.tok.describe()}", [repr(text)])
        t = self.tok
        self.pos += 1
        return t

    def ident(self) -> str:
        t = self.tok
        if t.kind != "ident":
            self.fail(f"unexpected {t.describe()}", ["identifier"])
        self.pos += 1
        return t.text

    def fail(self, message: str, expected: list[str] | None = None):
        raise ParseError(self.tok.span, message, expected)

    # program -------------------------------------------------------------
    def program(self, headers: tuple) -> AnnotatedProgram:
        self.expect("{")
        pre = self.assertion()
        self.expect("}")
        body = self.stmt_seq()
        self.expect("{")
        post = self.assertion()
        self.expect("|")
        bound = self.aexp(False)
        self.expect("}")
        if self.tok.kind != "eof":
            self.fail(f"unexpected {self.tok.describe()} after program", ["end of input"])
        return AnnotatedProgram(pre, body, post, bound, self.mode,
                                tuple(sorted(self.oracle, key=lambda e: e[0])), headers)

    # statements ----------------------------------------------------------
    def stmt_seq(self) -> Stmt:
        first = self.stmt()
        if self.accept(";"):
            if self.at("end", "else", "{") or self.tok.kind == "eof":
                return first
            return Seq(first, self.stmt_seq())
        return first

    def stmt(self) -> Stmt:
        t = self.tok
        if self.accept("skip"):
            return Skip()
        if self.accept("if"):
            cond = self.bexp()
            self.expect("then")
            then = self.stmt_seq()
            other: Stmt = Skip()
            if self.accept("else"):
                other = self.stmt_seq()
            self.expect("end")
            return If(cond, then, other)
        if self.at("while"):
            if self.mode == "exact":
                self.fail("while not allowed in exact mode")
            self.pos += 1
            lid = self._new_loop()
            cond = self.bexp()
            ann = self.annotation(t.span)
            self.expect("do")
            body = self.stmt_seq()
            self.expect("end")
            self._register(lid, ann)
            return While(lid, cond, body)
        if self.at("for"):
            if self.mode != "exact":
                self.fail(f"for loops are only allowed in exact mode (mode is {self.mode})")
            self.pos += 1
            lid = self._new_loop()
            binder = self.ident()
            self.expect("=")
            neg = self.accept("-")
            if self.tok.kind != "int":
                self.fail(f"unexpected {self.tok.describe()}", ["integer lower bound"])
            lower = int(self.tok.text) * (-1 if neg else 1)
            self.pos += 1
            self.expect("to")
            upper = self.aexp(True)
            ann = self.annotation(t.span)
            self.expect("do")
            body = self.stmt_seq()
            self.expect("end")
            self._register(lid, ann)
            return For(lid, binder, lower, upper, body)
        if t.kind == "ident":
            name = self.ident()
            if self.accept("["):
                idx = self.aexp(True)
                self.expect("]")
                self.expect("=")
                return ArrAssign(name, idx, self.aexp(True))
            self.expect("=")
            return Assign(name, self.aexp(True))
        self.fail(f"unexpected {t.describe()}", ["statement"])

    def _new_loop(self) -> int:
        lid = self.next_loop
        self.next_loop += 1
        return lid

    def annotation(self, span: SourceSpan) -> _LoopAnn:
        ann = _LoopAnn(span)
        if not self.accept("["):
            return ann
        while True:
            key_tok = self.tok
            if not (key_tok.kind == "kw" and key_tok.text in ANNOTATION_KEYS):
                self.fail(f"unexpected {key_tok.describe()}", [repr(k) for k in ANNOTATION_KEYS])
            key = key_tok.text
            if key in ann.fields:
                self.fail(f"duplicate annotation field '{key}'")
            self.pos += 1
            self.expect(":")
            if key == "invariant":
                ann.fields[key] = self.assertion()
            elif key == "cost":
                self.expect("fun")
                binder = self.ident()
                self.expect("->")
                ann.fields[key] = (binder, self.aexp(False))
            else:
                ann.fields[key] = self.aexp(False)
            if self.accept("]"):
                return ann
            self.expect(";")

    def _register(self, lid: int, ann: _LoopAnn) -> None:
        required = REQUIRED_FIELDS[self.mode]
        for f in required:
            if f not in ann.fields:
                raise OracleMissingError(ann.span, lid, f, self.mode)
        for f in ann.fields:
            if f not in required:
                raise ParseError(ann.span, f"annotation field '{f}' is not allowed in {self.mode} mode")
        fs = ann.fields
        self.oracle.append((lid, OracleInfo(
            invariant=fs["invariant"], variant=fs.get("variant"), bound=fs.get("bound"),
            cost_fn=fs.get("cost"), amortized=fs.get("amortized"), potential=fs.get("potential"))))

    # boolean conditions ----------------------------------------------------
    def bexp(self) -> BoolExpr:
        left = self.band()
        while self.accept("or"):
            left = Or(left, self.band())
        return left

    def band(self) -> BoolExpr:
        left = self.bnot()
        while self.accept("and"):
            left = And(left, self.bnot())
        return left

    def bnot(self) -> BoolExpr:
        if self.accept("not"):
            return Not(self.bnot())
        return self.batom()

    def batom(self) -> BoolExpr:
        if self.accept("true"):
            return BTrue()
        if self.accept("false"):
            return BFalse()
        if self.at("("):
            saved = self.pos
            try:
                self.pos += 1
                inner = self.bexp()
                self.expect(")")
                return inner
            except ParseError:
                self.pos = saved
        left = self.aexp(True)
        op = self.cmp_op()
        return Cmp(op, left, self.aexp(True))

    def cmp_op(self) -> str:
        if self.tok.kind == "sym" and self.tok.text in CMP_OPS:
            op = self.tok.text
            self.pos += 1
            return op
        self.fail(f"unexpected {self.tok.describe()}", ["comparison operator"])

    # assertions ------------------------------------------------------------
    def assertion(self) -> Assertion:
        if self.at("forall", "exists"):
            return self.quantifier()
        left = self.aor()
        if self.accept("=>"):
            return AImpl(left, self.assertion())
        return left

    def quantifier(self) -> Assertion:
        ctor = AForall if self.tok.text == "forall" else AExists
        self.pos += 1
        binders = [self.ident()]
        while self.accept(","):
            binders.append(self.ident())
        self.expect(".")
        body = self.assertion()
        for b in reversed(binders):
            body = ctor(b, body)
        return body

    def aor(self) -> Assertion:
        left = self.aand()
        while self.accept("or"):
            left = AOr(left, self.aand())
        return left

    def aand(self) -> Assertion:
        left = self.anot()
        while self.accept("and"):
            left = AAnd(left, self.anot())
        return left

    def anot(self) -> Assertion:
        if self.accept("not"):
            return ANot(self.anot())
        return self.aatom()

    def aatom(self) -> Assertion:
        if self.accept("true"):
            return ATrue()
        if self.accept("false"):
            return AFalse()
        if self.at("forall", "exists"):
            return self.quantifier()
        if self.at("("):
            saved = self.pos
            try:
                self.pos += 1
                inner = self.assertion()
                self.expect(")")
                return inner
            except ParseError:
                self.pos = saved
        left = self.aexp(False)
        op = self.cmp_op()
        return ACmp(op, left, self.aexp(False))

    # arithmetic ------------------------------------------------------------
    def aexp(self, executable: bool) -> ArithExpr:
        key = (self.pos, executable)
        if key in self.memo:
            node, end = self.memo[key]
            self.pos = end
            return node
        node = self.additive(executable)
        self.memo[key] = (node, self.pos)
        return node

    def additive(self, ex: bool) -> ArithExpr:
        left = self.multiplicative(ex)
        while self.at("+", "-"):
            ctor = Add if self.tok.text == "+" else Sub
            self.pos += 1
            left = ctor(left, self.multiplicative(ex))
        return left

    def multiplicative(self, ex: bool) -> ArithExpr:
        left = self.power(ex)
        while self.at("*", "/"):
            ctor = Mul if self.tok.text == "*" else Div
            self.pos += 1
            left = ctor(left, self.power(ex))
        return left

    def power(self, ex: bool) -> ArithExpr:
        base = self.unary(ex)
        if self.accept("^"):
            return Pow(base, self.power(ex))
        return base

    def unary(self, ex: bool) -> ArithExpr:
        if self.accept("-"):
            if self.tok.kind == "int":
                v = int(self.tok.text)
                self.pos += 1
                return IntConst(-v)
            return Sub(IntConst(0), self.unary(ex))
        return self.primary(ex)

    def primary(self, ex: bool) -> ArithExpr:
        t = self.tok
        if t.kind == "int":
            self.pos += 1
            return IntConst(int(t.text))
        if t.kind == "ident":
            self.pos += 1
            nxt = self.peek()
            if self.at("[") and not (nxt.kind == "kw" and nxt.text in ANNOTATION_KEYS):
                self.pos += 1
                idx = self.aexp(ex)
                self.expect("]")
                return ArrRead(t.text, idx)
            return Var(t.text)
        if self.accept("("):
            inner = self.aexp(ex)
            self.expect(")")
            return inner
        if self.at("sum"):
            self.pos += 1
            self.expect("(")
            binder = self.ident()
            self.expect(",")
            lo = self.aexp(ex)
            self.expect(",")
            hi = self.aexp(ex)
            self.expect(",")
            body = self.aexp(ex)
            self.expect(")")
            return SumExpr(binder, lo, hi, body)
        if self.at("log", "max"):
            if ex:
                self.fail(f"'{t.text}' is only allowed in annotations")
            self.pos += 1
            self.expect("(")
            a = self.aexp(ex)
            if t.text == "log":
                self.expect(")")
                return LogTwo(a)
            self.expect(",")
            b = self.aexp(ex)
            self.expect(")")
            return MaxExpr(a, b)
        self.fail(f"unexpected {t.describe()}", ["expression"])


def read_headers(source: str) -> tuple[tuple[str, str], ...]:
    out = []
    for line in source.splitlines():
        m = _HEADER_RE.match(line)
        if m and m.group(1) in HEADER_KEYS:
            out.append((m.group(1), m.group(2)))
    return tuple(out)


def parse_program(source: str, mode: str | None = None) -> AnnotatedProgram:
    """Parse a program; ``mode`` overrides the file's ``#mode:`` header."""
    headers = read_headers(source)
    declared = dict(headers).get("mode")
    chosen = mode or declared or "classic"
    if chosen not in MODES:
        raise ParseError(SourceSpan(1, 1), f"unknown mode {chosen!r}", list(MODES))
    rest = tuple((k, v) for k, v in headers if k != "mode")
    return _Parser(source, chosen).program(rest)


def parse_assertion(source: str) -> Assertion:
    p = _Parser(source, "classic")
    a = p.assertion()
    if p.tok.kind != "eof":
        p.fail(f"unexpected {p.tok.describe()}", ["end of input"])
    return a


def parse_aexp(source: str, executable: bool = False) -> ArithExpr:
    p = _Parser(source, "classic")
    a = p.aexp(executable)
    if p.tok.kind != "eof":
        p.fail(f"unexpected {p.tok.describe()}", ["end of input"])
    return a


def parse_bexp(source: str) -> BoolExpr:
    p = _Parser(source, "classic")
    b = p.bexp()
    if p.tok.kind != "eof":
        p.fail(f"unexpected {p.tok.describe()}", ["end of input"])
    return b


def parse_stmt(source: str, mode: str = "classic") -> Stmt:
    """Statements only; loops need their mode's annotations."""
    p = _Parser(source, mode)
    s = p.stmt_seq()
    if p.tok.kind != "eof":
        p.fail(f"unexpected {p.tok.describe()}", ["end of input"])
    return s


_LINE_RE = re.compile(r"^\s*([A-Za-z_][A-Za-z0-9_]*)\s*=\s*(-?\d+)\s*$")


def parse_cost_model(source: str, sum_cost: str = "inclusive") -> CostModel:
    values: dict[str, int] = {}
    for n, raw in enumerate(source.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        m = _LINE_RE.match(line)
        if not m:
            raise ParseError(SourceSpan(n, 1, len(raw)), "malformed cost line", ["NAME = value"])
        name, value = m.group(1), int(m.group(2))
        col = raw.index(name) + 1
        if name not in COST_NAMES:
            raise ParseError(SourceSpan(n, col, len(name)), f"unknown cost name {name}", list(COST_NAMES))
        if value < 0:
            raise ParseError(SourceSpan(n, col, len(name)), f"negative cost for {name}")
        values[name] = value
    return CostModel.from_mapping(values, sum_cost)


# ---------------------------------------------------------------------------
# Pretty printing

_ARITH_PREC = {Add: 1, Sub: 1, Mul: 2, Div: 2, Pow: 3}


def show_aexp(e: ArithExpr, ctx: int = 0) -> str:
    match e:
        case IntConst(v):
            return str(v)
        case Var(name):
            return name
        case ArrRead(arr, idx):
            return f"{arr}[{show_aexp(idx)}]"
        case SumExpr(b, lo, hi, body):
            return f"sum({b}, {show_aexp(lo)}, {show_aexp(hi)}, {show_aexp(body)})"
        case MaxExpr(l, r):
            return f"max({show_aexp(l)}, {show_aexp(r)})"
        case LogTwo(a):
            return f"log({show_aexp(a)})"
        case BinArith(l, r):
            prec = _ARITH_PREC[type(e)]
            if isinstance(e, Pow):
                text = f"{show_aexp(l, 4)} ^ {show_aexp(r, 3)}"
            else:
                text = f"{show_aexp(l, prec)} {e.symbol} {show_aexp(r, prec + 1)}"
            return f"({text})" if prec < ctx else text
    raise TypeError(f"not an arithmetic expression: {e!r}")


def show_bexp(b: BoolExpr, ctx: int = 0) -> str:
    match b:
        case BTrue():
            return "true"
        case BFalse():
            return "false"
        case Cmp(op, l, r):
            return f"{show_aexp(l)} {op} {show_aexp(r)}"
        case Not(i):
            text, prec = f"not {show_bexp(i, 4)}", 4
        case And(l, r):
            text, prec = f"{show_bexp(l, 3)} and {show_bexp(r, 4)}", 3
        case Or(l, r):
            text, prec = f"{show_bexp(l, 2)} or {show_bexp(r, 3)}", 2
        case _:
            raise TypeError(f"not a boolean expression: {b!r}")
    return f"({text})" if prec < ctx else text


def show_assertion(p: Assertion, ctx: int = 0) -> str:
    match p:
        case ATrue():
            return "true"
        case AFalse():
            return "false"
        case ACmp(op, l, r):
            return f"{show_aexp(l)} {op} {show_aexp(r)}"
        case ANot(i):
            text, prec = f"not {show_assertion(i, 4)}", 4
        case AAnd(l, r):
            text, prec = f"{show_assertion(l, 3)} and {show_assertion(r, 4)}", 3
        case AOr(l, r):
            text, prec = f"{show_assertion(l, 2)} or {show_assertion(r, 3)}", 2
        case AImpl(l, r):
            text, prec = f"{show_assertion(l, 2)} => {show_assertion(r, 1)}", 1
        case AForall(b, body):
            text, prec = f"forall {b}. {show_assertion(body, 1)}", 1
        case AExists(b, body):
            text, prec = f"exists {b}. {show_assertion(body, 1)}", 1
        case _:
            raise TypeError(f"not an assertion: {p!r}")
    return f"({text})" if prec < ctx else text


def show_annotation(info: OracleInfo) -> str:
    parts = [f"invariant: {show_assertion(info.invariant)}"]
    if info.variant is not None:
        parts.append(f"variant: {show_aexp(info.variant)}")
    if info.bound is not None:
        parts.append(f"bound: {show_aexp(info.bound)}")
    if info.cost_fn is not None:
        parts.append(f"cost: fun {info.cost_fn[0]} -> {show_aexp(info.cost_fn[1])}")
    if info.amortized is not None:
        parts.append(f"amortized: {show_aexp(info.amortized)}")
    if info.potential is not None:
        parts.append(f"potential: {show_aexp(info.potential)}")
    return "[" + "; ".join(parts) + "]"


def show_stmt(s: Stmt, oracle: dict[int, OracleInfo] | None = None, indent: int = 0) -> str:
    return "\n".join(_stmt_lines(s, oracle or {}, indent))


def _stmt_lines(s: Stmt, oracle: dict, indent: int) -> list[str]:
    pad = "  " * indent
    match s:
        case Seq(first, second):
            head = _stmt_lines(first, oracle, indent)
            head[-1] += ";"
            return head + _stmt_lines(second, oracle, indent)
        case Skip():
            return [pad + "skip"]
        case Assign(x, a):
            return [f"{pad}{x} = {show_aexp(a)}"]
        case ArrAssign(x, i, a):
            return [f"{pad}{x}[{show_aexp(i)}] = {show_aexp(a)}"]
        case If(b, s1, s2):
            return ([f"{pad}if {show_bexp(b)} then"] + _stmt_lines(s1, oracle, indent + 1)
                    + [pad + "else"] + _stmt_lines(s2, oracle, indent + 1) + [pad + "end"])
        case While(lid, b, body):
            ann = f" {show_annotation(oracle[lid])}" if lid in oracle else ""
            return ([f"{pad}while {show_bexp(b)}{ann} do"] + _stmt_lines(body, oracle, indent + 1)
                    + [pad + "end"])
        case For(lid, i, lo, hi, body):
            ann = f" {show_annotation(oracle[lid])}" if lid in oracle else ""
            return ([f"{pad}for {i} = {lo} to {show_aexp(hi)}{ann} do"]
                    + _stmt_lines(body, oracle, indent + 1) + [pad + "end"])
    raise TypeError(f"not a statement: {s!r}")


def pretty_print(p: AnnotatedProgram) -> str:
    lines = [f"#mode: {p.mode}"] + [f"#{k}: {v}" for k, v in p.headers]
    lines.append(f"{{ {show_assertion(p.precondition)} }}")
    lines.extend(_stmt_lines(p.body, p.oracle_map, 0))
    lines.append(f"{{ {show_assertion(p.postcondition)} | {show_aexp(p.cost_bound)} }}")
    return "\n".join(lines) + "\n"
