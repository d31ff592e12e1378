"""Parser for the textual process grammar.

::

    P ::= 0 | * | X | X(e, ...) | mu X. P | mu X(x := e, ...). P | P + P
        | f(x).(P, ...) | ~f(e).(P, ...) | if b then P else Q | P \\ {f, g}
        | par { 0: P; 1: Q } edges { (0,1) } | P | Q | P (+) Q | ( P )

``f/2`` may annotate a symbol's arity explicitly.  ``P | Q`` links every
location of P to every location of Q, ``P (+) Q`` adds no edges.
"""

from __future__ import annotations

import re

from .expr import And, BConst, Cmp, Not, Op, Val, Var
from .graph import Graph
from .symbols import Symbol
from .terms import (
    IDLE, ZERO, Cond, GraphComp, IllFormedError, InPrefix, OutPrefix, ProcVar, Rec,
    Restrict, Sum, Term, is_rcgs,
)


class ParseError(ValueError):
    def __init__(self, message: str, text: str = "", pos: int = 0):
        line = text.count("\n", 0, pos) + 1
        col = pos - (text.rfind("\n", 0, pos) + 1) + 1
        super().__init__(f"{message} at line {line}, column {col}")
        self.line, self.col = line, col


_TOKEN = re.compile(r"""
    (?P<ws>\s+|\#[^\n]*)
  | (?P<oplus>\(\+\))
  | (?P<assign>:=)
  | (?P<num>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_^']*)
  | (?P<punct>[(){},;:.+\-*~\\|=</])
""", re.VERBOSE)

KEYWORDS = {"mu", "if", "then", "else", "par", "edges", "true", "false", "not", "and"}


def tokenize(text: str) -> list:
    toks = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", text, pos)
        kind = m.lastgroup
        if kind != "ws":
            val = m.group(kind)
            if kind == "ident" and val in KEYWORDS:
                kind = val
            elif kind in ("punct", "oplus", "assign"):
                kind = val
            toks.append((kind, val, pos))
        pos = m.end()
    toks.append(("eof", "", len(text)))
    return toks


class TokenStream:
    def __init__(self, text: str, toks: list | None = None):
        self.text = text
        self.toks = tokenize(text) if toks is None else toks
        self.i = 0

    def peek(self, k: int = 0) -> tuple:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, *kinds: str) -> bool:
        return self.peek()[0] in kinds

    def next(self) -> tuple:
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, kind: str) -> tuple:
        tok = self.peek()
        if tok[0] != kind:
            self.fail(f"expected {kind!r}, found {tok[1] or 'end of input'!r}")
        return self.next()

    def accept(self, kind: str) -> bool:
        if self.at(kind):
            self.next()
            return True
        return False

    def fail(self, message: str):
        raise ParseError(message, self.text, self.peek()[2])


# ---------------------------------------------------------------- expressions

def parse_exp(ts: TokenStream):
    left = _exp_term(ts)
    while ts.at("+", "-"):
        op = ts.next()[1]
        left = Op(op, (left, _exp_term(ts)))
    return left


def _exp_term(ts: TokenStream):
    left = _exp_factor(ts)
    while ts.at("*"):
        ts.next()
        left = Op("*", (left, _exp_factor(ts)))
    return left


def _exp_factor(ts: TokenStream):
    kind, val, _ = ts.peek()
    if kind == "num":
        ts.next()
        return Val(int(val))
    if kind == "-" and ts.peek(1)[0] == "num":
        ts.next()
        return Val(-int(ts.next()[1]))
    if kind == "ident":
        ts.next()
        return Var(val)
    if kind == "(":
        ts.next()
        e = parse_exp(ts)
        ts.expect(")")
        return e
    ts.fail("expected an expression")


def parse_bexp(ts: TokenStream):
    left = _bexp_term(ts)
    while ts.accept("and"):
        left = And(left, _bexp_term(ts))
    return left


def _bexp_term(ts: TokenStream):
    if ts.accept("not"):
        return Not(_bexp_term(ts))
    if ts.accept("true"):
        return BConst(True)
    if ts.accept("false"):
        return BConst(False)
    if ts.at("("):
        save = ts.i
        ts.next()
        try:
            b = parse_bexp(ts)
            ts.expect(")")
            return b
        except ParseError:
            ts.i = save
    left = parse_exp(ts)
    if not ts.at("=", "<"):
        ts.fail("expected '=' or '<' in a condition")
    op = ts.next()[1]
    return Cmp(op, left, parse_exp(ts))


# ---------------------------------------------------------------- processes

class _ProcessParser:
    def __init__(self, text: str):
        self.ts = TokenStream(text)
        self.arities: dict = {}

    def symbol(self, name: str, arity: int, declared: int | None, pos: int) -> Symbol:
        if declared is not None and declared != arity:
            raise ParseError(f"symbol {name} declared with arity {declared} but has {arity} continuation(s)",
                             self.ts.text, pos)
        prev = self.arities.setdefault(name, arity)
        if prev != arity:
            raise ParseError(f"symbol {name} used with arities {prev} and {arity}", self.ts.text, pos)
        return Symbol(name, arity)

    def process(self) -> Term:
        ts = self.ts
        left = self.restricted()
        while ts.at("|", "(+)"):
            full = ts.next()[0] == "|"
            right = self.restricted()
            left = compose_terms(left, right, full)
        return left

    def restricted(self) -> Term:
        body = self.sum()
        while self.ts.accept("\\"):
            self.ts.expect("{")
            names = []
            if not self.ts.at("}"):
                names.append(self.ts.expect("ident")[1])
                while self.ts.accept(","):
                    names.append(self.ts.expect("ident")[1])
            self.ts.expect("}")
            body = Restrict(body, frozenset(Symbol(n, self.arities.get(n, 1)) for n in names))
        return body

    def sum(self) -> Term:
        parts = [self.unary()]
        while self.ts.accept("+"):
            parts.append(self.unary())
        acc = parts[-1]
        for t in reversed(parts[:-1]):
            acc = Sum(t, acc)
        return acc

    def unary(self) -> Term:
        ts = self.ts
        if ts.accept("mu"):
            name = ts.expect("ident")[1]
            params, args = [], []
            if ts.accept("("):
                while True:
                    params.append(ts.expect("ident")[1])
                    ts.expect(":=")
                    args.append(parse_exp(ts))
                    if not ts.accept(","):
                        break
                ts.expect(")")
            ts.expect(".")
            body = self.sum()
            return Rec(name, body, tuple(params), tuple(args))
        if ts.accept("if"):
            guard = parse_bexp(ts)
            ts.expect("then")
            then = self.sum()
            ts.expect("else")
            return Cond(guard, then, self.sum())
        return self.atom()

    def atom(self) -> Term:
        ts = self.ts
        kind, val, pos = ts.peek()
        if kind == "*":
            ts.next()
            return IDLE
        if kind == "num" and val == "0":
            ts.next()
            return ZERO
        if kind == "(":
            ts.next()
            t = self.process()
            ts.expect(")")
            return t
        if kind == "par":
            return self.par_block()
        if kind == "~":
            ts.next()
            name, declared, pos = self.symbol_name()
            ts.expect("(")
            e = parse_exp(ts)
            ts.expect(")")
            conts = self.continuations()
            return OutPrefix(self.symbol(name, len(conts), declared, pos), e, conts)
        if kind == "ident":
            if val[0].isupper():
                ts.next()
                args = []
                if ts.at("(") and not _is_prefix_ahead(ts):
                    ts.next()
                    if not ts.at(")"):
                        args.append(parse_exp(ts))
                        while ts.accept(","):
                            args.append(parse_exp(ts))
                    ts.expect(")")
                return ProcVar(val, tuple(args))
            name, declared, pos = self.symbol_name()
            ts.expect("(")
            binder = ts.expect("ident")[1]
            ts.expect(")")
            conts = self.continuations()
            return InPrefix(self.symbol(name, len(conts), declared, pos), binder, conts)
        ts.fail(f"unexpected {val or 'end of input'!r}")

    def symbol_name(self) -> tuple:
        tok = self.ts.expect("ident")
        declared = None
        if self.ts.accept("/"):
            declared = int(self.ts.expect("num")[1])
        return tok[1], declared, tok[2]

    def continuations(self) -> tuple:
        ts = self.ts
        ts.expect(".")
        ts.expect("(")
        conts = [self.process()]
        while ts.accept(","):
            conts.append(self.process())
        ts.expect(")")
        return tuple(conts)

    def par_block(self) -> Term:
        ts = self.ts
        ts.expect("par")
        ts.expect("{")
        comps = {}
        if not ts.at("}"):
            while True:
                loc_tok = ts.expect("num")
                loc = int(loc_tok[1])
                if loc in comps:
                    raise ParseError(f"duplicate location {loc}", ts.text, loc_tok[2])
                ts.expect(":")
                comps[loc] = self.process()
                if not ts.accept(";"):
                    break
                if ts.at("}"):
                    break
        ts.expect("}")
        edges = []
        if ts.accept("edges"):
            ts.expect("{")
            if not ts.at("}"):
                while True:
                    ts.expect("(")
                    a = int(ts.expect("num")[1])
                    ts.expect(",")
                    b_tok = ts.expect("num")
                    ts.expect(")")
                    b = int(b_tok[1])
                    if a == b or a not in comps or b not in comps:
                        raise ParseError(f"bad edge ({a},{b})", ts.text, b_tok[2])
                    edges.append((a, b))
                    if not ts.accept(","):
                        break
            ts.expect("}")
        return GraphComp.make(Graph.make(comps.keys(), edges), comps)


def _is_prefix_ahead(ts: TokenStream) -> bool:
    # an uppercase name followed by "(x)." would be a prefix; process variables never take "."
    depth = 0
    k = 0
    while True:
        kind = ts.peek(k)[0]
        if kind == "(":
            depth += 1
        elif kind == ")":
            depth -= 1
            if depth == 0:
                return ts.peek(k + 1)[0] == "."
        elif kind == "eof":
            return False
        k += 1


def _as_comp(t: Term) -> GraphComp:
    if isinstance(t, GraphComp):
        return t
    if isinstance(t, Restrict):
        raise IllFormedError("restricted processes cannot be composed; restrict the composition instead")
    if is_rcgs(t) or isinstance(t, ProcVar):
        return GraphComp.make(Graph.make((0,)), {0: t})
    raise IllFormedError(f"cannot place {t} at a location")


def compose_terms(left: Term, right: Term, full: bool) -> GraphComp:
    """Flat ``left | right`` (``full``) or ``left (+) right`` over term-level compositions."""
    lg, rg = _as_comp(left), _as_comp(right)
    base = max(lg.graph.vertices) + 1 if lg.comps else 0
    ren = {loc: base + i for i, (loc, _) in enumerate(rg.comps)}
    comps = dict(lg.comps)
    comps.update({ren[loc]: t for loc, t in rg.comps})
    edges = set(lg.graph.edges) | {(ren[a], ren[b]) for a, b in rg.graph.edges}
    if full:
        edges |= {(a, ren[b]) for a in lg.graph.vertices for b in rg.graph.vertices}
    return GraphComp.make(Graph.make(comps.keys(), edges), comps)


def parse_process(text: str) -> Term:
    p = _ProcessParser(text)
    t = p.process()
    if not p.ts.at("eof"):
        p.ts.fail(f"unexpected {p.ts.peek()[1]!r}")
    return t


def parse_located(text: str):
    from .located import to_located
    return to_located(parse_process(text))
