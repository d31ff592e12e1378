"""Process terms and the syntactic operations on them.

Terms are immutable and hashable.  A ``GraphComp`` inside a term carries its
own local location numbering; it is a template, and fresh global locations
are only allocated when it is instantiated inside a ``LocatedProcess``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Iterable, Mapping

from .expr import BExpr, Expr, Var, fv as expr_fv, subst as expr_subst
from .graph import Graph
from .symbols import STAR, Symbol


class IllFormedError(ValueError):
    """A term outside the supported canonical fragment."""


class Term:
    """Base class for process terms (hash is cached per instance)."""

    __slots__ = ()

    def __hash__(self) -> int:
        d = self.__dict__
        h = d.get("_hash")
        if h is None:
            h = hash((type(self).__name__,) + tuple(getattr(self, f) for f in self.__dataclass_fields__))
            d["_hash"] = h
        return h

    @cached_property
    def key(self) -> str:
        """Deterministic structural text, used for ordering and hashing states."""
        return format_term(self)

    @cached_property
    def fv(self) -> frozenset:
        return _fv(self)

    @cached_property
    def fpv(self) -> frozenset:
        return _fpv(self)

    def __str__(self) -> str:
        return self.key

    def __lt__(self, other: Term) -> bool:
        return self.key < other.key


@dataclass(frozen=True, eq=True)
class Idle(Term):
    __hash__ = Term.__hash__


@dataclass(frozen=True, eq=True)
class Zero(Term):
    __hash__ = Term.__hash__


@dataclass(frozen=True, eq=True)
class ProcVar(Term):
    name: str
    args: tuple = ()
    __hash__ = Term.__hash__


@dataclass(frozen=True, eq=True)
class Rec(Term):
    """``mu X(params). body`` applied to ``args`` (both empty for plain recursion)."""

    name: str
    body: Term
    params: tuple = ()
    args: tuple = ()
    __hash__ = Term.__hash__

    def __post_init__(self) -> None:
        if len(self.params) != len(self.args):
            raise IllFormedError(f"recursion {self.name}: {len(self.params)} parameters, {len(self.args)} arguments")


@dataclass(frozen=True, eq=True)
class Sum(Term):
    left: Term
    right: Term
    __hash__ = Term.__hash__


def _check_prefix(symbol: Symbol, conts: tuple) -> None:
    if symbol.co:
        raise IllFormedError("prefixes carry the plain symbol; polarity is given by the prefix kind")
    if symbol == STAR or symbol.arity < 1:
        raise IllFormedError("'*' cannot be used as a prefix")
    if len(conts) != symbol.arity:
        raise IllFormedError(f"symbol {symbol.name} has arity {symbol.arity} but {len(conts)} continuations")


@dataclass(frozen=True, eq=True)
class InPrefix(Term):
    symbol: Symbol
    binder: str
    conts: tuple
    __hash__ = Term.__hash__

    def __post_init__(self) -> None:
        _check_prefix(self.symbol, self.conts)


@dataclass(frozen=True, eq=True)
class OutPrefix(Term):
    symbol: Symbol
    expr: Expr
    conts: tuple
    __hash__ = Term.__hash__

    def __post_init__(self) -> None:
        _check_prefix(self.symbol, self.conts)


@dataclass(frozen=True, eq=True)
class GraphComp(Term):
    graph: Graph
    comps: tuple  # ((location, term), ...) sorted by location
    __hash__ = Term.__hash__

    def __post_init__(self) -> None:
        if frozenset(loc for loc, _ in self.comps) != self.graph.vertices:
            raise IllFormedError("component map domain differs from the graph's vertices")

    @classmethod
    def make(cls, graph: Graph, comps: Mapping[int, Term]) -> GraphComp:
        return cls(graph, tuple(sorted(comps.items(), key=lambda kv: kv[0])))

    @property
    def comp_map(self) -> dict:
        return dict(self.comps)


@dataclass(frozen=True, eq=True)
class Restrict(Term):
    body: Term
    symbols: frozenset
    __hash__ = Term.__hash__


@dataclass(frozen=True, eq=True)
class Cond(Term):
    guard: BExpr
    then: Term
    orelse: Term
    __hash__ = Term.__hash__


IDLE = Idle()
ZERO = Zero()

Prefix = (InPrefix, OutPrefix)


def in_prefix(symbol: Symbol, binder: str, *conts: Term) -> InPrefix:
    return InPrefix(symbol, binder, tuple(conts))


def out_prefix(symbol: Symbol, expr: Expr, *conts: Term) -> OutPrefix:
    return OutPrefix(symbol, expr, tuple(conts))


def sum_of(terms: Iterable[Term]) -> Term:
    terms = list(terms)
    if not terms:
        return ZERO
    acc = terms[-1]
    for t in reversed(terms[:-1]):
        acc = Sum(t, acc)
    return acc


def summands(t: Term) -> list:
    if isinstance(t, Sum):
        return summands(t.left) + summands(t.right)
    return [t]


# ---------------------------------------------------------------- printing

def _fmt_args(args) -> str:
    return ", ".join(str(a) for a in args)


def format_term(t: Term, ctx: str = "top") -> str:
    """Concrete syntax accepted by :mod:`vccts.parser`."""
    if isinstance(t, Idle):
        return "*"
    if isinstance(t, Zero):
        return "0"
    if isinstance(t, ProcVar):
        return f"{t.name}({_fmt_args(t.args)})" if t.args else t.name
    if isinstance(t, InPrefix):
        return f"{t.symbol.name}({t.binder}).({', '.join(format_term(c) for c in t.conts)})"
    if isinstance(t, OutPrefix):
        return f"~{t.symbol.name}({t.expr}).({', '.join(format_term(c) for c in t.conts)})"
    if isinstance(t, GraphComp):
        comps = "; ".join(f"{loc}: {format_term(c)}" for loc, c in t.comps)
        edges = ", ".join(f"({a},{b})" for a, b in sorted(t.graph.edges))
        return f"par {{ {comps} }} edges {{ {edges} }}"
    if isinstance(t, Sum):
        s = " + ".join(format_term(c, "sumarg") for c in summands(t))
        return f"({s})" if ctx in ("sumarg", "atom") else s
    if isinstance(t, Rec):
        if t.params:
            head = ", ".join(f"{p} := {a}" for p, a in zip(t.params, t.args))
            s = f"mu {t.name}({head}). {format_term(t.body, 'sum')}"
        else:
            s = f"mu {t.name}. {format_term(t.body, 'sum')}"
        return f"({s})" if ctx in ("sumarg", "atom") else s
    if isinstance(t, Cond):
        s = f"if {t.guard} then {format_term(t.then, 'sum')} else {format_term(t.orelse, 'sum')}"
        return f"({s})" if ctx in ("sumarg", "atom") else s
    if isinstance(t, Restrict):
        names = ", ".join(sorted(s.name for s in t.symbols))
        s = f"({format_term(t.body)}) \\ {{{names}}}"
        return s if ctx == "top" else f"({s})"
    raise TypeError(f"not a term: {t!r}")


# ---------------------------------------------------------------- free names

def _fv(t: Term) -> frozenset:
    if isinstance(t, (Idle, Zero)):
        return frozenset()
    if isinstance(t, ProcVar):
        return frozenset().union(*(expr_fv(a) for a in t.args))
    if isinstance(t, Rec):
        return frozenset().union(*(expr_fv(a) for a in t.args)) | (t.body.fv - frozenset(t.params))
    if isinstance(t, Sum):
        return t.left.fv | t.right.fv
    if isinstance(t, Cond):
        return expr_fv(t.guard) | t.then.fv | t.orelse.fv
    if isinstance(t, InPrefix):
        return frozenset().union(*(c.fv for c in t.conts)) - {t.binder}
    if isinstance(t, OutPrefix):
        return expr_fv(t.expr).union(*(c.fv for c in t.conts))
    if isinstance(t, GraphComp):
        return frozenset().union(*(c.fv for _, c in t.comps))
    if isinstance(t, Restrict):
        return t.body.fv
    raise TypeError(f"not a term: {t!r}")


def _fpv(t: Term) -> frozenset:
    if isinstance(t, ProcVar):
        return frozenset((t.name,))
    if isinstance(t, Rec):
        return t.body.fpv - {t.name}
    return frozenset().union(*(c.fpv for c in children(t)))


def children(t: Term) -> tuple:
    if isinstance(t, (Idle, Zero, ProcVar)):
        return ()
    if isinstance(t, Rec):
        return (t.body,)
    if isinstance(t, Sum):
        return (t.left, t.right)
    if isinstance(t, Cond):
        return (t.then, t.orelse)
    if isinstance(t, Prefix):
        return t.conts
    if isinstance(t, GraphComp):
        return tuple(c for _, c in t.comps)
    if isinstance(t, Restrict):
        return (t.body,)
    raise TypeError(f"not a term: {t!r}")


def _fresh(base: str, avoid: Iterable[str]) -> str:
    avoid = set(avoid)
    stem = base.split("_")[0] if base.rsplit("_", 1)[-1].isdigit() else base
    i = 1
    while f"{stem}_{i}" in avoid:
        i += 1
    return f"{stem}_{i}"


def sort(t: Term) -> frozenset:
    """Plain symbols a term may use, minus restricted ones."""
    if isinstance(t, (Idle, Zero, ProcVar)):
        return frozenset()
    if isinstance(t, Restrict):
        return sort(t.body) - frozenset(s.plain for s in t.symbols)
    if isinstance(t, Prefix):
        return frozenset((t.symbol,)).union(*(sort(c) for c in t.conts))
    return frozenset().union(*(sort(c) for c in children(t)))


def symbols_of(t: Term) -> frozenset:
    """Every polarised symbol occurring in a prefix of ``t``."""
    own = frozenset()
    if isinstance(t, InPrefix):
        own = frozenset((t.symbol,))
    elif isinstance(t, OutPrefix):
        own = frozenset((t.symbol.bar,))
    return own.union(*(symbols_of(c) for c in children(t)))


# ---------------------------------------------------------------- substitution

def subst_data(t: Term, mapping: Mapping[str, Expr]) -> Term:
    """Capture-avoiding simultaneous substitution ``t{e/x}``."""
    mapping = {k: v for k, v in mapping.items() if k in t.fv}
    if not mapping:
        return t
    if isinstance(t, ProcVar):
        return ProcVar(t.name, tuple(expr_subst(a, mapping) for a in t.args))
    if isinstance(t, Sum):
        return Sum(subst_data(t.left, mapping), subst_data(t.right, mapping))
    if isinstance(t, Cond):
        return Cond(expr_subst(t.guard, mapping), subst_data(t.then, mapping), subst_data(t.orelse, mapping))
    if isinstance(t, OutPrefix):
        return OutPrefix(t.symbol, expr_subst(t.expr, mapping), tuple(subst_data(c, mapping) for c in t.conts))
    if isinstance(t, GraphComp):
        return GraphComp(t.graph, tuple((loc, subst_data(c, mapping)) for loc, c in t.comps))
    if isinstance(t, Restrict):
        return Restrict(subst_data(t.body, mapping), t.symbols)
    if isinstance(t, InPrefix):
        inner = {k: v for k, v in mapping.items() if k != t.binder}
        binder, conts = _avoid_capture((t.binder,), inner, t.conts)
        return InPrefix(t.symbol, binder[0], tuple(subst_data(c, inner) for c in conts))
    if isinstance(t, Rec):
        args = tuple(expr_subst(a, mapping) for a in t.args)
        inner = {k: v for k, v in mapping.items() if k not in t.params}
        params, (body,) = _avoid_capture(t.params, inner, (t.body,))
        return Rec(t.name, subst_data(body, inner), params, args)
    raise TypeError(f"not a term: {t!r}")


def _avoid_capture(binders: tuple, mapping: Mapping[str, Expr], scope: tuple):
    """Rename ``binders`` that would capture free variables of ``mapping``'s values."""
    live = {k: v for k, v in mapping.items() if any(k in c.fv for c in scope)}
    if not live:
        return binders, scope
    incoming = frozenset().union(*(expr_fv(v) for v in live.values()))
    clash = [b for b in binders if b in incoming]
    if not clash:
        return binders, scope
    avoid = set(incoming) | set(mapping) | set(binders)
    for c in scope:
        avoid |= c.fv
    renaming = {}
    for b in clash:
        nb = _fresh(b, avoid)
        avoid.add(nb)
        renaming[b] = nb
    new_binders = tuple(renaming.get(b, b) for b in binders)
    rmap = {b: Var(nb) for b, nb in renaming.items()}
    return new_binders, tuple(subst_data(c, rmap) for c in scope)


def subst_procvar(r: Term, name: str, p: Term) -> Term:
    """``R[P/X]``.  An applied occurrence ``X(e1..en)`` becomes ``P`` re-applied to ``e1..en``;
    this requires ``P`` to be a parametric recursion."""
    if name not in r.fpv:
        return r
    p_fv = (p.body.fv - frozenset(p.params)) if isinstance(p, Rec) and p.params else p.fv
    return _subst_pv(r, name, p, p_fv, p.fpv)


def _apply_template(p: Term, args: tuple) -> Term:
    if not args:
        return p
    if not isinstance(p, Rec) or len(p.params) != len(args):
        raise IllFormedError("applied process variable needs a parametric recursion of matching arity")
    return Rec(p.name, p.body, p.params, tuple(args))


def _subst_pv(t: Term, name: str, p: Term, p_fv: frozenset, p_fpv: frozenset) -> Term:
    if name not in t.fpv:
        return t
    if isinstance(t, ProcVar):
        return _apply_template(p, t.args)
    if isinstance(t, Sum):
        return Sum(_subst_pv(t.left, name, p, p_fv, p_fpv), _subst_pv(t.right, name, p, p_fv, p_fpv))
    if isinstance(t, Cond):
        return Cond(t.guard, _subst_pv(t.then, name, p, p_fv, p_fpv), _subst_pv(t.orelse, name, p, p_fv, p_fpv))
    if isinstance(t, OutPrefix):
        return OutPrefix(t.symbol, t.expr, tuple(_subst_pv(c, name, p, p_fv, p_fpv) for c in t.conts))
    if isinstance(t, GraphComp):
        return GraphComp(t.graph, tuple((loc, _subst_pv(c, name, p, p_fv, p_fpv)) for loc, c in t.comps))
    if isinstance(t, Restrict):
        return Restrict(_subst_pv(t.body, name, p, p_fv, p_fpv), t.symbols)
    if isinstance(t, InPrefix):
        binder, conts = t.binder, t.conts
        if binder in p_fv:
            avoid = set(p_fv).union(*(c.fv for c in conts)) | {binder}
            nb = _fresh(binder, avoid)
            conts = tuple(subst_data(c, {binder: Var(nb)}) for c in conts)
            binder = nb
        return InPrefix(t.symbol, binder, tuple(_subst_pv(c, name, p, p_fv, p_fpv) for c in conts))
    if isinstance(t, Rec):
        rec_name, body, params = t.name, t.body, t.params
        if rec_name in p_fpv:
            new = rec_name + "'"
            while new in p_fpv or new in body.fpv:
                new += "'"
            body = subst_procvar(body, rec_name, _rename_target(rec_name, new, params))
            rec_name = new
        if any(x in p_fv for x in params):
            avoid = set(p_fv) | body.fv | set(params)
            ren = {}
            for x in params:
                if x in p_fv:
                    ren[x] = _fresh(x, avoid)
                    avoid.add(ren[x])
            body = subst_data(body, {x: Var(n) for x, n in ren.items()})
            params = tuple(ren.get(x, x) for x in params)
        return Rec(rec_name, _subst_pv(body, name, p, p_fv, p_fpv), params, t.args)
    raise TypeError(f"not a term: {t!r}")


def _rename_target(old: str, new: str, params: tuple) -> Term:
    # a parametric template re-applies args; a bare ProcVar suffices otherwise
    if params:
        return Rec(new, ProcVar(new, tuple(Var(x) for x in params)), params, tuple(Var(x) for x in params))
    return ProcVar(new)


def unfold(r: Rec) -> Term:
    """One unfolding ``T{args/params}[mu X.T / X]``."""
    body = r.body
    if r.params:
        body = subst_data(body, dict(zip(r.params, r.args)))
    template = Rec(r.name, r.body, r.params, tuple(Var(x) for x in r.params)) if r.params else r
    return subst_procvar(body, r.name, template)


CS_UNFOLD_LIMIT = 64


def cs(s: Term, limit: int = CS_UNFOLD_LIMIT) -> Term:
    """Unfold top-level recursion until a guarded sum appears."""
    return _cs(s, limit)


@lru_cache(maxsize=1 << 16)
def _cs(s: Term, limit: int) -> Term:
    n = 0
    while isinstance(s, Rec):
        if n >= limit:
            raise IllFormedError(f"recursion not guarded: no guarded sum after {limit} unfoldings")
        s = unfold(s)
        n += 1
    if not isinstance(s, (Idle, Zero, InPrefix, OutPrefix, Sum, Cond)):
        raise IllFormedError(f"unfolding reached a non-guarded term: {s}")
    return s


def seq(p: Term, q: Term, barriers: frozenset = frozenset()) -> Term:
    """``P |> Q``: substitute ``Q`` for every ``*`` in ``P``.

    Data binders of ``P`` deliberately scope over ``Q`` (this is how register
    values flow along a thread).  For prefixes whose symbol name is in
    ``barriers`` only the first continuation is followed.
    """
    if isinstance(p, Idle):
        return q
    if isinstance(p, (Zero, ProcVar)):
        return p
    if isinstance(p, Sum):
        return Sum(seq(p.left, q, barriers), seq(p.right, q, barriers))
    if isinstance(p, Cond):
        return Cond(p.guard, seq(p.then, q, barriers), seq(p.orelse, q, barriers))
    if isinstance(p, Rec):
        return Rec(p.name, seq(p.body, q, barriers), p.params, p.args)
    if isinstance(p, Prefix):
        if p.symbol.name in barriers:
            conts = (seq(p.conts[0], q, barriers),) + p.conts[1:]
        else:
            conts = tuple(seq(c, q, barriers) for c in p.conts)
        if isinstance(p, InPrefix):
            return InPrefix(p.symbol, p.binder, conts)
        return OutPrefix(p.symbol, p.expr, conts)
    if isinstance(p, GraphComp):
        return GraphComp(p.graph, tuple((loc, seq(c, q, barriers)) for loc, c in p.comps))
    if isinstance(p, Restrict):
        return Restrict(seq(p.body, q, barriers), p.symbols)
    raise TypeError(f"not a term: {p!r}")


# ---------------------------------------------------------------- canonicity

class Kind(enum.Enum):
    CGS = "CGS"
    RCGS = "RCGS"
    CP = "CP"
    NOT_CANONICAL = "not-canonical"


def is_cgs(t: Term) -> bool:
    if isinstance(t, (Zero, Idle)):
        return True
    if isinstance(t, Prefix):
        return all(_is_continuation(c) for c in t.conts)
    if isinstance(t, (Sum,)):
        return is_cgs(t.left) and is_cgs(t.right)
    if isinstance(t, Cond):
        return is_cgs(t.then) and is_cgs(t.orelse)
    return False


def is_rcgs(t: Term) -> bool:
    while isinstance(t, Rec):
        t = t.body
    return is_cgs(t)


def is_cp(t: Term) -> bool:
    if isinstance(t, ProcVar):
        return True
    if isinstance(t, GraphComp):
        return all(is_rcgs(c) for _, c in t.comps)
    if isinstance(t, Restrict):
        return is_cp(t.body)
    return False


def _is_continuation(t: Term) -> bool:
    # a guarded sum in continuation position stands for a one-location composition
    return is_cp(t) or is_rcgs(t)


def classify(t: Term) -> Kind:
    if is_cgs(t):
        return Kind.CGS
    if is_rcgs(t):
        return Kind.RCGS
    if is_cp(t):
        return Kind.CP
    return Kind.NOT_CANONICAL


def is_canonical(t: Term) -> Kind:
    return classify(t)
