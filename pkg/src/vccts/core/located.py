"""Executable processes: a graph of locations, one guarded sum per location,
and an optional top-level restriction."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping

from .graph import Graph, GraphError, graph_subst, oplus_graph
from .symbols import Symbol
from .terms import GraphComp, IllFormedError, Restrict, Term, is_rcgs, sort


@dataclass(frozen=True)
class LocatedProcess:
    graph: Graph
    comps: tuple  # ((location, term), ...) sorted by location
    restriction: frozenset = frozenset()

    def __post_init__(self) -> None:
        if frozenset(loc for loc, _ in self.comps) != self.graph.vertices:
            raise IllFormedError("component map domain differs from the graph's vertices")
        for loc, t in self.comps:
            if not is_rcgs(t):
                raise IllFormedError(f"component at {loc} is not a recursive canonical guarded sum: {t}")
        for s in self.restriction:
            if s.co:
                raise IllFormedError("restriction sets hold plain symbols")

    @classmethod
    def make(cls, graph: Graph, comps: Mapping[int, Term], restriction: Iterable[Symbol] = ()) -> LocatedProcess:
        return cls(graph, tuple(sorted(comps.items(), key=lambda kv: kv[0])),
                   frozenset(s.plain for s in restriction))

    @classmethod
    def empty(cls) -> LocatedProcess:
        return cls(Graph.make(()), ())

    def __hash__(self) -> int:
        d = self.__dict__
        h = d.get("_hash")
        if h is None:
            h = hash((self.graph, self.comps, self.restriction))
            d["_hash"] = h
        return h

    @cached_property
    def comp_map(self) -> dict:
        return dict(self.comps)

    def __getitem__(self, loc: int) -> Term:
        return self.comp_map[loc]

    def __len__(self) -> int:
        return len(self.comps)

    @property
    def locations(self) -> tuple:
        return tuple(loc for loc, _ in self.comps)

    @cached_property
    def next_location(self) -> int:
        return max(self.graph.vertices) + 1 if self.comps else 0

    @cached_property
    def fv(self) -> frozenset:
        return frozenset().union(*(t.fv for _, t in self.comps))

    def to_term(self) -> Term:
        body = GraphComp(self.graph, self.comps)
        return Restrict(body, self.restriction) if self.restriction else body

    @cached_property
    def key(self) -> str:
        from .terms import format_term
        return format_term(self.to_term())

    def __str__(self) -> str:
        return self.key

    def __repr__(self) -> str:
        return f"LocatedProcess({self.key!r})"

    def without_restriction(self) -> LocatedProcess:
        return LocatedProcess(self.graph, self.comps)

    def restricted(self, symbols: Iterable[Symbol]) -> LocatedProcess:
        return LocatedProcess(self.graph, self.comps, self.restriction | frozenset(s.plain for s in symbols))

    def renamed(self, mapping: Mapping[int, int]) -> LocatedProcess:
        comps = {mapping[loc]: t for loc, t in self.comps}
        return LocatedProcess.make(self.graph.renamed(mapping), comps, self.restriction)

    def with_comps(self, updates: Mapping[int, Term]) -> LocatedProcess:
        comps = dict(self.comps)
        comps.update(updates)
        return LocatedProcess.make(self.graph, comps, self.restriction)


def fragment(cont: Term, start: int) -> tuple:
    """Instantiate a prefix continuation at fresh locations ``start, start+1, ...``.

    Returns ``(locations, comps, edges)``.  A guarded sum continuation counts as
    a one-location composition.
    """
    if isinstance(cont, GraphComp):
        locs = [loc for loc, _ in cont.comps]
        ren = {old: start + i for i, old in enumerate(locs)}
        comps = [(ren[old], t) for old, t in cont.comps]
        edges = [(ren[a], ren[b]) for a, b in cont.graph.edges]
        return tuple(ren[old] for old in locs), comps, edges
    if isinstance(cont, Restrict):
        raise IllFormedError("restriction under a prefix is not supported")
    if is_rcgs(cont):
        return (start,), [(start, cont)], []
    raise IllFormedError(f"continuation is not canonical or not closed: {cont}")


def to_located(t: Term) -> LocatedProcess:
    """Interpret a canonical process (or a guarded sum) as an executable process."""
    restriction = frozenset()
    while isinstance(t, Restrict):
        restriction |= frozenset(s.plain for s in t.symbols)
        t = t.body
    if isinstance(t, GraphComp):
        return LocatedProcess(t.graph, t.comps, restriction)
    if is_rcgs(t):
        return LocatedProcess(Graph.make((0,)), ((0, t),), restriction)
    raise IllFormedError(f"not an executable canonical process: {t}")


def located_from(comps: Mapping[int, Term], edges: Iterable[tuple[int, int]] = (),
                 restriction: Iterable[Symbol] = ()) -> LocatedProcess:
    return LocatedProcess.make(Graph.make(comps.keys(), edges), comps, restriction)


def singleton(t: Term, loc: int = 0) -> LocatedProcess:
    return located_from({loc: t})


def _require_plain(*ps: LocatedProcess) -> None:
    for p in ps:
        if p.restriction:
            raise IllFormedError("composition operands must be restriction-free; restrict afterwards")


def oplus(p: LocatedProcess, q: LocatedProcess, cross: Iterable[tuple[int, int]] = ()) -> LocatedProcess:
    """``P (+)_D Q``."""
    _require_plain(p, q)
    if set(p.graph.vertices) & set(q.graph.vertices):
        raise GraphError("composed processes must have disjoint location sets")
    g = oplus_graph(p.graph, q.graph, cross)
    return LocatedProcess.make(g, {**p.comp_map, **q.comp_map})


def par(p: LocatedProcess, q: LocatedProcess) -> LocatedProcess:
    """``P | Q``: every location of P linked to every location of Q."""
    return oplus(p, q, [(a, b) for a in p.graph.vertices for b in q.graph.vertices])


def shifted(p: LocatedProcess, offset: int) -> LocatedProcess:
    return p.renamed({loc: loc + offset for loc in p.locations})


def subst_loc(p: LocatedProcess, q: LocatedProcess, loc: int) -> LocatedProcess:
    """``P[Q/p]``."""
    _require_plain(q)
    g = graph_subst(p.graph, q.graph, loc)
    comps = {k: v for k, v in p.comps if k != loc}
    comps.update(q.comp_map)
    return LocatedProcess.make(g, comps, p.restriction)


def located_sort(p: LocatedProcess) -> frozenset:
    return sort(p.to_term())
