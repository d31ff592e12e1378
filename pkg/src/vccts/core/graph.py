"""Finite undirected graphs over integer locations."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable


class GraphError(ValueError):
    pass


def _norm(a: int, b: int) -> tuple[int, int]:
    return (a, b) if a < b else (b, a)


@dataclass(frozen=True)
class Graph:
    """Vertices plus a symmetric, irreflexive edge relation.

    Edges are stored once, as ``(a, b)`` with ``a < b``.
    """

    vertices: frozenset
    edges: frozenset

    def __post_init__(self) -> None:
        for a, b in self.edges:
            if a == b:
                raise GraphError(f"self-loop at {a}")
            if a > b:
                raise GraphError("edges must be normalised as (low, high)")
            if a not in self.vertices or b not in self.vertices:
                raise GraphError(f"edge ({a},{b}) leaves the vertex set")

    @classmethod
    def make(cls, vertices: Iterable[int], edges: Iterable[tuple[int, int]] = ()) -> Graph:
        return cls(frozenset(vertices), frozenset(_norm(a, b) for a, b in edges))

    @cached_property
    def adjacency(self) -> dict:
        adj = {v: set() for v in self.vertices}
        for a, b in self.edges:
            adj[a].add(b)
            adj[b].add(a)
        return {v: frozenset(ns) for v, ns in adj.items()}

    def neighbors(self, v: int) -> frozenset:
        return self.adjacency[v]

    def has_edge(self, a: int, b: int) -> bool:
        return a != b and _norm(a, b) in self.edges

    def __len__(self) -> int:
        return len(self.vertices)

    def renamed(self, mapping: dict) -> Graph:
        return Graph.make((mapping[v] for v in self.vertices),
                          ((mapping[a], mapping[b]) for a, b in self.edges))


def graph_subst(g: Graph, h: Graph, p: int) -> Graph:
    """``G[H/p]``: replace vertex ``p`` by the graph ``H``.

    Every H-vertex inherits the neighbours ``p`` had in ``G``.
    """
    if p not in g.vertices:
        raise GraphError(f"vertex {p} not in graph")
    if g.vertices & h.vertices:
        raise GraphError("substituted graphs must have disjoint vertex sets")
    vertices = (g.vertices - {p}) | h.vertices
    edges = {e for e in g.edges if p not in e}
    edges |= h.edges
    for q in g.neighbors(p):
        for r in h.vertices:
            edges.add(_norm(q, r))
    return Graph(frozenset(vertices), frozenset(edges))


def oplus_graph(g: Graph, h: Graph, cross: Iterable[tuple[int, int]] = ()) -> Graph:
    """``G (+)_D H``: disjoint union with extra edges ``D`` between ``G`` and ``H``."""
    if g.vertices & h.vertices:
        raise GraphError("composed graphs must have disjoint vertex sets")
    edges = set(g.edges) | set(h.edges)
    for a, b in cross:
        if a not in g.vertices or b not in h.vertices:
            raise GraphError(f"cross edge ({a},{b}) must go from G to H")
        edges.add(_norm(a, b))
    return Graph(g.vertices | h.vertices, frozenset(edges))
