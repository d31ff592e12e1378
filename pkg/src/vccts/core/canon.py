"""Canonical location numbering.

Two located processes that differ only by a bijection of locations get the
same canonical form.  The search is individualisation-refinement: colour
refinement on (component text, optional extra colour), then branching on the
first non-singleton cell, keeping the lexicographically least certificate.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Mapping

from ..kernels import refine_colors
from .located import LocatedProcess


def canonical_form(p: LocatedProcess, extra: Mapping[int, object] | None = None) -> tuple:
    """Return ``(canonical process, mapping old location -> 0..n-1)``.

    ``extra`` attaches an additional colour to locations (it must be orderable
    via ``str``); renamings are only allowed to preserve it.
    """
    extra_t = tuple(sorted((k, str(v)) for k, v in extra.items())) if extra else ()
    return _canonical_form(p, extra_t)


def canonical_rename(p: LocatedProcess) -> LocatedProcess:
    return canonical_form(p)[0]


def canonical_key(p: LocatedProcess) -> str:
    return canonical_form(p)[0].key


@lru_cache(maxsize=1 << 17)
def _canonical_form(p: LocatedProcess, extra_t: tuple) -> tuple:
    locs = p.locations
    n = len(locs)
    if n == 0:
        return p, {}
    idx = {loc: i for i, loc in enumerate(locs)}
    extra = dict(extra_t)
    base = [(t.key, extra.get(loc, "")) for loc, t in p.comps]
    adj = [[] for _ in range(n)]
    for a, b in p.graph.edges:
        adj[idx[a]].append(idx[b])
        adj[idx[b]].append(idx[a])
    ranks = {k: i for i, k in enumerate(sorted(set(base)))}
    colors = refine_colors(adj, [ranks[k] for k in base])
    best = _search(adj, colors)
    perm = best[1]  # vertex index -> position
    mapping = {loc: perm[idx[loc]] for loc in locs}
    return p.renamed(mapping), mapping


def _certificate(adj: list, colors: list) -> tuple:
    edges = sorted((min(colors[u], colors[w]), max(colors[u], colors[w]))
                   for u in range(len(adj)) for w in adj[u] if u < w)
    return tuple(edges)


def _search(adj: list, colors: list) -> tuple:
    n = len(colors)
    if len(set(colors)) == n:
        return _certificate(adj, colors), list(colors)
    counts: dict = {}
    for c in colors:
        counts[c] = counts.get(c, 0) + 1
    target = min(c for c, k in counts.items() if k > 1)
    cell = [v for v in range(n) if colors[v] == target]
    best = None
    seen_twins = []
    for v in cell:
        nv = set(adj[v])
        if any(_twins(v, nv, u, adj) for u in seen_twins):
            continue
        seen_twins.append(v)
        split = [2 * c + (1 if c == target and u != v else 0) for u, c in enumerate(colors)]
        cand = _search(adj, refine_colors(adj, split))
        if best is None or cand[0] < best[0]:
            best = cand
    return best


def _twins(v: int, nv: set, u: int, adj: list) -> bool:
    # swapping two same-coloured vertices with equal neighbourhoods is an automorphism
    nu = set(adj[u])
    return (nv - {u}) == (nu - {v})


def is_isomorphic_bruteforce(p: LocatedProcess, q: LocatedProcess) -> bool:
    """Exhaustive bijection search, for testing small processes."""
    from itertools import permutations

    if len(p) != len(q) or p.restriction != q.restriction:
        return False
    if len(p.graph.edges) != len(q.graph.edges):
        return False
    ql = q.locations
    for perm in permutations(ql):
        m = dict(zip(p.locations, perm))
        if all(p[a].key == q[m[a]].key for a in p.locations) and p.graph.renamed(m) == q.graph:
            return True
    return False

