"""Conflict analysis and relaxed-memory rewriting of compiled processes.

Two rewrite systems act on thread code: compiler reorderings of adjacent
instruction prefixes, and store-buffer (TSO) rewrites that let a write drift
past later reads or forward its value to a read of the same variable.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Iterator

from .core.canon import canonical_form, canonical_key
from .core.expr import Var, fv as expr_fv
from .core.located import LocatedProcess
from .core.symbols import Symbol
from .core.terms import (
    Cond, GraphComp, InPrefix, OutPrefix, Rec, Restrict, Sum, Term, subst_data, subst_procvar, unfold,
)
from .equivalence import DEFAULT_TAU_BOUND, bisim_existential
from .semantics import DEFAULT_DOMAIN, TAU, barbs_rcgs, freeze_env, single_steps

REORDER_RULES = ("WR", "WW", "RR", "RW", "UW1", "UW2", "UR1", "UR2", "WL1", "WL2", "RL1", "RL2")
TSO_RULES = ("R-WR", "A-WR", "IF", "REC")


# ---------------------------------------------------------------- conflicts

def normal_access(symbol: Symbol):
    """``("w", x)`` for a thread-side normal write, ``("r", x)`` for a read, else None."""
    name = symbol.name
    if "^" in name:
        return None
    if name.startswith("write_") and symbol.co:
        return ("w", name[len("write_"):])
    if name.startswith("read_") and not symbol.co:
        return ("r", name[len("read_"):])
    return None


def in_cfl(a: Symbol, b: Symbol) -> bool:
    """Membership in the conflict relation: same normal variable, at least one write."""
    ka, kb = normal_access(a), normal_access(b)
    return ka is not None and kb is not None and ka[1] == kb[1] and "w" in (ka[0], kb[0])


def cfl(variables: Iterable[str]) -> frozenset:
    """The conflict relation restricted to the given normal variables."""
    out = set()
    for x in variables:
        w, r = Symbol(f"write_{x}", 1, True), Symbol(f"read_{x}", 1)
        out |= {(r, w), (w, w), (w, r)}
    return frozenset(out)


@dataclass(frozen=True)
class ConflictPair:
    first: Symbol
    second: Symbol
    locations: tuple

    def to_json(self) -> dict:
        return {"symbols": [str(self.first), str(self.second)], "locations": list(self.locations)}


def conflicts(p: LocatedProcess, env=None) -> list:
    """Conflicting symbols enabled simultaneously at two distinct locations."""
    env = freeze_env(env)
    barbs = [(loc, sorted(barbs_rcgs(t, env))) for loc, t in p.comps]
    found = []
    for i, (l1, b1) in enumerate(barbs):
        for l2, b2 in barbs[i + 1:]:
            for a in b1:
                for b in b2:
                    if in_cfl(a, b):
                        found.append(ConflictPair(a, b, (l1, l2)))
    return found


@dataclass(frozen=True)
class ConflictReport:
    conflict_free: bool
    explored: int
    trace: tuple = ()
    pair: ConflictPair | None = None
    process: LocatedProcess | None = None

    def __bool__(self) -> bool:
        return self.conflict_free

    def to_json(self) -> dict:
        d = {"conflict_free": self.conflict_free, "explored": self.explored}
        if not self.conflict_free:
            d["trace"] = [("tau" if lb is TAU else str(lb)) for lb in self.trace]
            d["pair"] = self.pair.to_json()
            d["process"] = self.process.key
        return d


def explore(p: LocatedProcess, env=None, depth: int = 64, domain=DEFAULT_DOMAIN) -> Iterator[tuple]:
    """Breadth-first ``(process, trace)`` over single steps, deduplicated up to renaming."""
    env = freeze_env(env)
    domain = tuple(domain)
    seen = {canonical_key(p)}
    frontier = deque([(p, ())])
    while frontier:
        q, trace = frontier.popleft()
        yield q, trace
        if len(trace) >= depth:
            continue
        for s in single_steps(q, domain, env):
            k = canonical_key(s.target)
            if k not in seen:
                seen.add(k)
                frontier.append((s.target, trace + (s.label,)))


def conflict_free(p: LocatedProcess, env=None, depth: int = 64, domain=DEFAULT_DOMAIN) -> ConflictReport:
    n = 0
    for q, trace in explore(p, env, depth, domain):
        n += 1
        found = conflicts(q, env)
        if found:
            return ConflictReport(False, n, trace, found[0], q)
    return ConflictReport(True, n)


@dataclass(frozen=True)
class CrossCheck:
    conflict_free: bool
    race_free: bool
    conflict: ConflictReport
    race: object

    @property
    def agree(self) -> bool:
        return self.conflict_free == self.race_free

    def to_json(self) -> dict:
        return {"agree": self.agree, "conflict": self.conflict.to_json(), "race": self.race.to_json()}


def drf_crosscheck(config, depth: int = 64) -> CrossCheck:
    from .lang.interp import data_race_free
    from .translate import tr_config

    tr = tr_config(config)
    c = conflict_free(tr.process, tr.env, depth)
    r = data_race_free(config, depth)
    return CrossCheck(bool(c), bool(r), c, r)


# ---------------------------------------------------------------- instruction classes

def _is_prefix(t: Term) -> bool:
    return isinstance(t, (InPrefix, OutPrefix))


def _unary(t: Term) -> bool:
    return _is_prefix(t) and len(t.conts) == 1


def _name_after(symbol: Symbol, stem: str) -> str | None:
    return symbol.name[len(stem):] if symbol.name.startswith(stem) else None


def _normal_write(t: Term):
    if isinstance(t, OutPrefix) and "^" not in t.symbol.name:
        return _name_after(t.symbol, "write_")
    return None


def _normal_read(t: Term):
    if isinstance(t, InPrefix) and "^" not in t.symbol.name:
        return _name_after(t.symbol, "read_")
    return None


def _unlock(t: Term) -> bool:
    return isinstance(t, OutPrefix) and t.symbol.name.startswith("down_")


def _lock(t: Term) -> bool:
    return isinstance(t, OutPrefix) and t.symbol.name.startswith("up_")


def _release_store(t: Term) -> bool:
    return isinstance(t, OutPrefix) and t.symbol.name.startswith("write_") and t.symbol.name.endswith("^rel")


def _acquire_load(t: Term) -> bool:
    n = t.symbol.name
    return isinstance(t, InPrefix) and n.startswith("read_") and (n.endswith("^acq") or n.endswith("^sc"))


def _with_cont(t: Term, cont: Term) -> Term:
    if isinstance(t, InPrefix):
        return InPrefix(t.symbol, t.binder, (cont,))
    return OutPrefix(t.symbol, t.expr, (cont,))


def _reorder_rule(a: Term, b: Term, strict: bool):
    """Name of the base reordering rule that swaps ``a`` before ``b``, or None."""
    wa, ra, wb, rb = _normal_write(a), _normal_read(a), _normal_write(b), _normal_read(b)
    if wa is not None and rb is not None:
        if not strict or (b.binder not in expr_fv(a.expr) and wa != rb):
            return "WR"
    if wa is not None and wb is not None:
        if not strict or wa != wb:
            return "WW"
    if ra is not None and rb is not None:
        if not strict or a.binder != b.binder:
            return "RR"
    if ra is not None and wb is not None:
        if not strict or (a.binder not in expr_fv(b.expr) and ra != wb):
            return "RW"
    if _unlock(a) and wb is not None:
        return "UW1"
    if _unlock(a) and rb is not None:
        return "UR1"
    if _release_store(a) and wb is not None:
        return "UW2"
    if _release_store(a) and rb is not None:
        if not strict or b.binder not in expr_fv(a.expr):
            return "UR2"
    if wa is not None and _lock(b):
        return "WL1"
    if ra is not None and _lock(b):
        return "RL1"
    if wa is not None and _acquire_load(b):
        if not strict or b.binder not in expr_fv(a.expr):
            return "WL2"
    if ra is not None and _acquire_load(b):
        if not strict or a.binder != b.binder:
            return "RL2"
    return None


def _reorder_base(t: Term, strict: bool) -> Iterator[tuple]:
    if _unary(t) and _unary(t.conts[0]):
        a, b = t, t.conts[0]
        rule = _reorder_rule(a, b, strict)
        if rule is not None:
            yield rule, _with_cont(b, _with_cont(a, b.conts[0]))


def _tso_base(t: Term, strict: bool) -> Iterator[tuple]:
    x = _normal_write(t)
    if x is None or not _unary(t):
        return
    nxt = t.conts[0]
    y = _normal_read(nxt)
    if y is not None and _unary(nxt):
        if not strict or (nxt.binder not in expr_fv(t.expr) and x != y):
            yield "R-WR", _with_cont(nxt, _with_cont(t, nxt.conts[0]))
        if x == y:
            yield "A-WR", _with_cont(t, subst_data(nxt.conts[0], {nxt.binder: t.expr}))
    if isinstance(nxt, Cond):
        yield "IF", Cond(nxt.guard, _with_cont(t, nxt.then), _with_cont(t, nxt.orelse))
    if isinstance(nxt, Rec):
        yield "REC", _with_cont(t, unfold(nxt))


# ---------------------------------------------------------------- traversal

def _rewrites(t: Term, base, strict: bool, path: tuple = ()) -> Iterator[tuple]:
    """``(rule, path, t')`` for one rewrite anywhere in ``t``, innermost first."""
    if isinstance(t, Sum):
        for rule, pos, new in _rewrites(t.left, base, strict, path + ("l",)):
            yield rule, pos, Sum(new, t.right)
        for rule, pos, new in _rewrites(t.right, base, strict, path + ("r",)):
            yield rule, pos, Sum(t.left, new)
    elif isinstance(t, Cond):
        for rule, pos, new in _rewrites(t.then, base, strict, path + ("then",)):
            yield rule, pos, Cond(t.guard, new, t.orelse)
        for rule, pos, new in _rewrites(t.orelse, base, strict, path + ("else",)):
            yield rule, pos, Cond(t.guard, t.then, new)
    elif isinstance(t, (InPrefix, OutPrefix)):
        for i, c in enumerate(t.conts):
            for rule, pos, new in _rewrites(c, base, strict, path + (f"c{i}",)):
                conts = t.conts[:i] + (new,) + t.conts[i + 1:]
                if isinstance(t, InPrefix):
                    yield rule, pos, InPrefix(t.symbol, t.binder, conts)
                else:
                    yield rule, pos, OutPrefix(t.symbol, t.expr, conts)
    elif isinstance(t, Rec):
        # rewrite one copy of the body, then unfold against the original template
        template = Rec(t.name, t.body, t.params, tuple(Var(x) for x in t.params)) if t.params else t
        for rule, pos, new in _rewrites(t.body, base, strict, path + ("mu",)):
            body = subst_data(new, dict(zip(t.params, t.args))) if t.params else new
            yield rule, pos, subst_procvar(body, t.name, template)
    elif isinstance(t, Restrict):
        for rule, pos, new in _rewrites(t.body, base, strict, path):
            yield rule, pos, Restrict(new, t.symbols)
    elif isinstance(t, GraphComp):
        for loc, c in t.comps:
            for rule, pos, new in _rewrites(c, base, strict, path + (f"@{loc}",)):
                yield rule, pos, GraphComp(t.graph, tuple((k, new if k == loc else v) for k, v in t.comps))
    for rule, new in base(t, strict):
        yield rule, path, new


def _candidates(p: LocatedProcess, base, strict: bool) -> list:
    out = []
    for loc, t in p.comps:
        for rule, pos, new in _rewrites(t, base, strict):
            try:
                q = p.with_comps({loc: new})
            except ValueError:
                continue  # the rewrite left a non-canonical component
            out.append((rule, (loc,) + pos, q))
    return out


def reorder_candidates(p: LocatedProcess, drop_side_conditions: bool = False) -> list:
    """Single applications of the reordering rules: ``(rule, position, P')``."""
    return _candidates(p, _reorder_base, not drop_side_conditions)


def tso_candidates(p: LocatedProcess, drop_side_conditions: bool = False) -> list:
    """Single applications of the store-buffer rules: ``(rule, position, P')``."""
    return _candidates(p, _tso_base, not drop_side_conditions)


def format_position(pos: tuple) -> str:
    return ".".join(str(x) for x in pos)


@dataclass(frozen=True)
class ClosureMember:
    process: LocatedProcess
    path: tuple = ()  # ((rule, position), ...)

    def to_json(self) -> dict:
        return {"process": self.process.key,
                "path": [{"rule": r, "position": format_position(pos)} for r, pos in self.path]}


def closure(p: LocatedProcess, kind: str = "reorder", bound: int = 4,
            drop_side_conditions: bool = False) -> list:
    """Processes reachable by at most ``bound`` rewrites, one per renaming class,
    in breadth-first order (the original first)."""
    if kind not in ("reorder", "tso"):
        raise ValueError("kind must be 'reorder' or 'tso'")
    step = reorder_candidates if kind == "reorder" else tso_candidates
    start = ClosureMember(p)
    seen = {canonical_key(p)}
    out = [start]
    frontier = [start]
    for _ in range(bound):
        nxt = []
        for m in frontier:
            for rule, pos, q in step(m.process, drop_side_conditions):
                k = canonical_key(q)
                if k not in seen:
                    seen.add(k)
                    member = ClosureMember(q, m.path + ((rule, pos),))
                    out.append(member)
                    nxt.append(member)
        if not nxt:
            break
        frontier = nxt
    return out


# ---------------------------------------------------------------- soundness and behaviours

@dataclass
class SoundnessReport:
    kind: str
    bound: int
    precondition: bool
    members: int = 0
    violations: list = field(default_factory=list)
    diagnosis: str = ""

    @property
    def ok(self) -> bool:
        return self.precondition and not self.violations

    def __bool__(self) -> bool:
        return self.ok

    def to_json(self) -> dict:
        return {"kind": self.kind, "bound": self.bound, "precondition": self.precondition,
                "members": self.members, "violations": self.violations, "diagnosis": self.diagnosis,
                "ok": self.ok}


def transform_soundness_check(p: LocatedProcess, env=None, kind: str = "reorder", bound: int = 4,
                              depth: int = 8, multiset_cap: int = 4, domain=DEFAULT_DOMAIN,
                              explore_depth: int = 64, drop_side_conditions: bool = False,
                              tau_bound: int = DEFAULT_TAU_BOUND) -> SoundnessReport:
    """Every closure member must stay conflict-free and must not be distinguished
    from the original by the bounded bisimulation game."""
    env = freeze_env(env)
    base = conflict_free(p, env, explore_depth, domain)
    report = SoundnessReport(kind, bound, bool(base))
    if not base:
        report.diagnosis = "original process is not conflict-free: " + str(base.pair.to_json())
        return report
    members = closure(p, kind, bound, drop_side_conditions)
    report.members = len(members)
    for m in members[1:]:
        cf = conflict_free(m.process, env, explore_depth, domain)
        if not cf:
            report.violations.append({"kind": "conflict", **m.to_json(), "pair": cf.pair.to_json()})
            continue
        v = bisim_existential(p, m.process, depth=depth, multiset_cap=multiset_cap, domain=domain,
                              env=env, tau_bound=tau_bound)
        if not v:
            report.violations.append({"kind": "distinguished", **m.to_json(), "witness": list(v.witness)})
    return report


def _is_out(label) -> bool:
    return label is not TAU and label.action.symbol.name == "out"


def behaviors(p: LocatedProcess, env=None, depth: int = 10, domain=DEFAULT_DOMAIN) -> frozenset:
    """Printed-value sequences of maximal runs (stopped or cut at ``depth``)."""
    env = freeze_env(env)
    domain = tuple(domain)
    memo: dict = {}

    def go(q: LocatedProcess, d: int) -> frozenset:
        cq = canonical_form(q)[0]
        key = (cq.key, d)
        if key in memo:
            return memo[key]
        steps = single_steps(cq, domain, env) if d > 0 else []
        if not steps:
            res = frozenset({()})
        else:
            acc = set()
            for s in steps:
                head = (s.label.action.value,) if _is_out(s.label) else ()
                acc.update(head + t for t in go(s.target, d - 1))
            res = frozenset(acc)
        memo[key] = res
        return res

    return go(p, depth)


def closure_behaviors(p: LocatedProcess, env=None, kind: str = "tso", bound: int = 4, depth: int = 10,
                      domain=DEFAULT_DOMAIN) -> frozenset:
    out = set()
    for m in closure(p, kind, bound):
        out |= behaviors(m.process, env, depth, domain)
    return frozenset(out)


__all__ = [
    "REORDER_RULES", "TSO_RULES", "normal_access", "in_cfl", "cfl", "ConflictPair", "conflicts",
    "ConflictReport", "explore", "conflict_free", "CrossCheck", "drf_crosscheck", "reorder_candidates",
    "tso_candidates", "format_position", "ClosureMember", "closure", "SoundnessReport",
    "transform_soundness_check", "behaviors", "closure_behaviors",
]
