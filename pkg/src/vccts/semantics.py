"""Transitions of located processes: internal reduction, barbs, single-label
and multi-label steps with residual maps, serialisation of multi-steps.

Everything works on the flat ``LocatedProcess`` form.  Values of free data
variables come from a frozen environment; inputs substitute their value into
continuations.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import permutations
from typing import Iterable, Mapping, Sequence

from .core.canon import canonical_form
from .core.expr import Val, eval_bexp, eval_exp
from .core.graph import Graph
from .core.located import LocatedProcess, fragment
from .core.symbols import Symbol
from .core.terms import Cond, Idle, InPrefix, OutPrefix, Sum, Term, Zero, cs, subst_data
from .kernels import max_bipartite_matching

DEFAULT_DOMAIN = (0, 1, 2)
DEFAULT_MULTISET_CAP = 4


def freeze_env(env: Mapping[str, int] | Iterable | None) -> tuple:
    if not env:
        return ()
    items = env.items() if isinstance(env, Mapping) else env
    return tuple(sorted(items))


# ---------------------------------------------------------------- labels

@dataclass(frozen=True, order=True)
class Action:
    symbol: Symbol  # polarised
    value: int

    @property
    def bar(self) -> Action:
        return Action(self.symbol.bar, self.value)

    def __str__(self) -> str:
        return f"{self.symbol}{self.value}"


class _Tau:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "TAU"

    __str__ = __repr__

    def sort_key(self) -> tuple:
        return (1,)

    def to_json(self) -> dict:
        return {"kind": "tau"}


TAU = _Tau()


@dataclass(frozen=True)
class LocLabel:
    """``p : alpha . (L1, ..., Ln)``."""

    loc: int
    action: Action
    sets: tuple  # tuple of frozensets

    def sort_key(self) -> tuple:
        return (0, self.loc, self.action.symbol.name, self.action.symbol.co, self.action.value,
                tuple(tuple(sorted(s)) for s in self.sets))

    def __str__(self) -> str:
        sets = ", ".join("{" + ",".join(map(str, sorted(s))) + "}" for s in self.sets)
        return f"{self.loc}:{self.action}.({sets})"

    def to_json(self) -> dict:
        return {"kind": "obs", "loc": self.loc, "symbol": self.action.symbol.name,
                "co": self.action.symbol.co, "value": self.action.value,
                "sets": [sorted(s) for s in self.sets]}


Label = object  # TAU or LocLabel


def is_tau(label) -> bool:
    return label is TAU


def sort_labels(labels: Iterable) -> tuple:
    return tuple(sorted(labels, key=lambda d: d.sort_key()))


def label_text(labels: Sequence) -> str:
    return "{" + ", ".join(str(d) for d in labels) + "}"


def act_of(label):
    """``Act(delta)``: the action of a located label, or TAU."""
    return TAU if label is TAU else label.action


def punrel(labels: Iterable) -> bool:
    """Located labels at distinct locations carry distinct symbols; TAU is ignored."""
    located = [d for d in labels if d is not TAU]
    for i, a in enumerate(located):
        for b in located[i + 1:]:
            if a.loc != b.loc and a.action.symbol == b.action.symbol:
                return False
    return True


# ---------------------------------------------------------------- residuals

@dataclass(frozen=True)
class Residual:
    """Total map from successor locations to predecessor locations."""

    pairs: tuple  # sorted ((new, old), ...)

    @classmethod
    def of(cls, mapping: Mapping[int, int]) -> Residual:
        return cls(tuple(sorted(mapping.items())))

    @classmethod
    def identity(cls, locs: Iterable[int]) -> Residual:
        return cls(tuple((x, x) for x in sorted(locs)))

    @property
    def mapping(self) -> dict:
        d = self.__dict__.get("_map")
        if d is None:
            d = dict(self.pairs)
            self.__dict__["_map"] = d
        return d

    def __call__(self, loc: int) -> int:
        return self.mapping[loc]

    def after(self, later: Residual) -> Residual:
        """``self o later``: first map back through ``later``, then through ``self``."""
        m = self.mapping
        return Residual(tuple((x, m[y]) for x, y in later.pairs))

    def renamed(self, new_names: Mapping[int, int], old_names: Mapping[int, int] | None = None) -> Residual:
        old_names = old_names or {}
        return Residual.of({new_names[x]: old_names.get(y, y) for x, y in self.pairs})

    def domain(self) -> frozenset:
        return frozenset(x for x, _ in self.pairs)


@dataclass(frozen=True)
class Step:
    label: object
    residual: Residual
    target: LocatedProcess


@dataclass(frozen=True)
class MultiStep:
    labels: tuple  # sorted; observable labels first, then TAUs
    residual: Residual
    target: LocatedProcess
    events: tuple = field(default=(), compare=False)

    @property
    def observables(self) -> tuple:
        return tuple(d for d in self.labels if d is not TAU)

    @property
    def taus(self) -> int:
        return sum(1 for d in self.labels if d is TAU)

    @property
    def size(self) -> int:
        return len(self.labels)


# ---------------------------------------------------------------- active prefixes

def active_prefixes(s: Term, env: tuple = ()) -> tuple:
    """Enabled prefix summands of ``cs(s)``, following conditionals by their guard."""
    return _active(s, env)


@lru_cache(maxsize=1 << 16)
def _active(s: Term, env: tuple) -> tuple:
    out = []
    _collect(cs(s), dict(env), out)
    return tuple(out)


def _collect(t: Term, env: dict, out: list) -> None:
    if isinstance(t, Sum):
        _collect(t.left, env, out)
        _collect(t.right, env, out)
    elif isinstance(t, Cond):
        _collect(t.then if eval_bexp(t.guard, env) else t.orelse, env, out)
    elif isinstance(t, (InPrefix, OutPrefix)):
        out.append(t)
    elif isinstance(t, (Idle, Zero)):
        pass
    else:  # recursion inside a branch
        _collect(cs(t), env, out)


def barbs_rcgs(s: Term, env: Mapping | tuple | None = None) -> frozenset:
    """Polarised symbols a guarded sum can immediately exhibit."""
    env = freeze_env(env)
    return frozenset(t.symbol if isinstance(t, InPrefix) else t.symbol.bar
                     for t in active_prefixes(s, env))


def has_barb(p: LocatedProcess, barbs: Iterable[Symbol], env: Mapping | tuple | None = None) -> bool:
    """Whether the requested symbols can be exhibited at pairwise distinct locations.

    ``barbs`` may repeat a symbol (a multiset request).
    """
    request = list(barbs)
    if any(b.plain in p.restriction for b in request):
        return False
    if len(request) > len(p):
        return False
    env = freeze_env(env)
    locs = p.locations
    have = [barbs_rcgs(p[loc], env) for loc in locs]
    left_adj = [[j for j, hs in enumerate(have) if b in hs] for b in request]
    return max_bipartite_matching(left_adj, len(locs)) == len(request)


def has_barb_bruteforce(p: LocatedProcess, barbs: Iterable[Symbol], env: Mapping | tuple | None = None) -> bool:
    """Exhaustive injective assignment of requested symbols to locations, for testing."""
    from itertools import permutations

    request = list(barbs)
    per = process_barbs(p, env)
    return any(all(b in per[loc] for b, loc in zip(request, assign))
               for assign in permutations(p.locations, len(request)))


def process_barbs(p: LocatedProcess, env: Mapping | tuple | None = None) -> dict:
    """Per-location barbs, restricted symbols removed."""
    env = freeze_env(env)
    return {loc: frozenset(b for b in barbs_rcgs(t, env) if b.plain not in p.restriction)
            for loc, t in p.comps}


# ---------------------------------------------------------------- firing

@dataclass(frozen=True)
class Firing:
    loc: int
    index: int
    action: Action
    conts: tuple


def _eval_closed(e, env: dict) -> int:
    return eval_exp(e, env)


@lru_cache(maxsize=1 << 16)
def _location_prefixes(p: LocatedProcess, env: tuple) -> dict:
    return {loc: active_prefixes(t, env) for loc, t in p.comps}


def observable_firings(p: LocatedProcess, domain: tuple, env: tuple) -> list:
    """Input firings (one per domain value) and output firings, unrestricted only."""
    envd = dict(env)
    out = []
    for loc, prefixes in _location_prefixes(p, env).items():
        for idx, pre in enumerate(prefixes):
            if pre.symbol in p.restriction:
                continue
            if isinstance(pre, OutPrefix):
                v = _eval_closed(pre.expr, envd)
                out.append(Firing(loc, idx, Action(pre.symbol.bar, v), pre.conts))
            else:
                for v in domain:
                    conts = tuple(subst_data(c, {pre.binder: Val(v)}) for c in pre.conts)
                    out.append(Firing(loc, idx, Action(pre.symbol, v), conts))
    out.sort(key=lambda f: (f.loc, f.index, f.action.value))
    return out


def reduction_pairs(p: LocatedProcess, env: tuple) -> list:
    """``(input firing, output firing)`` for every edge and matching prefix pair."""
    envd = dict(env)
    prefs = _location_prefixes(p, env)
    out = []
    for a, b in sorted(p.graph.edges):
        for x, y in ((a, b), (b, a)):
            for i, pin in enumerate(prefs[x]):
                if not isinstance(pin, InPrefix):
                    continue
                for j, pout in enumerate(prefs[y]):
                    if isinstance(pout, OutPrefix) and pout.symbol == pin.symbol:
                        v = _eval_closed(pout.expr, envd)
                        conts = tuple(subst_data(c, {pin.binder: Val(v)}) for c in pin.conts)
                        out.append((Firing(x, i, Action(pin.symbol, v), conts),
                                    Firing(y, j, Action(pout.symbol.bar, v), pout.conts)))
    out.sort(key=lambda pr: (min(pr[0].loc, pr[1].loc), max(pr[0].loc, pr[1].loc),
                             pr[0].loc, pr[0].index, pr[1].index))
    return out


def apply_firings(p: LocatedProcess, firings: Sequence[Firing], pairs: Sequence[tuple] = ()) -> tuple:
    """Replace every fired location by its continuations.

    ``pairs`` lists ``(p, q)`` location pairs that communicated; their fragments
    are linked only branch-to-branch.  Returns ``(target, residual, sets)`` where
    ``sets[loc]`` is the vector of fresh location sets of a fired location.
    """
    fired = {f.loc: f for f in firings}
    if len(fired) != len(firings):
        raise AssertionError("a location fired twice in one step")
    nxt = p.next_location
    comps = {loc: t for loc, t in p.comps if loc not in fired}
    residual = {loc: loc for loc in comps}
    edges = set()
    sets = {}
    for loc in sorted(fired):
        vec = []
        for cont in fired[loc].conts:
            locs, frag_comps, frag_edges = fragment(cont, nxt)
            nxt += len(locs)
            vec.append(frozenset(locs))
            comps.update(frag_comps)
            edges.update(frag_edges)
            for x in locs:
                residual[x] = loc
        sets[loc] = tuple(vec)
    paired = {frozenset(pq) for pq in pairs}

    def frag(x: int):
        return frozenset().union(*sets[x]) if x in sets else (x,)

    for a, b in p.graph.edges:
        if frozenset((a, b)) in paired:
            for la, lb in zip(sets[a], sets[b]):
                edges.update((u, w) for u in la for w in lb)
        else:
            edges.update((u, w) for u in frag(a) for w in frag(b))
    target = LocatedProcess.make(Graph.make(comps.keys(), edges), comps, p.restriction)
    return target, Residual.of(residual), sets


# ---------------------------------------------------------------- single steps

def reduce_steps(p: LocatedProcess, env: Mapping | tuple | None = None) -> list:
    """All internal reductions as ``(target, residual)``."""
    env = freeze_env(env)
    return [(s.target, s.residual) for s in _tau_steps(p, env)]


@lru_cache(maxsize=1 << 16)
def _tau_steps(p: LocatedProcess, env: tuple) -> tuple:
    out = []
    for fin, fout in reduction_pairs(p, env):
        target, res, _ = apply_firings(p, [fin, fout], [(fin.loc, fout.loc)])
        out.append(Step(TAU, res, target))
    return tuple(out)


def single_steps(p: LocatedProcess, domain: Iterable[int] = DEFAULT_DOMAIN,
                 env: Mapping | tuple | None = None) -> list:
    """Observable steps (Input/Output, restriction applied) followed by TAU steps."""
    env = freeze_env(env)
    return list(_single_steps(p, tuple(domain), env))


@lru_cache(maxsize=1 << 16)
def _single_steps(p: LocatedProcess, domain: tuple, env: tuple) -> tuple:
    out = []
    for f in observable_firings(p, domain, env):
        target, res, sets = apply_firings(p, [f])
        out.append(Step(LocLabel(f.loc, f.action, sets[f.loc]), res, target))
    out.extend(_tau_steps(p, env))
    return tuple(out)


def observable_steps(p: LocatedProcess, domain: Iterable[int] = DEFAULT_DOMAIN,
                     env: Mapping | tuple | None = None) -> list:
    return [s for s in single_steps(p, domain, env) if s.label is not TAU]


# ---------------------------------------------------------------- multi steps

def multi_steps(p: LocatedProcess, domain: Iterable[int] = DEFAULT_DOMAIN,
                max_size: int = DEFAULT_MULTISET_CAP, env: Mapping | tuple | None = None,
                observable_only: bool = False) -> list:
    """Simultaneous firings at pairwise distinct locations.

    Each event is either one observable firing or one reduction (two adjacent
    locations, contributing a TAU).  Symbols of all underlying labels must be
    pairwise distinct, and adjacent complementary observable firings are not
    allowed to stay unpaired (they appear as a reduction instead).
    """
    if max_size < 1:
        raise ValueError("max_size must be at least 1")
    env = freeze_env(env)
    return list(_multi_steps(p, tuple(domain), max_size, env, observable_only))


@lru_cache(maxsize=1 << 15)
def _multi_steps(p: LocatedProcess, domain: tuple, max_size: int, env: tuple,
                 observable_only: bool) -> tuple:
    events = [("obs", f) for f in observable_firings(p, domain, env)]
    if not observable_only:
        events += [("red", pr) for pr in reduction_pairs(p, env)]
    graph = p.graph
    results = []

    def locs_of(ev):
        return (ev[1].loc,) if ev[0] == "obs" else (ev[1][0].loc, ev[1][1].loc)

    def syms_of(ev):
        if ev[0] == "obs":
            return (ev[1].action.symbol,)
        return (ev[1][0].action.symbol, ev[1][1].action.symbol)

    def compatible(ev, used_locs, used_syms, chosen):
        if any(x in used_locs for x in locs_of(ev)):
            return False
        if any(s in used_syms for s in syms_of(ev)):
            return False
        if ev[0] == "obs":
            f = ev[1]
            for other in chosen:
                if other[0] != "obs":
                    continue
                g = other[1]
                if g.action == f.action.bar and graph.has_edge(f.loc, g.loc):
                    return False
        return True

    def emit(chosen):
        firings, pairs, labels = [], [], []
        for kind, ev in chosen:
            if kind == "obs":
                firings.append(ev)
            else:
                firings.extend(ev)
                pairs.append((ev[0].loc, ev[1].loc))
        target, res, sets = apply_firings(p, firings, pairs)
        for kind, ev in chosen:
            labels.append(LocLabel(ev.loc, ev.action, sets[ev.loc]) if kind == "obs" else TAU)
        results.append(MultiStep(sort_labels(labels), res, target, tuple(chosen)))

    def extend(start, chosen, used_locs, used_syms):
        if chosen:
            emit(chosen)
        if len(chosen) == max_size:
            return
        for i in range(start, len(events)):
            ev = events[i]
            if compatible(ev, used_locs, used_syms, chosen):
                extend(i + 1, chosen + [ev], used_locs | set(locs_of(ev)), used_syms | set(syms_of(ev)))

    extend(0, [], frozenset(), frozenset())
    return tuple(results)


# ---------------------------------------------------------------- closure and serialisation

def tau_star(p: LocatedProcess, depth: int, env: Mapping | tuple | None = None) -> list:
    """Targets reachable with at most ``depth`` reductions, with composed residuals.

    Results are deduplicated up to location renaming that preserves the residual.
    """
    env = freeze_env(env)
    return list(_tau_star(p, depth, env))


@lru_cache(maxsize=1 << 15)
def _tau_star(p: LocatedProcess, depth: int, env: tuple) -> tuple:
    start = (p, Residual.identity(p.locations))
    seen = {_residual_key(*start)}
    out = [start]
    frontier = [start]
    for _ in range(depth):
        nxt = []
        for q, rho in frontier:
            for step in _tau_steps(q, env):
                item = (step.target, rho.after(step.residual))
                k = _residual_key(*item)
                if k not in seen:
                    seen.add(k)
                    out.append(item)
                    nxt.append(item)
        if not nxt:
            break
        frontier = nxt
    return tuple(out)


def _residual_key(target: LocatedProcess, residual: Residual) -> str:
    return canonical_form(target, residual.mapping)[0].key + "#" + _residual_fingerprint(target, residual)


def _residual_fingerprint(target: LocatedProcess, residual: Residual) -> str:
    canon, m = canonical_form(target, residual.mapping)
    return ",".join(f"{m[x]}>{y}" for x, y in sorted(residual.pairs, key=lambda xy: m[xy[0]]))


def same_outcome(a: tuple, b: tuple, labels_a: Sequence = (), labels_b: Sequence = ()) -> bool:
    """Whether ``(target, residual)`` pairs agree up to a residual-preserving renaming."""
    return _residual_key(*a) == _residual_key(*b)


def serialize(p: LocatedProcess, step: MultiStep, domain: Iterable[int] = DEFAULT_DOMAIN,
              env: Mapping | tuple | None = None) -> list:
    """Orderings of ``step``'s events realisable as consecutive single steps.

    Each result is a list of single-step labels; a sequence counts when it ends
    in the same target with the same composed residual (up to renaming of fresh
    locations).
    """
    env = freeze_env(env)
    domain = tuple(domain)
    goal = _residual_key(step.target, step.residual)
    results = []
    wanted_obs = [(d.loc, d.action) for d in step.observables]

    def dfs(cur: LocatedProcess, res: Residual, obs_left: list, taus_left: int, path: list):
        if not obs_left and taus_left == 0:
            if _residual_key(cur, res) == goal:
                results.append(list(path))
            return
        for s in _single_steps(cur, domain, env):
            if s.label is TAU:
                if taus_left == 0:
                    continue
                dfs(s.target, res.after(s.residual), obs_left, taus_left - 1, path + [s.label])
            else:
                key = (res(s.label.loc), s.label.action)
                if key in obs_left:
                    rest = list(obs_left)
                    rest.remove(key)
                    dfs(s.target, res.after(s.residual), rest, taus_left, path + [s.label])

    dfs(p, Residual.identity(p.locations), wanted_obs, step.taus, [])
    return results


def run_events_in_order(p: LocatedProcess, step: MultiStep, order: Sequence[int]) -> tuple | None:
    """Apply ``step``'s events one at a time in the given order (an independent oracle)."""
    cur, res = p, Residual.identity(p.locations)
    for i in order:
        kind, ev = step.events[i]
        # locations untouched so far keep their numbers
        if kind == "obs":
            target, r, _ = apply_firings(cur, [ev])
        else:
            target, r, _ = apply_firings(cur, list(ev), [(ev[0].loc, ev[1].loc)])
        cur, res = target, res.after(r)
    return cur, res


def all_event_orders(step: MultiStep) -> list:
    return list(permutations(range(len(step.events))))
