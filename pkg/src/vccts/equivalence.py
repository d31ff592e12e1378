"""Bounded equivalence checking: weak barbed bisimulation and localized early
weak bisimulation over triples ``(P, E, Q)``.

All verdicts are bounded.  ``depth`` counts attacker moves; defender replies
may use up to ``tau_bound`` internal reductions before and after matching.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

from .core.canon import canonical_form
from .core.located import LocatedProcess, subst_loc, to_located
from .core.terms import GraphComp, IllFormedError, ProcVar, Restrict, Term, subst_procvar
from .semantics import (
    DEFAULT_DOMAIN, DEFAULT_MULTISET_CAP, TAU, Residual, _multi_steps, _tau_star, _tau_steps,
    freeze_env, has_barb, process_barbs,
)

DEFAULT_DEPTH = 8
DEFAULT_TAU_BOUND = 8


@dataclass(frozen=True)
class EquivalentUpTo:
    depth: int
    multiset_cap: int
    relation: tuple = ()

    equivalent = True

    def __bool__(self) -> bool:
        return True

    def to_json(self) -> dict:
        return {"verdict": "equivalent-up-to", "depth": self.depth, "multiset_cap": self.multiset_cap,
                "relation": [list(p) for p in self.relation]}


@dataclass(frozen=True)
class Distinguished:
    witness: tuple = ()
    relation: tuple = field(default=(), compare=False)

    equivalent = False

    def __bool__(self) -> bool:
        return False

    def to_json(self) -> dict:
        return {"verdict": "distinguished", "witness": list(self.witness),
                "relation": [list(p) for p in self.relation]}


def _move(side: str, kind: str, labels, residual: Residual | None, source: LocatedProcess,
          target: LocatedProcess) -> dict:
    return {
        "side": side,
        "kind": kind,
        "labels": [d.to_json() for d in labels],
        "residual": [list(p) for p in residual.pairs] if residual is not None else [],
        "source": source.key,
        "target": target.key,
    }


def _env_on(env: tuple, names: frozenset) -> tuple:
    return tuple((k, v) for k, v in env if k in names)


# ---------------------------------------------------------------- localized game

class LocalizedGame:
    """Memoised bounded game for localized early weak bisimulation."""

    def __init__(self, domain=DEFAULT_DOMAIN, multiset_cap=DEFAULT_MULTISET_CAP,
                 tau_bound=DEFAULT_TAU_BOUND, env_left=None, env_right=None, shortcut=False):
        self.domain = tuple(domain)
        self.cap = multiset_cap
        self.tau_bound = tau_bound
        self.envs = (freeze_env(env_left), freeze_env(env_right))
        self.shortcut = shortcut
        self.proven: dict = {}
        self.refuted: dict = {}
        self._answer_index: dict = {}

    # state normalisation ------------------------------------------------
    def _normal(self, p: LocatedProcess, e: frozenset, q: LocatedProcess):
        cp, mp = canonical_form(p)
        cq, mq = canonical_form(q)
        ce = frozenset((mp[a], mq[b]) for a, b in e)
        return cp, ce, cq

    def check(self, p: LocatedProcess, e: Iterable, q: LocatedProcess, depth: int):
        """``None`` if the game survives ``depth`` rounds, else a witness list."""
        cp, ce, cq = self._normal(p, frozenset(e), q)
        return self._check(cp, ce, cq, depth)

    def _check(self, p: LocatedProcess, e: frozenset, q: LocatedProcess, depth: int):
        if depth <= 0:
            return None
        # The defender only gains from extra pairs: a proof for a smaller
        # relation carries over, and so does a refutation for a larger one.
        key = (p.key, q.key)
        for e2, d2 in self.proven.get(key, ()):
            if d2 >= depth and e2 <= e:
                return None
        for e2, d2, w in self.refuted.get(key, ()):
            if d2 <= depth and e <= e2:
                return w
        if self.shortcut and self._trivially_related(p, e, q):
            self.proven.setdefault(key, []).append((e, 1 << 30))
            return None
        for side in (0, 1):
            w = self._attack(p, e, q, depth, side)
            if w is not None:
                self.refuted.setdefault(key, []).append((e, depth, w))
                return w
        self.proven.setdefault(key, []).append((e, depth))
        return None

    def _trivially_related(self, p, e, q) -> bool:
        if p.key != q.key:
            return False
        el, er = self.envs
        if el != er and _env_on(el, p.fv) != _env_on(er, q.fv):
            return False
        return all((x, x) in e for x in p.locations)

    def _attack(self, p, e, q, depth, side):
        att, dfn = (p, q) if side == 0 else (q, p)
        env_a, env_d = self.envs[side], self.envs[1 - side]
        name = ("left", "right")[side]
        # internal moves
        for step in _tau_steps(att, env_a):
            answers = list(_tau_star(dfn, self.tau_bound, env_d))
            answers.sort(key=lambda a: self._priority(step.target, a[0]))
            first_w = None
            for dtarget, rho in answers:
                e2 = self._next_relation(e, side, step.target, step.residual, dtarget, rho, ())
                w = self._recurse(side, step.target, e2, dtarget, depth)
                if w is None:
                    break
                if first_w is None:
                    first_w = [_move(("right", "left")[side], "response", [], rho, dfn, dtarget)] + w
            else:
                return [_move(name, "tau", [TAU], step.residual, att, step.target)] + (first_w or [])
        # observable multisets
        for ms in _multi_steps(att, self.domain, self.cap, env_a, True):
            w = self._answer_observable(p, e, q, depth, side, ms)
            if w is not None:
                return [_move(name, "multiset", ms.labels, ms.residual, att, ms.target)] + w
        return None

    def _answer_observable(self, p, e, q, depth, side, ms):
        att, dfn = (p, q) if side == 0 else (q, p)
        env_d = self.envs[1 - side]
        want = tuple(sorted(d.action for d in ms.labels))
        by_action = {d.action: d for d in ms.labels}
        first_w = None
        candidates = []
        for d1, rho, dm in self._answers(dfn, env_d).get(want, ()):
            pairs = []
            ok = True
            for dl in dm.labels:
                al = by_action[dl.action]
                loc_pair = (al.loc, rho(dl.loc)) if side == 0 else (rho(dl.loc), al.loc)
                if loc_pair not in e:
                    ok = False
                    break
                pairs.append((al, dl))
            if ok:
                candidates.append((d1, rho, dm, pairs))
        if not candidates:
            return []
        for d1, rho, dm, pairs in candidates:
            for dtarget, rho2 in sorted(_tau_star(dm.target, self.tau_bound, env_d),
                                        key=lambda a: self._priority(ms.target, a[0])):
                total = rho.after(dm.residual).after(rho2)
                e2 = self._next_relation(e, side, ms.target, ms.residual, dtarget, total,
                                         [(al, dl, rho2) for al, dl in pairs])
                w = self._recurse(side, ms.target, e2, dtarget, depth)
                if w is None:
                    return None
                if first_w is None:
                    first_w = [_move(("right", "left")[side], "response", dm.labels, total, dfn, dtarget)] + w
        return first_w or []

    def _answers(self, dfn: LocatedProcess, env_d: tuple) -> dict:
        """Weak observable moves of the defender, indexed by their sorted actions."""
        key = (dfn, env_d)
        idx = self._answer_index.get(key)
        if idx is None:
            idx = {}
            for d1, rho in _tau_star(dfn, self.tau_bound, env_d):
                for dm in _multi_steps(d1, self.domain, self.cap, env_d, True):
                    idx.setdefault(tuple(sorted(d.action for d in dm.labels)), []).append((d1, rho, dm))
            self._answer_index[key] = idx
        return idx

    def _priority(self, attacker_target, defender_target) -> tuple:
        same = canonical_form(attacker_target)[0].key == canonical_form(defender_target)[0].key
        return 0 if same else 1

    def _recurse(self, side, att_target, e2, def_target, depth):
        if side == 0:
            return self.check(att_target, e2, def_target, depth - 1)
        return self.check(def_target, e2, att_target, depth - 1)

    @staticmethod
    def _next_relation(e, side, att_target, lam, def_target, sigma, matched) -> frozenset:
        """Largest successor relation allowed by the residual and branching clauses.

        Pairs are oriented (attacker location, defender location) internally and
        transposed back when the right-hand process attacks.
        """
        oriented = e if side == 0 else frozenset((b, a) for a, b in e)
        lam_m, sig_m = lam.mapping, sigma.mapping
        out = set()
        branching = [(al, dl, rho2) for al, dl, rho2 in matched if len(al.sets) >= 2]
        for a in att_target.locations:
            la = lam_m[a]
            for b in def_target.locations:
                if (la, sig_m[b]) not in oriented:
                    continue
                good = True
                for al, dl, rho2 in branching:
                    rb = rho2(b)
                    in_l = [i for i, s in enumerate(al.sets) if a in s]
                    in_m = [i for i, s in enumerate(dl.sets) if rb in s]
                    if in_l and in_m:
                        if in_l[0] != in_m[0]:
                            good = False
                    elif in_l or in_m:
                        good = False
                    if not good:
                        break
                if good:
                    out.add((a, b) if side == 0 else (b, a))
        return frozenset(out)


def localized_weak_bisim(p: LocatedProcess, e: Iterable, q: LocatedProcess, depth: int = DEFAULT_DEPTH,
                         multiset_cap: int = DEFAULT_MULTISET_CAP, domain=DEFAULT_DOMAIN,
                         env=None, env_right=None, tau_bound: int = DEFAULT_TAU_BOUND,
                         shortcut: bool = False, game: LocalizedGame | None = None):
    """Bounded check of ``(P, E, Q)``; ``env_right`` defaults to ``env``."""
    e = frozenset(e)
    bad = [(a, b) for a, b in e if a not in p.graph.vertices or b not in q.graph.vertices]
    if bad:
        raise ValueError(f"relation pairs outside the processes' locations: {sorted(bad)}")
    if game is None:
        game = LocalizedGame(domain, multiset_cap, tau_bound, env,
                             env if env_right is None else env_right, shortcut)
    w = game.check(p, e, q, depth)
    rel = tuple(sorted(e))
    if w is None:
        return EquivalentUpTo(depth, multiset_cap, rel)
    return Distinguished(tuple(w), rel)


def bisim_existential(p: LocatedProcess, q: LocatedProcess, depth: int = DEFAULT_DEPTH,
                      multiset_cap: int = DEFAULT_MULTISET_CAP, domain=DEFAULT_DOMAIN,
                      env=None, env_right=None, tau_bound: int = DEFAULT_TAU_BOUND,
                      shortcut: bool = True, candidates: Iterable | None = None):
    """``P ~ Q`` for some correspondence ``E``.

    The game only gets easier for the defender as ``E`` grows, so the full
    relation ``|P| x |Q|`` decides the question; explicit ``candidates`` are
    tried in order otherwise.
    """
    game = LocalizedGame(domain, multiset_cap, tau_bound, env,
                         env if env_right is None else env_right, shortcut)
    if candidates is None:
        candidates = [frozenset((a, b) for a in p.locations for b in q.locations)]
    best = None
    for e in candidates:
        v = localized_weak_bisim(p, e, q, depth, multiset_cap, domain, game=game)
        if v:
            return v
        if best is None or len(v.witness) > len(best.witness):
            best = v
    return best if best is not None else Distinguished(())


# ---------------------------------------------------------------- weak barbed game

class BarbedGame:
    def __init__(self, domain=DEFAULT_DOMAIN, multiset_cap=DEFAULT_MULTISET_CAP,
                 tau_bound=DEFAULT_TAU_BOUND, env_left=None, env_right=None):
        self.domain = tuple(domain)
        self.cap = multiset_cap
        self.tau_bound = tau_bound
        self.envs = (freeze_env(env_left), freeze_env(env_right))
        self.memo: dict = {}
        self._fam: dict = {}

    def family(self, p: LocatedProcess, env: tuple) -> frozenset:
        """All barb sets (size <= cap) the process exhibits now."""
        key = (p.key, env)
        fam = self._fam.get(key)
        if fam is None:
            per_loc = process_barbs(p, env)
            universe = sorted(frozenset().union(*per_loc.values()) if per_loc else ())
            found = set()

            def grow(start, chosen):
                found.add(frozenset(chosen))
                if len(chosen) == self.cap:
                    return
                for i in range(start, len(universe)):
                    cand = chosen + [universe[i]]
                    if has_barb(p, cand, env):
                        grow(i + 1, cand)

            grow(0, [])
            fam = frozenset(found)
            self._fam[key] = fam
        return fam

    def weak_family(self, p: LocatedProcess, env: tuple) -> frozenset:
        out = set()
        for t, _ in _tau_star(p, self.tau_bound, env):
            out |= self.family(t, env)
        return frozenset(out)

    def check(self, p: LocatedProcess, q: LocatedProcess, depth: int):
        if depth <= 0:
            return None
        p = canonical_form(p)[0]
        q = canonical_form(q)[0]
        key = (p.key, q.key)
        got = self.memo.get(key)
        if got is not None and got[0] >= depth and got[1] is None:
            return None
        if got is not None and got[1] is not None and got[0] <= depth:
            return got[1]
        w = self._attack(p, q, depth, 0) or self._attack(q, p, depth, 1)
        self.memo[key] = (depth, w)
        return w

    def _attack(self, att, dfn, depth, side):
        env_a, env_d = self.envs[side], self.envs[1 - side]
        name = ("left", "right")[side]
        missing = self.family(att, env_a) - self.weak_family(dfn, env_d)
        if missing:
            b = min(missing, key=lambda s: (len(s), sorted(map(str, s))))
            return [{"side": name, "kind": "barb", "labels": sorted(map(str, b)), "residual": [],
                     "source": att.key, "target": att.key}]
        for step in _tau_steps(att, env_a):
            first_w = None
            for dtarget, _ in _tau_star(dfn, self.tau_bound, env_d):
                w = self.check(step.target, dtarget, depth - 1) if side == 0 else \
                    self.check(dtarget, step.target, depth - 1)
                if w is None:
                    break
                if first_w is None:
                    first_w = w
            else:
                return [_move(name, "tau", [TAU], step.residual, att, step.target)] + (first_w or [])
        return None


def weak_barbed_bisim(p: LocatedProcess, q: LocatedProcess, depth: int = DEFAULT_DEPTH,
                      domain=DEFAULT_DOMAIN, multiset_cap: int = DEFAULT_MULTISET_CAP,
                      env=None, env_right=None, tau_bound: int = DEFAULT_TAU_BOUND):
    """Bounded weak barbed bisimulation game (locations ignored, barbs as sets)."""
    game = BarbedGame(domain, multiset_cap, tau_bound, env, env if env_right is None else env_right)
    w = game.check(p, q, depth)
    if w is None:
        return EquivalentUpTo(depth, multiset_cap)
    return Distinguished(tuple(w))


# ---------------------------------------------------------------- contexts

def _count_procvar(t: Term, name: str) -> int:
    if isinstance(t, ProcVar):
        return 1 if t.name == name else 0
    from .core.terms import Rec, children
    if isinstance(t, Rec) and t.name == name:
        return 0
    return sum(_count_procvar(c, name) for c in children(t))


def plug(context: Term, hole: str, p: LocatedProcess) -> LocatedProcess:
    """``R[P/Y]`` for a context with exactly one free occurrence of ``Y``."""
    if _count_procvar(context, hole) != 1:
        raise IllFormedError(f"context must contain exactly one free occurrence of {hole}")
    restriction = frozenset()
    body = context
    while isinstance(body, Restrict):
        restriction |= body.symbols
        body = body.body
    if isinstance(body, ProcVar):
        return p.restricted(restriction)
    if isinstance(body, GraphComp):
        for loc, comp in body.comps:
            if isinstance(comp, ProcVar) and comp.name == hole:
                stub = dict(body.comps)
                from .core.terms import ZERO
                stub[loc] = ZERO
                outer = LocatedProcess.make(body.graph, stub)
                inner = p.without_restriction()
                if p.restriction:
                    raise IllFormedError("cannot plug a restricted process into a location")
                off = outer.next_location
                inner = inner.renamed({x: x + off for x in inner.locations})
                return subst_loc(outer, inner, loc).restricted(restriction)
    if p.restriction:
        raise IllFormedError("cannot plug a restricted process under a prefix")
    return to_located(subst_procvar(context, hole, p.to_term()))


def congruence_probe(p: LocatedProcess, q: LocatedProcess, contexts: Iterable[Term], depth: int = 6,
                     hole: str = "Y", **kwargs) -> list:
    """Sampled congruence probe: compare ``R[P/Y]`` and ``R[Q/Y]`` for each context."""
    report = []
    for ctx in contexts:
        lp, lq = plug(ctx, hole, p), plug(ctx, hole, q)
        report.append({"context": str(ctx), "verdict": bisim_existential(lp, lq, depth, **kwargs)})
    return report


def transposed(e: Iterable) -> frozenset:
    return frozenset((b, a) for a, b in e)


def full_relation(p: LocatedProcess, q: LocatedProcess) -> frozenset:
    return frozenset((a, b) for a in p.locations for b in q.locations)


def identity_relation(p: LocatedProcess) -> frozenset:
    return frozenset((a, a) for a in p.locations)

