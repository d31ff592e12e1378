"""Compilation of programs and run-time configurations into located processes,
the label correspondence, and a bounded co-simulation harness."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .core.canon import canonical_key
from .core.expr import Val, Var, fv
from .core.graph import Graph
from .core.located import LocatedProcess
from .core.symbols import Symbol
from .core.terms import (
    IDLE, Cond, IllFormedError, InPrefix, OutPrefix, ProcVar, Rec, Sum, Term, seq, sort, subst_data,
)
from .equivalence import bisim_existential
from .lang.ast import (
    ALoad, Assign, Command, Fork, GlobalConfig, If, Load, Lock, Print, Seq, Skip, Store, Unlock,
    While, assigned_registers, is_register,
)
from .lang.interp import ProgLabel, global_steps
from .semantics import TAU, Action, act_of, freeze_env, single_steps

FORK_SYMBOL = Symbol("fork", 2)
OUT_SYMBOL = Symbol("out", 1)
BARRIERS = frozenset({"fork"})


def write_symbol(x: str) -> Symbol:
    return Symbol(f"write_{x}", 1)


def read_symbol(x: str) -> Symbol:
    return Symbol(f"read_{x}", 1)


def atomic_write_symbol(a: str, order: str) -> Symbol:
    return Symbol(f"write_{a}^{order}", 1)


def atomic_read_symbol(a: str, order: str) -> Symbol:
    return Symbol(f"read_{a}^{order}", 1)


def up_symbol(lock: str) -> Symbol:
    return Symbol(f"up_{lock}", 1)


def down_symbol(lock: str) -> Symbol:
    return Symbol(f"down_{lock}", 1)


# ---------------------------------------------------------------- expressions

def tr_exp(e):
    """Registers become data variables; everything else maps to itself."""
    bad = [n for n in fv(e) if not is_register(n)]
    if bad:
        raise IllFormedError(f"expression mentions non-register {sorted(bad)[0]!r}")
    return e


tr_bexp = tr_exp


# ---------------------------------------------------------------- commands

def tr_instr(i: Command) -> Term:
    if isinstance(i, Assign):
        return OutPrefix(write_symbol(i.var), tr_exp(i.expr), (IDLE,))
    if isinstance(i, Load):
        return InPrefix(read_symbol(i.var), i.reg, (IDLE,))
    if isinstance(i, Store):
        return OutPrefix(atomic_write_symbol(i.var, i.order), tr_exp(i.expr), (IDLE,))
    if isinstance(i, ALoad):
        return InPrefix(atomic_read_symbol(i.var, i.order), i.reg, (IDLE,))
    if isinstance(i, Lock):
        return OutPrefix(up_symbol(i.lock), Val(1), (IDLE,))
    if isinstance(i, Unlock):
        return OutPrefix(down_symbol(i.lock), Val(0), (IDLE,))
    if isinstance(i, Print):
        return OutPrefix(OUT_SYMBOL, tr_exp(i.expr), (IDLE,))
    raise TypeError(f"not a primitive instruction: {i!r}")


def _fork(f: Fork, rest: Term, nesting: int) -> Term:
    child = subst_data(tr_cmd(f.body, nesting), {f.param: tr_exp(f.arg)})
    return OutPrefix(FORK_SYMBOL, Val(0), (rest, child))


def tr_cmd(c: Command, nesting: int = 0) -> Term:
    """Translate a command.  Loops become parametric recursions over the
    registers their body loads, so values read in one iteration reach the next."""
    if isinstance(c, Skip):
        return IDLE
    if isinstance(c, Fork):
        return _fork(c, IDLE, nesting)
    if isinstance(c, Seq):
        if isinstance(c.first, Fork):
            return _fork(c.first, tr_cmd(c.second, nesting), nesting)
        return seq(tr_cmd(c.first, nesting), tr_cmd(c.second, nesting), BARRIERS)
    if isinstance(c, If):
        return Cond(tr_bexp(c.cond), tr_cmd(c.then, nesting), tr_cmd(c.orelse, nesting))
    if isinstance(c, While):
        name = f"W{nesting}"
        regs = assigned_registers(c.body)
        args = tuple(Var(r) for r in regs)
        body = seq(tr_cmd(c.body, nesting + 1), ProcVar(name, args), BARRIERS)
        return Rec(name, Cond(tr_bexp(c.cond), body, IDLE), regs, args)
    return tr_instr(c)


# ---------------------------------------------------------------- state

def variable_process(x: str, v: int) -> Term:
    """``mu X(z := v). (write_x(y).(X(y)) + ~read_x(z).(X(z)))``."""
    name = f"X_{x}"
    body = Sum(InPrefix(write_symbol(x), "y", (ProcVar(name, (Var("y"),)),)),
               OutPrefix(read_symbol(x), Var("z"), (ProcVar(name, (Var("z"),)),)))
    return Rec(name, body, ("z",), (Val(v),))


def atomic_process(a: str, v: int) -> Term:
    name = f"X_{a}"
    body = Sum(
        Sum(InPrefix(atomic_write_symbol(a, "sc"), "y", (ProcVar(name, (Var("y"),)),)),
            InPrefix(atomic_write_symbol(a, "rel"), "y", (ProcVar(name, (Var("y"),)),))),
        Sum(OutPrefix(atomic_read_symbol(a, "sc"), Var("z"), (ProcVar(name, (Var("z"),)),)),
            OutPrefix(atomic_read_symbol(a, "acq"), Var("z"), (ProcVar(name, (Var("z"),)),))))
    return Rec(name, body, ("z",), (Val(v),))


def available_lock(lock: str) -> Term:
    name = f"L_{lock}"
    return Rec(name, InPrefix(up_symbol(lock), "x", (InPrefix(down_symbol(lock), "y", (ProcVar(name),)),)))


def busy_lock(lock: str) -> Term:
    return InPrefix(down_symbol(lock), "y", (available_lock(lock),))


def state_terms(config: GlobalConfig) -> list:
    """State components in a fixed order: normal variables, atomics, available
    locks, busy locks (each group sorted by name)."""
    mem = config.memory_map
    out = [variable_process(x, mem[x]) for x in config.normal_vars]
    out += [atomic_process(a, mem[a]) for a in config.atomic_vars]
    out += [available_lock(lk) for lk in sorted(config.available)]
    out += [busy_lock(lk) for lk in sorted(config.busy)]
    return out


def tr_state(config: GlobalConfig) -> LocatedProcess:
    terms = state_terms(config)
    comps = dict(enumerate(terms))
    return LocatedProcess.make(Graph.make(comps.keys()), comps)


@dataclass(frozen=True)
class TranslationResult:
    process: LocatedProcess
    env: tuple  # frozen register environment
    state_locations: tuple = ()
    thread_locations: tuple = ()

    @property
    def env_map(self) -> dict:
        return dict(self.env)


def tr_config(config: GlobalConfig) -> TranslationResult:
    """``((state | T1 (+) ... (+) Tn) \\ Sort(state), env)`` with locations
    allocated left to right."""
    terms = state_terms(config)
    n_state = len(terms)
    env: dict = {}
    for t in config.threads:
        for r, v in t.locals:
            if r in env and env[r] != v:
                raise IllFormedError(f"register {r!r} appears in more than one thread")
            env[r] = v
        terms.append(tr_cmd(t.cmd))
    comps = dict(enumerate(terms))
    state_locs = tuple(range(n_state))
    thread_locs = tuple(range(n_state, len(terms)))
    edges = [(s, t) for s in state_locs for t in thread_locs]
    restriction = frozenset().union(*(sort(t) for t in terms[:n_state])) if n_state else frozenset()
    proc = LocatedProcess.make(Graph.make(comps.keys(), edges), comps, restriction)
    return TranslationResult(proc, freeze_env(env), state_locs, thread_locs)


def compile_program(config: GlobalConfig) -> LocatedProcess:
    return tr_config(config).process


# ---------------------------------------------------------------- labels

def tr_label(label: ProgLabel):
    if label.kind == "tau":
        return TAU
    if label.kind == "out":
        return Action(OUT_SYMBOL.bar, label.value)
    if label.kind == "fork":
        return Action(FORK_SYMBOL.bar, label.value)
    raise ValueError(f"unknown program label {label!r}")


# ---------------------------------------------------------------- co-simulation

@dataclass
class CosimReport:
    depth: int
    configs: int = 0
    forward_checked: int = 0
    backward_checked: int = 0
    mismatches: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.mismatches

    def __bool__(self) -> bool:
        return self.ok

    def to_json(self) -> dict:
        return {"ok": self.ok, "depth": self.depth, "configs": self.configs,
                "forward_checked": self.forward_checked, "backward_checked": self.backward_checked,
                "mismatches": self.mismatches}


def _label_json(a) -> object:
    return "tau" if a is TAU else str(a)


class _Matcher:
    def __init__(self, bisim_depth: int, multiset_cap: int, domain: tuple):
        self.bisim_depth = bisim_depth
        self.cap = multiset_cap
        self.domain = domain
        self.memo: dict = {}

    def related(self, p: LocatedProcess, env_p: tuple, q: LocatedProcess, env_q: tuple) -> bool:
        if canonical_key(p) == canonical_key(q) and _env_agrees(env_p, env_q, p.fv):
            return True
        key = (canonical_key(p), env_p, canonical_key(q), env_q)
        hit = self.memo.get(key)
        if hit is None:
            v = bisim_existential(p, q, depth=self.bisim_depth, multiset_cap=self.cap, domain=self.domain,
                                  env=env_p, env_right=env_q)
            hit = self.memo[key] = bool(v)
        return hit


def _env_agrees(a: tuple, b: tuple, names: frozenset) -> bool:
    da, db = dict(a), dict(b)
    return all(da.get(n) == db.get(n) for n in names)


def _weak_successors(config: GlobalConfig, admin_steps: int) -> list:
    """``(label, translated target)`` reachable by silent steps and then one step."""
    out, seen = [], {config}
    layer = [config]
    for _ in range(admin_steps + 1):
        nxt_layer = []
        for c in layer:
            for label, nxt in global_steps(c):
                out.append((label, tr_config(nxt)))
                if label.kind == "tau" and nxt not in seen:
                    seen.add(nxt)
                    nxt_layer.append(nxt)
        layer = nxt_layer
    return out


def cosim_check(config: GlobalConfig, depth: int = 8, bisim_depth: int = 4,
                multiset_cap: int = 2, domain=(0, 1, 2), admin_steps: int = 2) -> CosimReport:
    """Check both simulation directions on every configuration reachable within
    ``depth`` program steps.

    Forward: each program step has a process step with the translated action
    (or, for a silent step, possibly no process step) whose target is not
    distinguished from the translated successor.  Backward: each process step
    is matched by a program step in the same way, allowing up to
    ``admin_steps`` silent program steps first (a loop exit is a silent program
    step with no process counterpart).
    """
    matcher = _Matcher(bisim_depth, multiset_cap, tuple(domain))
    report = CosimReport(depth)
    seen = {config}
    frontier = deque([(config, ())])
    while frontier:
        c, trace = frontier.popleft()
        report.configs += 1
        if len(trace) >= depth:
            continue
        src = tr_config(c)
        psteps = single_steps(src.process, domain, src.env)
        gsteps = global_steps(c)
        succ = [(label, nxt, tr_config(nxt)) for label, nxt in gsteps]
        for label, nxt, tgt in succ:
            report.forward_checked += 1
            want = tr_label(label)
            cands = [s for s in psteps if act_of(s.label) == want]
            ok = any(matcher.related(s.target, src.env, tgt.process, tgt.env) for s in cands)
            if not ok and want is TAU:
                ok = matcher.related(src.process, src.env, tgt.process, tgt.env)
            if not ok:
                report.mismatches.append({"direction": "forward", "trace": [lb.to_json() for lb in trace],
                                          "config": str(c), "label": label.to_json(), "successor": str(nxt)})
            if nxt not in seen:
                seen.add(nxt)
                frontier.append((nxt, trace + (label,)))
        weak = None
        for s in psteps:
            report.backward_checked += 1
            have = act_of(s.label)
            ok = any(tr_label(label) == have and matcher.related(s.target, src.env, tgt.process, tgt.env)
                     for label, _, tgt in succ)
            if not ok:
                # the program may need administrative silent steps (a loop exit) first
                if weak is None:
                    weak = _weak_successors(c, admin_steps)
                ok = any(tr_label(label) == have and matcher.related(s.target, src.env, tgt.process, tgt.env)
                         for label, tgt in weak)
            if not ok:
                report.mismatches.append({"direction": "backward", "trace": [lb.to_json() for lb in trace],
                                          "config": str(c), "label": _label_json(have),
                                          "target": s.target.key})
    return report


__all__ = [
    "FORK_SYMBOL", "OUT_SYMBOL", "write_symbol", "read_symbol", "atomic_write_symbol", "atomic_read_symbol",
    "up_symbol", "down_symbol", "tr_exp", "tr_bexp", "tr_instr", "tr_cmd", "variable_process",
    "atomic_process", "available_lock", "busy_lock", "tr_state", "TranslationResult", "tr_config",
    "compile_program", "tr_label", "act_of", "CosimReport", "cosim_check",
]
