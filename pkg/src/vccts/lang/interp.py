"""Reference interleaving interpreter and data-race detector."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

from ..core.expr import eval_bexp, eval_exp
from .ast import (
    SKIP, ALoad, Assign, Command, Fork, GlobalConfig, If, Load, Lock, Print, Seq, Skip, Store,
    Thread, Unlock, While,
)


class ProgLabel(NamedTuple):
    kind: str  # "tau", "out" or "fork"
    value: int | None = None

    def __str__(self) -> str:
        return "tau" if self.kind == "tau" else f"{self.kind} {self.value}"

    def to_json(self):
        return "tau" if self.kind == "tau" else [self.kind, self.value]


TAU = ProgLabel("tau")
FORK = ProgLabel("fork", 0)


def out(v: int) -> ProgLabel:
    return ProgLabel("out", v)


@dataclass(frozen=True)
class GState:
    memory: tuple
    available: frozenset
    busy: frozenset


class _Step(NamedTuple):
    label: ProgLabel
    memory: tuple
    available: frozenset
    busy: frozenset
    locals: tuple
    cmd: Command
    spawned: Thread | None
    access: tuple | None  # ("r"|"w", normal variable) for race detection


def _set(pairs: tuple, key: str, value: int) -> tuple:
    d = dict(pairs)
    d[key] = value
    return tuple(sorted(d.items()))


def _steps(cmd: Command, local: tuple, mem: tuple, avail: frozenset, busy: frozenset):
    """All thread-level steps of ``(local, cmd)``, forks included."""
    env = dict(local)
    if isinstance(cmd, Skip):
        return
    if isinstance(cmd, Assign):
        yield _Step(TAU, _set(mem, cmd.var, eval_exp(cmd.expr, env)), avail, busy, local, SKIP, None,
                    ("w", cmd.var))
    elif isinstance(cmd, Load):
        yield _Step(TAU, mem, avail, busy, _set(local, cmd.reg, dict(mem).get(cmd.var, 0)), SKIP, None,
                    ("r", cmd.var))
    elif isinstance(cmd, Store):
        yield _Step(TAU, _set(mem, cmd.var, eval_exp(cmd.expr, env)), avail, busy, local, SKIP, None, None)
    elif isinstance(cmd, ALoad):
        yield _Step(TAU, mem, avail, busy, _set(local, cmd.reg, dict(mem).get(cmd.var, 0)), SKIP, None, None)
    elif isinstance(cmd, Lock):
        if cmd.lock in avail:
            yield _Step(TAU, mem, avail - {cmd.lock}, busy | {cmd.lock}, local, SKIP, None, None)
    elif isinstance(cmd, Unlock):
        if cmd.lock in busy:
            yield _Step(TAU, mem, avail | {cmd.lock}, busy - {cmd.lock}, local, SKIP, None, None)
    elif isinstance(cmd, Print):
        yield _Step(out(eval_exp(cmd.expr, env)), mem, avail, busy, local, SKIP, None, None)
    elif isinstance(cmd, Fork):
        child = Thread(((cmd.param, eval_exp(cmd.arg, env)),), cmd.body)
        yield _Step(FORK, mem, avail, busy, local, SKIP, child, None)
    elif isinstance(cmd, Seq):
        if isinstance(cmd.first, Skip):
            yield from _steps(cmd.second, local, mem, avail, busy)
        elif isinstance(cmd.first, Fork):
            for s in _steps(cmd.first, local, mem, avail, busy):
                yield s._replace(cmd=cmd.second)
        else:
            for s in _steps(cmd.first, local, mem, avail, busy):
                yield s._replace(cmd=Seq(s.cmd, cmd.second))
    elif isinstance(cmd, If):
        branch = cmd.then if eval_bexp(cmd.cond, env) else cmd.orelse
        yield from _steps(branch, local, mem, avail, busy)
    elif isinstance(cmd, While):
        if eval_bexp(cmd.cond, env):
            for s in _steps(cmd.body, local, mem, avail, busy):
                yield s._replace(cmd=Seq(s.cmd, cmd))
        else:
            yield _Step(TAU, mem, avail, busy, local, SKIP, None, None)
    else:
        raise TypeError(f"not a command: {cmd!r}")


@lru_cache(maxsize=1 << 16)
def _thread_step_list(cmd: Command, local: tuple, mem: tuple, avail: frozenset, busy: frozenset) -> tuple:
    return tuple(_steps(cmd, local, mem, avail, busy))


def thread_steps(state: GState, thread: Thread) -> list:
    """Steps ``(label, state', thread')`` of one thread; thread creation is a global rule."""
    res = []
    for s in _thread_step_list(thread.cmd, thread.locals, state.memory, state.available, state.busy):
        if s.spawned is None:
            res.append((s.label, GState(s.memory, s.available, s.busy), Thread(s.locals, s.cmd)))
    return res


def gstate(config: GlobalConfig) -> GState:
    return GState(config.memory, config.available, config.busy)


def global_steps(config: GlobalConfig) -> list:
    """All ``(label, config')``, deduplicated, in a deterministic order."""
    seen: dict = {}
    for i, t in enumerate(config.threads):
        if i > 0 and config.threads[i - 1] == t:
            continue
        rest = config.threads[:i] + config.threads[i + 1:]
        for s in _thread_step_list(t.cmd, t.locals, config.memory, config.available, config.busy):
            threads = rest + (Thread(s.locals, s.cmd),) + ((s.spawned,) if s.spawned else ())
            nxt = GlobalConfig(s.memory, config.atomics, s.available, s.busy,
                               tuple(sorted(threads, key=Thread.sort_key)))
            seen.setdefault((s.label, nxt), None)
    return list(seen)


def enabled_accesses(config: GlobalConfig) -> list:
    """Per thread, the set of normal-variable accesses of its enabled steps."""
    res = []
    for t in config.threads:
        acc = set()
        for s in _thread_step_list(t.cmd, t.locals, config.memory, config.available, config.busy):
            if s.access is not None:
                acc.add(s.access)
        res.append(acc)
    return res


def racing_pair(config: GlobalConfig):
    """Two accesses by distinct threads to one normal variable, one a write, or None."""
    acc = enabled_accesses(config)
    for i in range(len(acc)):
        for j in range(i + 1, len(acc)):
            for a in sorted(acc[i]):
                for b in sorted(acc[j]):
                    if a[1] == b[1] and "w" in (a[0], b[0]):
                        return (i, a), (j, b)
    return None


@dataclass(frozen=True)
class RaceReport:
    race_free: bool
    trace: tuple = ()  # labels leading to the racy configuration
    config: GlobalConfig | None = None
    pair: tuple | None = None
    explored: int = 0

    def __bool__(self) -> bool:
        return self.race_free

    def to_json(self) -> dict:
        d = {"race_free": self.race_free, "explored": self.explored}
        if not self.race_free:
            d["trace"] = [lbl.to_json() for lbl in self.trace]
            d["config"] = str(self.config)
            d["accesses"] = [[i, kind, var] for i, (kind, var) in self.pair]
        return d


def reachable(config: GlobalConfig, depth: int):
    """Breadth-first ``(config, trace)`` pairs reachable within ``depth`` steps."""
    seen = {config}
    frontier = deque([(config, ())])
    while frontier:
        c, trace = frontier.popleft()
        yield c, trace
        if len(trace) >= depth:
            continue
        for label, nxt in global_steps(c):
            if nxt not in seen:
                seen.add(nxt)
                frontier.append((nxt, trace + (label,)))


def data_race_free(config: GlobalConfig, depth: int = 64) -> RaceReport:
    n = 0
    for c, trace in reachable(config, depth):
        n += 1
        pair = racing_pair(c)
        if pair is not None:
            return RaceReport(False, trace, c, pair, n)
    return RaceReport(True, explored=n)


def observable_traces(config: GlobalConfig, depth: int = 16, kinds=("out", "fork")) -> frozenset:
    """Maximal label sequences (τ removed) of runs that stop or hit ``depth``."""
    memo: dict = {}

    def go(c: GlobalConfig, d: int) -> frozenset:
        key = (c, d)
        if key in memo:
            return memo[key]
        steps = global_steps(c) if d > 0 else []
        if not steps:
            res = frozenset({()})
        else:
            acc = set()
            for label, nxt in steps:
                head = (label,) if label.kind in kinds else ()
                acc.update(head + t for t in go(nxt, d - 1))
            res = frozenset(acc)
        memo[key] = res
        return res

    return go(config, depth)


def is_terminated(config: GlobalConfig) -> bool:
    return all(isinstance(t.cmd, Skip) for t in config.threads)


__all__ = ["ProgLabel", "TAU", "FORK", "out", "GState", "thread_steps", "global_steps", "gstate",
           "enabled_accesses", "racing_pair", "RaceReport", "reachable", "data_race_free",
           "observable_traces", "is_terminated"]
