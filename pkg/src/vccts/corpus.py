"""Fixture programs and processes, plus a seeded random process generator."""

from __future__ import annotations

import random
from dataclasses import dataclass

from .core.expr import Op, Val, Var
from .core.graph import Graph
from .core.located import LocatedProcess
from .core.parser import parse_located
from .core.symbols import Symbol
from .core.terms import IDLE, ZERO, Cond, GraphComp, InPrefix, OutPrefix, Rec, ProcVar, Sum, Term
from .core.expr import Cmp

# ---------------------------------------------------------------- processes

EXPANSION_PAR = "~f(1).(0) | ~g(2).(0)"
EXPANSION_SUM = "~f(1).(~g(2).(0)) + ~g(2).(~f(1).(0))"

PROCESS_FIXTURES = {
    "inert": "*",
    "expansion_par": EXPANSION_PAR,
    "expansion_sum": EXPANSION_SUM,
    "two_writes": "~write_x(1).(*) (+) ~write_y(2).(*)",
    "write_sequence": "~write_x(1).(~write_y(2).(*)) + ~write_y(2).(~write_x(1).(*))",
    "fork": "~fork(0).(~write_y(2).(*), ~write_x(1).(*))",
    "handshake": "f(x).(~g(x).(*)) | ~f(1).(g(y).(*))",
    "cell": "write_x(y).(*) | ~write_x(1).(*)",
    "restricted_cell": "(f(x).(~out(x).(*)) | ~f(2).(*)) \\ {f}",
    "counter": "mu X(n := 0). ~out(n).(X((n + 1)))",
    "choice": "~a(0).(*) + ~b(0).(*)",
    "branching": "~c(0).(~a(1).(*), ~b(1).(*)) | a(x).(*)",
    "conditional": "f(x).(if x = 1 then ~a(x).(*) else ~b(x).(*))",
    "tau_then_out": "(f(x).(~out(x).(*)) | ~f(1).(*)) \\ {f}",
    "direct_out": "~out(1).(*)",
    "three_way": "~f(0).(*) | f(x).(*) | f(y).(*)",
}


def fixture_process(name: str) -> LocatedProcess:
    return parse_located(PROCESS_FIXTURES[name])


# ---------------------------------------------------------------- programs

@dataclass(frozen=True)
class ProgramFixture:
    name: str
    source: str
    race_free: bool | None = None  # None: not part of the race corpus
    cosim: bool = True


PROGRAMS = [
    ProgramFixture("concurrent_writes", "x := 1 || y := 2", True),
    ProgramFixture("sequential_writes", "x := 1; y := 2", True),
    ProgramFixture("thread_creation", "thread t({ x := r }(r), 1); y := 2", True),
    ProgramFixture("lock_counter",
                   "l.lock(); r1 := x; x := r1 + 1; l.unlock() || "
                   "l.lock(); r2 := x; x := r2 + 1; l.unlock(); print r2", True),
    ProgramFixture("print_order", "print 1; print 2 || print 3", True),
    ProgramFixture("atomic_handshake",
                   "x := 42; flag.store(1, rel) || "
                   "r1 := flag.load(acq); if r1 = 1 then { r2 := x; print r2 } else print 0", True),
    ProgramFixture("polling_loop", "[r1 = 0] while r1 < 2 do r1 := x; print r1 || x := 2", False),
    ProgramFixture("branch_on_read", "init x = 1; r1 := x; if r1 = 1 then print 10 else print 20", True),
    ProgramFixture("store_buffering",
                   "x := 1; r1 := y; print r1 || y := 1; r2 := x; print r2", False),
    ProgramFixture("message_passing", "x := 1; y := 1 || r1 := y; r2 := x; print r1 + r2", False),
    ProgramFixture("fork_argument", "[r1 = 2] thread t({ print r + 1 }(r), r1 * 2); print r1", True),
    ProgramFixture("atomic_sc", "a.store(1, sc); r1 := a.load(sc); print r1 || a.store(2, sc)", True),
    ProgramFixture("locked_store_buffering",
                   "l.lock(); x := 1; r1 := y; l.unlock(); print r1 || "
                   "l.lock(); y := 1; r2 := x; l.unlock(); print r2", True),
    ProgramFixture("locked_publish",
                   "l.lock(); x := 1; l.unlock() || l.lock(); r1 := x; l.unlock(); print r1", True),
    ProgramFixture("write_write_race", "x := 1 || x := 2", False),
    ProgramFixture("read_write_race", "x := 1 || r1 := x", False),
    ProgramFixture("different_locks",
                   "l.lock(); x := 1; l.unlock() || m.lock(); x := 2; m.unlock()", False),
    ProgramFixture("fork_race", "thread t({ x := r }(r), 1); x := 2", False),
    ProgramFixture("counted_loop", "[r1 = 0] while r1 < 2 do { x := r1 + 1; r1 := x }; print r1", True),
    ProgramFixture("reorder_pair", "[r1 = 3] x := r1; r2 := y; print r2 || [r3 = 4] z := r3", True),
    ProgramFixture("independent_writes", "x := 1; y := 2; z := 3 || r1 := w; print r1", True),
    ProgramFixture("critical_section_then_local",
                   "l.lock(); x := 1; l.unlock(); y := 2; r1 := z; print r1 || "
                   "l.lock(); r2 := x; l.unlock(); print r2", True),
]

SB_LITMUS = "x := 1; r1 := y; print r1 || y := 1; r2 := x; print r2"

# Race-free single-purpose programs whose behaviour changes when one rule's
# side condition is ignored: (rule, closure kind, program).
MUTATION_PROGRAMS = [
    ("WR", "reorder", "x := 1; r1 := x; print r1"),
    ("RR", "reorder", "init x = 1, y = 2; r1 := x; r1 := y; print r1"),
    ("RW", "reorder", "init x = 1; r1 := x; x := 2; print r1"),
    ("UR2", "reorder", "[r1 = 7] a.store(r1, rel); r1 := x; r2 := a.load(sc); print r2"),
    ("WL2", "reorder", "[r1 = 7] x := r1; r1 := a.load(acq); r2 := x; print r2"),
    ("RL2", "reorder", "init x = 1, a = 2; r1 := x; r1 := a.load(acq); print r1"),
    ("R-WR", "tso", "x := 1; r1 := x; print r1"),
]


def program(name: str):
    from .lang.parser import parse_program

    for p in PROGRAMS:
        if p.name == name:
            return parse_program(p.source)
    raise KeyError(name)


def cosim_programs() -> list:
    return [p for p in PROGRAMS if p.cosim]


def race_programs(race_free: bool) -> list:
    return [p for p in PROGRAMS if p.race_free is race_free]


# ---------------------------------------------------------------- random processes

SYMBOLS = (Symbol("f", 1), Symbol("g", 1), Symbol("h", 1))
BRANCH_SYMBOL = Symbol("k", 2)


class RandomProcesses:
    """Seeded generator of small canonical located processes.

    Processes have at most ``max_locations`` locations, prefixes over a few
    shared symbols, output values drawn from ``domain`` and continuations of
    bounded depth.  With ``free_var`` set, outputs and guards may also mention
    that unbound data variable.
    """

    def __init__(self, seed: int, max_locations: int = 6, domain=(0, 1, 2), free_var: str | None = None,
                 max_depth: int = 2, restrict_prob: float = 0.2):
        self.rng = random.Random(seed)
        self.max_locations = max_locations
        self.domain = tuple(domain)
        self.free_var = free_var
        self.max_depth = max_depth
        self.restrict_prob = restrict_prob

    def _expr(self, bound: list):
        rng = self.rng
        names = list(bound) + ([self.free_var] if self.free_var else [])
        if names and rng.random() < 0.5:
            v = Var(rng.choice(names))
            if rng.random() < 0.25:
                return Op("+", (v, Val(1)))
            return v
        return Val(rng.choice(self.domain))

    def _cont(self, depth: int, bound: list) -> Term:
        rng = self.rng
        if depth <= 0 or rng.random() < 0.35:
            return IDLE if rng.random() < 0.85 else ZERO
        if rng.random() < 0.15:
            return self._small_par(depth - 1, bound)
        return self.guarded_sum(depth - 1, bound)

    def _small_par(self, depth: int, bound: list) -> Term:
        comps = {0: self.guarded_sum(depth, bound), 1: self.guarded_sum(depth, bound)}
        edges = [(0, 1)] if self.rng.random() < 0.6 else []
        return GraphComp.make(Graph.make(comps.keys(), edges), comps)

    def _prefix(self, depth: int, bound: list) -> Term:
        rng = self.rng
        if rng.random() < 0.1:
            conts = (self._cont(depth, bound), self._cont(depth, bound))
            return OutPrefix(BRANCH_SYMBOL, self._expr(bound), conts)
        s = rng.choice(SYMBOLS)
        if rng.random() < 0.5:
            binder = f"v{len(bound)}"
            return InPrefix(s, binder, (self._cont(depth, bound + [binder]),))
        return OutPrefix(s, self._expr(bound), (self._cont(depth, bound),))

    def guarded_sum(self, depth: int | None = None, bound: list | None = None) -> Term:
        rng = self.rng
        depth = self.max_depth if depth is None else depth
        bound = [] if bound is None else bound
        names = list(bound) + ([self.free_var] if self.free_var else [])
        roll = rng.random()
        if names and roll < 0.12:
            guard = Cmp("=", Var(rng.choice(names)), Val(rng.choice(self.domain)))
            return Cond(guard, self._prefix(depth, bound), self._prefix(depth, bound))
        if roll < 0.18:
            # a small recursive server: mu X. f(y).(~g(y).(X))
            s, t = rng.sample(SYMBOLS, 2)
            return Rec("X", InPrefix(s, "y", (OutPrefix(t, Var("y"), (ProcVar("X"),)),)))
        t = self._prefix(depth, bound)
        if rng.random() < 0.3:
            t = Sum(t, self._prefix(depth, bound))
        return t

    def process(self) -> LocatedProcess:
        rng = self.rng
        n = rng.randint(1, self.max_locations)
        comps = {i: self.guarded_sum() for i in range(n)}
        edges = [(a, b) for a in range(n) for b in range(a + 1, n) if rng.random() < 0.5]
        p = LocatedProcess.make(Graph.make(comps.keys(), edges), comps)
        if rng.random() < self.restrict_prob:
            p = p.restricted([rng.choice(SYMBOLS)])
        return p


def random_processes(count: int, seed: int = 0, **kw) -> list:
    gen = RandomProcesses(seed, **kw)
    return [gen.process() for _ in range(count)]


def process_corpus(random_count: int = 200, seed: int = 0) -> list:
    """Named processes: fixtures, compiled programs and seeded random processes."""
    from .translate import tr_config

    out = [(f"fixture:{name}", fixture_process(name), ()) for name in PROCESS_FIXTURES]
    for fx in PROGRAMS:
        tr = tr_config(program(fx.name))
        out.append((f"program:{fx.name}", tr.process, tr.env))
    for i, p in enumerate(random_processes(random_count, seed)):
        out.append((f"random:{seed}:{i}", p, ()))
    return out


__all__ = [
    "EXPANSION_PAR", "EXPANSION_SUM", "PROCESS_FIXTURES", "fixture_process", "ProgramFixture", "PROGRAMS",
    "SB_LITMUS", "MUTATION_PROGRAMS", "program", "cosim_programs", "race_programs", "SYMBOLS",
    "RandomProcesses", "random_processes", "process_corpus",
]
