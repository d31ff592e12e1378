"""Abstract syntax of the toy concurrent language and its run-time states."""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..core.expr import And, BConst, Cmp, Not, Op, Val, Var, fv

REGISTER = re.compile(r"^r(\d+|_\w+)?$")


def is_register(name: str) -> bool:
    return bool(REGISTER.match(name))


class Command:
    def __str__(self) -> str:
        return format_command(self)


@dataclass(frozen=True)
class Skip(Command):
    __str__ = Command.__str__


@dataclass(frozen=True)
class Assign(Command):
    """``x := e`` for a normal shared variable."""

    var: str
    expr: object
    __str__ = Command.__str__


@dataclass(frozen=True)
class Load(Command):
    """``r := x``."""

    reg: str
    var: str
    __str__ = Command.__str__


@dataclass(frozen=True)
class Store(Command):
    """``a.store(e, mo)`` with ``mo`` in {sc, rel}."""

    var: str
    expr: object
    order: str
    __str__ = Command.__str__

    def __post_init__(self) -> None:
        if self.order not in ("sc", "rel"):
            raise ValueError(f"store order must be sc or rel, not {self.order}")


@dataclass(frozen=True)
class ALoad(Command):
    """``r := a.load(mo)`` with ``mo`` in {sc, acq}."""

    reg: str
    var: str
    order: str
    __str__ = Command.__str__

    def __post_init__(self) -> None:
        if self.order not in ("sc", "acq"):
            raise ValueError(f"load order must be sc or acq, not {self.order}")


@dataclass(frozen=True)
class Lock(Command):
    lock: str
    __str__ = Command.__str__


@dataclass(frozen=True)
class Unlock(Command):
    lock: str
    __str__ = Command.__str__


@dataclass(frozen=True)
class Print(Command):
    expr: object
    __str__ = Command.__str__


@dataclass(frozen=True)
class Fork(Command):
    """``thread t(C(r), e)``."""

    tid: str
    body: Command
    param: str
    arg: object
    __str__ = Command.__str__


@dataclass(frozen=True)
class Seq(Command):
    first: Command
    second: Command
    __str__ = Command.__str__


@dataclass(frozen=True)
class If(Command):
    cond: object
    then: Command
    orelse: Command
    __str__ = Command.__str__


@dataclass(frozen=True)
class While(Command):
    cond: object
    body: Command
    __str__ = Command.__str__


SKIP = Skip()
PRIMITIVES = (Assign, Load, Store, ALoad, Lock, Unlock, Print)


def seq_of(*cmds: Command) -> Command:
    cmds = [c for c in cmds]
    if not cmds:
        return SKIP
    acc = cmds[-1]
    for c in reversed(cmds[:-1]):
        acc = Seq(c, acc)
    return acc


# ---------------------------------------------------------------- printing

def _block(c: Command) -> str:
    if isinstance(c, (Seq, If, While)):
        return "{ " + format_command(c) + " }"
    return format_command(c)


def format_command(c: Command) -> str:
    if isinstance(c, Skip):
        return "skip"
    if isinstance(c, Assign):
        return f"{c.var} := {c.expr}"
    if isinstance(c, Load):
        return f"{c.reg} := {c.var}"
    if isinstance(c, Store):
        return f"{c.var}.store({c.expr}, {c.order})"
    if isinstance(c, ALoad):
        return f"{c.reg} := {c.var}.load({c.order})"
    if isinstance(c, Lock):
        return f"{c.lock}.lock()"
    if isinstance(c, Unlock):
        return f"{c.lock}.unlock()"
    if isinstance(c, Print):
        return f"print {c.expr}"
    if isinstance(c, Fork):
        return f"thread {c.tid}({{ {format_command(c.body)} }}({c.param}), {c.arg})"
    if isinstance(c, Seq):
        first = format_command(c.first) if not isinstance(c.first, Seq) else "{ " + format_command(c.first) + " }"
        return f"{first}; {format_command(c.second)}"
    if isinstance(c, If):
        return f"if {c.cond} then {_block(c.then)} else {_block(c.orelse)}"
    if isinstance(c, While):
        return f"while {c.cond} do {_block(c.body)}"
    raise TypeError(f"not a command: {c!r}")


# ---------------------------------------------------------------- analysis

def subcommands(c: Command):
    yield c
    if isinstance(c, Seq):
        yield from subcommands(c.first)
        yield from subcommands(c.second)
    elif isinstance(c, If):
        yield from subcommands(c.then)
        yield from subcommands(c.orelse)
    elif isinstance(c, While):
        yield from subcommands(c.body)
    elif isinstance(c, Fork):
        yield from subcommands(c.body)


def _exprs(c: Command):
    if isinstance(c, (Assign, Store, Print)):
        yield c.expr
    elif isinstance(c, Fork):
        yield c.arg
    elif isinstance(c, (If, While)):
        yield c.cond


def registers(c: Command) -> frozenset:
    """Registers written or read by a command (forked bodies excluded)."""
    out = set()
    for sub in _own_subcommands(c):
        if isinstance(sub, (Load, ALoad)):
            out.add(sub.reg)
        for e in _exprs(sub):
            out |= fv(e)
    return frozenset(out)


def _own_subcommands(c: Command):
    yield c
    if isinstance(c, Seq):
        yield from _own_subcommands(c.first)
        yield from _own_subcommands(c.second)
    elif isinstance(c, If):
        yield from _own_subcommands(c.then)
        yield from _own_subcommands(c.orelse)
    elif isinstance(c, While):
        yield from _own_subcommands(c.body)


def assigned_registers(c: Command) -> tuple:
    """Registers loaded into by ``c`` itself (sorted)."""
    return tuple(sorted({s.reg for s in _own_subcommands(c) if isinstance(s, (Load, ALoad))}))


def names_used(c: Command) -> dict:
    """Classify shared names by use: ``{"normal": ..., "atomic": ..., "lock": ...}``."""
    normal, atomic, locks = set(), set(), set()
    for sub in subcommands(c):
        if isinstance(sub, (Assign, Load)):
            normal.add(sub.var)
        elif isinstance(sub, (Store, ALoad)):
            atomic.add(sub.var)
        elif isinstance(sub, (Lock, Unlock)):
            locks.add(sub.lock)
    return {"normal": normal, "atomic": atomic, "lock": locks}


@dataclass(frozen=True)
class Thread:
    locals: tuple  # sorted ((register, value), ...)
    cmd: Command

    @property
    def local_map(self) -> dict:
        return dict(self.locals)

    @staticmethod
    def make(locals_: dict, cmd: Command) -> Thread:
        return Thread(tuple(sorted(locals_.items())), cmd)

    def sort_key(self) -> tuple:
        return (str(self.cmd), self.locals)


@dataclass(frozen=True)
class GlobalConfig:
    memory: tuple  # sorted ((name, value), ...) over normal and atomic variables
    atomics: frozenset
    available: frozenset
    busy: frozenset
    threads: tuple  # sorted multiset of Thread

    def __post_init__(self) -> None:
        if self.available & self.busy:
            raise ValueError("a lock cannot be both available and busy")

    @staticmethod
    def make(memory: dict, available=(), busy=(), threads=(), atomics=()) -> GlobalConfig:
        return GlobalConfig(tuple(sorted(memory.items())), frozenset(atomics), frozenset(available),
                            frozenset(busy), tuple(sorted(threads, key=Thread.sort_key)))

    def replace(self, memory=None, available=None, busy=None, threads=None) -> GlobalConfig:
        return GlobalConfig.make(self.memory_map if memory is None else memory,
                                 self.available if available is None else available,
                                 self.busy if busy is None else busy,
                                 self.threads if threads is None else threads, self.atomics)

    @property
    def normal_vars(self) -> tuple:
        return tuple(k for k, _ in self.memory if k not in self.atomics)

    @property
    def atomic_vars(self) -> tuple:
        return tuple(k for k, _ in self.memory if k in self.atomics)

    @property
    def locks(self) -> frozenset:
        return self.available | self.busy

    @property
    def memory_map(self) -> dict:
        return dict(self.memory)

    def __str__(self) -> str:
        mem = ", ".join(f"{k}={v}" for k, v in self.memory)
        threads = " || ".join(
            (("[" + ", ".join(f"{r}={v}" for r, v in t.locals) + "] ") if t.locals else "") + str(t.cmd)
            for t in self.threads)
        locks = ""
        if self.available or self.busy:
            locks = f" locks free={sorted(self.available)} held={sorted(self.busy)}"
        return f"<{mem}{locks} | {threads}>"


__all__ = [
    "And", "BConst", "Cmp", "Not", "Op", "Val", "Var",
    "Command", "Skip", "SKIP", "Assign", "Load", "Store", "ALoad", "Lock", "Unlock", "Print", "Fork",
    "Seq", "If", "While", "Thread", "GlobalConfig", "is_register", "seq_of", "format_command",
    "registers", "assigned_registers", "names_used", "subcommands", "PRIMITIVES",
]
