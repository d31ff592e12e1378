"""Concrete syntax for programs.

::

    program ::= [init x = 1, a = 0 ;] thread (|| thread)*
    thread  ::= [ '[' r1 = v, ... ']' ] cmd
    cmd     ::= simple (; cmd)?
    simple  ::= skip | x := e | r := x | r := a.load(sc|acq) | a.store(e, sc|rel)
              | l.lock() | l.unlock() | print e | thread t({ cmd }(r), e)
              | if b then simple else simple | while b do simple | { cmd }

Names matching ``r``, ``r1``, ``r_foo`` are registers; everything else is a
shared variable or lock, classified by how it is used.
"""

from __future__ import annotations

import re

from ..core.expr import fv
from ..core.parser import ParseError, TokenStream, parse_bexp, parse_exp
from .ast import (
    SKIP, ALoad, Assign, Command, Fork, GlobalConfig, If, Load, Lock, Print, Seq, Skip, Store,
    Thread, Unlock, While, is_register, names_used, subcommands,
)

_TOKEN = re.compile(r"""
    (?P<ws>\s+|\#[^\n]*)
  | (?P<par>\|\|)
  | (?P<assign>:=)
  | (?P<num>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<punct>[(){}\[\],;.+\-*=<])
""", re.VERBOSE)

KEYWORDS = {"skip", "print", "thread", "if", "then", "else", "while", "do", "init",
            "true", "false", "not", "and"}


class ProgramError(ValueError):
    """A syntactically valid program that violates a well-formedness rule."""


def tokenize(text: str) -> list:
    toks, pos = [], 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", text, pos)
        kind = m.lastgroup
        if kind != "ws":
            val = m.group(kind)
            if kind == "ident" and val in KEYWORDS:
                kind = val
            elif kind in ("punct", "assign"):
                kind = val
            elif kind == "par":
                kind = "||"
            toks.append((kind, val, pos))
        pos = m.end()
    toks.append(("eof", "", len(text)))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.ts = TokenStream(text, tokenize(text))

    def program(self) -> tuple:
        ts = self.ts
        init = {}
        if ts.accept("init"):
            while True:
                name = ts.expect("ident")[1]
                ts.expect("=")
                init[name] = self.integer()
                if not ts.accept(","):
                    break
            ts.expect(";")
        if ts.at("eof"):  # the empty program has no threads
            return init, []
        threads = [self.thread()]
        while ts.accept("||"):
            threads.append(self.thread())
        ts.expect("eof")
        return init, threads

    def integer(self) -> int:
        neg = self.ts.accept("-")
        v = int(self.ts.expect("num")[1])
        return -v if neg else v

    def thread(self) -> tuple:
        ts = self.ts
        local = {}
        if ts.accept("["):
            while not ts.at("]"):
                kind, name, pos = ts.expect("ident")
                if not is_register(name):
                    raise ParseError(f"{name!r} is not a register name", ts.text, pos)
                ts.expect("=")
                local[name] = self.integer()
                if not ts.accept(","):
                    break
            ts.expect("]")
        return local, self.command()

    def command(self) -> Command:
        first = self.simple()
        if self.ts.accept(";"):
            if self.ts.at("}", "||", "eof"):  # tolerate a trailing semicolon
                return first
            return Seq(first, self.command())
        return first

    def simple(self) -> Command:
        ts = self.ts
        kind, val, pos = ts.peek()
        if ts.accept("{"):
            c = self.command()
            ts.expect("}")
            return c
        if ts.accept("skip"):
            return SKIP
        if ts.accept("print"):
            return Print(self.exp())
        if ts.accept("if"):
            b = self.bexp()
            ts.expect("then")
            c1 = self.simple()
            ts.expect("else")
            return If(b, c1, self.simple())
        if ts.accept("while"):
            b = self.bexp()
            ts.expect("do")
            return While(b, self.simple())
        if ts.accept("thread"):
            tid = ts.expect("ident")[1]
            ts.expect("(")
            ts.expect("{")
            body = self.command()
            ts.expect("}")
            ts.expect("(")
            _, param, ppos = ts.expect("ident")
            if not is_register(param):
                raise ParseError(f"thread argument {param!r} must be a register", ts.text, ppos)
            ts.expect(")")
            ts.expect(",")
            arg = self.exp()
            ts.expect(")")
            return Fork(tid, body, param, arg)
        if kind == "ident":
            ts.next()
            if ts.accept("."):
                method = ts.expect("ident")[1]
                ts.expect("(")
                if method == "store":
                    e = self.exp()
                    ts.expect(",")
                    mo = self.order(("sc", "rel"))
                    ts.expect(")")
                    return Store(val, e, mo)
                ts.expect(")")
                if method == "lock":
                    return Lock(val)
                if method == "unlock":
                    return Unlock(val)
                raise ParseError(f"unknown method {method!r}", ts.text, pos)
            ts.expect(":=")
            if is_register(val):
                _, src, spos = ts.expect("ident")
                if is_register(src):
                    raise ParseError("registers can only be loaded from shared variables", ts.text, spos)
                if ts.accept("."):
                    if ts.expect("ident")[1] != "load":
                        raise ParseError("expected 'load'", ts.text, spos)
                    ts.expect("(")
                    mo = self.order(("sc", "acq"))
                    ts.expect(")")
                    return ALoad(val, src, mo)
                return Load(val, src)
            return Assign(val, self.exp())
        ts.fail("expected a command")

    def order(self, allowed: tuple) -> str:
        _, mo, pos = self.ts.expect("ident")
        if mo not in allowed:
            raise ParseError(f"memory order must be one of {', '.join(allowed)}", self.ts.text, pos)
        return mo

    def exp(self):
        return self._registers_only(parse_exp)

    def bexp(self):
        return self._registers_only(parse_bexp)

    def _registers_only(self, parse):
        _, _, pos = self.ts.peek()
        e = parse(self.ts)
        bad = sorted(n for n in fv(e) if not is_register(n))
        if bad:
            raise ParseError(f"expressions may only mention registers, found {bad[0]!r}", self.ts.text, pos)
        return e


def parse_command(text: str) -> Command:
    p = _Parser(text)
    c = p.command()
    p.ts.expect("eof")
    return c


def parse_program(text: str) -> GlobalConfig:
    """Parse a program into its initial global configuration (validated)."""
    init, threads = _Parser(text).program()
    return make_config([(local, cmd) for local, cmd in threads], init)


def make_config(threads: list, init: dict | None = None, held=()) -> GlobalConfig:
    """Initial configuration: every used variable is allocated (default 0) and
    every used lock is available unless listed in ``held``."""
    init = dict(init or {})
    normal, atomic, locks = set(), set(), set(held)
    for _, cmd in threads:
        used = names_used(cmd)
        normal |= used["normal"]
        atomic |= used["atomic"]
        locks |= used["lock"]
    clash = (normal & atomic) | (normal & locks) | (atomic & locks)
    if clash:
        raise ProgramError(f"name used as more than one kind of resource: {sorted(clash)[0]}")
    for name in init:
        if name in locks:
            raise ProgramError(f"lock {name!r} cannot be initialised with a value")
    memory = {name: 0 for name in normal | atomic}
    memory.update(init)
    ts = [Thread.make(dict(local), cmd) for local, cmd in threads]
    config = GlobalConfig.make(memory, locks - set(held), held, ts, atomic)
    validate(config)
    return config


def validate(config: GlobalConfig) -> None:
    """Registers distinct across threads; no fork as a thread's last command;
    no fork inside a loop (it would re-use the child's register)."""
    owner: dict = {}

    def claim(reg: str, who: int) -> None:
        if owner.setdefault(reg, who) != who:
            raise ProgramError(f"register {reg!r} is used by more than one thread")

    counter = [len(config.threads)]

    def walk(cmd: Command, who: int, in_loop: bool) -> None:
        for sub in _own(cmd):
            if isinstance(sub, (Load, ALoad)):
                claim(sub.reg, who)
            for e in _exprs(sub):
                for r in fv(e):
                    claim(r, who)
            if isinstance(sub, Fork):
                if in_loop or _inside_loop(cmd, sub):
                    raise ProgramError("thread creation inside a loop is not supported")
                counter[0] += 1
                child = counter[0]
                claim(sub.param, child)
                walk(sub.body, child, False)

    for i, t in enumerate(config.threads):
        for reg, _ in t.locals:
            claim(reg, i)
        if _last(t.cmd, Fork):
            raise ProgramError("thread creation cannot be the last command of a thread")
        walk(t.cmd, i, False)


def _own(c: Command):
    yield c
    if isinstance(c, Seq):
        yield from _own(c.first)
        yield from _own(c.second)
    elif isinstance(c, If):
        yield from _own(c.then)
        yield from _own(c.orelse)
    elif isinstance(c, While):
        yield from _own(c.body)


def _exprs(c: Command):
    if isinstance(c, (Assign, Store, Print)):
        yield c.expr
    elif isinstance(c, (If, While)):
        yield c.cond
    elif isinstance(c, Fork):
        yield c.arg


def _inside_loop(root: Command, target: Command) -> bool:
    for sub in _own(root):
        if isinstance(sub, While) and any(s is target for s in subcommands(sub.body)):
            return True
    return False


def _last(c: Command, kind: type) -> bool:
    while isinstance(c, Seq):
        c = c.second
    return isinstance(c, kind)


def format_program(config: GlobalConfig) -> str:
    init = ", ".join(f"{k} = {v}" for k, v in config.memory if v != 0)
    threads = []
    for t in config.threads:
        prefix = ("[" + ", ".join(f"{r} = {v}" for r, v in t.locals) + "] ") if t.locals else ""
        threads.append(prefix + str(t.cmd))
    head = f"init {init};\n" if init else ""
    return head + "\n|| ".join(threads)


__all__ = ["ProgramError", "parse_program", "parse_command", "make_config", "validate",
           "format_program", "Skip"]
