"""Integer and boolean expressions: free variables, substitution, evaluation."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Union


class EvalError(Exception):
    """Raised when an expression cannot be evaluated (unbound variable, bad operator)."""


@dataclass(frozen=True)
class Val:
    value: int

    def __str__(self) -> str:
        return str(self.value)


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self) -> str:
        return self.name


ARITH_OPS = ("+", "-", "*")


@dataclass(frozen=True)
class Op:
    op: str
    args: tuple

    def __post_init__(self) -> None:
        if self.op not in ARITH_OPS:
            raise ValueError(f"unknown operator {self.op!r}")
        if len(self.args) != 2:
            raise ValueError("arithmetic operators are binary")

    def __str__(self) -> str:
        left, right = self.args
        return f"({left} {self.op} {right})"


Expr = Union[Val, Var, Op]


@dataclass(frozen=True)
class BConst:
    value: bool

    def __str__(self) -> str:
        return "true" if self.value else "false"


@dataclass(frozen=True)
class Not:
    arg: "BExpr"

    def __str__(self) -> str:
        return f"not {_bparen(self.arg)}"


@dataclass(frozen=True)
class And:
    left: "BExpr"
    right: "BExpr"

    def __str__(self) -> str:
        return f"{_bparen(self.left)} and {_bparen(self.right)}"


@dataclass(frozen=True)
class Cmp:
    op: str  # "=" or "<"
    left: Expr
    right: Expr

    def __post_init__(self) -> None:
        if self.op not in ("=", "<"):
            raise ValueError(f"unknown comparison {self.op!r}")

    def __str__(self) -> str:
        return f"{self.left} {self.op} {self.right}"


BExpr = Union[BConst, Not, And, Cmp]


def _bparen(b: BExpr) -> str:
    return str(b) if isinstance(b, (BConst, Cmp)) else f"({b})"


def fv(e) -> frozenset:
    """Free variables of an arithmetic or boolean expression."""
    if isinstance(e, Var):
        return frozenset((e.name,))
    if isinstance(e, (Val, BConst)):
        return frozenset()
    if isinstance(e, Op):
        return fv(e.args[0]) | fv(e.args[1])
    if isinstance(e, Not):
        return fv(e.arg)
    if isinstance(e, (And, Cmp)):
        return fv(e.left) | fv(e.right)
    raise TypeError(f"not an expression: {e!r}")


def subst(e, mapping: Mapping[str, Expr]):
    """Simultaneous substitution of expressions for variables."""
    if not mapping:
        return e
    if isinstance(e, Var):
        return mapping.get(e.name, e)
    if isinstance(e, (Val, BConst)):
        return e
    if isinstance(e, Op):
        return Op(e.op, (subst(e.args[0], mapping), subst(e.args[1], mapping)))
    if isinstance(e, Not):
        return Not(subst(e.arg, mapping))
    if isinstance(e, And):
        return And(subst(e.left, mapping), subst(e.right, mapping))
    if isinstance(e, Cmp):
        return Cmp(e.op, subst(e.left, mapping), subst(e.right, mapping))
    raise TypeError(f"not an expression: {e!r}")


def eval_exp(e: Expr, env: Mapping[str, int] | None = None) -> int:
    if isinstance(e, Val):
        return e.value
    if isinstance(e, Var):
        if env is None or e.name not in env:
            raise EvalError(f"unbound variable {e.name!r}")
        return env[e.name]
    if isinstance(e, Op):
        a = eval_exp(e.args[0], env)
        b = eval_exp(e.args[1], env)
        if e.op == "+":
            return a + b
        if e.op == "-":
            return a - b
        return a * b
    raise EvalError(f"not an arithmetic expression: {e!r}")


def eval_bexp(b: BExpr, env: Mapping[str, int] | None = None) -> bool:
    if isinstance(b, BConst):
        return b.value
    if isinstance(b, Not):
        return not eval_bexp(b.arg, env)
    if isinstance(b, And):
        return eval_bexp(b.left, env) and eval_bexp(b.right, env)
    if isinstance(b, Cmp):
        left, right = eval_exp(b.left, env), eval_exp(b.right, env)
        return left == right if b.op == "=" else left < right
    raise EvalError(f"not a boolean expression: {b!r}")


def as_expr(x) -> Expr:
    """Coerce ints and names to expressions (test/fixture convenience)."""
    if isinstance(x, bool):
        raise TypeError("booleans are not arithmetic values")
    if isinstance(x, int):
        return Val(x)
    if isinstance(x, str):
        return Var(x)
    return x
