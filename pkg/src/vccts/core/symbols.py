"""Action symbols and their co-symbols."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True, order=True)
class Symbol:
    """A symbol ``f`` of a given arity, or its co-symbol ``~f`` when ``co`` is set.

    The idle symbol ``*`` is the only symbol of arity 0 and is its own co-symbol.
    """

    name: str
    arity: int
    co: bool = False

    def __post_init__(self) -> None:
        if self.arity < 0:
            raise ValueError(f"negative arity for symbol {self.name!r}")
        if self.arity == 0 and self.name != "*":
            raise ValueError("only '*' may have arity 0")
        if self.name == "*" and (self.arity != 0 or self.co):
            raise ValueError("'*' is the plain arity-0 symbol")

    @property
    def bar(self) -> Symbol:
        if self.name == "*":
            return self
        return Symbol(self.name, self.arity, not self.co)

    @property
    def plain(self) -> Symbol:
        return Symbol(self.name, self.arity, False) if self.co else self

    def __str__(self) -> str:
        return ("~" if self.co else "") + self.name


STAR = Symbol("*", 0)


def sym(name: str, arity: int = 1) -> Symbol:
    """Plain symbol; a leading ``~`` yields the co-symbol."""
    if name.startswith("~"):
        return Symbol(name[1:], arity, True)
    return Symbol(name, arity)
