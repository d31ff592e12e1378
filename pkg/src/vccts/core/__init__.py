"""Syntax of located value-passing processes."""

from .canon import canonical_form, canonical_key, canonical_rename
from .expr import (
    And, BConst, Cmp, EvalError, Not, Op, Val, Var, as_expr, eval_bexp, eval_exp,
)
from .graph import Graph, GraphError, graph_subst, oplus_graph
from .located import (
    LocatedProcess, located_from, oplus, par, singleton, subst_loc, to_located,
)
from .parser import ParseError, parse_located, parse_process
from .symbols import STAR, Symbol, sym
from .terms import (
    IDLE, ZERO, Cond, GraphComp, Idle, IllFormedError, InPrefix, Kind, OutPrefix, ProcVar,
    Rec, Restrict, Sum, Term, classify, cs, format_term, in_prefix, is_canonical,
    out_prefix, seq, sort, subst_data, subst_procvar, sum_of, unfold,
)

__all__ = [name for name in dir() if not name.startswith("_")]
