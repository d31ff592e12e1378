import pytest
from hypothesis import given, settings

from strategies import bijections, processes
from vccts.core import (
    IDLE, ZERO, And, BConst, Cmp, EvalError, Graph, GraphError, IllFormedError, Kind, Not, Op,
    ParseError, ProcVar, Rec, STAR, Symbol, Val, Var, canonical_form, canonical_rename, classify, cs,
    eval_bexp, eval_exp, format_term, graph_subst, located_from, oplus, par, parse_located,
    parse_process, seq, singleton, sort, subst_data, subst_loc, subst_procvar, sym, to_located,
)
from vccts.core.canon import is_isomorphic_bruteforce
from vccts.corpus import PROCESS_FIXTURES, random_processes
from vccts.translate import variable_process


# ---------------------------------------------------------------- symbols and graphs

def test_star_is_self_dual_and_co_is_involution():
    assert STAR.bar == STAR
    f = sym("f")
    assert f.bar.bar == f and f.bar != f
    with pytest.raises(ValueError):
        Symbol("g", 0)


def test_graph_rejects_self_loops():
    with pytest.raises(GraphError):
        Graph.make((0,), [(0, 0)])


def test_graph_subst_inherits_neighbours():
    g = Graph.make((0, 1), [(0, 1)])
    h = Graph.make((2, 3))
    out = graph_subst(g, h, 0)
    assert out.vertices == {1, 2, 3}
    assert out.edges == {(1, 2), (1, 3)}


def test_graph_subst_singleton_renames():
    g = Graph.make((0, 1), [(0, 1)])
    assert graph_subst(g, Graph.make((5,)), 0) == Graph.make((1, 5), [(1, 5)])


def test_graph_subst_only_vertex_gives_h():
    h = Graph.make((2, 3), [(2, 3)])
    assert graph_subst(Graph.make((0,)), h, 0) == h


def test_graph_subst_errors():
    g = Graph.make((0, 1), [(0, 1)])
    with pytest.raises(GraphError):
        graph_subst(g, Graph.make((1, 2)), 0)
    with pytest.raises(GraphError):
        graph_subst(g, Graph.make((2,)), 7)


def test_oplus_variants():
    p = singleton(parse_process("~f(1).(0)"), 0)
    q = singleton(parse_process("f(x).(0)"), 1)
    assert oplus(p, q).graph.edges == frozenset()
    assert oplus(p, q, [(0, 1)]).graph.edges == {(0, 1)}
    assert par(p, q).graph.edges == {(0, 1)}
    with pytest.raises(GraphError):
        oplus(p, p)
    with pytest.raises(IllFormedError):
        oplus(p.restricted([sym("f")]), q)


def test_subst_loc_splices_component():
    p = parse_located("~f(1).(0) | f(x).(0)")
    q = located_from({5: IDLE, 6: parse_process("~g(0).(*)")}, [(5, 6)])
    out = subst_loc(p, q, 0)
    assert out.graph.edges == {(1, 5), (1, 6), (5, 6)}
    assert out[5] == IDLE and out[1] == p[1]
    single = subst_loc(p, singleton(IDLE, 9), 0)
    assert single[9] == IDLE and single.graph.edges == {(1, 9)}


# ---------------------------------------------------------------- sort, cs, substitution

def test_sort_examples():
    assert sort(parse_process("*")) == frozenset()
    assert sort(parse_process("f(x).(0) \\ {f}")) == frozenset()
    assert sort(variable_process("x", 0)) == {sym("write_x"), sym("read_x")}


def test_cs_unfolds_variable_process_once():
    t = variable_process("x", 0)
    once = cs(t)
    assert classify(once) is Kind.CGS
    assert format_term(once) == (
        "write_x(y).(mu X_x(z := y). write_x(y).(X_x(y)) + ~read_x(z).(X_x(z))) + "
        "~read_x(0).(mu X_x(z := 0). write_x(y).(X_x(y)) + ~read_x(z).(X_x(z)))")
    assert cs(once) == once


def test_cs_nested_and_unguarded():
    assert format_term(cs(parse_process("mu X. mu Y. (f(z).(*) + 0)"))) == "f(z).(*) + 0"
    with pytest.raises(IllFormedError):
        cs(Rec("X", ProcVar("X")))


def test_subst_data_examples():
    bound = parse_process("f(x).(~g(x).(*))")
    assert subst_data(bound, {"x": Val(3)}) == bound
    cond = parse_process("if y = 0 then ~f(y).(*) else ~g(1).(*)")
    assert format_term(subst_data(cond, {"y": Val(0)})) == "if 0 = 0 then ~f(0).(*) else ~g(1).(*)"
    assert subst_data(variable_process("x", 0), {"y": Val(1)}) == variable_process("x", 0)


def test_subst_data_avoids_capture():
    t = parse_process("f(x).(~g(y).(*))")
    out = subst_data(t, {"y": Var("x")})
    assert "g(x)" in format_term(out)
    assert not format_term(out).startswith("f(x)")


def test_subst_procvar_trivial_cases():
    p = parse_process("~f(1).(*)")
    assert subst_procvar(ProcVar("X"), "X", p) == p
    assert subst_procvar(p, "X", IDLE) == p


def test_seq_examples():
    w = parse_process("~write_x(1).(*)")
    assert seq(IDLE, w) == w
    assert seq(w, IDLE) == w
    assert format_term(seq(w, parse_process("~write_y(2).(*)"))) == "~write_x(1).(~write_y(2).(*))"


def test_classify_examples():
    assert classify(ZERO) is Kind.CGS
    assert classify(parse_process("0 + (~a(0).(*) | ~b(0).(*))")) is Kind.NOT_CANONICAL
    assert classify(parse_process("mu X. ~f(1).(X)")) is Kind.RCGS
    assert classify(parse_process("~f(1).(0) | ~g(2).(0)")) is Kind.CP


def test_eval():
    assert eval_exp(Op("+", (Val(1), Val(2)))) == 3
    assert eval_exp(Var("r"), {"r": 5}) == 5
    assert eval_bexp(Not(Cmp("=", Val(1), Val(2))))
    assert not eval_bexp(And(BConst(True), BConst(False)))
    with pytest.raises(EvalError):
        eval_exp(Var("r"), {})


# ---------------------------------------------------------------- parsing

@pytest.mark.parametrize("name", sorted(PROCESS_FIXTURES))
def test_fixture_round_trip(name):
    t = parse_process(PROCESS_FIXTURES[name])
    assert parse_process(format_term(t)) == t


def test_parse_examples():
    assert parse_process("*") == IDLE
    left = to_located(parse_process("~f(1).(0) | ~g(2).(0)"))
    assert len(left) == 2 and left.graph.edges == {(0, 1)}
    with pytest.raises(ParseError):  # one symbol used with two arities
        parse_process("~f(1).(0, 0) + ~f(1).(0)")
    with pytest.raises(ParseError) as exc:
        parse_process("f(x).(")
    assert "line 1" in str(exc.value)


@settings(max_examples=60, deadline=None)
@given(processes())
def test_random_round_trip(p):
    t = p.to_term()
    assert parse_process(format_term(t)) == t


# ---------------------------------------------------------------- canonical renaming

@settings(max_examples=60, deadline=None)
@given(processes(max_locations=5).flatmap(lambda p: bijections(p).map(lambda m: (p, m))))
def test_canonical_rename_invariant_under_bijection(pm):
    p, m = pm
    q = p.renamed(m)
    assert canonical_rename(p) == canonical_rename(q)
    assert canonical_rename(canonical_rename(p)) == canonical_rename(p)


def test_canonical_collisions_are_isomorphisms():
    seen = {}
    for p in random_processes(300, seed=11, max_locations=6):
        seen.setdefault(canonical_rename(p).key, []).append(p)
    for group in seen.values():
        for q in group[1:]:
            assert is_isomorphic_bruteforce(group[0], q)


def test_canonical_mapping_is_bijection():
    p = parse_located("~f(1).(0) | ~f(1).(0) | g(x).(*)")
    c, m = canonical_form(p)
    assert sorted(m.values()) == list(range(len(p)))
    assert p.renamed(m) == c


@settings(max_examples=40, deadline=None)
@given(processes())
def test_subst_procvar_preserves_class(p):
    # splice each component into a recursive template and check the class
    templates = [parse_process("mu Y. f(v).(Z) + ~g(1).(Y)"), parse_process("~h(0).(Z)"),
                 parse_process("~h(0).(Z) | g(v).(Z)")]
    for _, t in p.comps:
        for r in templates:
            assert classify(subst_procvar(r, "Z", t)) is classify(r)


def test_seq_associative_on_linear_terms():
    p = parse_process("~f(1).(*) + g(x).(*)")
    q = parse_process("~h(2).(*)")
    r = parse_process("f(y).(~g(y).(*))")
    assert seq(p, seq(q, r)) == seq(seq(p, q), r)
