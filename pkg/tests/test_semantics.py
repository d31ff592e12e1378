from hypothesis import given, settings

from strategies import processes
from vccts.core import IDLE, canonical_rename, is_canonical, parse_located, parse_process, sym
from vccts.core.located import located_from
from vccts.corpus import random_processes
from vccts.semantics import (
    TAU, Action, LocLabel, act_of, all_event_orders, barbs_rcgs, has_barb, has_barb_bruteforce,
    multi_steps, punrel, reduce_steps, run_events_in_order, same_outcome, serialize, single_steps,
    tau_star,
)
from vccts.translate import variable_process


def label(loc, name, value, co=False, sets=(frozenset(),)):
    return LocLabel(loc, Action(sym(("~" if co else "") + name), value), sets)


# ---------------------------------------------------------------- reduction

def test_write_reduces_against_variable_process():
    p = located_from({0: parse_process("~write_x(1).(*)"), 1: variable_process("x", 0)}, [(0, 1)])
    (target, res), = reduce_steps(p)
    assert res.pairs == ((2, 0), (3, 1))
    assert target[2] == IDLE
    assert target[3] == variable_process("x", 1)


def test_no_reduction_without_edge():
    assert reduce_steps(parse_located("f(x).(0) (+) ~f(1).(0)")) == []


def test_restriction_does_not_block_reduction():
    assert len(reduce_steps(parse_located("(f(x).(0) | ~f(1).(0)) \\ {f}"))) == 1


# ---------------------------------------------------------------- barbs

def test_barbs_rcgs_examples():
    assert barbs_rcgs(parse_process("f(x).(0) + ~g(1).(0)")) == {sym("f"), sym("~g")}
    assert barbs_rcgs(parse_process("0")) == frozenset()
    assert barbs_rcgs(parse_process("if 1 = 1 then f(x).(0) + 0 else ~g(1).(0)")) == {sym("f")}


def test_has_barb_examples():
    p = parse_located("~f(1).(0) (+) ~g(2).(0)")
    assert has_barb(p, [sym("~f"), sym("~g")])
    assert not has_barb(p, [sym("~f"), sym("~f")])
    assert not has_barb(parse_located("~f(1).(0) \\ {f}"), [sym("~f")])


@settings(max_examples=80, deadline=None)
@given(processes(max_locations=5))
def test_has_barb_matches_bruteforce(p):
    syms = [sym(n) for n in ("f", "~f", "g", "~g", "h", "~k")]
    for a in syms:
        for b in syms:
            for req in ([a], [a, b], [a, b, a]):
                assert has_barb(p, req) == has_barb_bruteforce(p, req)


# ---------------------------------------------------------------- transitions

def test_input_steps_enumerate_domain():
    steps = single_steps(parse_located("f(x).(*)"), (0, 1))
    assert [str(s.label) for s in steps] == ["0:f0.({1})", "0:f1.({1})"]


def test_output_evaluates_expression():
    (s,) = single_steps(parse_located("~f((1 + 1)).(*)"))
    assert s.label.action.value == 2


def test_restriction_hides_observables():
    assert not single_steps(parse_located("~f(1).(*) \\ {f}"))


def test_two_independent_writes_fire_together():
    p = parse_located("~write_x(1).(*) (+) ~write_y(2).(*)")
    big = [m for m in multi_steps(p, max_size=2) if m.size == 2]
    assert len(big) == 1
    m = big[0]
    assert [str(d) for d in m.labels] == ["0:~write_x1.({2})", "1:~write_y2.({3})"]
    assert all(t == IDLE for _, t in m.target.comps)


def test_same_symbol_never_fires_twice():
    p = parse_located("~f(1).(0) (+) ~f(1).(0)")
    assert all(m.size == 1 for m in multi_steps(p, max_size=2))


def test_complementary_pair_collapses_to_tau():
    p = parse_located("f(x).(*) | ~f(1).(*)")
    labels = [m.labels for m in multi_steps(p, max_size=2)]
    assert (TAU,) in labels
    assert not any(len(ls) == 2 and ls[0].action.bar == ls[1].action for ls in labels)


def test_punrel_examples():
    assert punrel([TAU, TAU])
    assert not punrel([label(0, "f", 0), label(1, "f", 1)])
    assert punrel([label(0, "f", 0), label(1, "f", 0, co=True)])


def test_tau_star_examples():
    inert = parse_located("~f(1).(0)")
    assert tau_star(inert, 5) == [(inert, tau_star(inert, 0)[0][1])]
    one = parse_located("f(x).(*) | ~f(1).(*)")
    assert len(tau_star(one, 0)) == 1
    assert len(tau_star(one, 3)) == 2


@settings(max_examples=60, deadline=None)
@given(processes())
def test_single_and_multi_agree_at_size_one(p):
    singles = {(str(s.label), canonical_rename(s.target).key) for s in single_steps(p)}
    multis = {(str(m.labels[0]), canonical_rename(m.target).key) for m in multi_steps(p, max_size=1)}
    assert singles == multis


@settings(max_examples=60, deadline=None)
@given(processes())
def test_step_targets_stay_canonical_and_residuals_total(p):
    for m in multi_steps(p, max_size=3):
        assert is_canonical(m.target.to_term()).value != "not-canonical"
        assert m.residual.domain() == set(m.target.locations)
        assert set(m.residual.mapping.values()) <= set(p.locations)
        locs = [d.loc for d in m.observables]
        assert len(locs) == len(set(locs))


@settings(max_examples=60, deadline=None)
@given(processes())
def test_restricted_labels_never_escape(p):
    hidden = p.restricted([sym("f"), sym("g")])
    for m in multi_steps(hidden, max_size=2):
        assert all(d.action.symbol.name not in ("f", "g") for d in m.observables)


# ---------------------------------------------------------------- diamond and serialization

def test_serialize_two_writes_both_orders():
    p = parse_located("~write_x(1).(*) (+) ~write_y(2).(*)")
    m = next(m for m in multi_steps(p, max_size=2) if m.size == 2)
    orders = serialize(p, m)
    assert sorted(str(seq[0]) for seq in orders) == ["0:~write_x1.({2})", "1:~write_y2.({2})"]


def test_serialize_singleton_is_itself():
    p = parse_located("~f(1).(*)")
    (m,) = multi_steps(p, max_size=1)
    assert [[str(d) for d in s] for s in serialize(p, m)] == [["0:~f1.({1})"]]


def test_three_way_disjoint_union_all_orders():
    p = parse_located("~f(1).(*) (+) ~g(1).(*) (+) ~h(1).(*)")
    m = next(m for m in multi_steps(p, max_size=3) if m.size == 3)
    assert len(serialize(p, m)) == 6
    assert all(same_outcome(run_events_in_order(p, m, o), (m.target, m.residual))
               for o in all_event_orders(m))


def test_diamond_on_small_random_corpus():
    for p in random_processes(60, seed=5):
        for m in multi_steps(p, max_size=2):
            if m.size == 2 and punrel(m.labels):
                for o in all_event_orders(m):
                    assert same_outcome(run_events_in_order(p, m, o), (m.target, m.residual))
                assert serialize(p, m)


def test_act_of():
    assert act_of(TAU) is TAU
    assert act_of(label(0, "f", 3)) == Action(sym("f"), 3)
