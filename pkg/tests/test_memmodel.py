import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vccts.core import format_term, sym
from vccts.corpus import MUTATION_PROGRAMS, PROGRAMS, SB_LITMUS, program, race_programs
from vccts.lang import parse_program
from vccts.memmodel import (
    behaviors, cfl, closure, closure_behaviors, conflict_free, conflicts, drf_crosscheck, format_position,
    in_cfl, normal_access, reorder_candidates, transform_soundness_check, tso_candidates,
)
from vccts.translate import tr_config

W, R = sym("write_x").bar, sym("read_x")


def compiled(src):
    tr = tr_config(parse_program(src))
    return tr.process, tr.env


def rewrites(src, fn):
    p, _ = compiled(src)
    return [(rule, format_term(q[pos[0]])) for rule, pos, q in fn(p)]


# ---------------------------------------------------------------- conflicts

def test_cfl_membership():
    assert in_cfl(W, R) and in_cfl(R, W) and in_cfl(W, W)
    assert not in_cfl(R, R)
    assert not in_cfl(W, sym("read_y"))
    assert not in_cfl(sym("write_a^rel").bar, sym("read_a^acq"))
    assert normal_access(sym("write_x")) is None  # memory side, not thread side
    assert cfl(["x"]) == {(R, W), (W, W), (W, R)}


@given(st.sampled_from(sorted(cfl(["x", "y"]) | {(R, R), (W, sym("read_y"))})))
def test_cfl_symmetric(pair):
    a, b = pair
    assert in_cfl(a, b) == in_cfl(b, a)


def test_conflict_examples():
    p, env = compiled("x := 1 || r1 := x")
    assert conflicts(p) and not conflict_free(p, env)
    p, env = compiled("x := 1 || y := 2")
    assert not conflicts(p) and conflict_free(p, env)
    p, env = compiled(SB_LITMUS)
    report = conflict_free(p, env)
    assert not report and report.trace and report.pair is not None


@pytest.mark.parametrize("fx", race_programs(True) + race_programs(False), ids=lambda f: f.name)
def test_drf_crosscheck(fx):
    check = drf_crosscheck(program(fx.name), depth=24)
    assert check.agree and check.race_free is fx.race_free


# ---------------------------------------------------------------- rewrite rules

@pytest.mark.parametrize("src, rule, result", [
    ("x := 1; r1 := y", "WR", "read_y(r1).(~write_x(1).(*))"),
    ("x := 1; y := 2", "WW", "~write_y(2).(~write_x(1).(*))"),
    ("r1 := x; r2 := y", "RR", "read_y(r2).(read_x(r1).(*))"),
    ("r1 := x; y := 1", "RW", "~write_y(1).(read_x(r1).(*))"),
    ("l.unlock(); x := 1", "UW1", "~write_x(1).(~down_l(0).(*))"),
    ("l.unlock(); r1 := x", "UR1", "read_x(r1).(~down_l(0).(*))"),
    ("x := 1; l.lock()", "WL1", "~up_l(1).(~write_x(1).(*))"),
    ("r1 := x; l.lock()", "RL1", "~up_l(1).(read_x(r1).(*))"),
    ("[r1 = 1] a.store(r1, rel); r2 := y", "UR2", "read_y(r2).(~write_a^rel(r1).(*))"),
])
def test_reorder_rule_examples(src, rule, result):
    assert rewrites(src, reorder_candidates) == [(rule, result)]


@pytest.mark.parametrize("src", [
    "x := 1; r1 := x",            # same variable
    "x := 1; l.unlock()",         # writes never leave a critical section
    "l.lock(); x := 1",
    "r1 := a.load(acq); x := 1",  # nothing moves above an acquire
    "r1 := x; print r1",
    "r1 := x; x := r1",
])
def test_reorder_blocked(src):
    assert rewrites(src, reorder_candidates) == []


def test_tso_rule_examples():
    assert rewrites("x := 1; r1 := y; print r1", tso_candidates) == \
        [("R-WR", "read_y(r1).(~write_x(1).(~out(r1).(*)))")]
    assert rewrites("x := 1; r1 := x; print r1", tso_candidates) == [("A-WR", "~write_x(1).(~out(1).(*))")]
    assert rewrites("x := 1; if r1 = 0 then r2 := y else skip", tso_candidates) == \
        [("IF", "if r1 = 0 then ~write_x(1).(read_y(r2).(*)) else ~write_x(1).(*)")]
    assert rewrites("[r1 = 0] x := r1; r1 := y", tso_candidates) == []  # r1 captured


def test_fork_is_a_barrier():
    assert rewrites("x := 1; thread t({ y := r }(r), 1); r1 := z", reorder_candidates) == []


def test_positions_are_formatted():
    p, _ = compiled("x := 1; r1 := y")
    ((_, pos, _),) = reorder_candidates(p)
    assert format_position(pos) == "2"


# ---------------------------------------------------------------- closure

def test_closure_bound_zero_is_original():
    p, _ = compiled("x := 1; y := 2")
    (m,) = closure(p, "reorder", 0)
    assert m.process == p and m.path == ()


def test_three_writes_reach_all_orders():
    p, _ = compiled("x := 1; y := 2; z := 3")
    members = closure(p, "reorder", 4)
    assert len(members) == 6
    assert all(len(m.path) <= 3 for m in members)


@pytest.mark.parametrize("name", ["independent_writes", "reorder_pair", "store_buffering"])
def test_closure_monotone_in_bound(name):
    tr = tr_config(program(name))
    keys = [{m.process.key for m in closure(tr.process, "reorder", b)} for b in range(4)]
    assert all(a <= b for a, b in zip(keys, keys[1:]))


def test_closure_rejects_unknown_kind():
    p, _ = compiled("x := 1")
    with pytest.raises(ValueError):
        closure(p, "arm")


# ---------------------------------------------------------------- soundness and behaviours

def test_soundness_on_locked_store_buffering():
    tr = tr_config(program("locked_store_buffering"))
    report = transform_soundness_check(tr.process, tr.env, "tso", bound=2, depth=6, multiset_cap=2)
    assert report.ok and report.members >= 1


def test_soundness_diagnoses_racy_input():
    p, env = compiled(SB_LITMUS)
    report = transform_soundness_check(p, env, "tso", bound=2)
    assert not report.precondition and not report.ok
    assert "not conflict-free" in report.diagnosis


def test_store_buffering_behaviours():
    p, env = compiled(SB_LITMUS)
    assert behaviors(p, env) == {(0, 1), (1, 0), (1, 1)}
    assert (0, 0) in closure_behaviors(p, env, "tso", bound=4)


def test_behaviours_of_print_order():
    p, env = compiled("print 1; print 2 || print 3")
    assert behaviors(p, env) == {(1, 2, 3), (1, 3, 2), (3, 1, 2)}


@pytest.mark.parametrize("rule, kind, src", MUTATION_PROGRAMS, ids=[m[0] for m in MUTATION_PROGRAMS])
def test_side_conditions_are_necessary(rule, kind, src):
    p, env = compiled(src)
    base = behaviors(p, env)
    sound = set().union(*(behaviors(m.process, env) for m in closure(p, kind, 2)))
    loose = set().union(*(behaviors(m.process, env) for m in closure(p, kind, 2, drop_side_conditions=True)))
    assert sound == base
    assert loose - base
