import pytest

from vccts.core import IDLE, Kind, classify, format_term, seq, sort, sym
from vccts.corpus import PROGRAMS, cosim_programs, program
from vccts.lang import FORK, global_steps, out, parse_command, parse_program
from vccts.semantics import TAU, Action, act_of, single_steps
from vccts.translate import (
    FORK_SYMBOL, OUT_SYMBOL, atomic_process, available_lock, busy_lock, cosim_check, tr_cmd, tr_config,
    tr_instr, tr_label, tr_state, variable_process,
)


@pytest.mark.parametrize("src, want", [
    ("x := 1", "~write_x(1).(*)"),
    ("r1 := x", "read_x(r1).(*)"),
    ("a.store(1, rel)", "~write_a^rel(1).(*)"),
    ("a.store(2, sc)", "~write_a^sc(2).(*)"),
    ("r1 := a.load(acq)", "read_a^acq(r1).(*)"),
    ("l.lock()", "~up_l(1).(*)"),
    ("l.unlock()", "~down_l(0).(*)"),
    ("print r1 + 1", "~out((r1 + 1)).(*)"),
])
def test_instruction_rows(src, want):
    assert format_term(tr_instr(parse_command(src))) == want


def test_fork_shape():
    t = tr_cmd(parse_command("thread t({ x := r }(r), 1); y := 2"))
    assert format_term(t) == "~fork(0).(~write_y(2).(*), ~write_x(1).(*))"


def test_while_carries_loaded_registers():
    t = tr_cmd(parse_command("while r1 < 2 do r1 := x"))
    assert format_term(t) == "mu W0(r1 := r1). if r1 < 2 then read_x(r1).(W0(r1)) else *"


def test_if_and_skip():
    assert tr_cmd(parse_command("skip")) == IDLE
    assert format_term(tr_cmd(parse_command("if r1 = 0 then x := 1 else skip"))) == \
        "if r1 = 0 then ~write_x(1).(*) else *"


def test_sequence_is_seq_of_parts():
    a, b = parse_command("x := 1"), parse_command("r1 := y; print r1")
    assert tr_cmd(parse_command("x := 1; r1 := y; print r1")) == seq(tr_instr(a), tr_cmd(b))


def test_state_processes():
    assert format_term(available_lock("l")) == "mu L_l. up_l(x).(down_l(y).(L_l))"
    assert busy_lock("l").conts[0] == available_lock("l")
    assert sort(atomic_process("a", 0)) == {sym(f"write_a^{o}") for o in ("sc", "rel")} | \
        {sym(f"read_a^{o}") for o in ("sc", "acq")}
    assert classify(variable_process("x", 3)) is Kind.RCGS


def test_tr_config_layout():
    tr = tr_config(program("lock_counter"))
    assert tr.state_locations == (0, 1) and tr.thread_locations == (2, 3)
    assert tr.process.graph.edges == {(0, 2), (0, 3), (1, 2), (1, 3)}
    state = tr_state(program("lock_counter"))
    assert tr.process.restriction == frozenset().union(*(sort(t) for _, t in state.comps))


def test_tr_config_env_and_empty_program():
    tr = tr_config(parse_program("[r1 = 2] print r1"))
    assert tr.env_map == {"r1": 2}
    assert len(tr_config(parse_program("")).process) == 0


def test_labels():
    assert tr_label(global_steps(parse_program("x := 1"))[0][0]) is TAU
    assert tr_label(out(3)) == Action(OUT_SYMBOL.bar, 3)
    assert tr_label(FORK) == Action(FORK_SYMBOL.bar, 0)


@pytest.mark.parametrize("fx", PROGRAMS, ids=lambda f: f.name)
def test_translation_is_canonical(fx):
    tr = tr_config(program(fx.name))
    for _, t in tr.process.comps:
        assert classify(t) in (Kind.CGS, Kind.RCGS)


def test_first_step_actions_correspond():
    c = program("print_order")
    tr = tr_config(c)
    want = {tr_label(lb) for lb, _ in global_steps(c)}
    have = {act_of(s.label) for s in single_steps(tr.process, (0, 1, 2), tr.env)}
    assert want == have == {Action(OUT_SYMBOL.bar, 1), Action(OUT_SYMBOL.bar, 3)}


@pytest.mark.parametrize("name", ["concurrent_writes", "thread_creation", "print_order", "branch_on_read"])
def test_cosim_small(name):
    report = cosim_check(program(name), depth=8)
    assert report.ok, report.mismatches
    assert report.forward_checked and report.backward_checked
