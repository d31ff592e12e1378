"""The ten acceptance criteria, each at its stated bound and tolerance.

Every test records a one-line PASS/FAIL summary that is printed at the end of
the pytest run.
"""

import itertools
import random
import time

import pytest

from vccts.core import Symbol, Val, subst_data
from vccts.core.located import LocatedProcess
from vccts.corpus import (
    EXPANSION_PAR, EXPANSION_SUM, PROCESS_FIXTURES, PROGRAMS, SB_LITMUS, RandomProcesses, fixture_process,
    process_corpus, program, race_programs, random_processes,
)
from vccts.core import parse_located
from vccts.equivalence import bisim_existential, identity_relation, localized_weak_bisim, weak_barbed_bisim
from vccts.lang import parse_program
from vccts.memmodel import behaviors, closure, closure_behaviors, drf_crosscheck, transform_soundness_check
from vccts.semantics import (
    all_event_orders, has_barb, has_barb_bruteforce, multi_steps, process_barbs, punrel, run_events_in_order,
    same_outcome, serialize,
)
from vccts.translate import cosim_check, tr_config

pytestmark = pytest.mark.slow

RANDOM_CORPUS = random_processes(500, seed=1)


def test_expansion_law_counterexample(acceptance):
    par, summ = parse_located(EXPANSION_PAR), parse_located(EXPANSION_SUM)
    t0 = time.perf_counter()
    v = bisim_existential(par, summ)
    t1 = time.perf_counter()
    same = bisim_existential(par, par)
    t2 = time.perf_counter()
    witness_ok = not v and any(len(m["labels"]) == 2 for m in v.witness)
    ok = witness_ok and bool(same) and t1 - t0 < 1 and t2 - t1 < 1
    acceptance(1, ok, f"distinguished with size-2 witness={witness_ok} ({t1 - t0:.2f}s), "
                      f"self-equivalent={bool(same)} ({t2 - t1:.2f}s)")
    assert ok


def test_diamond(acceptance):
    t0 = time.perf_counter()
    checked = violations = 0
    for p in RANDOM_CORPUS:
        for ms in multi_steps(p, max_size=2):
            if ms.size != 2 or not punrel(ms.labels):
                continue
            checked += 1
            goal = (ms.target, ms.residual)
            if not all(same_outcome(run_events_in_order(p, ms, o), goal) for o in all_event_orders(ms)):
                violations += 1
    dt = time.perf_counter() - t0
    ok = violations == 0 and checked > 0 and dt < 60
    acceptance(2, ok, f"{len(RANDOM_CORPUS)} processes, {checked} size-2 steps, {violations} violations, {dt:.1f}s")
    assert ok


def test_serialization(acceptance):
    t0 = time.perf_counter()
    checked = violations = 0
    for p in RANDOM_CORPUS:
        for ms in multi_steps(p, max_size=3):
            checked += 1
            found = bool(serialize(p, ms))
            brute = any(same_outcome(run_events_in_order(p, ms, o), (ms.target, ms.residual))
                        for o in all_event_orders(ms))
            if not found or found != brute:
                violations += 1
    dt = time.perf_counter() - t0
    ok = violations == 0
    acceptance(3, ok, f"{checked} multi-steps of size <= 3, {violations} violations, {dt:.1f}s")
    assert ok


def test_translation_cosimulation(acceptance):
    names = [fx.name for fx in PROGRAMS if fx.cosim]
    required = {"concurrent_writes", "thread_creation", "lock_counter", "print_order", "atomic_handshake"}
    failed, fwd, bwd = [], 0, 0
    t0 = time.perf_counter()
    for name in names:
        r = cosim_check(program(name), depth=8)
        fwd += r.forward_checked
        bwd += r.backward_checked
        if not r.ok:
            failed.append(name)
    dt = time.perf_counter() - t0
    ok = not failed and len(names) >= 10 and required <= set(names)
    acceptance(4, ok, f"{len(names)} programs at depth 8, {fwd} forward / {bwd} backward steps, "
                      f"failed={failed}, {dt:.1f}s")
    assert ok


def test_race_conflict_agreement(acceptance):
    racy, free = race_programs(False), race_programs(True)
    disagree = [fx.name for fx in racy + free if not drf_crosscheck(program(fx.name), depth=64).agree]
    ok = len(racy) >= 5 and len(free) >= 5 and not disagree
    acceptance(5, ok, f"{len(racy)} racy + {len(free)} race-free programs, disagreements={disagree}")
    assert ok


def test_transformation_soundness(acceptance):
    t0 = time.perf_counter()
    members = 0
    bad = []
    for fx in race_programs(True):
        tr = tr_config(program(fx.name))
        for kind in ("reorder", "tso"):
            r = transform_soundness_check(tr.process, tr.env, kind, bound=4, depth=8, multiset_cap=4)
            members += r.members
            if not r.ok:
                bad.append((fx.name, kind, r.diagnosis or len(r.violations)))
    dt = time.perf_counter() - t0
    ok = not bad and dt < 300
    acceptance(6, ok, f"{len(race_programs(True))} race-free programs, {members} closure members, "
                      f"violations={bad}, {dt:.1f}s")
    assert ok


def test_tso_store_buffering(acceptance):
    tr = tr_config(parse_program(SB_LITMUS))
    plain = behaviors(tr.process, tr.env, depth=10)
    relaxed = closure_behaviors(tr.process, tr.env, "tso", bound=4, depth=10)
    ok = (0, 0) not in plain and (0, 0) in relaxed
    acceptance(7, ok, f"original {sorted(plain)}; TSO closure {sorted(relaxed)}")
    assert ok


def _subst(p: LocatedProcess, x: str, v: int) -> LocatedProcess:
    return LocatedProcess.make(p.graph, {loc: subst_data(t, {x: Val(v)}) for loc, t in p.comps}, p.restriction)


def test_value_substitution_lemma(acceptance):
    gen = RandomProcesses(7, free_var="x", max_locations=3, max_depth=1)
    t0 = time.perf_counter()
    checks = 0
    bad = []
    for i in range(200):
        p = gen.process()
        for v in (0, 1, 2):
            checks += 1
            r = localized_weak_bisim(_subst(p, "x", v), identity_relation(p), p, depth=6, multiset_cap=4,
                                     env={}, env_right={"x": v})
            if not r:
                bad.append((i, v))
    dt = time.perf_counter() - t0
    ok = not bad
    acceptance(8, ok, f"200 processes x 3 values at depth 6, distinguished={bad}, {dt:.1f}s")
    assert ok


def test_barb_matching(acceptance):
    procs = requests = 0
    bad = []
    for name, p, env in process_corpus():
        if len(p) > 5:
            continue
        procs += 1
        per = process_barbs(p, env)
        seen = set().union(*per.values()) if per else set()
        universe = sorted(seen | {s.bar for s in seen} | {Symbol("zz", 1)})
        for k in range(min(len(p), 4) + 1):
            for req in itertools.combinations_with_replacement(universe, k):
                requests += 1
                if has_barb(p, req, env) != has_barb_bruteforce(p, req, env):
                    bad.append((name, req))
    ok = not bad
    acceptance(9, ok, f"{procs} processes, {requests} barb requests, {len(bad)} disagreements")
    assert ok


def _equivalence_pairs():
    fixtures = [(n, fixture_process(n)) for n in PROCESS_FIXTURES]
    for (a, p), (b, q) in itertools.product(fixtures, fixtures):
        yield f"{a}/{b}", p, q, ()
    rnd = random_processes(100, seed=3)
    rng = random.Random(3)
    for i, p in enumerate(rnd):
        locs = list(p.locations)
        perm = locs[:]
        rng.shuffle(perm)
        yield f"random{i}/renamed", p, p.renamed(dict(zip(locs, [x + 10 for x in perm]))), ()
        yield f"random{i}/random{(i + 1) % 100}", p, rnd[(i + 1) % 100], ()
    for fx in race_programs(True):
        tr = tr_config(program(fx.name))
        for kind in ("reorder", "tso"):
            for m in closure(tr.process, kind, 2)[1:]:
                yield f"{fx.name}/{kind}", tr.process, m.process, tr.env


def test_localized_implies_barbed(acceptance):
    depth, cap = 4, 2
    pairs = equivalent = 0
    bad = []
    for name, p, q, env in _equivalence_pairs():
        pairs += 1
        if bisim_existential(p, q, depth, cap, env=env):
            equivalent += 1
            if not weak_barbed_bisim(p, q, depth, multiset_cap=cap, env=env):
                bad.append(name)
    ok = not bad
    acceptance(10, ok, f"{pairs} pairs at depth {depth}, cap {cap}: {equivalent} localized-equivalent, "
                       f"barbed-distinguished among them={bad}")
    assert ok
