import time

import pytest
from hypothesis import given, settings

from strategies import bijections, processes
from vccts.core import IllFormedError, parse_located, parse_process
from vccts.core.canon import canonical_rename
from vccts.corpus import EXPANSION_PAR, EXPANSION_SUM, random_processes
from vccts.equivalence import (
    Distinguished, EquivalentUpTo, bisim_existential, congruence_probe, identity_relation,
    localized_weak_bisim, transposed, weak_barbed_bisim,
)
from vccts.semantics import multi_steps, tau_star

PAR, SUM = parse_located(EXPANSION_PAR), parse_located(EXPANSION_SUM)


def replays(witness_move, domain=(0, 1, 2), cap=4):
    """The first attacker move of a witness is a real transition of its source."""
    src = parse_located(witness_move["source"])
    if witness_move["kind"] == "barb":
        return True
    wanted = witness_move["labels"]
    return any([d.to_json() for d in m.labels] == wanted
               for m in multi_steps(src, domain, cap))


def test_expansion_law_fails_with_size_two_witness():
    start = time.perf_counter()
    v = bisim_existential(PAR, SUM)
    assert isinstance(v, Distinguished)
    first = v.witness[0]
    assert first["side"] == "left" and first["kind"] == "multiset" and len(first["labels"]) == 2
    assert replays(first)
    assert time.perf_counter() - start < 1.0


def test_expansion_law_barbed():
    v = weak_barbed_bisim(PAR, SUM)
    assert not v
    assert v.witness[0]["labels"] == ["~f", "~g"]


def test_self_equivalent():
    assert isinstance(bisim_existential(PAR, PAR), EquivalentUpTo)
    assert localized_weak_bisim(SUM, identity_relation(SUM), SUM)
    assert weak_barbed_bisim(SUM, SUM)


def test_different_barbs_distinguished():
    a, b = parse_located("~f(1).(0)"), parse_located("~g(1).(0)")
    v = weak_barbed_bisim(a, b)
    assert v.witness[0]["labels"] == ["~f"]
    assert not bisim_existential(a, b)


def test_verdict_reports_bounds():
    v = bisim_existential(PAR, PAR, depth=3, multiset_cap=2)
    assert (v.depth, v.multiset_cap) == (3, 2)
    assert v.to_json()["verdict"] == "equivalent-up-to"


def test_relation_outside_locations_rejected():
    with pytest.raises(ValueError):
        localized_weak_bisim(PAR, [(0, 7)], PAR)


def test_relation_matters():
    # swapping the correspondence of two distinct components breaks the game
    assert not localized_weak_bisim(PAR, [(0, 1), (1, 0)], PAR)


def test_tau_is_invisible():
    hidden = parse_located("(f(x).(~out(x).(*)) | ~f(1).(*)) \\ {f}")
    direct = parse_located("~out(1).(*)")
    assert bisim_existential(hidden, direct, depth=6)
    assert weak_barbed_bisim(hidden, direct, depth=6)


def test_congruence_probe_contexts():
    same = congruence_probe(PAR, SUM, [parse_process("Y")], depth=4)
    assert not same[0]["verdict"]
    masked = congruence_probe(parse_located("~f(1).(0)"), parse_located("0"),
                              [parse_process("Y"), parse_process("(Y) \\ {f}")], depth=4)
    assert [bool(r["verdict"]) for r in masked] == [False, True]
    with_partner = congruence_probe(PAR, SUM, [parse_process("Y | f(x).(0)")], depth=4)
    assert not with_partner[0]["verdict"]
    with pytest.raises(IllFormedError):
        congruence_probe(PAR, SUM, [parse_process("Y | Y")])


@settings(max_examples=25, deadline=None)
@given(processes(max_locations=3, max_depth=1))
def test_reflexive(p):
    assert localized_weak_bisim(p, identity_relation(p), p, depth=3, multiset_cap=2)
    assert weak_barbed_bisim(p, p, depth=3, multiset_cap=2)


@settings(max_examples=25, deadline=None)
@given(processes(max_locations=3, max_depth=1).flatmap(lambda p: bijections(p).map(lambda m: (p, m))))
def test_invariant_under_location_renaming(pm):
    p, m = pm
    q = p.renamed(m)
    rel = [(x, m[x]) for x in p.locations]
    assert localized_weak_bisim(p, rel, q, depth=3, multiset_cap=2)


def test_symmetry_on_random_pairs():
    ps = random_processes(40, seed=21, max_locations=3)
    for p, q in zip(ps, ps[1:]):
        e = [(a, b) for a in p.locations for b in q.locations]
        forward = localized_weak_bisim(p, e, q, depth=3, multiset_cap=2)
        backward = localized_weak_bisim(q, transposed(e), p, depth=3, multiset_cap=2)
        assert bool(forward) == bool(backward)
        if not forward:
            assert replays(forward.witness[0], cap=2) and replays(backward.witness[0], cap=2)


def test_witnesses_replay():
    ps = random_processes(40, seed=22, max_locations=3)
    for p, q in zip(ps, ps[1:]):
        v = bisim_existential(p, q, depth=3, multiset_cap=2)
        if not v:
            assert replays(v.witness[0], cap=2)


def test_localized_implies_barbed_on_random_pairs():
    ps = random_processes(60, seed=23, max_locations=3)
    pairs = [(p, canonical_rename(p)) for p in ps[:20]] + list(zip(ps, ps[1:]))
    for p, q in pairs:
        if bisim_existential(p, q, depth=3, multiset_cap=2):
            assert weak_barbed_bisim(p, q, depth=3, multiset_cap=2)


def test_transitivity_probe():
    hidden = parse_located("(f(x).(~out(x).(*)) | ~f(1).(*)) \\ {f}")
    direct = parse_located("~out(1).(*)")
    twice = parse_located("(g(x).(~f(x).(*)) | ~g(1).(*) | f(y).(~out(y).(*))) \\ {f, g}")
    assert bisim_existential(hidden, direct, depth=6)
    assert bisim_existential(direct, twice, depth=6)
    assert bisim_existential(hidden, twice, depth=6)


def test_tau_star_closure_used_by_defender():
    p = parse_located("(f(x).(~out(x).(*)) | ~f(1).(*)) \\ {f}")
    assert len(tau_star(p, 4)) == 2
