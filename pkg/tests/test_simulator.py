import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import naive_score, tiny_scenarios
from ttscore.errors import ContractError
from ttscore.fixtures import parallel_2, unit_link
from ttscore.model import Edge, FaultModel, Message, Network, Scenario, generate_random_scenario
from ttscore.scheme import build_hot_potato
from ttscore.simulator import (
    FaultSequence,
    arrivals,
    build_frame,
    build_product_chain,
    chain_reachability,
    run,
    sample_fault_sequence,
    score_chain,
    score_enumerate,
    simulate,
    step,
)

NONE = frozenset()


def two_messages():
    """m1 on u -> v, m2 on v -> w; one edge each."""
    net = Network(("u", "v", "w"), (Edge("a", "u", "v", 0.2, 0.0), Edge("b", "v", "w", 0.2, 0.0)),
                  {"u": ("a",), "v": ("b",), "w": ()})
    msgs = (Message("m1", "u", "v"), Message("m2", "v", "w"))
    draft = Scenario(net, msgs, None, 1, 1, FaultModel.TEMPORARY)
    return draft.replace(scheme=build_hot_potato(draft, {"m1": ["a"], "m2": ["b"]}))


# -- stepping -----------------------------------------------------------------


def test_step_delivers():
    assert step({"m": "u"}, {"e"}, {("m", "e"): True}, unit_link()) == {"m": "v"}


def test_step_omission_returns_to_sender():
    assert step({"m": "u"}, {"e"}, {("m", "e"): False}, unit_link()) == {"m": "u"}


def test_step_inactive_edge():
    assert step({"m": "u"}, set(), {}, unit_link()) == {"m": "u"}


def test_step_rejects_wrong_fates():
    with pytest.raises(ContractError):
        step({"m": "u"}, set(), {("m", "e"): True}, unit_link())


def test_run_delivered():
    s = unit_link()
    o = run(s, FaultSequence((frozenset({"e"}),), (frozenset({("m", "e")}),)))
    assert o.configurations == ({"m": "u"}, {"m": "v"})
    assert arrivals(o, s) == 1


def test_run_all_crash():
    s = parallel_2(timeout=3)
    o = run(s, FaultSequence((NONE,) * 3, (NONE,) * 3))
    assert all(c == {"m": "u"} for c in o.configurations)
    assert arrivals(o, s) == 0


def test_run_checks_length():
    with pytest.raises(ContractError):
        run(unit_link(), FaultSequence((NONE, NONE), (NONE, NONE)))


def test_run_rejects_reactivation_under_permanent():
    s = parallel_2(fault_model=FaultModel.PERMANENT, timeout=2)
    with pytest.raises(ContractError, match="reactivates"):
        run(s, FaultSequence((frozenset({"e2"}), frozenset({"e1", "e2"})), (NONE, NONE)))


def test_arrivals_counts_one_of_two():
    s = two_messages()
    f = FaultSequence((frozenset({"a"}),), (frozenset({("m1", "a")}),))
    assert arrivals(run(s, f), s) == 1


def test_sample_without_faults_is_all_active():
    s = unit_link(0.0, 0.0)
    for seed in range(5):
        assert sample_fault_sequence(s, random.Random(seed)).active == (frozenset({"e"}),)


def test_sample_certain_permanent_crash():
    s = parallel_2(p_crash=1.0, fault_model=FaultModel.PERMANENT, timeout=3)
    f = sample_fault_sequence(s, random.Random(0))
    assert all(T == NONE for T in f.active)


def test_sample_is_seeded():
    s = generate_random_scenario(4, 3, p_crash=0.3, p_omit=0.3)
    assert sample_fault_sequence(s, random.Random(9)) == sample_fault_sequence(s, random.Random(9))


# -- scores -------------------------------------------------------------------


def test_unit_link_scores():
    s = unit_link()
    assert score_enumerate(s) == pytest.approx(0.855, abs=1e-12)
    assert score_chain(s) == pytest.approx(0.855, abs=1e-12)


def test_parallel_2_scores():
    s = parallel_2()
    assert score_enumerate(s) == pytest.approx(0.75, abs=1e-12)
    assert score_chain(s) == pytest.approx(0.75, abs=1e-12)


def test_fault_free_score_is_one():
    s = generate_random_scenario(5, 4, p_crash=0.0, p_omit=0.0)
    assert score_enumerate(s) == 1.0
    assert score_chain(s) == 1.0


def test_path_longer_than_timeout_scores_zero():
    net = Network(("a", "b", "c"), (Edge("ab", "a", "b", 0, 0), Edge("bc", "b", "c", 0, 0)),
                  {"a": ("ab",), "b": ("bc",), "c": ()})
    draft = Scenario(net, (Message("m", "a", "c"),), None, 1, 1, FaultModel.TEMPORARY)
    s = draft.replace(scheme=build_hot_potato(draft, {"m": ["ab", "bc"]}))
    assert score_chain(s) == 0.0
    assert score_enumerate(s) == 0.0


# -- frames and chains --------------------------------------------------------


def test_unit_link_frame():
    s = unit_link()
    d = build_frame("m", s)
    assert set(d.states) == {("v", "u"), ("v", "v"), ("e", "e")}
    assert d.initial == "u"
    assert d.on_vertex("u", {"m"}, {"e"}) == ("e", "e")
    assert d.on_vertex("u", {"m"}, set()) == ("v", "u")
    assert d.on_edge("e", True) == ("v", "v")
    assert d.on_edge("e", False) == ("v", "u")


def test_frame_stays_at_target():
    s = unit_link()
    d = build_frame("m", s)
    assert d.on_vertex("v", {"m"}, {"e"}) == ("v", "v")


def test_unit_link_chain_normalised_and_alternating():
    c = build_product_chain(unit_link())
    for k in c.expanded:
        assert sum(p for _, p in c.transitions[k]) == pytest.approx(1.0, abs=1e-12)
        kind = c.states[k][0]
        assert all(c.states[j][0] != kind for j, _ in c.transitions[k])
    assert chain_reachability(c) == pytest.approx(0.855, abs=1e-12)


def test_fault_free_chain_is_a_path():
    c = build_product_chain(generate_random_scenario(4, 2, p_crash=0.0, p_omit=0.0))
    k = c.initial
    for _ in range(c.horizon):
        [(k, prob)] = c.transitions[k]
        assert prob == 1.0
    assert k in c.accepting


def test_permanent_chain_never_revives():
    c = build_product_chain(parallel_2(p_crash=0.1, fault_model=FaultModel.PERMANENT, timeout=3))
    alive_of = lambda st: st[-1]
    assert any(len(alive_of(st)) < 2 for st in c.states)
    for k in c.expanded:
        for j, _ in c.transitions[k]:
            assert alive_of(c.states[j]) <= alive_of(c.states[k])


# -- properties ---------------------------------------------------------------


@given(tiny_scenarios())
def test_engines_match_naive_oracle(s):
    expected = naive_score(s)
    assert abs(score_enumerate(s) - expected) <= 1e-9
    assert abs(score_chain(s) - expected) <= 1e-9


@given(tiny_scenarios(max_vertices=4, max_edges=6, max_timeout=3), st.integers(0, 2**32))
def test_run_is_deterministic_and_conservative(s, seed):
    f, o = simulate(s, random.Random(seed))
    assert run(s, f) == o == run(s, f)
    net = s.network
    for i in range(1, len(o.configurations)):
        before, after = o.configurations[i - 1], o.configurations[i]
        for m in s.message_ids:
            if before[m] != after[m]:
                assert any(e.id in f.active[i - 1] and e.source == before[m] and e.target == after[m]
                           for e in net.edges)


@given(tiny_scenarios(max_vertices=4, max_edges=6, max_timeout=3), st.integers(0, 2**32))
def test_frame_trajectory_matches_simulation(s, seed):
    f, o = simulate(s, random.Random(seed))
    for m in s.message_ids:
        assert build_frame(m, s).trajectory(o, f) == [c[m] for c in o.configurations]


@given(tiny_scenarios(max_vertices=4, max_edges=6, max_timeout=3), st.integers(0, 2**32))
def test_permanent_crashes_are_monotone(s, seed):
    s = s.replace(fault_model=FaultModel.PERMANENT)
    f = sample_fault_sequence(s, random.Random(seed))
    assert all(f.active[i + 1] <= f.active[i] for i in range(f.slots - 1))


@given(tiny_scenarios(max_timeout=2))
def test_score_monotone_in_guarantee_and_timeout(s):
    by_ell = [score_enumerate(s.replace(guarantee=g)) for g in range(1, len(s.messages) + 1)]
    assert all(a >= b - 1e-12 for a, b in zip(by_ell, by_ell[1:]))
    assert score_enumerate(s.replace(timeout=s.timeout + 1)) >= score_enumerate(s) - 1e-12
