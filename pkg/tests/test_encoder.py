import itertools
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import brute_models, brute_weighted, naive_score, satisfiable, tiny_scenarios
from ttscore.encoder import (
    BOT,
    TOP,
    Cnf,
    CnfBuilder,
    WeightedFormula,
    at_least,
    dumps_weighted_dimacs,
    encode_counter,
    encode_psi,
    exact_weighted_count,
    exactly,
    gadget_weights,
    loads_weighted_dimacs,
    score_exact,
    to_literal_weighted,
    weighted_formula,
    weighted_probability,
)
from ttscore.errors import ContractError, ScenarioFormatError, UnsupportedModel
from ttscore.fixtures import parallel_2, unit_link
from ttscore.model import generate_random_scenario

# -- builder ------------------------------------------------------------------


def test_gates_fold_constants():
    b = CnfBuilder()
    x = b.var("x", 1)
    assert b.and_([x, TOP]) == x
    assert b.and_([x, BOT]) is BOT
    assert b.and_([x, -x]) is BOT
    assert b.or_([x, -x]) is TOP
    assert b.xor(x, TOP) == -x


def test_gates_are_hashed():
    b = CnfBuilder()
    x, y = b.var("x", 1), b.var("x", 2)
    assert b.and_([x, y]) == b.and_([y, x])
    assert b.xor(x, y) == -b.xor(-x, y)


# -- counter ------------------------------------------------------------------


def counter_cnf(n, build):
    b = CnfBuilder()
    X = [b.var("x", i) for i in range(n)]
    out = build(b, X)
    b.add(out)
    return b.cnf().clauses, X


@pytest.mark.parametrize("n", range(1, 6))
def test_at_least_exhaustive_small(n):
    for ell in range(1, n + 1):
        clauses, X = counter_cnf(n, lambda b, X: at_least(b, X, ell))
        for bits in itertools.product((False, True), repeat=n):
            units = [x if v else -x for x, v in zip(X, bits)]
            assert satisfiable(clauses, units) == (sum(bits) >= ell), (n, ell, bits)


@pytest.mark.parametrize("n", range(1, 6))
def test_exactly_exhaustive_small(n):
    for k in range(0, n + 1):
        clauses, X = counter_cnf(n, lambda b, X: exactly(b, X, k))
        for bits in itertools.product((False, True), repeat=n):
            units = [x if v else -x for x, v in zip(X, bits)]
            assert satisfiable(clauses, units) == (sum(bits) == k), (n, k, bits)


def test_counter_examples():
    clauses, X = counter_cnf(3, lambda b, X: at_least(b, X, 2))
    assert satisfiable(clauses, [X[0], X[1], -X[2]])
    clauses, X = counter_cnf(3, lambda b, X: at_least(b, X, 3))
    assert not satisfiable(clauses, [X[0], X[1], -X[2]])


def test_counter_bit_count():
    b = CnfBuilder()
    X = [b.var("x", i) for i in range(3)]
    at_least(b, X, 2)
    assert len(b.book.of_role("cnt")) == 3 * math.ceil(math.log2(3))


def test_counter_threshold_range():
    b = CnfBuilder()
    X = [b.var("x", i) for i in range(3)]
    with pytest.raises(ContractError):
        at_least(b, X, 0)
    with pytest.raises(ContractError):
        at_least(b, X, 4)
    with pytest.raises(ContractError):
        encode_counter(b, [], 1)


# -- psi ----------------------------------------------------------------------


def fault_projections(cnf, book):
    faults = sorted(v for v, (role, _) in enumerate(book.tags, start=1) if role in ("crash", "omit"))
    return faults, {tuple(m[v] for v in faults) for m in brute_models(cnf.num_vars, cnf.clauses)}


def test_unit_link_psi():
    cnf, book = encode_psi(unit_link())
    faults, projs = fault_projections(cnf, book)
    assert [book.tag(v) for v in faults] == [("crash", ("e", 1)), ("omit", ("e", 1))]
    assert projs == {(False, False)}


def test_parallel_2_psi():
    cnf, book = encode_psi(parallel_2())
    faults, projs = fault_projections(cnf, book)
    assert sorted(book.tag(v)[0] for v in faults) == ["crash", "crash"]
    assert len(projs) == 3 and (True, True) not in projs


def test_fault_free_psi_has_one_model():
    s = generate_random_scenario(4, 5, p_crash=0.0, p_omit=0.0)
    cnf, _ = encode_psi(s)
    assert exact_weighted_count(WeightedFormula(cnf, {})) == 1.0


def test_exact_crashes_needs_permanent():
    with pytest.raises(UnsupportedModel):
        encode_psi(unit_link(), exact_crashes=1)


# -- weights ------------------------------------------------------------------


@pytest.mark.parametrize("p", [0.0, 0.01, 0.3, 0.5, 0.99])
def test_gadget_identities(p):
    a, b, g = gadget_weights(p)
    assert g * a * (1 - b) == pytest.approx(p, abs=1e-12)
    assert g * (1 - a) * (1 - b) == pytest.approx(1 - p, abs=1e-12)
    assert g * (1 - a) * b == pytest.approx(1.0, abs=1e-12)


def test_gadget_half():
    a, b, g = gadget_weights(0.5)
    assert (a, g) == (0.5, 3.0) and b == pytest.approx(2 / 3, abs=1e-15)


def test_gadget_zero():
    a, b, g = gadget_weights(0.0)
    assert (a, b, g) == (0.0, 0.5, 2.0)


def test_unit_link_weighted():
    wf = weighted_formula(unit_link())
    assert wf.gamma * exact_weighted_count(wf) == pytest.approx(0.855, abs=1e-9)
    assert wf.gamma * brute_weighted(wf.cnf, wf.weights) == pytest.approx(0.855, abs=1e-9)
    for lit, w in wf.weights.items():
        assert w + wf.weights[-lit] == pytest.approx(1.0, abs=1e-12)


def test_parallel_2_weighted():
    wf = weighted_formula(parallel_2())
    assert wf.gamma * exact_weighted_count(wf) == pytest.approx(0.75, abs=1e-9)


@pytest.mark.parametrize("k", [0, 1, 4, 9])
def test_unweighted_free_variables(k):
    assert exact_weighted_count(WeightedFormula(Cnf(k, ()), {})) == pytest.approx(2.0**k, rel=1e-12)


def test_score_exact_examples():
    assert score_exact(unit_link()) == pytest.approx(0.855, abs=1e-9)
    assert score_exact(parallel_2()) == pytest.approx(0.75, abs=1e-9)
    assert score_exact(generate_random_scenario(4, 6, p_crash=0.0, p_omit=0.0)) == pytest.approx(1.0)


@given(tiny_scenarios())
def test_exact_matches_naive(s):
    assert abs(score_exact(s) - naive_score(s)) <= 1e-9


@given(tiny_scenarios())
def test_good_and_bad_partition(s):
    good = weighted_probability(weighted_formula(s, "good"))
    bad = weighted_probability(weighted_formula(s, "bad"))
    assert abs(good + bad - 1.0) <= 1e-9


@given(tiny_scenarios())
def test_weights_sum_to_one(s):
    wf = weighted_formula(s)
    for lit, w in wf.weights.items():
        assert 0.0 <= w <= 1.0
        assert abs(w + wf.weights[-lit] - 1.0) <= 1e-12


# -- DIMACS -------------------------------------------------------------------


def test_dimacs_roundtrip_unit_link():
    wf = weighted_formula(unit_link())
    text = dumps_weighted_dimacs(wf)
    back = loads_weighted_dimacs(text)
    assert back == wf
    assert dumps_weighted_dimacs(back) == text
    assert back.gamma * exact_weighted_count(back) == pytest.approx(0.855, abs=1e-9)


def test_dimacs_unweighted_has_no_weight_lines():
    text = dumps_weighted_dimacs(WeightedFormula(Cnf(2, ((1, 2), (-1,))), {}))
    assert "weight" not in text
    assert text.splitlines()[0] == "p cnf 2 2"


def test_dimacs_is_deterministic():
    s = generate_random_scenario(4, 7, p_crash=0.1, p_omit=0.1)
    assert dumps_weighted_dimacs(weighted_formula(s)) == dumps_weighted_dimacs(weighted_formula(s))


def test_dimacs_error_has_line_number():
    with pytest.raises(ScenarioFormatError, match="line 3"):
        loads_weighted_dimacs("p cnf 2 1\nc p weight 1 0.5 0\n1 x 0\n")


@given(tiny_scenarios())
def test_dimacs_roundtrip_property(s):
    wf = weighted_formula(s)
    assert loads_weighted_dimacs(dumps_weighted_dimacs(wf)) == wf
