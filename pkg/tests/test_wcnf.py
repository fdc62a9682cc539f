import random

import pytest

from prefsat import wcnf
from prefsat.wcnf import (
    IncompleteAssignment,
    LiteralOutOfRange,
    MalformedHeader,
    MissingTerminatingZero,
    WcnfFormula,
    WeightNotPositive,
    evaluate,
    is_tautology,
    normalize_literals,
    parse_wdimacs,
    serialize_wdimacs,
)

from conftest import EXAMPLE1_TEXT, example1_formula, random_formula


def test_normalize_drops_duplicates_keeps_order():
    assert normalize_literals([3, -1, 3, 2, -1]) == (3, -1, 2)


def test_normalize_rejects_zero():
    with pytest.raises(LiteralOutOfRange):
        normalize_literals([1, 0, 2])


def test_tautology_detection():
    assert is_tautology((1, -1))
    assert is_tautology((2, -3, 3))
    assert not is_tautology((1, 2, -3))
    assert not is_tautology(())


def test_add_hard_drops_tautology_keeps_empty():
    formula = WcnfFormula(2)
    formula.add_hard((1, -1))
    assert formula.hard == []
    formula.add_hard(())
    assert formula.hard == [()]


def test_add_soft_weight_validation():
    formula = WcnfFormula(2)
    for bad in (0, -1, True, 1.5, "2"):
        with pytest.raises(WeightNotPositive):
            formula.add_soft((1,), bad)
    formula.add_soft((1,), 2)
    assert formula.soft_weight_total() == 2


def test_top_defaults_to_one_more_than_soft_total():
    formula = example1_formula()
    assert formula.top == 5
    assert WcnfFormula(1).top == 1


def test_explicit_top_must_exceed_soft_total():
    formula = WcnfFormula(1, top=2)
    formula.add_soft((1,), 2)
    with pytest.raises(MalformedHeader):
        formula.validate_top()


def test_literal_out_of_range_rejected():
    formula = WcnfFormula(2)
    with pytest.raises(LiteralOutOfRange):
        formula.add_hard((3,))
    with pytest.raises(LiteralOutOfRange):
        formula.add_soft((-5,), 1)


def test_parse_example1():
    formula = parse_wdimacs(EXAMPLE1_TEXT)
    assert formula == example1_formula()
    assert formula.num_vars == 3
    assert formula.top == 5
    assert formula.hard == [(1, 2), (-2, 3)]
    assert [(s.lits, s.weight) for s in formula.soft] == [((-1,), 1), ((-3,), 3)]


def test_serialize_example1_exact_bytes():
    assert serialize_wdimacs(example1_formula()) == EXAMPLE1_TEXT


def test_parse_ignores_comments_and_blank_lines():
    text = "c a comment\n\n" + EXAMPLE1_TEXT + "c trailing\n"
    assert parse_wdimacs(text) == example1_formula()


def test_parse_weight_at_or_above_top_is_hard():
    text = "p wcnf 2 2 4\n9 1 0\n3 2 0\n"
    formula = parse_wdimacs(text)
    assert formula.hard == [(1,)]
    assert [(s.lits, s.weight) for s in formula.soft] == [((2,), 3)]


@pytest.mark.parametrize(
    "text,error",
    [
        ("p cnf 2 1 3\n3 1 0\n", MalformedHeader),
        ("p wcnf 2 1\n3 1 0\n", MalformedHeader),
        ("p wcnf x 1 3\n3 1 0\n", MalformedHeader),
        ("3 1 0\n", MalformedHeader),
        ("p wcnf 2 2 3\n3 1 0\n", MalformedHeader),
        ("p wcnf 2 1 3\n3 1\n", MissingTerminatingZero),
        ("p wcnf 2 1 3\n3 5 0\n", LiteralOutOfRange),
        ("p wcnf 2 1 3\n0 1 0\n", WeightNotPositive),
        ("p wcnf 2 1 3\n-2 1 0\n", WeightNotPositive),
        ("p wcnf 2 2 2\n1 1 0\n1 2 0\n", MalformedHeader),
        ("", MalformedHeader),
    ],
)
def test_parse_rejects_malformed_text(text, error):
    with pytest.raises(error):
        parse_wdimacs(text)


def test_roundtrip_random_formulas(rng):
    for _ in range(200):
        formula = random_formula(rng)
        again = parse_wdimacs(serialize_wdimacs(formula))
        assert again == formula
        assert serialize_wdimacs(again) == serialize_wdimacs(formula)


def test_serialize_is_deterministic():
    formula = example1_formula()
    assert serialize_wdimacs(formula) == serialize_wdimacs(formula)


def test_evaluate_example1_known_assignment_costs():
    formula = example1_formula()
    optimal = evaluate(formula, {1: True, 2: False, 3: False})
    assert optimal.hard_satisfied
    assert optimal.cost == 1
    assert optimal.violated_soft == (0,)
    worse = evaluate(formula, {1: False, 2: True, 3: True})
    assert worse.hard_satisfied
    assert worse.cost == 3
    assert worse.violated_soft == (1,)


def test_evaluate_reports_hard_violations():
    formula = example1_formula()
    result = evaluate(formula, {1: False, 2: False, 3: False})
    assert not result.hard_satisfied
    assert result.violated_hard == (0,)


def test_evaluate_requires_total_assignment():
    formula = example1_formula()
    with pytest.raises(IncompleteAssignment):
        evaluate(formula, {1: True, 2: False})
    with pytest.raises(IncompleteAssignment):
        evaluate(formula, {1: True, 2: False, 3: False, 4: True})


def test_empty_hard_clause_is_never_satisfied():
    formula = WcnfFormula(1)
    formula.add_hard(())
    result = evaluate(formula, {1: True})
    assert not result.hard_satisfied


def test_equality_covers_all_parts():
    a = example1_formula()
    b = example1_formula()
    assert a == b
    b.add_soft((2,), 1)
    assert a != b
    assert a != "not a formula"
