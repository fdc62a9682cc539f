import random

import pytest

from prefsat import families
from prefsat.dataset import build_canonical
from prefsat.families import MisSelection, PrefVariant, Schedule
from prefsat.verify import (
    Accepted,
    Infeasible,
    Malformed,
    Suboptimal,
    verdict_from_doc,
    verdict_to_doc,
    verify_candidate,
)
from prefsat.wcnf import evaluate

from conftest import motivation_payload


@pytest.fixture(scope="module")
def motivation():
    return build_canonical(motivation_payload(), PrefVariant.P2)


def test_infeasible_schedule_names_the_violated_precedence(motivation):
    verdict = verify_candidate(motivation, Schedule({0: 4, 1: 2, 2: 5, 3: 1, 4: 6, 5: 0}))
    assert verdict == Infeasible(violations=("J2 must precede J1",))


def test_optimal_schedule_accepted_with_cost_two(motivation):
    verdict = verify_candidate(motivation, Schedule({0: 4, 1: 6, 2: 5, 3: 1, 4: 3, 5: 2}))
    assert verdict == Accepted(cost=2)


def test_feasible_but_costlier_schedule_is_suboptimal(motivation):
    verdict = verify_candidate(motivation, Schedule({0: 4, 1: 3, 2: 1, 3: 2, 4: 5, 5: 0}))
    assert isinstance(verdict, Suboptimal)
    assert verdict.optimum == 2
    assert verdict.cost > 2


def test_missing_job_is_malformed(motivation):
    verdict = verify_candidate(motivation, Schedule({0: 4, 1: 6, 2: 5, 3: 1, 4: 3}))
    assert verdict == Malformed(reason="no start slot for J5")


def test_out_of_range_slot_is_malformed(motivation):
    verdict = verify_candidate(
        motivation, Schedule({0: 4, 1: 6, 2: 5, 3: 1, 4: 3, 5: 9})
    )
    assert isinstance(verdict, Malformed)
    assert "outside" in verdict.reason


def test_every_distinct_optimum_is_accepted(motivation):
    payload = motivation.payload
    optima = [
        s
        for s in families.enumerate_solutions(payload)
        if families.check_feasible(payload, s)[0]
        and families.solution_cost(payload, PrefVariant.P2, s) == 2
    ]
    assert len(optima) >= 2
    for solution in optima:
        assert verify_candidate(motivation, solution) == Accepted(cost=2)


def test_alternative_optimum_differs_from_reference(motivation):
    candidate = Schedule({0: 4, 1: 6, 2: 5, 3: 1, 4: 3, 5: 2})
    assert candidate != motivation.reference_solution
    assert verify_candidate(motivation, candidate) == Accepted(cost=2)


def test_semantic_verdict_agrees_with_formula_cross_check():
    rng = random.Random("verify-cross")
    payload = families.generate_instance("mis", {"n": 6, "edge_prob": 0.4}, 17)
    canonical = build_canonical(payload, PrefVariant.P3)
    for _ in range(80):
        candidate = MisSelection(frozenset(v for v in range(6) if rng.random() < 0.5))
        verdict = verify_candidate(canonical, candidate)
        result = evaluate(canonical.formula, families.extend_solution(canonical, candidate))
        if isinstance(verdict, Infeasible):
            assert not result.hard_satisfied
        else:
            assert result.hard_satisfied
            expected_cost = verdict.cost
            assert result.cost == expected_cost
            if isinstance(verdict, Accepted):
                assert expected_cost == canonical.optimal_cost
            else:
                assert expected_cost > canonical.optimal_cost


def test_verdict_doc_roundtrip():
    verdicts = [
        Accepted(cost=3),
        Infeasible(violations=("a", "b")),
        Suboptimal(cost=5, optimum=2),
        Malformed(reason="nope"),
    ]
    for verdict in verdicts:
        assert verdict_from_doc(verdict_to_doc(verdict)) == verdict


def test_verdict_doc_rejects_unknown_kind():
    with pytest.raises(ValueError):
        verdict_from_doc({"kind": "meh"})
