import random

import pytest

from prefsat import solver
from prefsat.solver import Engine, Optimal, SolverConfig, TimedOut, Unsat, solve
from prefsat.wcnf import WcnfFormula, evaluate

from conftest import enumerate_optimum, example1_formula, random_formula


def test_example1_optimal_cost_and_model():
    outcome = solve(example1_formula())
    assert isinstance(outcome, Optimal)
    assert outcome.cost == 1
    assert outcome.model == {1: True, 2: False, 3: False}


def test_optimal_model_is_total_and_matches_cost(rng):
    for _ in range(40):
        formula = random_formula(rng, max_vars=8)
        outcome = solve(formula)
        if not isinstance(outcome, Optimal):
            continue
        assert set(outcome.model) == set(range(1, formula.num_vars + 1))
        result = evaluate(formula, outcome.model)
        assert result.hard_satisfied
        assert result.cost == outcome.cost


def test_contradictory_hard_clauses_are_unsat():
    formula = WcnfFormula.from_clauses(1, hard=[(1,), (-1,)])
    assert isinstance(solve(formula), Unsat)


def test_empty_hard_clause_is_unsat():
    formula = WcnfFormula(2)
    formula.add_hard(())
    formula.add_soft((1,), 3)
    assert isinstance(solve(formula), Unsat)


def test_satisfiable_hard_with_no_soft_costs_zero():
    formula = WcnfFormula.from_clauses(3, hard=[(1, 2), (-1, 3)])
    outcome = solve(formula)
    assert isinstance(outcome, Optimal)
    assert outcome.cost == 0


def test_empty_formula_is_trivially_optimal():
    outcome = solve(WcnfFormula(0))
    assert isinstance(outcome, Optimal)
    assert outcome.cost == 0
    assert outcome.model == {}


def test_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(time_budget_sec=0)
    with pytest.raises(ValueError):
        SolverConfig(time_budget_sec=-1.0)


def test_tiny_budget_times_out():
    n = 26
    formula = WcnfFormula(n)
    for v in range(1, n + 1):
        formula.add_soft((v,), 1)
        formula.add_soft((-v,), 1)
    outcome = solve(formula, SolverConfig(time_budget_sec=1e-9))
    assert isinstance(outcome, TimedOut)


def test_solver_matches_enumeration(rng):
    for _ in range(60):
        formula = random_formula(rng, max_vars=10)
        expected = enumerate_optimum(formula)
        outcome = solve(formula)
        if expected is None:
            assert isinstance(outcome, Unsat)
        else:
            assert isinstance(outcome, Optimal)
            assert outcome.cost == expected


def test_engines_agree(rng):
    lsu = SolverConfig(engine=Engine.LINEAR_SAT_UNSAT)
    for _ in range(60):
        formula = random_formula(rng, max_vars=9)
        a = solve(formula)
        b = solve(formula, lsu)
        assert type(a) is type(b)
        if isinstance(a, Optimal):
            assert a.cost == b.cost
            result = evaluate(formula, b.model)
            assert result.hard_satisfied
            assert result.cost == b.cost


def test_solve_does_not_mutate_formula():
    formula = example1_formula()
    before = (list(formula.hard), list(formula.soft), formula.num_vars, formula.top)
    solve(formula)
    assert (list(formula.hard), list(formula.soft), formula.num_vars, formula.top) == before


def test_engine_values_are_cli_names():
    assert Engine.BRANCH_AND_BOUND.value == "branch-and-bound"
    assert Engine.LINEAR_SAT_UNSAT.value == "linear-sat-unsat"
