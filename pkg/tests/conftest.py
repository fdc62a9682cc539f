"""Shared fixtures: worked-example formulas, random formula generation,
and an exhaustive assignment-enumeration oracle independent of the
solver under test."""

import random

import pytest

from prefsat.families import SchedInstance
from prefsat.wcnf import WcnfFormula

EXAMPLE1_TEXT = "p wcnf 3 4 5\n5 1 2 0\n5 -2 3 0\n1 -1 0\n3 -3 0\n"


def example1_formula() -> WcnfFormula:
    """Hard (x1 v x2), (-x2 v x3); soft (-x1, w=1), (-x3, w=3)."""
    return WcnfFormula.from_clauses(
        3,
        hard=[(1, 2), (-2, 3)],
        soft=[((-1,), 1), ((-3,), 3)],
    )


def motivation_payload() -> SchedInstance:
    """Six jobs on eight slots with four precedences and tiered deadline
    weights (2, 2, 2, 1, 1, 1)."""
    return SchedInstance(
        jobs=6,
        slots=8,
        precedences=((2, 1), (3, 1), (5, 0), (5, 4)),
        deadlines={0: (4, 2), 1: (0, 2), 2: (5, 2), 3: (2, 1), 4: (3, 1), 5: (3, 1)},
    )


def random_formula(rng: random.Random, max_vars: int = 12) -> WcnfFormula:
    n = rng.randint(1, max_vars)
    formula = WcnfFormula(n)

    def clause():
        size = rng.randint(1, min(4, n))
        variables = rng.sample(range(1, n + 1), size)
        return tuple(v if rng.random() < 0.5 else -v for v in variables)

    for _ in range(rng.randint(0, 2 * n)):
        formula.add_hard(clause())
    for _ in range(rng.randint(0, 2 * n)):
        formula.add_soft(clause(), rng.randint(1, 9))
    return formula


def enumerate_optimum(formula: WcnfFormula) -> int | None:
    """Exhaustive 2^n oracle: minimum soft cost over hard-satisfying
    assignments, or None when no assignment satisfies the hard part."""
    n = formula.num_vars
    best = None
    for bits in range(1 << n):
        def value(lit, bits=bits):
            v = abs(lit)
            positive = bool(bits >> (v - 1) & 1)
            return positive == (lit > 0)

        if any(not any(value(l) for l in clause) for clause in formula.hard):
            continue
        cost = sum(
            soft.weight
            for soft in formula.soft
            if not any(value(l) for l in soft.lits)
        )
        if best is None or cost < best:
            best = cost
    return best


@pytest.fixture
def rng() -> random.Random:
    return random.Random(0xC0FFEE)
