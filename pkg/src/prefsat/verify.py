"""Candidate-solution verification against canonical instances.

The primary check is semantic: feasibility and cost are computed directly
on the family instance, so alternative encodings and alternative optima
are accepted as long as the solution is feasible and meets the canonical
optimal cost.  A SAT-level cross-check (extend the solution over the
canonical variable map and evaluate the formula) is available through
:func:`prefsat.families.extend_solution` and exercised in tests.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import families
from .families import CanonicalInstance, SemanticSolution


@dataclass(frozen=True)
class Accepted:
    cost: int


@dataclass(frozen=True)
class Infeasible:
    violations: tuple[str, ...]


@dataclass(frozen=True)
class Suboptimal:
    cost: int
    optimum: int


@dataclass(frozen=True)
class Malformed:
    reason: str


Verdict = Accepted | Infeasible | Suboptimal | Malformed


def verify_candidate(canonical: CanonicalInstance, solution: SemanticSolution) -> Verdict:
    """Judge a candidate solution.

    Accepted iff the candidate is feasible and its preference cost equals
    the canonical optimal cost.  Claimed costs play no role here: the cost
    is always recomputed from the solution itself.
    """
    reason = families.shape_error(canonical.payload, solution)
    if reason is not None:
        return Malformed(reason=reason)
    ok, violations = families.check_feasible(canonical.payload, solution)
    if not ok:
        return Infeasible(violations=tuple(violations))
    cost = families.solution_cost(canonical.payload, canonical.variant, solution)
    if cost == canonical.optimal_cost:
        return Accepted(cost=cost)
    return Suboptimal(cost=cost, optimum=canonical.optimal_cost)


def verdict_to_doc(verdict: Verdict) -> dict:
    if isinstance(verdict, Accepted):
        return {"kind": "accepted", "cost": verdict.cost}
    if isinstance(verdict, Infeasible):
        return {"kind": "infeasible", "violations": list(verdict.violations)}
    if isinstance(verdict, Suboptimal):
        return {"kind": "suboptimal", "cost": verdict.cost, "optimum": verdict.optimum}
    if isinstance(verdict, Malformed):
        return {"kind": "malformed", "reason": verdict.reason}
    raise TypeError(f"not a verdict: {verdict!r}")


def verdict_from_doc(doc: dict) -> Verdict:
    kind = doc.get("kind")
    if kind == "accepted":
        return Accepted(cost=doc["cost"])
    if kind == "infeasible":
        return Infeasible(violations=tuple(doc["violations"]))
    if kind == "suboptimal":
        return Suboptimal(cost=doc["cost"], optimum=doc["optimum"])
    if kind == "malformed":
        return Malformed(reason=doc["reason"])
    raise ValueError(f"unknown verdict kind {kind!r}")
