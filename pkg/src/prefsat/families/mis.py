"""Maximum independent set.

Decision: pick a subset of vertices with no edge inside it.  Hard clauses
forbid both endpoints of every edge; soft clauses express per-vertex
preferences.  Variant semantics:

* ``none``: unit-weight selection preference for every vertex (leaving a
  vertex out costs 1), so the optimum maximises the selection size.
* ``p1``: per-vertex selection weights drawn uniformly from 1..5.
* ``p2``: two-tier priorities, weight 3 (high) or 1 (low) per vertex.
* ``p3``: unit base selection preferences for all vertices plus, on a
  seeded subset, an extra include preference (weight 2 if left out) or an
  exclude preference (weight 1 if picked).
"""

from __future__ import annotations

import random

from ..wcnf import WcnfFormula
from . import (
    InvalidSizeParams,
    MisInstance,
    MisSelection,
    PrefVariant,
    TooLargeForOracle,
    VarMap,
    variant_rng,
)

ORACLE_MAX_VERTICES = 20

# Plan entries: ("keep", v, w) costs w when v is unselected,
# ("drop", v, w) costs w when v is selected.


def generate(size_params: dict, seed: int) -> MisInstance:
    try:
        n = int(size_params["n"])
        edge_prob = float(size_params["edge_prob"])
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidSizeParams(f"mis needs integer n and edge_prob in [0, 1]: {exc}")
    if n < 1:
        raise InvalidSizeParams(f"n must be >= 1, got {n}")
    if not 0.0 <= edge_prob <= 1.0:
        raise InvalidSizeParams(f"edge_prob must be in [0, 1], got {edge_prob}")
    rng = random.Random(seed)
    edges = tuple(
        (u, v)
        for u in range(n)
        for v in range(u + 1, n)
        if rng.random() < edge_prob
    )
    return MisInstance(n=n, edges=edges)


def preference_plan(inst: MisInstance, variant: PrefVariant) -> list[tuple[str, int, int]]:
    if variant is PrefVariant.NONE:
        return [("keep", v, 1) for v in range(inst.n)]
    rng = variant_rng(inst, variant)
    if variant is PrefVariant.P1:
        return [("keep", v, rng.randint(1, 5)) for v in range(inst.n)]
    if variant is PrefVariant.P2:
        return [("keep", v, 3 if rng.random() < 0.5 else 1) for v in range(inst.n)]
    plan = [("keep", v, 1) for v in range(inst.n)]
    subset = sorted(rng.sample(range(inst.n), max(1, inst.n // 3)))
    for v in subset:
        if rng.random() < 0.5:
            plan.append(("keep", v, 2))
        else:
            plan.append(("drop", v, 1))
    return plan


def encode(inst: MisInstance, variant: PrefVariant) -> tuple[WcnfFormula, VarMap]:
    formula = WcnfFormula(inst.n)
    for u, v in sorted(inst.edges):
        formula.add_hard([-(u + 1), -(v + 1)])
    for kind, v, weight in preference_plan(inst, variant):
        formula.add_soft([v + 1] if kind == "keep" else [-(v + 1)], weight)
    varmap = VarMap(tuple(("vertex", v) for v in range(inst.n)))
    return formula, varmap


def shape_error(inst: MisInstance, solution) -> str | None:
    if not isinstance(solution, MisSelection):
        return f"expected a vertex selection, got {type(solution).__name__}"
    for v in sorted(solution.vertices):
        if not 0 <= v < inst.n:
            return f"vertex {v} is outside 0..{inst.n - 1}"
    return None


def feasibility_violations(inst: MisInstance, solution: MisSelection) -> list[str]:
    picked = solution.vertices
    return [
        f"vertices {u} and {v} are adjacent"
        for u, v in sorted(inst.edges)
        if u in picked and v in picked
    ]


def solution_cost(inst: MisInstance, variant: PrefVariant, solution: MisSelection) -> int:
    picked = solution.vertices
    cost = 0
    for kind, v, weight in preference_plan(inst, variant):
        if kind == "keep" and v not in picked:
            cost += weight
        elif kind == "drop" and v in picked:
            cost += weight
    return cost


def enumerate_solutions(inst: MisInstance):
    for mask in range(1 << inst.n):
        yield MisSelection(frozenset(v for v in range(inst.n) if mask >> v & 1))


def best_by_enumeration(inst: MisInstance, variant: PrefVariant) -> tuple[int, MisSelection]:
    if inst.n > ORACLE_MAX_VERTICES:
        raise TooLargeForOracle(f"mis oracle capped at {ORACLE_MAX_VERTICES} vertices, got {inst.n}")
    plan = preference_plan(inst, variant)
    keep = [0] * inst.n
    drop = [0] * inst.n
    for kind, v, weight in plan:
        if kind == "keep":
            keep[v] += weight
        else:
            drop[v] += weight
    edge_masks = [(1 << u) | (1 << v) for u, v in inst.edges]
    best_cost = None
    best_key = None
    best_mask = 0
    for mask in range(1 << inst.n):
        ok = True
        for em in edge_masks:
            if mask & em == em:
                ok = False
                break
        if not ok:
            continue
        cost = 0
        for v in range(inst.n):
            if mask >> v & 1:
                cost += drop[v]
            else:
                cost += keep[v]
        if best_cost is None or cost < best_cost:
            best_cost, best_mask = cost, mask
            best_key = None
        elif cost == best_cost:
            if best_key is None:
                best_key = tuple(v for v in range(inst.n) if best_mask >> v & 1)
            key = tuple(v for v in range(inst.n) if mask >> v & 1)
            if key < best_key:
                best_key, best_mask = key, mask
    selection = MisSelection(frozenset(v for v in range(inst.n) if best_mask >> v & 1))
    return best_cost, selection


_OPENERS = (
    "You are choosing a group of vertices from a graph.",
    "Consider a graph from which you must pick a set of vertices.",
    "A graph is given; select a subset of its vertices.",
)


def describe(inst: MisInstance, variant: PrefVariant, seed: int) -> str:
    rng = random.Random(f"desc:mis:{seed}")
    lines = [rng.choice(_OPENERS)]
    lines.append(
        f"The graph has {inst.n} vertices, numbered 0 to {inst.n - 1}; the decision "
        "for each vertex is whether it is selected."
    )
    for u, v in sorted(inst.edges):
        lines.append(f"Vertices {u} and {v} are adjacent: you may not select both.")
    for kind, v, weight in preference_plan(inst, variant):
        if kind == "keep":
            lines.append(f"Leaving vertex {v} unselected costs {weight} penalty point(s).")
        else:
            lines.append(f"Selecting vertex {v} costs {weight} penalty point(s).")
    lines.append("Objective: minimise total penalty.")
    lines.append(
        'Answer with a JSON object of the form {"selected": [<selected vertex numbers>]}.'
    )
    return "\n".join(lines) + "\n"


def payload_to_doc(inst: MisInstance) -> dict:
    return {"n": inst.n, "edges": [list(e) for e in inst.edges]}


def payload_from_doc(doc: dict) -> MisInstance:
    return MisInstance(n=int(doc["n"]), edges=tuple((int(u), int(v)) for u, v in doc["edges"]))
