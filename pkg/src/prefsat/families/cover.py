"""Weighted set cover.

Decision: choose a collection of the given sets whose union covers the
universe.  One hard clause per element requires some containing set to be
chosen; soft clauses price the selection.  Variant semantics:

* ``none``: choosing any set costs 1, so the optimum minimises the number
  of chosen sets.
* ``p1``: choosing set i costs the weight stored on the instance (1..5).
* ``p2``: two-tier costs (3 high / 1 low) plus a seeded subset of favored
  sets, each costing 2 when left out.
* ``p3``: unit base costs plus seeded pairwise anti-preferences: choosing
  both sets of a pair costs an extra 1..3.
"""

from __future__ import annotations

import random

from ..wcnf import WcnfFormula
from . import (
    CoverInstance,
    CoverSelection,
    InvalidSizeParams,
    PrefVariant,
    TooLargeForOracle,
    VarMap,
    variant_rng,
)

ORACLE_MAX_SETS = 20

# Plan entries: ("cost", i, w) costs w when set i is chosen,
# ("favor", i, w) costs w when set i is not chosen,
# ("pair", i, j, w) costs w when sets i and j are both chosen.


def generate(size_params: dict, seed: int) -> CoverInstance:
    try:
        universe = int(size_params["universe"])
        num_sets = int(size_params["sets"])
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidSizeParams(f"setcover needs universe and sets counts: {exc}")
    if universe < 1:
        raise InvalidSizeParams(f"universe must be >= 1, got {universe}")
    if num_sets < 1:
        raise InvalidSizeParams(f"sets must be >= 1, got {num_sets}")
    rng = random.Random(seed)
    members: list[set[int]] = []
    for _ in range(num_sets):
        members.append({e for e in range(universe) if rng.random() < 0.35})
    # Patch coverage so the union always spans the universe.
    for element in range(universe):
        if not any(element in s for s in members):
            members[rng.randrange(num_sets)].add(element)
    weights = [rng.randint(1, 5) for _ in range(num_sets)]
    return CoverInstance(
        universe=universe,
        sets=tuple((tuple(sorted(s)), w) for s, w in zip(members, weights)),
    )


def preference_plan(inst: CoverInstance, variant: PrefVariant) -> list[tuple]:
    k = len(inst.sets)
    if variant is PrefVariant.NONE:
        return [("cost", i, 1) for i in range(k)]
    if variant is PrefVariant.P1:
        return [("cost", i, weight) for i, (_, weight) in enumerate(inst.sets)]
    rng = variant_rng(inst, variant)
    if variant is PrefVariant.P2:
        plan = [("cost", i, 3 if rng.random() < 0.5 else 1) for i in range(k)]
        favored = sorted(rng.sample(range(k), max(1, k // 3)))
        plan.extend(("favor", i, 2) for i in favored)
        return plan
    plan = [("cost", i, 1) for i in range(k)]
    if k >= 2:
        all_pairs = [(i, j) for i in range(k) for j in range(i + 1, k)]
        chosen = sorted(rng.sample(all_pairs, min(len(all_pairs), max(1, k // 2))))
        plan.extend(("pair", i, j, rng.randint(1, 3)) for i, j in chosen)
    return plan


def encode(inst: CoverInstance, variant: PrefVariant) -> tuple[WcnfFormula, VarMap]:
    k = len(inst.sets)
    formula = WcnfFormula(k)
    for element in range(inst.universe):
        formula.add_hard(
            [i + 1 for i, (elements, _) in enumerate(inst.sets) if element in elements]
        )
    for entry in preference_plan(inst, variant):
        if entry[0] == "cost":
            formula.add_soft([-(entry[1] + 1)], entry[2])
        elif entry[0] == "favor":
            formula.add_soft([entry[1] + 1], entry[2])
        else:
            _, i, j, weight = entry
            formula.add_soft([-(i + 1), -(j + 1)], weight)
    varmap = VarMap(tuple(("set", i) for i in range(k)))
    return formula, varmap


def shape_error(inst: CoverInstance, solution) -> str | None:
    if not isinstance(solution, CoverSelection):
        return f"expected a set selection, got {type(solution).__name__}"
    for i in sorted(solution.sets):
        if not 0 <= i < len(inst.sets):
            return f"set index {i} is outside 0..{len(inst.sets) - 1}"
    return None


def feasibility_violations(inst: CoverInstance, solution: CoverSelection) -> list[str]:
    covered = set()
    for i in solution.sets:
        covered.update(inst.sets[i][0])
    return [
        f"element {element} is not covered"
        for element in range(inst.universe)
        if element not in covered
    ]


def solution_cost(inst: CoverInstance, variant: PrefVariant, solution: CoverSelection) -> int:
    chosen = solution.sets
    cost = 0
    for entry in preference_plan(inst, variant):
        if entry[0] == "cost" and entry[1] in chosen:
            cost += entry[2]
        elif entry[0] == "favor" and entry[1] not in chosen:
            cost += entry[2]
        elif entry[0] == "pair" and entry[1] in chosen and entry[2] in chosen:
            cost += entry[3]
    return cost


def enumerate_solutions(inst: CoverInstance):
    k = len(inst.sets)
    for mask in range(1 << k):
        yield CoverSelection(frozenset(i for i in range(k) if mask >> i & 1))


def best_by_enumeration(inst: CoverInstance, variant: PrefVariant) -> tuple[int, CoverSelection]:
    k = len(inst.sets)
    if k > ORACLE_MAX_SETS:
        raise TooLargeForOracle(f"setcover oracle capped at {ORACLE_MAX_SETS} sets, got {k}")
    element_masks = []
    for elements, _ in inst.sets:
        mask = 0
        for element in elements:
            mask |= 1 << element
        element_masks.append(mask)
    full = (1 << inst.universe) - 1
    plan = preference_plan(inst, variant)
    best_cost = None
    best_key = None
    best_mask = 0
    for mask in range(1 << k):
        covered = 0
        for i in range(k):
            if mask >> i & 1:
                covered |= element_masks[i]
        if covered != full:
            continue
        chosen = frozenset(i for i in range(k) if mask >> i & 1)
        cost = 0
        for entry in plan:
            if entry[0] == "cost" and entry[1] in chosen:
                cost += entry[2]
            elif entry[0] == "favor" and entry[1] not in chosen:
                cost += entry[2]
            elif entry[0] == "pair" and entry[1] in chosen and entry[2] in chosen:
                cost += entry[3]
        if best_cost is None or cost < best_cost:
            best_cost, best_mask = cost, mask
            best_key = None
        elif cost == best_cost:
            if best_key is None:
                best_key = tuple(i for i in range(k) if best_mask >> i & 1)
            key = tuple(sorted(chosen))
            if key < best_key:
                best_key, best_mask = key, mask
    selection = CoverSelection(frozenset(i for i in range(k) if best_mask >> i & 1))
    return best_cost, selection


_OPENERS = (
    "You must cover a collection of items by buying sets.",
    "Pick sets from a catalogue so that every item is covered.",
    "A covering problem: choose sets whose union spans all elements.",
)


def describe(inst: CoverInstance, variant: PrefVariant, seed: int) -> str:
    rng = random.Random(f"desc:setcover:{seed}")
    lines = [rng.choice(_OPENERS)]
    k = len(inst.sets)
    lines.append(
        f"There are {inst.universe} elements, numbered 0 to {inst.universe - 1}, and "
        f"{k} sets named S0 to S{k - 1}; the decision for each set is whether it is chosen."
    )
    for i, (elements, _) in enumerate(inst.sets):
        listing = ", ".join(str(e) for e in elements) if elements else "nothing"
        lines.append(f"Set S{i} contains: {listing}.")
    for element in range(inst.universe):
        lines.append(f"Element {element} must be covered by at least one chosen set.")
    for entry in preference_plan(inst, variant):
        if entry[0] == "cost":
            lines.append(f"Choosing set S{entry[1]} costs {entry[2]} penalty point(s).")
        elif entry[0] == "favor":
            lines.append(
                f"Set S{entry[1]} is preferred: leaving it out costs {entry[2]} penalty point(s)."
            )
        else:
            lines.append(
                f"Choosing both S{entry[1]} and S{entry[2]} together costs an extra "
                f"{entry[3]} penalty point(s)."
            )
    lines.append("Objective: minimise total penalty.")
    lines.append(
        'Answer with a JSON object of the form {"selected": [<chosen set numbers>]}.'
    )
    return "\n".join(lines) + "\n"


def payload_to_doc(inst: CoverInstance) -> dict:
    return {
        "universe": inst.universe,
        "sets": [{"elements": list(elements), "weight": w} for elements, w in inst.sets],
    }


def payload_from_doc(doc: dict) -> CoverInstance:
    return CoverInstance(
        universe=int(doc["universe"]),
        sets=tuple(
            (tuple(int(e) for e in entry["elements"]), int(entry["weight"]))
            for entry in doc["sets"]
        ),
    )
