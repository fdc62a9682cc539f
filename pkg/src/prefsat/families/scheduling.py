"""Single-machine scheduling with precedences and soft deadlines.

Decision: give each job exactly one start slot, no two jobs sharing a
slot, respecting hard precedences (a starts strictly before b).  The CNF
uses one variable per (job, slot) pair: an at-least-one clause plus
pairwise at-most-one clauses per job, at-most-one clauses per slot, and
``(-s[a,t] or -s[b,t'])`` for every t' <= t per precedence (a, b).

Deadlines are soft: the clause ``(s[j,0] or ... or s[j,d])`` says job j
should start no later than slot d.  Variant semantics:

* ``none``: no soft clauses; any feasible schedule is optimal (cost 0).
* ``p1``: every deadline weighs 1.
* ``p2``: the two-tier weights stored on the instance (high 2 / medium 1).
* ``p3``: per-job weights drawn uniformly from 1..5.
"""

from __future__ import annotations

import itertools
import random

from ..wcnf import WcnfFormula
from . import (
    InvalidSizeParams,
    PrefVariant,
    SchedInstance,
    Schedule,
    TooLargeForOracle,
    VarMap,
    variant_rng,
)

ORACLE_MAX_JOBS = 8
ORACLE_MAX_ASSIGNMENTS = 10_000_000

# Plan entries: (job, latest start slot, weight); penalty applies when the
# job starts after the latest slot.


def generate(size_params: dict, seed: int) -> SchedInstance:
    try:
        jobs = int(size_params["jobs"])
        slots = int(size_params["slots"])
        prec_prob = float(size_params["prec_prob"])
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidSizeParams(f"scheduling needs jobs, slots and prec_prob: {exc}")
    if jobs < 1:
        raise InvalidSizeParams(f"jobs must be >= 1, got {jobs}")
    if slots < jobs:
        raise InvalidSizeParams(f"slots must be >= jobs, got slots={slots} jobs={jobs}")
    if not 0.0 <= prec_prob <= 1.0:
        raise InvalidSizeParams(f"prec_prob must be in [0, 1], got {prec_prob}")
    rng = random.Random(seed)
    # Precedences are forward edges of a random topological order, so the
    # instance is acyclic and feasible by construction.
    order = list(range(jobs))
    rng.shuffle(order)
    precedences = []
    for i in range(jobs):
        for k in range(i + 1, jobs):
            if rng.random() < prec_prob:
                precedences.append((order[i], order[k]))
    deadlines = {}
    for job in range(jobs):
        latest = rng.randrange(slots)
        weight = 2 if rng.random() < 0.5 else 1
        deadlines[job] = (latest, weight)
    return SchedInstance(
        jobs=jobs,
        slots=slots,
        precedences=tuple(sorted(precedences)),
        deadlines=deadlines,
    )


def motivation_fixture() -> SchedInstance:
    """Six jobs, eight slots, four precedences and two-tier deadlines; a
    compact instance whose infeasible and optimal schedules are golden
    fixtures for verification tests."""
    return SchedInstance(
        jobs=6,
        slots=8,
        precedences=((2, 1), (3, 1), (5, 0), (5, 4)),
        deadlines={
            0: (4, 2),
            1: (0, 2),
            2: (5, 2),
            3: (2, 1),
            4: (3, 1),
            5: (3, 1),
        },
    )


def preference_plan(inst: SchedInstance, variant: PrefVariant) -> list[tuple[int, int, int]]:
    items = sorted(inst.deadlines.items())
    if variant is PrefVariant.NONE:
        return []
    if variant is PrefVariant.P1:
        return [(job, latest, 1) for job, (latest, _) in items]
    if variant is PrefVariant.P2:
        return [(job, latest, weight) for job, (latest, weight) in items]
    rng = variant_rng(inst, variant)
    return [(job, latest, rng.randint(1, 5)) for job, (latest, _) in items]


def var_of(job: int, slot: int, slots: int) -> int:
    return job * slots + slot + 1


def encode(inst: SchedInstance, variant: PrefVariant) -> tuple[WcnfFormula, VarMap]:
    jobs, slots = inst.jobs, inst.slots
    formula = WcnfFormula(jobs * slots)
    for job in range(jobs):
        formula.add_hard([var_of(job, t, slots) for t in range(slots)])
        for t in range(slots):
            for t2 in range(t + 1, slots):
                formula.add_hard([-var_of(job, t, slots), -var_of(job, t2, slots)])
    for t in range(slots):
        for a in range(jobs):
            for b in range(a + 1, jobs):
                formula.add_hard([-var_of(a, t, slots), -var_of(b, t, slots)])
    for a, b in inst.precedences:
        for t in range(slots):
            for t2 in range(t + 1):
                formula.add_hard([-var_of(a, t, slots), -var_of(b, t2, slots)])
    for job, latest, weight in preference_plan(inst, variant):
        formula.add_soft(
            [var_of(job, t, slots) for t in range(min(latest, slots - 1) + 1)], weight
        )
    varmap = VarMap(
        tuple(("start", job, t) for job in range(jobs) for t in range(slots))
    )
    return formula, varmap


def shape_error(inst: SchedInstance, solution) -> str | None:
    if not isinstance(solution, Schedule):
        return f"expected a schedule, got {type(solution).__name__}"
    for job in range(inst.jobs):
        if job not in solution.starts:
            return f"no start slot for J{job}"
    for job, slot in sorted(solution.starts.items()):
        if not 0 <= job < inst.jobs:
            return f"unknown job J{job}"
        if not 0 <= slot < inst.slots:
            return f"start slot {slot} for J{job} is outside 0..{inst.slots - 1}"
    return None


def feasibility_violations(inst: SchedInstance, solution: Schedule) -> list[str]:
    starts = solution.starts
    violations = []
    items = sorted(starts.items())
    for i, (job_a, slot_a) in enumerate(items):
        for job_b, slot_b in items[i + 1 :]:
            if slot_a == slot_b:
                violations.append(f"J{job_a} and J{job_b} both start at slot {slot_a}")
    for a, b in inst.precedences:
        if starts[a] >= starts[b]:
            violations.append(f"J{a} must precede J{b}")
    return violations


def solution_cost(inst: SchedInstance, variant: PrefVariant, solution: Schedule) -> int:
    starts = solution.starts
    return sum(
        weight
        for job, latest, weight in preference_plan(inst, variant)
        if starts[job] > latest
    )


def enumerate_solutions(inst: SchedInstance):
    for starts in itertools.permutations(range(inst.slots), inst.jobs):
        yield Schedule({job: slot for job, slot in enumerate(starts)})


def best_by_enumeration(inst: SchedInstance, variant: PrefVariant) -> tuple[int, Schedule]:
    if inst.jobs > ORACLE_MAX_JOBS:
        raise TooLargeForOracle(f"scheduling oracle capped at {ORACLE_MAX_JOBS} jobs, got {inst.jobs}")
    count = 1
    for i in range(inst.jobs):
        count *= inst.slots - i
    if count > ORACLE_MAX_ASSIGNMENTS:
        raise TooLargeForOracle(f"{count} injective schedules exceed the oracle cap")
    plan = preference_plan(inst, variant)
    deadline_jobs = [job for job, _, _ in plan]
    deadline_latest = [latest for _, latest, _ in plan]
    deadline_weight = [weight for _, _, weight in plan]
    precedences = list(inst.precedences)
    best_cost = None
    best_starts = None
    # itertools.permutations yields slot vectors in lexicographic order by
    # job index, so the first vector reaching the optimum is the reference.
    for starts in itertools.permutations(range(inst.slots), inst.jobs):
        feasible = True
        for a, b in precedences:
            if starts[a] >= starts[b]:
                feasible = False
                break
        if not feasible:
            continue
        cost = 0
        for i, job in enumerate(deadline_jobs):
            if starts[job] > deadline_latest[i]:
                cost += deadline_weight[i]
        if best_cost is None or cost < best_cost:
            best_cost = cost
            best_starts = starts
            if cost == 0:
                break
    schedule = Schedule({job: slot for job, slot in enumerate(best_starts)})
    return best_cost, schedule


_OPENERS = (
    "You must plan start times for a set of jobs on one machine.",
    "A single machine has to run several jobs, one start per time slot.",
    "Decide when each job begins on a single shared machine.",
)


def describe(inst: SchedInstance, variant: PrefVariant, seed: int) -> str:
    rng = random.Random(f"desc:scheduling:{seed}")
    lines = [rng.choice(_OPENERS)]
    lines.append(
        f"There are {inst.jobs} jobs named J0 to J{inst.jobs - 1} and discrete time "
        f"slots 0 to {inst.slots - 1}; the decision for each job is its start slot."
    )
    lines.append(
        "Each job starts exactly once, and no two jobs may start in the same slot."
    )
    for a, b in inst.precedences:
        lines.append(f"J{a} must be executed before J{b}.")
    for job, latest, weight in preference_plan(inst, variant):
        lines.append(
            f"J{job} should start no later than slot {latest}; starting it later "
            f"costs {weight} penalty point(s)."
        )
    lines.append("Objective: minimise total penalty.")
    lines.append(
        "Answer with a JSON object mapping each job name to its start slot, "
        'of the form {"J0": <slot>, "J1": <slot>, ...}.'
    )
    return "\n".join(lines) + "\n"


def payload_to_doc(inst: SchedInstance) -> dict:
    return {
        "jobs": inst.jobs,
        "slots": inst.slots,
        "precedences": [list(p) for p in inst.precedences],
        "deadlines": {str(job): list(dw) for job, dw in sorted(inst.deadlines.items())},
    }


def payload_from_doc(doc: dict) -> SchedInstance:
    return SchedInstance(
        jobs=int(doc["jobs"]),
        slots=int(doc["slots"]),
        precedences=tuple((int(a), int(b)) for a, b in doc["precedences"]),
        deadlines={
            int(job): (int(latest), int(weight))
            for job, (latest, weight) in doc["deadlines"].items()
        },
    )
