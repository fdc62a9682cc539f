"""Exact weighted partial MaxSAT solving.

Two engines are provided.  The default is a depth-first branch and bound
over partial assignments with unit propagation on hard clauses; the lower
bound at a node is the weight of soft clauses already falsified, branching
picks the lowest-index unassigned variable and tries true first, so the
returned model is reproducible.  The second engine (linear SAT-UNSAT)
repeatedly searches for any total assignment strictly cheaper than the
incumbent until none exists; it shares the propagation core and is used
for cross-checking.
"""

from __future__ import annotations

import enum
import time
from dataclasses import dataclass, field

from .wcnf import WcnfFormula


class Engine(str, enum.Enum):
    BRANCH_AND_BOUND = "branch-and-bound"
    LINEAR_SAT_UNSAT = "linear-sat-unsat"


@dataclass(frozen=True)
class SolverConfig:
    time_budget_sec: float = 60.0
    engine: Engine = Engine.BRANCH_AND_BOUND

    def __post_init__(self):
        if self.time_budget_sec <= 0:
            raise ValueError("time_budget_sec must be positive")


@dataclass(frozen=True)
class Optimal:
    cost: int
    model: dict[int, bool] = field(hash=False)


@dataclass(frozen=True)
class Unsat:
    pass


@dataclass(frozen=True)
class TimedOut:
    best_cost_so_far: int | None = None


SolveOutcome = Optimal | Unsat | TimedOut

_UNASSIGNED = 2


class _Timeout(Exception):
    pass


class _FoundOne(Exception):
    pass


class _Search:
    """Trail-based DFS over total assignments with counter propagation.

    Counters track processed trail entries only; queued but unprocessed
    assignments are visible through ``val``, which unit detection consults
    before forcing a literal.
    """

    def __init__(self, formula: WcnfFormula, deadline: float):
        n = formula.num_vars
        self.n = n
        self.hard = [tuple(c) for c in formula.hard]
        self.soft = [tuple(s.lits) for s in formula.soft]
        self.weights = [s.weight for s in formula.soft]
        self.h_sat = [0] * len(self.hard)
        self.h_un = [len(c) for c in self.hard]
        self.s_sat = [0] * len(self.soft)
        self.s_un = [len(c) for c in self.soft]
        self.pos_h = [[] for _ in range(n + 1)]
        self.neg_h = [[] for _ in range(n + 1)]
        self.pos_s = [[] for _ in range(n + 1)]
        self.neg_s = [[] for _ in range(n + 1)]
        for i, clause in enumerate(self.hard):
            for lit in clause:
                (self.pos_h if lit > 0 else self.neg_h)[abs(lit)].append(i)
        for i, clause in enumerate(self.soft):
            for lit in clause:
                (self.pos_s if lit > 0 else self.neg_s)[abs(lit)].append(i)
        self.val = bytearray([_UNASSIGNED]) * (n + 1)
        self.trail: list[int] = []
        self.qhead = 0
        self.cost = 0
        self.bound = formula.top
        self.best_cost: int | None = None
        self.best_model: bytes | None = None
        self.first_only = False
        self.deadline = deadline
        self._tick = 0

    def push(self, lit: int) -> None:
        self.val[lit if lit > 0 else -lit] = 1 if lit > 0 else 0
        self.trail.append(lit)

    def _apply(self, lit: int) -> bool:
        """Update counters for a processed assignment; returns True on a
        hard-clause conflict.  Implied unit literals are pushed."""
        v = lit if lit > 0 else -lit
        if lit > 0:
            sat_h, un_h = self.pos_h[v], self.neg_h[v]
            sat_s, un_s = self.pos_s[v], self.neg_s[v]
        else:
            sat_h, un_h = self.neg_h[v], self.pos_h[v]
            sat_s, un_s = self.neg_s[v], self.pos_s[v]
        h_sat, h_un = self.h_sat, self.h_un
        for c in sat_h:
            h_sat[c] += 1
        conflict = False
        val = self.val
        for c in un_h:
            h_un[c] -= 1
            if h_sat[c] == 0 and not conflict:
                remaining = h_un[c]
                if remaining == 0:
                    conflict = True
                elif remaining == 1:
                    unassigned = 0
                    satisfied = False
                    for u in self.hard[c]:
                        value = val[u if u > 0 else -u]
                        if value == _UNASSIGNED:
                            unassigned = u
                        elif (value == 1) == (u > 0):
                            satisfied = True
                            break
                    if satisfied:
                        continue
                    if unassigned:
                        self.push(unassigned)
                    else:
                        conflict = True
        s_sat, s_un = self.s_sat, self.s_un
        for c in sat_s:
            s_sat[c] += 1
        for c in un_s:
            s_un[c] -= 1
            if s_sat[c] == 0 and s_un[c] == 0:
                self.cost += self.weights[c]
        return conflict

    def _unapply(self, lit: int) -> None:
        v = lit if lit > 0 else -lit
        if lit > 0:
            sat_h, un_h = self.pos_h[v], self.neg_h[v]
            sat_s, un_s = self.pos_s[v], self.neg_s[v]
        else:
            sat_h, un_h = self.neg_h[v], self.pos_h[v]
            sat_s, un_s = self.neg_s[v], self.pos_s[v]
        for c in sat_h:
            self.h_sat[c] -= 1
        for c in un_h:
            self.h_un[c] += 1
        for c in sat_s:
            self.s_sat[c] -= 1
        s_sat, s_un = self.s_sat, self.s_un
        for c in un_s:
            if s_sat[c] == 0 and s_un[c] == 0:
                self.cost -= self.weights[c]
            s_un[c] += 1

    def propagate(self) -> bool:
        while self.qhead < len(self.trail):
            lit = self.trail[self.qhead]
            self.qhead += 1
            if self._apply(lit):
                return False
        return True

    def undo_to(self, mark: int) -> None:
        while len(self.trail) > mark:
            index = len(self.trail) - 1
            lit = self.trail.pop()
            if index < self.qhead:
                self._unapply(lit)
            self.val[lit if lit > 0 else -lit] = _UNASSIGNED
        if self.qhead > mark:
            self.qhead = mark

    def seed_units(self) -> bool:
        """Queue root-level unit hard clauses; returns False on immediate
        unsatisfiability (an empty hard clause or contradictory units)."""
        for clause in self.hard:
            if not clause:
                return False
            if len(clause) == 1:
                lit = clause[0]
                value = self.val[abs(lit)]
                if value == _UNASSIGNED:
                    self.push(lit)
                elif (value == 1) != (lit > 0):
                    return False
        return True

    def search(self, lowest: int) -> None:
        self._tick += 1
        if (self._tick & 1023) == 0 and time.monotonic() > self.deadline:
            raise _Timeout
        val = self.val
        v = lowest
        n = self.n
        while v <= n and val[v] != _UNASSIGNED:
            v += 1
        if v > n:
            # The bound check must happen here too: propagation can assign
            # every variable without search ever branching, so a leaf may be
            # reached with no prior cost-vs-bound comparison.
            if self.cost < self.bound:
                self.best_cost = self.cost
                self.best_model = bytes(val)
                if self.first_only:
                    raise _FoundOne
                self.bound = self.cost
            return
        for lit in (v, -v):
            mark = len(self.trail)
            self.push(lit)
            if self.propagate() and self.cost < self.bound:
                self.search(v + 1)
            self.undo_to(mark)


def _model_dict(search: _Search) -> dict[int, bool]:
    return {v: bool(search.best_model[v]) for v in range(1, search.n + 1)}


def _solve_branch_and_bound(formula: WcnfFormula, deadline: float) -> SolveOutcome:
    search = _Search(formula, deadline)
    if not search.seed_units() or not search.propagate():
        return Unsat()
    try:
        search.search(1)
    except _Timeout:
        return TimedOut(best_cost_so_far=search.best_cost)
    if search.best_model is None:
        return Unsat()
    return Optimal(cost=search.best_cost, model=_model_dict(search))


def _solve_linear_sat_unsat(formula: WcnfFormula, deadline: float) -> SolveOutcome:
    upper = formula.top
    best_cost: int | None = None
    best_model: dict[int, bool] | None = None
    while True:
        search = _Search(formula, deadline)
        search.first_only = True
        search.bound = upper
        if not search.seed_units() or not search.propagate():
            return Unsat() if best_model is None else Optimal(best_cost, best_model)
        try:
            search.search(1)
        except _FoundOne:
            pass
        except _Timeout:
            return TimedOut(best_cost_so_far=best_cost)
        if search.best_model is None:
            break
        best_cost = search.best_cost
        best_model = _model_dict(search)
        if best_cost == 0:
            break
        upper = best_cost
    if best_model is None:
        return Unsat()
    return Optimal(cost=best_cost, model=best_model)


def solve(formula: WcnfFormula, config: SolverConfig | None = None) -> SolveOutcome:
    """Solve a weighted partial MaxSAT formula exactly.

    Returns Optimal with a minimum-cost model, Unsat when the hard clauses
    are unsatisfiable, or TimedOut when the time budget runs out first.
    The result is deterministic for a given formula and engine.
    """
    config = config or SolverConfig()
    deadline = time.monotonic() + config.time_budget_sec
    if config.engine is Engine.LINEAR_SAT_UNSAT:
        return _solve_linear_sat_unsat(formula, deadline)
    return _solve_branch_and_bound(formula, deadline)
