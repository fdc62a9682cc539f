"""Weighted partial CNF formulas and the classic WDIMACS text format.

Variables are positive integers 1..num_vars and a literal is a nonzero signed
integer whose sign gives the polarity.  Hard clauses must all be satisfied;
every soft clause carries a positive integer weight and the objective is to
minimise the total weight of falsified soft clauses.

The text format is classic WDIMACS: a ``p wcnf V C TOP`` header followed by
one clause per line, each line starting with the clause weight and ending
with a terminating ``0``.  Hard clauses carry the sentinel weight TOP.
"""

from __future__ import annotations

from dataclasses import dataclass


class WcnfError(ValueError):
    """Base error for malformed formulas, text, or assignments."""


class MalformedHeader(WcnfError):
    pass


class LiteralOutOfRange(WcnfError):
    pass


class MissingTerminatingZero(WcnfError):
    pass


class WeightNotPositive(WcnfError):
    pass


class IncompleteAssignment(WcnfError):
    pass


def normalize_literals(literals) -> tuple[int, ...]:
    """Drop duplicate literals, keeping first-occurrence order."""
    seen = set()
    out = []
    for lit in literals:
        lit = int(lit)
        if lit == 0:
            raise LiteralOutOfRange("literal 0 is not allowed")
        if lit not in seen:
            seen.add(lit)
            out.append(lit)
    return tuple(out)


def is_tautology(literals) -> bool:
    positive = {lit for lit in literals if lit > 0}
    return any(-lit in positive for lit in literals if lit < 0)


@dataclass(frozen=True)
class SoftClause:
    lits: tuple[int, ...]
    weight: int


@dataclass(frozen=True)
class EvalResult:
    """Outcome of evaluating a total assignment against a formula.

    ``violated_hard`` and ``violated_soft`` hold clause indices into the
    formula's hard and soft lists; ``cost`` is the total weight of the
    violated soft clauses.
    """

    hard_satisfied: bool
    violated_hard: tuple[int, ...]
    cost: int
    violated_soft: tuple[int, ...]


class WcnfFormula:
    """Mutable weighted partial CNF formula.

    ``top`` is the hard-clause sentinel weight used by the WDIMACS format.
    Unless fixed explicitly (the parser keeps the header value) it is one
    more than the sum of soft weights, the smallest value that no
    combination of soft clauses can reach.
    """

    def __init__(self, num_vars: int = 0, top: int | None = None):
        if num_vars < 0:
            raise WcnfError(f"num_vars must be >= 0, got {num_vars}")
        if top is not None and top < 1:
            raise MalformedHeader(f"top must be >= 1, got {top}")
        self.num_vars = num_vars
        self.hard: list[tuple[int, ...]] = []
        self.soft: list[SoftClause] = []
        self._top = top

    @property
    def top(self) -> int:
        if self._top is not None:
            return self._top
        return 1 + self.soft_weight_total()

    def soft_weight_total(self) -> int:
        return sum(clause.weight for clause in self.soft)

    def _check_range(self, lits: tuple[int, ...]) -> None:
        for lit in lits:
            if abs(lit) > self.num_vars:
                raise LiteralOutOfRange(
                    f"literal {lit} exceeds num_vars={self.num_vars}"
                )

    def add_hard(self, literals) -> None:
        """Add a hard clause.  Tautologies are dropped; the empty clause is
        kept and makes the formula unsatisfiable."""
        lits = normalize_literals(literals)
        self._check_range(lits)
        if is_tautology(lits):
            return
        self.hard.append(lits)

    def add_soft(self, literals, weight: int) -> None:
        if not isinstance(weight, int) or isinstance(weight, bool) or weight < 1:
            raise WeightNotPositive(f"soft weight must be a positive integer, got {weight!r}")
        lits = normalize_literals(literals)
        self._check_range(lits)
        self.soft.append(SoftClause(lits, weight))

    def validate_top(self) -> None:
        if self.top <= self.soft_weight_total():
            raise MalformedHeader(
                f"top={self.top} must exceed the total soft weight "
                f"{self.soft_weight_total()}"
            )

    @classmethod
    def from_clauses(cls, num_vars, hard=(), soft=(), top=None) -> "WcnfFormula":
        formula = cls(num_vars, top=top)
        for clause in hard:
            formula.add_hard(clause)
        for clause, weight in soft:
            formula.add_soft(clause, weight)
        return formula

    def __eq__(self, other) -> bool:
        if not isinstance(other, WcnfFormula):
            return NotImplemented
        return (
            self.num_vars == other.num_vars
            and self.hard == other.hard
            and self.soft == other.soft
            and self.top == other.top
        )

    def __repr__(self) -> str:
        return (
            f"WcnfFormula(num_vars={self.num_vars}, hard={len(self.hard)}, "
            f"soft={len(self.soft)}, top={self.top})"
        )


def parse_wdimacs(text: str) -> WcnfFormula:
    """Parse classic WDIMACS text into a formula.

    Comment lines start with ``c`` and are ignored.  A clause whose weight
    is at least the header TOP is hard, anything lighter is soft.  Clauses
    are normalized on construction (duplicate literals dropped, hard
    tautologies removed), so the result round-trips through
    :func:`serialize_wdimacs` to a canonical byte form.

    Raises MalformedHeader, LiteralOutOfRange, MissingTerminatingZero or
    WeightNotPositive on bad input.
    """
    formula = None
    num_vars = declared = top = 0
    seen = 0
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if formula is None:
            parts = line.split()
            if len(parts) != 5 or parts[0] != "p" or parts[1] != "wcnf":
                raise MalformedHeader(f"expected 'p wcnf V C TOP', got {line!r}")
            try:
                num_vars, declared, top = (int(p) for p in parts[2:])
            except ValueError:
                raise MalformedHeader(f"non-integer field in header {line!r}") from None
            if num_vars < 0 or declared < 0 or top < 1:
                raise MalformedHeader(f"out-of-range field in header {line!r}")
            formula = WcnfFormula(num_vars, top=top)
            continue
        tokens = line.split()
        if tokens[-1] != "0":
            raise MissingTerminatingZero(f"clause line must end with 0: {line!r}")
        try:
            weight = int(tokens[0])
        except ValueError:
            raise WeightNotPositive(
                f"clause weight must be a positive integer, got {tokens[0]!r}"
            ) from None
        if weight <= 0:
            raise WeightNotPositive(f"clause weight must be positive, got {weight}")
        lits = []
        for token in tokens[1:-1]:
            try:
                lit = int(token)
            except ValueError:
                raise LiteralOutOfRange(f"invalid literal {token!r}") from None
            if lit == 0:
                raise LiteralOutOfRange("terminating 0 inside clause body")
            if abs(lit) > num_vars:
                raise LiteralOutOfRange(f"literal {lit} exceeds num_vars={num_vars}")
            lits.append(lit)
        seen += 1
        if weight >= top:
            formula.add_hard(lits)
        else:
            formula.add_soft(lits, weight)
    if formula is None:
        raise MalformedHeader("missing 'p wcnf' header")
    if seen != declared:
        raise MalformedHeader(f"header declares {declared} clauses, found {seen}")
    formula.validate_top()
    return formula


def serialize_wdimacs(formula: WcnfFormula) -> str:
    """Serialize to canonical WDIMACS bytes: header, hard clauses in order,
    then soft clauses in order.  Never emits comments."""
    formula.validate_top()
    top = formula.top
    lines = [f"p wcnf {formula.num_vars} {len(formula.hard) + len(formula.soft)} {top}"]
    for clause in formula.hard:
        lines.append(" ".join([str(top), *(str(lit) for lit in clause), "0"]))
    for soft in formula.soft:
        lines.append(" ".join([str(soft.weight), *(str(lit) for lit in soft.lits), "0"]))
    return "\n".join(lines) + "\n"


def evaluate(formula: WcnfFormula, assignment: dict[int, bool]) -> EvalResult:
    """Evaluate a total assignment.

    The assignment must map exactly the variables 1..num_vars to booleans;
    anything else raises IncompleteAssignment.
    """
    expected = range(1, formula.num_vars + 1)
    missing = [v for v in expected if v not in assignment]
    if missing:
        raise IncompleteAssignment(f"assignment is missing variables {missing}")
    if len(assignment) != formula.num_vars:
        extra = sorted(set(assignment) - set(expected))
        raise IncompleteAssignment(f"assignment mentions unknown variables {extra}")

    def satisfied(clause: tuple[int, ...]) -> bool:
        return any(assignment[abs(lit)] == (lit > 0) for lit in clause)

    violated_hard = tuple(
        i for i, clause in enumerate(formula.hard) if not satisfied(clause)
    )
    violated_soft = tuple(
        i for i, soft in enumerate(formula.soft) if not satisfied(soft.lits)
    )
    cost = sum(formula.soft[i].weight for i in violated_soft)
    return EvalResult(
        hard_satisfied=not violated_hard,
        violated_hard=violated_hard,
        cost=cost,
        violated_soft=violated_soft,
    )
