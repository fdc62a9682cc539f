"""Weighted CNF container, importable as ``pysat.formula`` in the sandbox.

Only the calls advertised to generated programs exist: ``WCNF()``,
``append(clause)`` for a hard clause, and ``append(clause, weight=w)``
for a soft clause with a positive integer weight.
"""


class WCNF:
    def __init__(self):
        self.hard = []
        self.soft = []
        self.wght = []
        self.nv = 0

    def append(self, clause, weight=None):
        lits = []
        for lit in clause:
            if isinstance(lit, bool) or not isinstance(lit, int):
                raise ValueError(f"clause literals must be integers, got {lit!r}")
            if lit == 0:
                raise ValueError("literal 0 is the clause terminator and cannot appear")
            lits.append(lit)
            self.nv = max(self.nv, abs(lit))
        if weight is None:
            self.hard.append(lits)
            return
        if isinstance(weight, bool) or not isinstance(weight, int) or weight < 1:
            raise ValueError(f"soft weight must be a positive integer, got {weight!r}")
        self.soft.append(lits)
        self.wght.append(weight)

    def to_wdimacs(self):
        """Classic weighted DIMACS text: header with a top weight of one
        more than the soft total, hard clauses first, then soft clauses,
        in insertion order."""
        top = 1 + sum(self.wght)
        lines = [f"p wcnf {self.nv} {len(self.hard) + len(self.soft)} {top}"]
        for clause in self.hard:
            lines.append(" ".join([str(top), *(str(lit) for lit in clause), "0"]))
        for clause, weight in zip(self.soft, self.wght):
            lines.append(" ".join([str(weight), *(str(lit) for lit in clause), "0"]))
        return "\n".join(lines) + "\n"
