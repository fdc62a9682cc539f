"""Optimiser bridge, importable as ``pysat.examples.rc2`` in the sandbox.

``RC2(wcnf).compute()`` writes the formula as a WDIMACS file in the
working directory and runs the solver command named by the
SANDBOX_SOLVER_BIN environment variable as ``<solver> solve <file>``,
then parses the answer lines: ``o <cost>``, ``s OPTIMUM FOUND`` with a
``v`` model line, or ``s UNSATISFIABLE``.  compute() returns the model as
a list of signed literals, or None when unsatisfiable; ``cost`` holds the
optimum weight after a successful compute().
"""

import os
import shlex
import subprocess
import tempfile


class RC2:
    def __init__(self, formula):
        self.formula = formula
        self.cost = 0
        self.model = None

    def _solver_argv(self):
        command = os.environ.get("SANDBOX_SOLVER_BIN", "")
        argv = shlex.split(command)
        if not argv:
            raise RuntimeError(
                "no solver is configured: SANDBOX_SOLVER_BIN must hold the "
                "solver command"
            )
        return argv

    def compute(self):
        argv = self._solver_argv()
        fd, path = tempfile.mkstemp(prefix="formula-", suffix=".wcnf", dir=os.getcwd())
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            handle.write(self.formula.to_wdimacs())
        try:
            proc = subprocess.run([*argv, "solve", path], capture_output=True, text=True)
        except OSError as exc:
            raise RuntimeError(f"solver executable could not be run: {exc}")
        if proc.returncode != 0:
            detail = proc.stderr.strip() or proc.stdout.strip()
            raise RuntimeError(f"solver failed: {detail}")
        status = None
        cost = None
        lits = []
        for line in proc.stdout.splitlines():
            if line.startswith("s "):
                status = line[2:].strip()
            elif line.startswith("o "):
                cost = int(line[2:].strip())
            elif line.startswith("v "):
                lits.extend(int(tok) for tok in line[2:].split())
        if status == "UNSATISFIABLE":
            self.model = None
            return None
        if status != "OPTIMUM FOUND" or cost is None:
            raise RuntimeError(f"solver gave no optimum, output was {proc.stdout!r}")
        self.cost = cost
        self.model = [lit for lit in lits if lit != 0]
        return self.model
