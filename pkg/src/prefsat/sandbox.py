"""Execution-result model and sandbox handles for generated programs.

The pipeline only needs an object with ``run(program, timeout_sec)``
returning an :class:`ExecResult`.  ``StubSandbox`` keeps the suite
self-contained by reporting every program as unexecutable;
``CommandSandbox`` shells out to an external runner that prints a single
JSON ExecResult document on stdout (the wire format used by the
``sandbox-run`` tool).
"""

from __future__ import annotations

import json
import os
import shlex
import subprocess
import tempfile
from dataclasses import dataclass
from typing import Any

STATUS_OK = "ok"
STATUS_EXEC_ERROR = "exec_error"
STATUS_TIMED_OUT = "timed_out"
STATUS_FORMAT_ERROR = "format_error"

STATUSES = (STATUS_OK, STATUS_EXEC_ERROR, STATUS_TIMED_OUT, STATUS_FORMAT_ERROR)


@dataclass(frozen=True)
class ExecParsed:
    """The JSON document a program printed: the inner solution document
    plus the claimed objective cost, which is recorded but never trusted."""

    solution_json: Any
    objective_cost: int | None = None


@dataclass(frozen=True)
class ExecResult:
    status: str
    stdout: str
    stderr: str
    parsed: ExecParsed | None = None

    def __post_init__(self):
        if self.status not in STATUSES:
            raise ValueError(f"unknown status {self.status!r}")
        if (self.parsed is not None) != (self.status == STATUS_OK):
            raise ValueError("parsed must be present exactly when status is ok")


def exec_result_to_doc(result: ExecResult) -> dict:
    parsed = None
    if result.parsed is not None:
        parsed = {
            "objective_cost": result.parsed.objective_cost,
            "solution_json": result.parsed.solution_json,
        }
    return {
        "status": result.status,
        "stdout": result.stdout,
        "stderr": result.stderr,
        "parsed": parsed,
    }


def exec_result_from_doc(doc: dict) -> ExecResult:
    parsed = None
    if doc.get("parsed") is not None:
        cost = doc["parsed"].get("objective_cost")
        if isinstance(cost, bool) or not isinstance(cost, int):
            cost = None
        parsed = ExecParsed(solution_json=doc["parsed"].get("solution_json"), objective_cost=cost)
    return ExecResult(
        status=doc["status"],
        stdout=doc.get("stdout", ""),
        stderr=doc.get("stderr", ""),
        parsed=parsed,
    )


class StubSandbox:
    """Reports every program as unexecutable; lets the pipeline run where
    no program runner is installed."""

    def run(self, program, timeout_sec: float) -> ExecResult:
        return ExecResult(
            status=STATUS_EXEC_ERROR,
            stdout="",
            stderr="no program sandbox is configured; program execution is unavailable",
        )


class CommandSandbox:
    """Runs programs through an external runner command.

    The runner is invoked as ``<argv> <program-file> --timeout-sec S
    --solver-bin BIN`` and must print one JSON ExecResult document on
    stdout.  A crashing or garbled runner is reported as an exec error,
    never raised.
    """

    def __init__(self, argv: list[str], solver_bin: list[str], grace_sec: float = 30.0):
        self.argv = list(argv)
        self.solver_bin = list(solver_bin)
        self.grace_sec = grace_sec

    def run(self, program, timeout_sec: float) -> ExecResult:
        with tempfile.TemporaryDirectory(prefix="prefsat-program-") as tmp:
            path = os.path.join(tmp, "program.py")
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(program.code)
            cmd = [
                *self.argv,
                path,
                "--timeout-sec",
                str(timeout_sec),
                "--solver-bin",
                shlex.join(self.solver_bin),
            ]
            try:
                proc = subprocess.run(
                    cmd,
                    capture_output=True,
                    text=True,
                    timeout=timeout_sec + self.grace_sec,
                )
            except subprocess.TimeoutExpired:
                return ExecResult(
                    status=STATUS_TIMED_OUT,
                    stdout="",
                    stderr=f"runner did not finish within {timeout_sec + self.grace_sec} s",
                )
            except OSError as exc:
                return ExecResult(status=STATUS_EXEC_ERROR, stdout="", stderr=str(exc))
        if proc.returncode != 0:
            return ExecResult(
                status=STATUS_EXEC_ERROR,
                stdout=proc.stdout,
                stderr=proc.stderr or f"runner exited with code {proc.returncode}",
            )
        try:
            doc = json.loads(proc.stdout)
            return exec_result_from_doc(doc)
        except (ValueError, KeyError, TypeError) as exc:
            return ExecResult(
                status=STATUS_EXEC_ERROR,
                stdout=proc.stdout,
                stderr=f"runner printed an unreadable result: {exc}",
            )


class ScriptedSandbox:
    """Test double that replays a fixed sequence of results."""

    def __init__(self, results: list[ExecResult]):
        self.results = list(results)
        self.calls = []

    def run(self, program, timeout_sec: float) -> ExecResult:
        self.calls.append((program, timeout_sec))
        if not self.results:
            raise AssertionError("scripted sandbox exhausted")
        return self.results.pop(0)
