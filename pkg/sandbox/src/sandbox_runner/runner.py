"""Program execution with isolation and structured results.

``execute`` runs one program in a fresh interpreter subprocess inside an
empty working directory, then reports what happened as an
:class:`ExecResult` whose JSON form is the wire format expected by
callers: ``{"status", "stdout", "stderr", "parsed"}`` with status one of
``ok``, ``exec_error``, ``timed_out``, ``format_error`` and ``parsed``
present exactly when the status is ``ok``.

Isolation is by environment stripping: the subprocess sees only an
interpreter path, the bridge package on PYTHONPATH, the solver command in
SANDBOX_SOLVER_BIN, and HOME/TMPDIR pointing into the working directory.
There is no network-namespace guarantee; a program that finds another
route to the network is not stopped.  The working directory holds only
the program file, so canonical instance data is out of reach.
"""

from __future__ import annotations

import json
import os
import shlex
import signal
import subprocess
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any

STATUS_OK = "ok"
STATUS_EXEC_ERROR = "exec_error"
STATUS_TIMED_OUT = "timed_out"
STATUS_FORMAT_ERROR = "format_error"

STATUSES = (STATUS_OK, STATUS_EXEC_ERROR, STATUS_TIMED_OUT, STATUS_FORMAT_ERROR)

PROGRAM_NAME = "program.py"


@dataclass(frozen=True)
class ProgramSource:
    code: str
    language: str = "python"


@dataclass(frozen=True)
class ExecRequest:
    """One program to run: source text, a wall-clock budget, an empty
    working directory, and the solver command the bridge may call."""

    program: ProgramSource
    timeout_sec: float
    workdir: Path
    solver_bin: tuple[str, ...] = ()


@dataclass(frozen=True)
class ExecResult:
    status: str
    stdout: str
    stderr: str
    parsed: dict | None = None

    def __post_init__(self):
        if self.status not in STATUSES:
            raise ValueError(f"unknown status {self.status!r}")
        if (self.parsed is not None) != (self.status == STATUS_OK):
            raise ValueError("parsed must be present exactly when status is ok")

    def to_doc(self) -> dict:
        return {
            "status": self.status,
            "stdout": self.stdout,
            "stderr": self.stderr,
            "parsed": self.parsed,
        }


def shim_path() -> Path:
    """Directory to prepend to the program's PYTHONPATH so that
    ``pysat.formula`` and ``pysat.examples.rc2`` resolve to the bridge."""
    return Path(__file__).resolve().parent / "shim"


def build_env(workdir: Path, solver_bin: tuple[str, ...]) -> dict[str, str]:
    env = {
        "PATH": os.environ.get("PATH", os.defpath),
        "HOME": str(workdir),
        "TMPDIR": str(workdir),
        "LANG": "C.UTF-8",
        "LC_ALL": "C.UTF-8",
        "PYTHONPATH": str(shim_path()),
        "PYTHONDONTWRITEBYTECODE": "1",
        "PYTHONUNBUFFERED": "1",
    }
    if solver_bin:
        env["SANDBOX_SOLVER_BIN"] = shlex.join(solver_bin)
    return env


def _last_json_object(text: str) -> dict | None:
    decoder = json.JSONDecoder()
    found = None
    idx = 0
    while True:
        start = text.find("{", idx)
        if start < 0:
            return found
        try:
            doc, end = decoder.raw_decode(text, start)
        except ValueError:
            idx = start + 1
            continue
        if isinstance(doc, dict):
            found = doc
        idx = end if end > start else start + 1


def _parse_document(doc: dict) -> dict:
    """Split a printed document into the claimed cost and the solution.

    A document of the advertised shape ``{"objective_cost": ...,
    "solution_json": ...}`` is unwrapped; anything else is taken as the
    solution itself with no claimed cost.
    """
    if "solution_json" in doc:
        cost: Any = doc.get("objective_cost")
        if isinstance(cost, bool) or not isinstance(cost, int):
            cost = None
        return {"objective_cost": cost, "solution_json": doc["solution_json"]}
    return {"objective_cost": None, "solution_json": doc}


def _kill_tree(proc: subprocess.Popen) -> None:
    try:
        os.killpg(os.getpgid(proc.pid), signal.SIGKILL)
    except (ProcessLookupError, PermissionError):
        proc.kill()


def execute(request: ExecRequest) -> ExecResult:
    """Run one program to a structured result; never raises for anything
    the program or the interpreter does."""
    if request.timeout_sec <= 0:
        return ExecResult(STATUS_EXEC_ERROR, "", "timeout must be positive")
    if not request.program.code.strip():
        return ExecResult(STATUS_EXEC_ERROR, "", "program text is empty")
    workdir = Path(request.workdir)
    workdir.mkdir(parents=True, exist_ok=True)
    leftovers = sorted(p.name for p in workdir.iterdir())
    if leftovers:
        return ExecResult(
            STATUS_EXEC_ERROR, "", f"working directory is not empty: {leftovers}"
        )
    (workdir / PROGRAM_NAME).write_text(request.program.code, encoding="utf-8")

    try:
        proc = subprocess.Popen(
            [sys.executable, PROGRAM_NAME],
            cwd=str(workdir),
            env=build_env(workdir, tuple(request.solver_bin)),
            stdout=subprocess.PIPE,
            stderr=subprocess.PIPE,
            text=True,
            start_new_session=True,
        )
    except OSError as exc:
        return ExecResult(STATUS_EXEC_ERROR, "", f"could not start the interpreter: {exc}")

    try:
        stdout, stderr = proc.communicate(timeout=request.timeout_sec)
    except subprocess.TimeoutExpired:
        _kill_tree(proc)
        stdout, stderr = proc.communicate()
        note = f"killed after {request.timeout_sec} s"
        stderr = f"{stderr}\n{note}" if stderr else note
        return ExecResult(STATUS_TIMED_OUT, stdout or "", stderr)

    if proc.returncode != 0:
        return ExecResult(
            STATUS_EXEC_ERROR,
            stdout,
            stderr or f"program exited with code {proc.returncode}",
        )

    doc = _last_json_object(stdout)
    if doc is None:
        note = "no JSON object found on stdout"
        return ExecResult(
            STATUS_FORMAT_ERROR, stdout, f"{stderr}\n{note}" if stderr else note
        )
    return ExecResult(STATUS_OK, stdout, stderr, parsed=_parse_document(doc))
