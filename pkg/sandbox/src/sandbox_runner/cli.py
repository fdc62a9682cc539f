"""Command-line runner.

``sandbox-run <program-file> --timeout-sec S --solver-bin "CMD"`` executes
the program in a fresh temporary working directory and prints exactly one
JSON result document on stdout.  The exit code is 0 whenever a structured
result was produced, including error results; only unusable arguments
exit nonzero.
"""

from __future__ import annotations

import argparse
import json
import shlex
import sys
import tempfile
from pathlib import Path

from .runner import STATUS_EXEC_ERROR, ExecRequest, ExecResult, ProgramSource, execute


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sandbox-run",
        description="Run one generated program in an isolated subprocess and "
        "print a JSON result document.",
    )
    parser.add_argument("program_file", help="path to the program to run")
    parser.add_argument("--timeout-sec", type=float, default=60.0,
                        help="wall-clock budget for the program")
    parser.add_argument("--solver-bin", default="",
                        help="solver command the program's bridge may call, shell-quoted")
    return parser


def _emit(result: ExecResult) -> int:
    print(json.dumps(result.to_doc(), sort_keys=True))
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        code = Path(args.program_file).read_text(encoding="utf-8")
    except OSError as exc:
        return _emit(ExecResult(STATUS_EXEC_ERROR, "", f"unreadable program file: {exc}"))
    with tempfile.TemporaryDirectory(prefix="sandbox-run-") as tmp:
        request = ExecRequest(
            program=ProgramSource(code),
            timeout_sec=args.timeout_sec,
            workdir=Path(tmp),
            solver_bin=tuple(shlex.split(args.solver_bin)),
        )
        result = execute(request)
    return _emit(result)


if __name__ == "__main__":
    sys.exit(main())
