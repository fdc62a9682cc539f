"""Encoding strategies and the bounded refinement loop.

A task run sends a canonical instance's description to a model under one
of six strategies, parses or executes what comes back, and retries with a
feedback prompt on syntactic failures, up to five attempts within a wall
clock budget.  Under the default ``syntactic`` feedback policy the model
only ever sees execution, format, and API error text; canonical verdicts
are computed once at the end and never shown to the model.  The
``full-verdict`` policy additionally feeds rejection verdicts back and
keeps iterating until acceptance or the attempt cap.
"""

from __future__ import annotations

import hashlib
import json
import re
import time
from dataclasses import dataclass, field

from . import families
from .families import CanonicalInstance, SemanticSolution
from .prompts import Stage, baseline_prompt, feedback_prompt, generate_prompt, plan_prompt
from .providers import ApiError, CallKey, CompletionTimeout
from .sandbox import ExecResult, STATUS_OK, STATUS_TIMED_OUT, exec_result_from_doc, exec_result_to_doc
from .verify import Malformed, Accepted, Verdict, verdict_from_doc, verdict_to_doc, verify_candidate

TASKRUN_SCHEMA_VERSION = 1

MAX_ATTEMPTS = 5
DEFAULT_TASK_BUDGET_SEC = 300.0
DEFAULT_EXEC_TIMEOUT_SEC = 60.0

DIRECT = "direct-answer"
COT = "cot-answer"
POT = "pot-answer"
MAXSAT_NO_PLAN = "maxsat-no-plan"
MAXSAT_WITH_PLAN = "maxsat-with-plan"
MAXSAT_PLAN_FROM = "maxsat-plan-from"

STRATEGY_KINDS = (DIRECT, COT, POT, MAXSAT_NO_PLAN, MAXSAT_WITH_PLAN, MAXSAT_PLAN_FROM)

FAILURE_EXEC = "exec-error"
FAILURE_FORMAT = "format-error"
FAILURE_API = "api-error"
FAILURE_TIMEOUT = "timeout"

POLICY_SYNTACTIC = "syntactic"
POLICY_FULL_VERDICT = "full-verdict"


class PipelineError(Exception):
    pass


class NoJsonFound(PipelineError):
    pass


class NoProgramFound(PipelineError):
    pass


@dataclass(frozen=True)
class Strategy:
    kind: str
    plan_provider: str | None = None

    def __post_init__(self):
        if self.kind not in STRATEGY_KINDS:
            raise ValueError(f"unknown strategy kind {self.kind!r}")
        if (self.kind == MAXSAT_PLAN_FROM) != (self.plan_provider is not None):
            raise ValueError("plan_provider is required exactly for maxsat-plan-from")

    @property
    def name(self) -> str:
        if self.plan_provider is not None:
            return f"{self.kind}:{self.plan_provider}"
        return self.kind

    @classmethod
    def parse(cls, name: str) -> "Strategy":
        if name.startswith(MAXSAT_PLAN_FROM + ":"):
            return cls(MAXSAT_PLAN_FROM, name.split(":", 1)[1])
        return cls(name)

    @property
    def generates_code(self) -> bool:
        return self.kind in (POT, MAXSAT_NO_PLAN, MAXSAT_WITH_PLAN, MAXSAT_PLAN_FROM)

    @property
    def uses_solver(self) -> bool:
        return self.kind in (MAXSAT_NO_PLAN, MAXSAT_WITH_PLAN, MAXSAT_PLAN_FROM)

    @property
    def needs_plan(self) -> bool:
        return self.kind in (MAXSAT_WITH_PLAN, MAXSAT_PLAN_FROM)


@dataclass(frozen=True)
class ProgramSource:
    code: str
    language: str = "python"


@dataclass(frozen=True)
class Failure:
    kind: str
    detail: str


@dataclass
class Attempt:
    index: int
    prompt: str | None
    response: str | None
    program: ProgramSource | None = None
    execution: ExecResult | None = None
    solution: SemanticSolution | None = None
    claimed_cost: int | None = None
    failure: Failure | None = None


@dataclass
class TaskRun:
    instance_key: str
    strategy: str
    provider: str
    attempts: list[Attempt]
    final_verdict: Verdict
    wall_time_sec: float
    plan: str | None = None
    plan_provider: str | None = None


_FENCE_RE = re.compile(r"```([A-Za-z0-9_+.-]*)[ \t]*\r?\n(.*?)```", re.S)


def extract_program(text: str) -> ProgramSource:
    """Take the last fenced code block in the text; raises NoProgramFound
    when there is none."""
    matches = _FENCE_RE.findall(text or "")
    if not matches:
        raise NoProgramFound("no fenced code block found in the response")
    language, body = matches[-1]
    return ProgramSource(code=body, language=(language or "python").lower())


def _iter_json_objects(text: str):
    decoder = json.JSONDecoder()
    pos = 0
    while True:
        start = text.find("{", pos)
        if start < 0:
            return
        try:
            doc, end = decoder.raw_decode(text[start:])
        except ValueError:
            pos = start + 1
            continue
        if isinstance(doc, dict):
            yield doc
            pos = start + end
        else:
            pos = start + 1


def last_json_object(text: str) -> dict:
    found = None
    for doc in _iter_json_objects(text or ""):
        found = doc
    if found is None:
        raise NoJsonFound("no JSON object found in the text")
    return found


def _claimed_cost(doc: dict) -> int | None:
    cost = doc.get("objective_cost")
    if isinstance(cost, bool) or not isinstance(cost, int):
        return None
    return cost


def parse_solution_json(text: str, family: str) -> tuple[SemanticSolution, int | None]:
    """Extract the last well-formed JSON object (fenced or bare) and map it
    to a family solution.  A ``solution_json`` wrapper is unwrapped; its
    claimed ``objective_cost`` is returned for the record but never used
    for judging.  Raises NoJsonFound or families.SchemaMismatch."""
    doc = last_json_object(text)
    claimed = _claimed_cost(doc)
    if "solution_json" in doc:
        doc = doc["solution_json"]
    solution = families.solution_from_doc(family, doc)
    return solution, claimed


def solution_from_execution(result: ExecResult, family: str) -> tuple[SemanticSolution, int | None]:
    parsed = result.parsed
    doc = parsed.solution_json
    claimed = parsed.objective_cost
    if isinstance(doc, dict) and "solution_json" in doc:
        if claimed is None:
            claimed = _claimed_cost(doc)
        doc = doc["solution_json"]
    solution = families.solution_from_doc(family, doc)
    return solution, claimed


def _initial_prompt(strategy: Strategy, task: CanonicalInstance, plan: str | None) -> str:
    if strategy.uses_solver:
        return generate_prompt(task.description, plan, with_plan=strategy.needs_plan)
    return baseline_prompt(strategy.kind, task.description)


def run_strategy(
    task: CanonicalInstance,
    strategy: Strategy,
    provider,
    sandbox,
    *,
    budget_sec: float = DEFAULT_TASK_BUDGET_SEC,
    exec_timeout_sec: float = DEFAULT_EXEC_TIMEOUT_SEC,
    feedback_policy: str = POLICY_SYNTACTIC,
    plan_provider=None,
    plan_cache: dict | None = None,
    clock=time.monotonic,
) -> TaskRun:
    """Run one (instance, strategy, provider) cell to a final verdict.

    ``plan_provider`` supplies the plan for maxsat-plan-from; it defaults
    to the answering provider for maxsat-with-plan.  ``plan_cache`` maps
    (instance key, plan provider name) to plan text so a plan drafted once
    is reused across strategies and cells.
    """
    if feedback_policy not in (POLICY_SYNTACTIC, POLICY_FULL_VERDICT):
        raise ValueError(f"unknown feedback policy {feedback_policy!r}")
    start = clock()
    deadline = start + budget_sec
    attempts: list[Attempt] = []
    last_solution: SemanticSolution | None = None
    plan_text: str | None = None
    plan_provider_name: str | None = None
    pending_feedback: str | None = None

    def out_of_budget() -> bool:
        return clock() >= deadline

    if strategy.needs_plan:
        planner = plan_provider if plan_provider is not None else provider
        plan_provider_name = planner.name
        cache_key = (task.key, planner.name)
        if plan_cache is not None and cache_key in plan_cache:
            plan_text = plan_cache[cache_key]
        else:
            prompt = plan_prompt(task.description)
            call = CallKey(task.key, strategy.name, Stage.PLAN.value, 0)
            try:
                plan_text = planner.complete(prompt, key=call)
                if plan_cache is not None:
                    plan_cache[cache_key] = plan_text
            except CompletionTimeout as exc:
                attempts.append(
                    Attempt(1, prompt, None, failure=Failure(FAILURE_TIMEOUT, str(exc)))
                )
            except ApiError as exc:
                attempts.append(
                    Attempt(1, prompt, None, failure=Failure(FAILURE_API, str(exc)))
                )

    while plan_text is not None or not strategy.needs_plan:
        if len(attempts) >= MAX_ATTEMPTS:
            break
        index = len(attempts) + 1
        if out_of_budget():
            attempts.append(
                Attempt(
                    index,
                    None,
                    None,
                    failure=Failure(FAILURE_TIMEOUT, "task wall clock budget exhausted"),
                )
            )
            break
        if pending_feedback is None:
            prompt = _initial_prompt(strategy, task, plan_text)
        else:
            prompt = feedback_prompt(
                task.description, attempts[-1].response or "", pending_feedback
            )
        call = CallKey(task.key, strategy.name, Stage.GENERATE.value if index == 1 else Stage.FEEDBACK.value, index)
        try:
            response = provider.complete(prompt, key=call)
        except CompletionTimeout as exc:
            attempts.append(Attempt(index, prompt, None, failure=Failure(FAILURE_TIMEOUT, str(exc))))
            pending_feedback = str(exc)
            continue
        except ApiError as exc:
            attempts.append(Attempt(index, prompt, None, failure=Failure(FAILURE_API, str(exc))))
            pending_feedback = str(exc)
            continue

        attempt = Attempt(index, prompt, response)
        attempts.append(attempt)

        if strategy.generates_code:
            try:
                attempt.program = extract_program(response)
            except NoProgramFound as exc:
                attempt.failure = Failure(FAILURE_FORMAT, str(exc))
                pending_feedback = str(exc)
                continue
            timeout = max(1.0, min(exec_timeout_sec, deadline - clock()))
            result = sandbox.run(attempt.program, timeout_sec=timeout)
            attempt.execution = result
            if result.status != STATUS_OK:
                kind = FAILURE_TIMEOUT if result.status == STATUS_TIMED_OUT else FAILURE_EXEC
                detail = result.stderr or f"program execution failed ({result.status})"
                attempt.failure = Failure(kind, detail)
                pending_feedback = detail
                continue
            try:
                solution, claimed = solution_from_execution(result, task.family)
            except families.SchemaMismatch as exc:
                attempt.failure = Failure(FAILURE_FORMAT, str(exc))
                pending_feedback = str(exc)
                continue
        else:
            try:
                solution, claimed = parse_solution_json(response, task.family)
            except (NoJsonFound, families.SchemaMismatch) as exc:
                attempt.failure = Failure(FAILURE_FORMAT, str(exc))
                pending_feedback = str(exc)
                continue

        attempt.solution = solution
        attempt.claimed_cost = claimed
        last_solution = solution
        if feedback_policy == POLICY_SYNTACTIC:
            break
        verdict = verify_candidate(task, solution)
        if isinstance(verdict, Accepted):
            break
        pending_feedback = json.dumps(verdict_to_doc(verdict))

    if last_solution is not None:
        final = verify_candidate(task, last_solution)
    else:
        final = Malformed(reason="no parsable solution was produced")
    return TaskRun(
        instance_key=task.key,
        strategy=strategy.name,
        provider=provider.name,
        attempts=attempts,
        final_verdict=final,
        wall_time_sec=clock() - start,
        plan=plan_text,
        plan_provider=plan_provider_name,
    )


def attempt_to_doc(attempt: Attempt) -> dict:
    return {
        "index": attempt.index,
        "prompt": attempt.prompt,
        "response": attempt.response,
        "program": (
            {"code": attempt.program.code, "language": attempt.program.language}
            if attempt.program
            else None
        ),
        "execution": exec_result_to_doc(attempt.execution) if attempt.execution else None,
        "solution": (
            families.solution_to_doc(attempt.solution) if attempt.solution is not None else None
        ),
        "claimed_cost": attempt.claimed_cost,
        "failure": (
            {"kind": attempt.failure.kind, "detail": attempt.failure.detail}
            if attempt.failure
            else None
        ),
    }


def attempt_from_doc(doc: dict, family: str) -> Attempt:
    program = None
    if doc.get("program"):
        program = ProgramSource(code=doc["program"]["code"], language=doc["program"]["language"])
    solution = None
    if doc.get("solution") is not None:
        solution = families.solution_from_doc(family, doc["solution"])
    failure = None
    if doc.get("failure"):
        failure = Failure(kind=doc["failure"]["kind"], detail=doc["failure"]["detail"])
    return Attempt(
        index=doc["index"],
        prompt=doc.get("prompt"),
        response=doc.get("response"),
        program=program,
        execution=exec_result_from_doc(doc["execution"]) if doc.get("execution") else None,
        solution=solution,
        claimed_cost=doc.get("claimed_cost"),
        failure=failure,
    )


def taskrun_to_doc(run: TaskRun) -> dict:
    return {
        "schema_version": TASKRUN_SCHEMA_VERSION,
        "instance_key": run.instance_key,
        "strategy": run.strategy,
        "provider": run.provider,
        "attempts": [attempt_to_doc(a) for a in run.attempts],
        "final_verdict": verdict_to_doc(run.final_verdict),
        "wall_time_sec": run.wall_time_sec,
        "plan": run.plan,
        "plan_provider": run.plan_provider,
    }


def taskrun_from_doc(doc: dict) -> TaskRun:
    family = doc["instance_key"].split("/", 1)[0]
    return TaskRun(
        instance_key=doc["instance_key"],
        strategy=doc["strategy"],
        provider=doc["provider"],
        attempts=[attempt_from_doc(a, family) for a in doc.get("attempts", [])],
        final_verdict=verdict_from_doc(doc["final_verdict"]),
        wall_time_sec=doc.get("wall_time_sec", 0.0),
        plan=doc.get("plan"),
        plan_provider=doc.get("plan_provider"),
    )


def taskrun_digest(run: TaskRun) -> str:
    """Content hash of a task run with the wall clock excluded, so byte
    equality means semantically identical transcripts."""
    doc = taskrun_to_doc(run)
    doc.pop("wall_time_sec", None)
    blob = json.dumps(doc, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()
