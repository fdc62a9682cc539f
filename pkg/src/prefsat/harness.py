"""Experiment harness.

Runs the instance x strategy x provider matrix over a pinned dataset,
persists one task run per JSONL line so an interrupted run resumes where
it stopped, and computes acceptance-rate tables.  Acceptance for a group
is 100 * accepted / expected, shown to one decimal with round-half-up;
expected cells with no stored record count as not accepted and the row is
flagged.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path

from . import dataset, pipeline
from .families import VARIANTS
from .pipeline import (
    MAXSAT_PLAN_FROM,
    MAXSAT_WITH_PLAN,
    POLICY_SYNTACTIC,
    Strategy,
    run_strategy,
    taskrun_to_doc,
)
from .providers import HttpProvider, ProviderSpec, ReplayProvider
from .sandbox import CommandSandbox, StubSandbox

GROUP_FAMILY_MODEL = "family-model"
GROUP_FAMILY_MODEL_VARIANT = "family-model-variant"

TASKRUNS_NAME = "taskruns.jsonl"
CONFIG_NAME = "config.json"


class HarnessError(Exception):
    pass


@dataclass
class RunConfig:
    """Declarative description of one experiment matrix."""

    dataset_root: str
    strategies: list[str]
    providers: list[dict]
    feedback_policy: str = POLICY_SYNTACTIC
    budget_sec: float = pipeline.DEFAULT_TASK_BUDGET_SEC
    exec_timeout_sec: float = pipeline.DEFAULT_EXEC_TIMEOUT_SEC
    workers: int = 4
    sandbox: dict = field(default_factory=lambda: {"type": "stub"})
    results_root: str = "results"

    def __post_init__(self):
        if self.workers < 1:
            raise HarnessError(f"workers must be >= 1, got {self.workers}")
        if not self.strategies:
            raise HarnessError("at least one strategy is required")
        if not self.providers:
            raise HarnessError("at least one provider is required")
        parsed = [Strategy.parse(name) for name in self.strategies]
        provider_names = [doc.get("name") for doc in self.providers]
        if len(set(provider_names)) != len(provider_names) or None in provider_names:
            raise HarnessError("providers need unique non-empty names")
        for strat in parsed:
            if strat.plan_provider is not None and strat.plan_provider not in provider_names:
                raise HarnessError(
                    f"strategy {strat.name} names unknown plan provider {strat.plan_provider!r}"
                )

    def to_doc(self) -> dict:
        return {
            "dataset_root": self.dataset_root,
            "strategies": list(self.strategies),
            "providers": [dict(p) for p in self.providers],
            "feedback_policy": self.feedback_policy,
            "budget_sec": self.budget_sec,
            "exec_timeout_sec": self.exec_timeout_sec,
            "workers": self.workers,
            "sandbox": dict(self.sandbox),
            "results_root": self.results_root,
        }

    @classmethod
    def from_doc(cls, doc: dict) -> "RunConfig":
        known = {
            "dataset_root",
            "strategies",
            "providers",
            "feedback_policy",
            "budget_sec",
            "exec_timeout_sec",
            "workers",
            "sandbox",
            "results_root",
        }
        unknown = set(doc) - known
        if unknown:
            raise HarnessError(f"unknown config keys: {sorted(unknown)}")
        try:
            return cls(**doc)
        except TypeError as exc:
            raise HarnessError(f"bad config: {exc}")

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        return cls.from_doc(json.loads(Path(path).read_text(encoding="utf-8")))


def make_provider(doc: dict):
    kind = doc.get("type", "http")
    if kind == "replay":
        if "path" in doc:
            return ReplayProvider.from_file(doc["name"], doc["path"])
        return ReplayProvider(doc["name"], doc.get("responses", {}))
    if kind == "http":
        spec = ProviderSpec(
            name=doc["name"],
            endpoint=doc["endpoint"],
            model=doc["model"],
            auth_env=doc["auth_env"],
            temperature=doc.get("temperature", 0.0),
            request_timeout_sec=doc.get("request_timeout_sec", 120.0),
            rate_limit_per_sec=doc.get("rate_limit_per_sec"),
        )
        return HttpProvider(spec)
    raise HarnessError(f"unknown provider type {kind!r}")


def make_sandbox(doc: dict):
    kind = doc.get("type", "stub")
    if kind == "stub":
        return StubSandbox()
    if kind == "command":
        return CommandSandbox(
            argv=list(doc["argv"]),
            solver_bin=list(doc["solver_bin"]),
            grace_sec=doc.get("grace_sec", 30.0),
        )
    raise HarnessError(f"unknown sandbox type {kind!r}")


def run_id(manifest: dict, config: RunConfig) -> str:
    blob = dataset.manifest_digest(manifest) + json.dumps(
        config.to_doc(), sort_keys=True, separators=(",", ":")
    )
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:12]


def cell_key(instance_key: str, strategy: str, provider: str) -> tuple[str, str, str]:
    return (instance_key, strategy, provider)


class ResultsStore:
    """Append-only JSONL of task-run documents with an in-memory index.

    Appends are serialized through one lock and flushed before the index
    is updated, so a record a reader can see is always a whole line.  A
    torn final line from a crashed writer is dropped on load.
    """

    def __init__(self, path):
        self.path = Path(path)
        self._lock = threading.Lock()
        self._index: dict[tuple[str, str, str], dict] = {}
        if self.path.exists():
            self._load()

    def _load(self) -> None:
        lines = self.path.read_bytes().split(b"\n")
        for pos, line in enumerate(lines):
            if not line.strip():
                continue
            try:
                doc = json.loads(line.decode("utf-8"))
            except (UnicodeDecodeError, json.JSONDecodeError):
                if pos == len(lines) - 1:
                    break
                raise HarnessError(f"{self.path}: corrupt record on line {pos + 1}")
            self._index[cell_key(doc["instance_key"], doc["strategy"], doc["provider"])] = doc

    def __contains__(self, key: tuple[str, str, str]) -> bool:
        return key in self._index

    def __len__(self) -> int:
        return len(self._index)

    def get(self, key: tuple[str, str, str]) -> dict | None:
        return self._index.get(key)

    def docs(self) -> list[dict]:
        return list(self._index.values())

    def append(self, doc: dict) -> None:
        line = json.dumps(doc, sort_keys=True, separators=(",", ":"))
        key = cell_key(doc["instance_key"], doc["strategy"], doc["provider"])
        with self._lock:
            with open(self.path, "a", encoding="utf-8") as handle:
                handle.write(line + "\n")
                handle.flush()
                os.fsync(handle.fileno())
            self._index[key] = doc


def _error_doc(instance_key: str, strategy: str, provider: str, exc: Exception) -> dict:
    return {
        "schema_version": pipeline.TASKRUN_SCHEMA_VERSION,
        "instance_key": instance_key,
        "strategy": strategy,
        "provider": provider,
        "attempts": [],
        "final_verdict": {"kind": "malformed", "reason": f"harness error: {exc}"},
        "wall_time_sec": 0.0,
        "error": f"{type(exc).__name__}: {exc}",
    }


def run_experiment(config: RunConfig, *, progress=None) -> dict:
    """Execute every missing cell of the matrix and write the run
    artifacts (config.json, taskruns.jsonl, table1..3 in Markdown).

    Returns a summary with the run id and cell counts.  Already-stored
    cells are skipped, which is what makes an interrupted run resumable.
    """
    manifest = dataset.load_manifest(config.dataset_root)
    instances = {
        entry["key"]: inst
        for entry, inst in dataset.iter_instances(config.dataset_root, manifest)
    }
    providers = {doc["name"]: make_provider(doc) for doc in config.providers}
    provider_order = [doc["name"] for doc in config.providers]
    strategies = [Strategy.parse(name) for name in config.strategies]
    sandbox = make_sandbox(config.sandbox)

    rid = run_id(manifest, config)
    run_dir = Path(config.results_root) / rid
    run_dir.mkdir(parents=True, exist_ok=True)
    config_path = run_dir / CONFIG_NAME
    if not config_path.exists():
        config_path.write_text(
            json.dumps(config.to_doc(), sort_keys=True, indent=2) + "\n", encoding="utf-8"
        )
    store = ResultsStore(run_dir / TASKRUNS_NAME)

    work = []
    for key in (entry["key"] for entry in manifest["instances"]):
        for strat in strategies:
            for pname in provider_order:
                if cell_key(key, strat.name, pname) not in store:
                    work.append((key, strat, pname))
    skipped = len(instances) * len(strategies) * len(provider_order) - len(work)

    plan_cache: dict = {}
    errors = 0
    errors_lock = threading.Lock()

    def one_cell(key: str, strat: Strategy, pname: str) -> None:
        nonlocal errors
        task = instances[key]
        provider = providers[pname]
        planner = providers[strat.plan_provider] if strat.plan_provider else None
        try:
            run = run_strategy(
                task,
                strat,
                provider,
                sandbox,
                budget_sec=config.budget_sec,
                exec_timeout_sec=config.exec_timeout_sec,
                feedback_policy=config.feedback_policy,
                plan_provider=planner,
                plan_cache=plan_cache,
            )
            doc = taskrun_to_doc(run)
        except Exception as exc:
            doc = _error_doc(key, strat.name, pname, exc)
            with errors_lock:
                errors += 1
        store.append(doc)
        if progress is not None:
            progress(doc)

    if config.workers == 1:
        for item in work:
            one_cell(*item)
    else:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            futures = [pool.submit(one_cell, *item) for item in work]
            for future in futures:
                future.result()

    for which in (1, 2, 3):
        text = render_table(store.docs(), manifest, config, which, fmt="md")
        (run_dir / f"table{which}.md").write_text(text, encoding="utf-8")

    return {
        "run_id": rid,
        "run_dir": str(run_dir),
        "expected": len(instances) * len(strategies) * len(provider_order),
        "executed": len(work),
        "skipped": skipped,
        "errors": errors,
    }


def acceptance_rate(accepted: int, total: int) -> Decimal:
    if total <= 0:
        raise HarnessError("acceptance rate of an empty group is undefined")
    value = Decimal(100) * Decimal(accepted) / Decimal(total)
    return value.quantize(Decimal("0.1"), rounding=ROUND_HALF_UP)


def _is_accepted(doc: dict | None) -> bool:
    return bool(doc) and doc.get("final_verdict", {}).get("kind") == "accepted"


def _parse_key(instance_key: str) -> tuple[str, str]:
    family, _, rest = instance_key.partition("/")
    variant = rest.rpartition("/")[2]
    return family, variant


@dataclass
class TableRow:
    family: str
    provider: str
    cells: dict[str, list[Decimal]]
    missing: int = 0
    plan_from: str | None = None


def acceptance_table(
    docs: list[dict],
    manifest: dict,
    strategies: list[str],
    provider_order: list[str],
    groupby: str = GROUP_FAMILY_MODEL,
) -> list[TableRow]:
    """Aggregate stored task runs into rows keyed by family and provider.

    ``GROUP_FAMILY_MODEL`` gives one number per strategy aggregated over
    every variant; ``GROUP_FAMILY_MODEL_VARIANT`` gives one number per
    variant per strategy, in dataset variant order.
    """
    if groupby not in (GROUP_FAMILY_MODEL, GROUP_FAMILY_MODEL_VARIANT):
        raise HarnessError(f"unknown groupby {groupby!r}")
    by_cell = {
        cell_key(d["instance_key"], d["strategy"], d["provider"]): d for d in docs
    }
    variant_names = manifest.get("variants", [v.value for v in VARIANTS])
    keys = [entry["key"] for entry in manifest["instances"]]
    families_order = manifest.get("families") or sorted({_parse_key(k)[0] for k in keys})
    rows = []
    for family in families_order:
        family_keys = [k for k in keys if _parse_key(k)[0] == family]
        for pname in provider_order:
            cells: dict[str, list[Decimal]] = {}
            missing = 0
            for strategy in strategies:
                if groupby == GROUP_FAMILY_MODEL:
                    buckets = [family_keys]
                else:
                    buckets = [
                        [k for k in family_keys if _parse_key(k)[1] == v]
                        for v in variant_names
                    ]
                values = []
                for bucket in buckets:
                    accepted = 0
                    for key in bucket:
                        doc = by_cell.get(cell_key(key, strategy, pname))
                        if doc is None:
                            missing += 1
                        elif _is_accepted(doc):
                            accepted += 1
                    values.append(acceptance_rate(accepted, len(bucket)))
                cells[strategy] = values
            rows.append(TableRow(family=family, provider=pname, cells=cells, missing=missing))
    return rows


def _plan_source(doc: dict) -> str | None:
    strategy = doc["strategy"]
    if strategy == MAXSAT_WITH_PLAN:
        return doc["provider"]
    if strategy.startswith(MAXSAT_PLAN_FROM + ":"):
        return strategy.split(":", 1)[1]
    return None


def plan_transfer_table(
    docs: list[dict],
    manifest: dict,
    strategies: list[str],
    provider_order: list[str],
) -> list[TableRow]:
    """Rows (family, provider, plan-from) with per-variant acceptance, for
    the strategies that draft a plan before encoding."""
    plan_strategies = [
        s for s in strategies
        if s == MAXSAT_WITH_PLAN or s.startswith(MAXSAT_PLAN_FROM + ":")
    ]
    by_cell = {
        cell_key(d["instance_key"], d["strategy"], d["provider"]): d for d in docs
    }
    variant_names = manifest.get("variants", [v.value for v in VARIANTS])
    keys = [entry["key"] for entry in manifest["instances"]]
    families_order = manifest.get("families") or sorted({_parse_key(k)[0] for k in keys})
    rows = []
    for family in families_order:
        family_keys = [k for k in keys if _parse_key(k)[0] == family]
        for pname in provider_order:
            sources: dict[str, list[str]] = {}
            for strategy in plan_strategies:
                source = pname if strategy == MAXSAT_WITH_PLAN else strategy.split(":", 1)[1]
                sources.setdefault(source, []).append(strategy)
            for source, names in sources.items():
                values = []
                missing = 0
                for variant in variant_names:
                    bucket = [k for k in family_keys if _parse_key(k)[1] == variant]
                    accepted = 0
                    total = 0
                    for key in bucket:
                        for strategy in names:
                            total += 1
                            doc = by_cell.get(cell_key(key, strategy, pname))
                            if doc is None:
                                missing += 1
                            elif _is_accepted(doc):
                                accepted += 1
                    values.append(acceptance_rate(accepted, total))
                rows.append(
                    TableRow(
                        family=family,
                        provider=pname,
                        cells={"plan": values},
                        missing=missing,
                        plan_from=source,
                    )
                )
    return rows


def _format_cell(values: list[Decimal]) -> str:
    return " / ".join(str(v) for v in values)


def _align(header: list[str], body: list[list[str]], fmt: str) -> str:
    if fmt == "csv":
        lines = [",".join(header)]
        lines.extend(",".join(cell.replace(",", ";") for cell in row) for row in body)
        return "\n".join(lines) + "\n"
    widths = [
        max(len(header[i]), *(len(row[i]) for row in body)) if body else len(header[i])
        for i in range(len(header))
    ]
    def line(cells):
        return "| " + " | ".join(c.ljust(widths[i]) for i, c in enumerate(cells)) + " |"
    out = [line(header), "| " + " | ".join("-" * w for w in widths) + " |"]
    out.extend(line(row) for row in body)
    return "\n".join(out) + "\n"


def render_table(
    docs: list[dict],
    manifest: dict,
    config: RunConfig,
    which: int,
    fmt: str = "md",
) -> str:
    """Render table 1 (aggregate), 2 (per-variant), or 3 (plan transfer)
    as aligned Markdown or CSV."""
    if fmt not in ("md", "csv"):
        raise HarnessError(f"unknown table format {fmt!r}")
    provider_order = [doc["name"] for doc in config.providers]
    strategies = list(config.strategies)
    flagged = 0
    if which in (1, 2):
        groupby = GROUP_FAMILY_MODEL if which == 1 else GROUP_FAMILY_MODEL_VARIANT
        rows = acceptance_table(docs, manifest, strategies, provider_order, groupby)
        header = ["Family", "Model", *strategies]
        body = []
        for row in rows:
            mark = "*" if row.missing else ""
            body.append(
                [row.family, row.provider + mark]
                + [_format_cell(row.cells[s]) for s in strategies]
            )
            flagged += row.missing
    elif which == 3:
        rows = plan_transfer_table(docs, manifest, strategies, provider_order)
        variant_names = manifest.get("variants", [v.value for v in VARIANTS])
        header = ["Family", "Model", "Plan-from", *variant_names]
        body = []
        for row in rows:
            mark = "*" if row.missing else ""
            body.append(
                [row.family, row.provider, (row.plan_from or "") + mark]
                + [str(v) for v in row.cells["plan"]]
            )
            flagged += row.missing
    else:
        raise HarnessError(f"no table {which}; pick 1, 2 or 3")
    text = _align(header, body, fmt)
    if flagged and fmt == "md":
        text += f"\n\\* {flagged} expected cell(s) missing; counted as not accepted.\n"
    return text
