"""Command-line entry point.

Subcommands: ``gen`` builds a dataset, ``solve`` runs the exact solver on
a WDIMACS file, ``verify`` judges a candidate solution against an
instance file, ``run`` executes an experiment matrix, ``report`` renders
acceptance tables, and ``oracle`` prints the enumeration optimum.  Exit
codes are a contract: 0 success, 1 internal error, 2 usage error, and for
``verify`` 0/3/4/5 for accepted/infeasible/suboptimal/malformed.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__, dataset, families, harness, solver, wcnf
from .families import FAMILY_IDS, PrefVariant
from .verify import Accepted, Infeasible, Malformed, Suboptimal, verdict_to_doc, verify_candidate

VERIFY_EXIT_CODES = {Accepted: 0, Infeasible: 3, Suboptimal: 4, Malformed: 5}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="prefsat",
        description="Preference-aware MaxSAT workbench: datasets, exact solving, "
        "verification, and strategy evaluation.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate, solve, and pin a dataset")
    gen.add_argument("--out", required=True, help="output directory")
    gen.add_argument("--seed", type=int, default=dataset.DEFAULT_SEED)
    gen.add_argument("--count", type=int, default=dataset.DEFAULT_COUNT,
                     help="instances per family")
    gen.add_argument("--families", default=",".join(FAMILY_IDS),
                     help="comma-separated family ids")
    gen.add_argument("--preset", choices=["motivation"],
                     help="write a fixed single-instance dataset instead of a grid")

    slv = sub.add_parser("solve", help="solve a WDIMACS file exactly")
    slv.add_argument("file", help="path to a WDIMACS file")
    slv.add_argument("--engine", choices=[e.value for e in solver.Engine],
                     default=solver.Engine.BRANCH_AND_BOUND.value)
    slv.add_argument("--timeout", type=float, default=60.0, help="time budget in seconds")

    ver = sub.add_parser("verify", help="judge a candidate solution for an instance")
    ver.add_argument("--instance", required=True, help="instance JSON file")
    ver.add_argument("--solution", required=True,
                     help="candidate solution JSON, or @path to read it from a file")

    run = sub.add_parser("run", help="execute an experiment matrix")
    run.add_argument("--config", required=True, help="experiment config JSON file")

    rep = sub.add_parser("report", help="render an acceptance table for a finished run")
    rep.add_argument("--run", required=True, help="run id")
    rep.add_argument("--table", type=int, required=True, choices=[1, 2, 3])
    rep.add_argument("--format", choices=["md", "csv"], default="md")
    rep.add_argument("--results-root", default="results")

    orc = sub.add_parser("oracle", help="print the enumeration optimum for an instance")
    orc.add_argument("--instance", required=True, help="instance JSON file")

    return parser


def cmd_gen(args) -> int:
    out = Path(args.out)
    if args.preset == "motivation":
        payload = families.motivation_fixture()
        key = dataset.instance_key("scheduling", 0, PrefVariant.P2)
        canonical = dataset.build_canonical(payload, PrefVariant.P2, key=key)
        doc = dataset.instance_to_doc(canonical, index=0, seed=0)
        rel = Path("scheduling") / "0" / "p2.json"
        dataset.save_instance(out / rel, doc)
        manifest = {
            "schema_version": dataset.DATASET_SCHEMA_VERSION,
            "seed": 0,
            "count": 1,
            "families": ["scheduling"],
            "variants": ["p2"],
            "instances": [{
                "key": key,
                "path": rel.as_posix(),
                "digest": dataset.file_digest(out / rel),
                "optimal_cost": canonical.optimal_cost,
            }],
        }
        (out / dataset.MANIFEST_NAME).write_text(
            json.dumps(manifest, sort_keys=True, indent=2) + "\n", encoding="utf-8"
        )
    else:
        family_ids = tuple(f.strip() for f in args.families.split(",") if f.strip())
        manifest = dataset.build_dataset(
            out, seed=args.seed, family_ids=family_ids, count=args.count
        )
    print(f"wrote {len(manifest['instances'])} instances to {out}")
    print(f"manifest digest {dataset.manifest_digest(manifest)}")
    return 0


def cmd_solve(args) -> int:
    formula = wcnf.parse_wdimacs(Path(args.file).read_text(encoding="utf-8"))
    config = solver.SolverConfig(
        time_budget_sec=args.timeout, engine=solver.Engine(args.engine)
    )
    outcome = solver.solve(formula, config)
    if isinstance(outcome, solver.Optimal):
        lits = [v if outcome.model[v] else -v for v in range(1, formula.num_vars + 1)]
        print(f"o {outcome.cost}")
        print("s OPTIMUM FOUND")
        print("v " + " ".join(str(lit) for lit in lits) + " 0")
    elif isinstance(outcome, solver.Unsat):
        print("s UNSATISFIABLE")
    else:
        if outcome.best_cost_so_far is not None:
            print(f"o {outcome.best_cost_so_far}")
        print("s UNKNOWN")
    return 0


def _load_solution_text(arg: str) -> str:
    if arg.startswith("@"):
        return Path(arg[1:]).read_text(encoding="utf-8")
    return arg


def cmd_verify(args) -> int:
    canonical = dataset.load_instance(Path(args.instance))
    text = _load_solution_text(args.solution)
    try:
        doc = json.loads(text)
        candidate = families.solution_from_doc(canonical.family, doc)
    except (json.JSONDecodeError, families.SchemaMismatch) as exc:
        verdict = Malformed(reason=str(exc))
    else:
        verdict = verify_candidate(canonical, candidate)
    print(json.dumps(verdict_to_doc(verdict), sort_keys=True))
    return VERIFY_EXIT_CODES[type(verdict)]


def cmd_run(args) -> int:
    config = harness.RunConfig.from_file(args.config)
    summary = harness.run_experiment(config)
    print(json.dumps(summary, sort_keys=True))
    return 0


def cmd_report(args) -> int:
    run_dir = Path(args.results_root) / args.run
    config_path = run_dir / harness.CONFIG_NAME
    if not config_path.exists():
        raise harness.HarnessError(f"no run {args.run} under {args.results_root}")
    config = harness.RunConfig.from_file(config_path)
    manifest = dataset.load_manifest(config.dataset_root)
    store = harness.ResultsStore(run_dir / harness.TASKRUNS_NAME)
    sys.stdout.write(
        harness.render_table(store.docs(), manifest, config, args.table, fmt=args.format)
    )
    return 0


def cmd_oracle(args) -> int:
    canonical = dataset.load_instance(Path(args.instance))
    cost, reference = families.brute_force_reference(canonical.payload, canonical.variant)
    print(f"o {cost}")
    print(json.dumps(families.solution_to_doc(reference), sort_keys=True))
    return 0


_HANDLERS = {
    "gen": cmd_gen,
    "solve": cmd_solve,
    "verify": cmd_verify,
    "run": cmd_run,
    "report": cmd_report,
    "oracle": cmd_oracle,
}

_USAGE_ERRORS = (
    OSError,
    json.JSONDecodeError,
    wcnf.WcnfError,
    families.FamilyError,
    harness.HarnessError,
)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _HANDLERS[args.command](args)
    except dataset.OracleDisagreement as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except _USAGE_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except dataset.DatasetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
