"""Dataset construction and storage.

Each instance is generated from a deterministic seed, encoded to a
weighted partial formula, solved exactly, and cross-checked against an
independent enumeration oracle before anything is written to disk.  Any
disagreement aborts the build; a dataset on disk is therefore a set of
ground truths, not a set of guesses.  Instance files are self-contained
JSON documents and the manifest pins their content digests.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

from . import families, solver, wcnf
from .families import CanonicalInstance, FAMILY_IDS, PrefVariant, VARIANTS, VarMap

DATASET_SCHEMA_VERSION = 1
DEFAULT_SEED = 2024
DEFAULT_COUNT = 25
MANIFEST_NAME = "manifest.json"


class DatasetError(Exception):
    pass


class OracleDisagreement(DatasetError):
    """The exact solver and the enumeration oracle returned different
    optima for the same instance.  Nothing is written when this fires."""


def default_size_params(family: str, index: int) -> dict:
    if family == "mis":
        return {"n": 6 + index % 9, "edge_prob": 0.3}
    if family == "scheduling":
        jobs = 5 + index % 4
        return {"jobs": jobs, "slots": jobs + 2, "prec_prob": 0.25}
    if family == "setcover":
        return {"universe": 8 + index % 7, "sets": 6 + index % 7}
    raise DatasetError(f"unknown family {family!r}")


def instance_seed(seed: int, family: str, index: int) -> int:
    digest = hashlib.sha256(f"{seed}:{family}:{index}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def instance_key(family: str, index: int, variant: PrefVariant) -> str:
    return f"{family}/{index}/{variant.value}"


def build_canonical(
    payload,
    variant: PrefVariant,
    *,
    desc_seed: int = 0,
    key: str = "",
    time_budget_sec: float = 60.0,
) -> CanonicalInstance:
    """Encode, solve exactly, and cross-check one instance.

    The optimal cost must agree between the search solver and the
    enumeration oracle, and the decoded solver model must itself be a
    feasible solution of that cost; the reference solution stored is the
    oracle's enumeration-least optimum.
    """
    family = families.family_of(payload)
    formula, varmap = families.encode_canonical(payload, variant)
    outcome = solver.solve(formula, solver.SolverConfig(time_budget_sec=time_budget_sec))
    if isinstance(outcome, solver.Unsat):
        raise OracleDisagreement(
            f"{key or family}: encoder produced an unsatisfiable formula for a "
            "satisfiable-by-construction instance"
        )
    if not isinstance(outcome, solver.Optimal):
        raise DatasetError(f"{key or family}: solver gave up within {time_budget_sec}s")
    oracle_cost, reference = families.brute_force_reference(payload, variant)
    if outcome.cost != oracle_cost:
        raise OracleDisagreement(
            f"{key or family}: solver optimum {outcome.cost} != oracle optimum {oracle_cost}"
        )
    decoded = families.decode_model(varmap, outcome.model)
    feasible, violations = families.check_feasible(payload, decoded)
    if not feasible:
        raise OracleDisagreement(
            f"{key or family}: decoded solver model is infeasible: {violations}"
        )
    decoded_cost = families.solution_cost(payload, variant, decoded)
    if decoded_cost != oracle_cost:
        raise OracleDisagreement(
            f"{key or family}: decoded model costs {decoded_cost}, oracle optimum is {oracle_cost}"
        )
    description = families.render_description(payload, variant, desc_seed)
    return CanonicalInstance(
        family=family,
        payload=payload,
        variant=variant,
        formula=formula,
        varmap=varmap,
        optimal_cost=oracle_cost,
        reference_solution=reference,
        description=description,
        key=key,
    )


def instance_to_doc(
    inst: CanonicalInstance,
    *,
    index: int | None = None,
    seed: int | None = None,
    size_params: dict | None = None,
) -> dict:
    doc = {
        "schema_version": DATASET_SCHEMA_VERSION,
        "key": inst.key,
        "family": inst.family,
        "variant": inst.variant.value,
        "payload": families.payload_to_doc(inst.payload),
        "description": inst.description,
        "wdimacs": wcnf.serialize_wdimacs(inst.formula),
        "varmap": inst.varmap.to_doc(),
        "optimal_cost": inst.optimal_cost,
        "reference_solution": families.solution_to_doc(inst.reference_solution),
    }
    if index is not None:
        doc["index"] = index
    if seed is not None:
        doc["seed"] = seed
    if size_params is not None:
        doc["size_params"] = size_params
    return doc


def instance_from_doc(doc: dict) -> CanonicalInstance:
    family = doc["family"]
    payload = families.payload_from_doc(family, doc["payload"])
    return CanonicalInstance(
        family=family,
        payload=payload,
        variant=PrefVariant(doc["variant"]),
        formula=wcnf.parse_wdimacs(doc["wdimacs"]),
        varmap=VarMap.from_doc(doc["varmap"]),
        optimal_cost=doc["optimal_cost"],
        reference_solution=families.solution_from_doc(family, doc["reference_solution"]),
        description=doc["description"],
        key=doc.get("key", ""),
    )


def _dump(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def save_instance(path: Path, doc: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(_dump(doc), encoding="utf-8")


def load_instance(path: Path) -> CanonicalInstance:
    return instance_from_doc(json.loads(Path(path).read_text(encoding="utf-8")))


def file_digest(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def build_dataset(
    root: Path,
    *,
    seed: int = DEFAULT_SEED,
    family_ids: tuple[str, ...] = FAMILY_IDS,
    count: int = DEFAULT_COUNT,
    variants: tuple[PrefVariant, ...] = VARIANTS,
    progress=None,
) -> dict:
    """Generate, solve, cross-check, and write the full grid.  Returns the
    manifest document, which is also written to ``root/manifest.json``."""
    root = Path(root)
    entries = []
    for family in family_ids:
        for index in range(count):
            size_params = default_size_params(family, index)
            inst_seed = instance_seed(seed, family, index)
            payload = families.generate_instance(family, size_params, inst_seed)
            for variant in variants:
                key = instance_key(family, index, variant)
                canonical = build_canonical(
                    payload, variant, desc_seed=inst_seed, key=key
                )
                doc = instance_to_doc(
                    canonical, index=index, seed=inst_seed, size_params=size_params
                )
                rel = Path(family) / str(index) / f"{variant.value}.json"
                save_instance(root / rel, doc)
                entries.append(
                    {
                        "key": key,
                        "path": rel.as_posix(),
                        "digest": file_digest(root / rel),
                        "optimal_cost": canonical.optimal_cost,
                    }
                )
                if progress is not None:
                    progress(key)
    manifest = {
        "schema_version": DATASET_SCHEMA_VERSION,
        "seed": seed,
        "count": count,
        "families": list(family_ids),
        "variants": [v.value for v in variants],
        "instances": entries,
    }
    (root / MANIFEST_NAME).write_text(_dump(manifest), encoding="utf-8")
    return manifest


def load_manifest(root: Path) -> dict:
    path = Path(root) / MANIFEST_NAME
    if not path.exists():
        raise DatasetError(f"no manifest at {path}")
    return json.loads(path.read_text(encoding="utf-8"))


def manifest_digest(manifest: dict) -> str:
    blob = json.dumps(manifest, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def iter_instances(root: Path, manifest: dict | None = None, *, verify: bool = True):
    """Yield (entry, CanonicalInstance) pairs in manifest order; with
    ``verify`` each file's digest is checked against the manifest before
    it is trusted."""
    root = Path(root)
    if manifest is None:
        manifest = load_manifest(root)
    for entry in manifest["instances"]:
        path = root / entry["path"]
        if verify and file_digest(path) != entry["digest"]:
            raise DatasetError(f"{entry['path']}: content digest does not match the manifest")
        yield entry, load_instance(path)
