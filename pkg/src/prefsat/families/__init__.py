"""Problem families: instance generators, canonical MaxSAT encodings,
natural-language renderings, and exhaustive semantic oracles.

Three families are implemented: maximum independent set (``mis``),
single-machine scheduling with precedences and soft deadlines
(``scheduling``), and weighted set cover (``setcover``).  Each family
comes in four preference variants (``none``, ``p1``, ``p2``, ``p3``)
that change the soft-clause structure but never the hard constraints.

All functions are deterministic in their inputs.  Variant-specific
randomness (weights, preferred subsets) is derived from a digest of the
instance payload so that encoding, costing and rendering always agree.
"""

from __future__ import annotations

import enum
import hashlib
import json
import random
from dataclasses import dataclass, field
from typing import Any, Iterable

from ..wcnf import WcnfFormula


class FamilyError(ValueError):
    pass


class InvalidSizeParams(FamilyError):
    pass


class TooLargeForOracle(FamilyError):
    pass


class AmbiguousDecoding(FamilyError):
    """A model does not induce a unique semantic solution; this signals an
    encoder defect, not a bad candidate."""


class MalformedSolutionError(FamilyError):
    """A candidate solution does not name every required decision."""


class SchemaMismatch(FamilyError):
    """A JSON document does not follow the family's solution schema."""


class PrefVariant(str, enum.Enum):
    NONE = "none"
    P1 = "p1"
    P2 = "p2"
    P3 = "p3"


VARIANTS = (PrefVariant.NONE, PrefVariant.P1, PrefVariant.P2, PrefVariant.P3)


@dataclass
class MisInstance:
    n: int
    edges: tuple[tuple[int, int], ...]  # (u, v) with u < v


@dataclass
class SchedInstance:
    jobs: int
    slots: int
    precedences: tuple[tuple[int, int], ...]  # (a, b): a starts before b
    deadlines: dict[int, tuple[int, int]]  # job -> (latest start slot, weight)


@dataclass
class CoverInstance:
    universe: int
    sets: tuple[tuple[tuple[int, ...], int], ...]  # (sorted elements, weight)


Payload = MisInstance | SchedInstance | CoverInstance


@dataclass
class MisSelection:
    vertices: frozenset[int]


@dataclass
class Schedule:
    starts: dict[int, int]


@dataclass
class CoverSelection:
    sets: frozenset[int]


SemanticSolution = MisSelection | Schedule | CoverSelection


@dataclass
class VarMap:
    """Bijection between semantic atoms and CNF variables; ``atoms[i]``
    belongs to variable ``i + 1``."""

    atoms: tuple[tuple, ...]
    _index: dict = field(default=None, repr=False, compare=False)

    def var_of(self, atom: tuple) -> int:
        if self._index is None:
            object.__setattr__(self, "_index", {a: i + 1 for i, a in enumerate(self.atoms)})
        return self._index[atom]

    def atom_of(self, var: int) -> tuple:
        return self.atoms[var - 1]

    def to_doc(self) -> list:
        return [list(atom) for atom in self.atoms]

    @classmethod
    def from_doc(cls, doc: list) -> "VarMap":
        return cls(atoms=tuple(tuple(atom) for atom in doc))


@dataclass
class CanonicalInstance:
    """A fully-solved ground-truth instance: family payload, canonical
    formula with its variable map, the exact optimal cost, a reference
    optimum, and the natural-language description handed to models."""

    family: str
    payload: Payload
    variant: PrefVariant
    formula: WcnfFormula
    varmap: VarMap
    optimal_cost: int
    reference_solution: SemanticSolution
    description: str
    key: str = ""


FAMILY_IDS = ("mis", "scheduling", "setcover")


def _module(family: str):
    from . import cover, mis, scheduling

    table = {"mis": mis, "scheduling": scheduling, "setcover": cover}
    if family not in table:
        raise FamilyError(f"unknown family {family!r}")
    return table[family]


def _module_for_payload(payload: Payload):
    if isinstance(payload, MisInstance):
        return _module("mis")
    if isinstance(payload, SchedInstance):
        return _module("scheduling")
    if isinstance(payload, CoverInstance):
        return _module("setcover")
    raise FamilyError(f"unknown payload type {type(payload).__name__}")


def family_of(payload: Payload) -> str:
    if isinstance(payload, MisInstance):
        return "mis"
    if isinstance(payload, SchedInstance):
        return "scheduling"
    if isinstance(payload, CoverInstance):
        return "setcover"
    raise FamilyError(f"unknown payload type {type(payload).__name__}")


def variant_rng(payload: Payload, variant: PrefVariant) -> random.Random:
    """Deterministic RNG for variant-specific draws, seeded from a digest
    of the payload and variant name."""
    blob = json.dumps(
        {"family": family_of(payload), "payload": payload_to_doc(payload), "variant": variant.value},
        sort_keys=True,
        separators=(",", ":"),
    )
    digest = hashlib.sha256(blob.encode("utf-8")).hexdigest()
    return random.Random(digest)


def generate_instance(family: str, size_params: dict, seed: int) -> Payload:
    """Generate a satisfiable-by-construction instance, deterministic in
    (family, size_params, seed).  Raises InvalidSizeParams."""
    return _module(family).generate(size_params, seed)


def motivation_fixture() -> SchedInstance:
    from . import scheduling

    return scheduling.motivation_fixture()


def encode_canonical(payload: Payload, variant: PrefVariant) -> tuple[WcnfFormula, VarMap]:
    return _module_for_payload(payload).encode(payload, variant)


def render_description(payload: Payload, variant: PrefVariant, seed: int = 0) -> str:
    return _module_for_payload(payload).describe(payload, variant, seed)


def decode_model(varmap: VarMap, model: dict[int, bool]) -> SemanticSolution:
    """Map a CNF model back to a semantic solution via the variable map."""
    kinds = {atom[0] for atom in varmap.atoms}
    if kinds == {"vertex"}:
        return MisSelection(
            frozenset(atom[1] for atom in varmap.atoms if model[varmap.var_of(atom)])
        )
    if kinds == {"set"}:
        return CoverSelection(
            frozenset(atom[1] for atom in varmap.atoms if model[varmap.var_of(atom)])
        )
    if kinds == {"start"}:
        starts: dict[int, int] = {}
        for atom in varmap.atoms:
            if model[varmap.var_of(atom)]:
                _, job, slot = atom
                if job in starts:
                    raise AmbiguousDecoding(f"J{job} starts in two slots")
                starts[job] = slot
        jobs = {atom[1] for atom in varmap.atoms}
        missing = sorted(jobs - set(starts))
        if missing:
            raise AmbiguousDecoding(f"no start slot decoded for jobs {missing}")
        return Schedule(starts)
    raise AmbiguousDecoding(f"unrecognized atom kinds {sorted(kinds)}")


def shape_error(payload: Payload, solution) -> str | None:
    """Return a reason string when the solution does not name every
    required decision of the instance, else None."""
    return _module_for_payload(payload).shape_error(payload, solution)


def check_feasible(payload: Payload, solution: SemanticSolution) -> tuple[bool, list[str]]:
    """Check all hard constraints; returns (ok, human-readable violations).

    Raises MalformedSolutionError when the solution has the wrong shape.
    """
    reason = shape_error(payload, solution)
    if reason is not None:
        raise MalformedSolutionError(reason)
    violations = _module_for_payload(payload).feasibility_violations(payload, solution)
    return (not violations, violations)


def solution_cost(payload: Payload, variant: PrefVariant, solution: SemanticSolution) -> int:
    """Total preference penalty of a (shape-valid) solution; mirrors the
    soft clauses of the canonical encoding exactly."""
    return _module_for_payload(payload).solution_cost(payload, variant, solution)


def brute_force_reference(payload: Payload, variant: PrefVariant) -> tuple[int, SemanticSolution]:
    """Exhaustively enumerate semantic solutions (never touching CNF) and
    return the optimal cost together with the lexicographically least
    optimum under the family's tie-break key (sorted vertex list, slot
    vector by job index, sorted set indices)."""
    return _module_for_payload(payload).best_by_enumeration(payload, variant)


def brute_force_optimum(payload: Payload, variant: PrefVariant) -> int:
    return brute_force_reference(payload, variant)[0]


def extend_solution(canonical: CanonicalInstance, solution: SemanticSolution) -> dict[int, bool]:
    """Extend a shape-valid semantic solution to a total assignment over
    the canonical formula's variables."""
    assignment: dict[int, bool] = {}
    for i, atom in enumerate(canonical.varmap.atoms):
        kind = atom[0]
        if kind == "vertex":
            value = atom[1] in solution.vertices
        elif kind == "set":
            value = atom[1] in solution.sets
        elif kind == "start":
            value = solution.starts.get(atom[1]) == atom[2]
        else:
            raise AmbiguousDecoding(f"unrecognized atom {atom!r}")
        assignment[i + 1] = value
    return assignment


def payload_to_doc(payload: Payload) -> dict:
    return _module_for_payload(payload).payload_to_doc(payload)


def payload_from_doc(family: str, doc: dict) -> Payload:
    return _module(family).payload_from_doc(doc)


def solution_to_doc(solution: SemanticSolution) -> Any:
    """Family solution JSON: vertex/set selections use
    ``{"selected": [...]}``, schedules map job names to start slots."""
    if isinstance(solution, MisSelection):
        return {"selected": sorted(solution.vertices)}
    if isinstance(solution, CoverSelection):
        return {"selected": sorted(solution.sets)}
    if isinstance(solution, Schedule):
        return {f"J{job}": slot for job, slot in sorted(solution.starts.items())}
    raise FamilyError(f"unknown solution type {type(solution).__name__}")


def _require_int(value) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise SchemaMismatch(f"expected an integer, got {value!r}")
    return value


def solution_from_doc(family: str, doc: Any) -> SemanticSolution:
    """Parse a family solution JSON document.  Raises SchemaMismatch."""
    if not isinstance(doc, dict):
        raise SchemaMismatch(f"expected a JSON object, got {type(doc).__name__}")
    if family in ("mis", "setcover"):
        if "selected" not in doc:
            raise SchemaMismatch('missing "selected" key')
        raw = doc["selected"]
        if not isinstance(raw, list):
            raise SchemaMismatch('"selected" must be a list of integers')
        indices = frozenset(_require_int(v) for v in raw)
        return MisSelection(indices) if family == "mis" else CoverSelection(indices)
    if family == "scheduling":
        starts: dict[int, int] = {}
        for key, value in doc.items():
            if not isinstance(key, str) or not key.startswith("J") or not key[1:].isdigit():
                continue
            starts[int(key[1:])] = _require_int(value)
        if not starts:
            raise SchemaMismatch('no "J<index>" start slot keys found')
        return Schedule(starts)
    raise FamilyError(f"unknown family {family!r}")


def solution_sort_key(solution: SemanticSolution):
    if isinstance(solution, MisSelection):
        return tuple(sorted(solution.vertices))
    if isinstance(solution, CoverSelection):
        return tuple(sorted(solution.sets))
    if isinstance(solution, Schedule):
        return tuple(slot for _, slot in sorted(solution.starts.items()))
    raise FamilyError(f"unknown solution type {type(solution).__name__}")


def enumerate_solutions(payload: Payload) -> Iterable[SemanticSolution]:
    """Yield every shape-valid semantic solution (feasible or not), for
    exhaustive property checks at oracle scale."""
    return _module_for_payload(payload).enumerate_solutions(payload)
