"""Prompt templates and prompt assembly for the encoding strategies.

The template texts are embedded byte-exact, trailing whitespace included;
slot markers (``<problem description>``, ``<generated plan>``,
``<previous model output>``, ``<stderr and solver feedback>``) are replaced
verbatim at build time.  The solver-usage help text (RC2_HELP) is always
prepended to code-generation prompts of the MaxSAT strategies.
"""

from __future__ import annotations

import enum


class MissingSlotValue(ValueError):
    pass


class Stage(str, enum.Enum):
    PLAN = "plan"
    GENERATE = "generate"
    BASELINE = "baseline"
    FEEDBACK = "feedback"

PLAN_TEMPLATE = 'You are an expert MaxSAT/SAT encoding designer.\n\nGiven ONLY a natural-language problem description, draft a precise encoding plan\nwith the following sections:\n\n1) Variables\n2) Hard constraints\n3) Soft constraints / preferences\n4) Objective (weighted MaxSAT)\n5) Output schema (repeat the JSON schema to emit)\n\nDo NOT write code.\nDo NOT use external data.\n'

RC2_HELP = '# RC2 / WCNF usage\n# IMPORTANT: The call rc2.compute() returns the model (a list of integer literals).\n#            If rc2.compute() returns None, then the WCNF formula is UNSAT.\n#            The objective (weighted cost) is available as rc2.cost after compute().\n#\n# Use this exact pattern in your solve() implementation:\nfrom pysat.formula import WCNF\nfrom pysat.examples.rc2 import RC2\n\ndef rc2_solve_example():\n    w = WCNF()\n    # Example hard clause: w.append([1, -2])\n    # Example soft clause with weight 3: w.append([-3], weight=3)\n\n    rc2 = RC2(w)\n    # rc2.compute() returns the model (list of ints) or None if the MaxSAT \n    # formula is UNSAT\n    model_lits = rc2.compute()   # <- model_lits is a list of signed ints\n    # if model_lits is None then the formula is UNSAT\n    # Read the cost (sum of falsified soft clause weights) after compute():\n    cost = int(rc2.cost)\n    assignment = {abs(l): (l > 0) for l in model_lits}\n    return cost, assignment\n\n# End of RC2_HELP\n'

CODEGEN_WITH_PLAN_TEMPLATE = 'Natural-language problem description:\n---\n<problem description>\n---\n\nEncoding PLAN:\n---\n<generated plan>\n---\n\nYou are a code model that writes standalone Python using PySAT to solve a \nplanning/optimization task from a natural-language description.\nYour job: Write PySAT code that exactly models the hard rules and preferences \nand computes the optimal solution.\nYou MUST use python-sat (PySAT) to build and solve a SAT/MaxSAT model \nmatching the problem.\nUse the RC2 example provided in RC2_HELP exactly as a template if helpful.\nWrite PySAT code implementing the PLAN. Return JSON ONLY as specified.\n'

CODEGEN_NO_PLAN_TEMPLATE = 'Problem description:\n---\n<problem description>\n---\n\nYou are a code model that writes standalone Python using PySAT \nto solve a planning/optimization task from a natural-language description.\nYour job: Write PySAT code that exactly models the hard rules \nand preferences and computes the optimal solution.\nYou MUST use python-sat (PySAT) to build and solve a \nSAT/MaxSAT model matching the problem.\nUse the RC2 example provided in RC2_HELP exactly as a template if helpful.\nReturn JSON ONLY as specified.\n'

DIRECT_TEMPLATE = 'Problem description:\n---\n<problem description>\n---\n\nYou are an expert solver.\n\nYour Job: Provide the optimal solution to the optimization task \nfrom a natural-language description, in using the required JSON schema.\n\nReturn ONLY the JSON. No code. JSON only.\n'

COT_TEMPLATE = 'Problem description:\n---\n<problem description>\n---\n\nYou are an expert solver.\n\nYour Job: Provide the optimal solution to the optimization task \nfrom a natural-language description, using the required JSON schema.\n\nThink step-by-step to derive the optimal solution.\n\nWrite numbered steps. Then output the final JSON on the last line.\n'

POT_TEMPLATE = 'Problem description:\n---\n<problem description>\n---\n\nYou are an expert Python programmer.\n\nYour task is to solve the optimisation problem described above and\nreturn the optimal solution using the required JSON schema.\n\nWrite a standalone Python script that exactly models the hard rules\nand preferences and computes the optimal solution for the planning or\noptimisation task.\n\nYou CANNOT use any symbolic solver or constraint satisfaction method.\n\nReturn JSON ONLY as specified.\n'

FEEDBACK_TEMPLATE = 'You previously provided a response for the problem below, but it did not produce\na correct optimal solution or failed to run.\n\nProblem description:\n---\n<problem description>\n---\n\nPrevious output or code:\n---\n<previous model output>\n---\n\nExecution result and errors:\n---\n<stderr and solver feedback>\n---\n\nPlease provide a corrected solution.\nFollow the exact same output specification as before.\nIf producing code, return a single Python code block that prints:\n{ "objective_cost": <int>, "solution_json": <JSON> }\nand nothing else.\n'


DESCRIPTION_SLOT = "<problem description>"
PLAN_SLOT = "<generated plan>"
PREVIOUS_OUTPUT_SLOT = "<previous model output>"
ERROR_SLOT = "<stderr and solver feedback>"


def _fill(template: str, **slots: str) -> str:
    out = template
    for marker, value in slots.items():
        if value is None:
            raise MissingSlotValue(f"no value for slot {marker!r}")
        out = out.replace(marker, value)
    return out


def plan_prompt(description: str) -> str:
    """The planning prompt has no description slot of its own, so the
    problem statement is appended in the same fenced style the other
    templates use."""
    if description is None:
        raise MissingSlotValue("plan stage needs a problem description")
    return PLAN_TEMPLATE + "\nProblem description:\n---\n" + description + "\n---\n"


def generate_prompt(description: str, plan: str | None, with_plan: bool) -> str:
    if description is None:
        raise MissingSlotValue("generate stage needs a problem description")
    if with_plan:
        if plan is None:
            raise MissingSlotValue("generate stage needs a plan for plan-based strategies")
        filled = _fill(
            CODEGEN_WITH_PLAN_TEMPLATE,
            **{DESCRIPTION_SLOT: description, PLAN_SLOT: plan},
        )
    else:
        filled = _fill(CODEGEN_NO_PLAN_TEMPLATE, **{DESCRIPTION_SLOT: description})
    return RC2_HELP + "\n" + filled


def baseline_prompt(kind: str, description: str) -> str:
    if description is None:
        raise MissingSlotValue("baseline stage needs a problem description")
    templates = {
        "direct-answer": DIRECT_TEMPLATE,
        "cot-answer": COT_TEMPLATE,
        "pot-answer": POT_TEMPLATE,
    }
    if kind not in templates:
        raise ValueError(f"no baseline template for strategy {kind!r}")
    return _fill(templates[kind], **{DESCRIPTION_SLOT: description})


def feedback_prompt(description: str, previous_output: str, error_text: str) -> str:
    if description is None:
        raise MissingSlotValue("feedback stage needs a problem description")
    if previous_output is None:
        raise MissingSlotValue("feedback stage needs the previous model output")
    if error_text is None:
        raise MissingSlotValue("feedback stage needs the error text")
    return _fill(
        FEEDBACK_TEMPLATE,
        **{
            DESCRIPTION_SLOT: description,
            PREVIOUS_OUTPUT_SLOT: previous_output,
            ERROR_SLOT: error_text,
        },
    )
