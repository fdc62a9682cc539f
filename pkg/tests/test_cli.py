import json
from pathlib import Path

import pytest

from prefsat import dataset, families
from prefsat.cli import main
from prefsat.providers import CallKey

from conftest import EXAMPLE1_TEXT

OPTIMAL = '{"J0": 4, "J1": 6, "J2": 5, "J3": 1, "J4": 3, "J5": 2}'
INFEASIBLE = '{"J0": 4, "J1": 2, "J2": 5, "J3": 1, "J4": 6, "J5": 0}'
SUBOPTIMAL = '{"J0": 4, "J1": 3, "J2": 1, "J3": 2, "J4": 5, "J5": 0}'


@pytest.fixture(scope="module")
def motivation_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("motivation")
    assert main(["gen", "--out", str(out), "--preset", "motivation"]) == 0
    return out


@pytest.fixture(scope="module")
def motivation_instance(motivation_dir):
    return str(motivation_dir / "scheduling" / "0" / "p2.json")


@pytest.mark.parametrize("engine", ["branch-and-bound", "linear-sat-unsat"])
def test_solve_prints_optimum_and_model(tmp_path, capsys, engine):
    path = tmp_path / "ex.wcnf"
    path.write_text(EXAMPLE1_TEXT, encoding="utf-8")
    assert main(["solve", str(path), "--engine", engine]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "o 1"
    assert lines[1] == "s OPTIMUM FOUND"
    assert lines[2] == "v 1 -2 -3 0"


def test_solve_reports_unsatisfiable(tmp_path, capsys):
    path = tmp_path / "unsat.wcnf"
    path.write_text("p wcnf 1 2 3\n3 1 0\n3 -1 0\n", encoding="utf-8")
    assert main(["solve", str(path)]) == 0
    assert capsys.readouterr().out.strip() == "s UNSATISFIABLE"


def test_solve_reports_unknown_when_out_of_time(tmp_path, capsys):
    n = 26
    clauses = [f"1 {v} 0" for v in range(1, n + 1)]
    clauses += [f"1 {-v} 0" for v in range(1, n + 1)]
    text = f"p wcnf {n} {2 * n} {2 * n + 1}\n" + "\n".join(clauses) + "\n"
    path = tmp_path / "slow.wcnf"
    path.write_text(text, encoding="utf-8")
    assert main(["solve", str(path), "--timeout", "1e-9"]) == 0
    assert capsys.readouterr().out.splitlines()[-1] == "s UNKNOWN"


def test_solve_missing_file_is_a_usage_error(tmp_path, capsys):
    assert main(["solve", str(tmp_path / "nope.wcnf")]) == 2
    assert "error:" in capsys.readouterr().err


def test_solve_malformed_file_is_a_usage_error(tmp_path, capsys):
    path = tmp_path / "bad.wcnf"
    path.write_text("p wcnf zero 1 2\n", encoding="utf-8")
    assert main(["solve", str(path)]) == 2
    assert "error:" in capsys.readouterr().err


def test_gen_preset_writes_one_pinned_instance(motivation_dir, motivation_instance):
    manifest = dataset.load_manifest(motivation_dir)
    assert [e["key"] for e in manifest["instances"]] == ["scheduling/0/p2"]
    inst = dataset.load_instance(Path(motivation_instance))
    assert inst.optimal_cost == 2
    assert inst.payload == families.motivation_fixture()


def test_gen_is_deterministic(tmp_path, capsys):
    args = ["--seed", "7", "--count", "1", "--families", "mis"]
    assert main(["gen", "--out", str(tmp_path / "a"), *args]) == 0
    out_a = capsys.readouterr().out
    assert main(["gen", "--out", str(tmp_path / "b"), *args]) == 0
    out_b = capsys.readouterr().out
    digest = [line for line in out_a.splitlines() if line.startswith("manifest digest ")]
    assert digest == [line for line in out_b.splitlines() if line.startswith("manifest digest ")]
    bytes_a = (tmp_path / "a" / "manifest.json").read_bytes()
    assert bytes_a == (tmp_path / "b" / "manifest.json").read_bytes()


def test_gen_rejects_unknown_family(tmp_path, capsys):
    assert main(["gen", "--out", str(tmp_path / "x"), "--families", "sudoku"]) == 2
    assert "error:" in capsys.readouterr().err


@pytest.mark.parametrize(
    "solution, code, kind",
    [
        (OPTIMAL, 0, "accepted"),
        (INFEASIBLE, 3, "infeasible"),
        (SUBOPTIMAL, 4, "suboptimal"),
        ("this is not json", 5, "malformed"),
        ('{"J0": 0}', 5, "malformed"),
    ],
)
def test_verify_exit_codes(motivation_instance, capsys, solution, code, kind):
    assert main(["verify", "--instance", motivation_instance, "--solution", solution]) == code
    doc = json.loads(capsys.readouterr().out)
    assert doc["kind"] == kind


def test_verify_accepted_reports_cost(motivation_instance, capsys):
    main(["verify", "--instance", motivation_instance, "--solution", OPTIMAL])
    assert json.loads(capsys.readouterr().out)["cost"] == 2


def test_verify_names_the_broken_precedence(motivation_instance, capsys):
    main(["verify", "--instance", motivation_instance, "--solution", INFEASIBLE])
    doc = json.loads(capsys.readouterr().out)
    assert "J2 must precede J1" in doc["violations"]


def test_verify_reads_solution_from_file(motivation_instance, tmp_path, capsys):
    path = tmp_path / "candidate.json"
    path.write_text(OPTIMAL, encoding="utf-8")
    code = main(["verify", "--instance", motivation_instance, "--solution", f"@{path}"])
    assert code == 0
    assert json.loads(capsys.readouterr().out)["kind"] == "accepted"


def test_oracle_prints_optimum_and_reference(motivation_instance, capsys):
    assert main(["oracle", "--instance", motivation_instance]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "o 2"
    reference = json.loads(lines[1])
    assert reference == {"J0": 1, "J1": 5, "J2": 4, "J3": 2, "J4": 3, "J5": 0}


def test_run_and_report_round_trip(tmp_path, capsys):
    root = tmp_path / "ds"
    manifest = dataset.build_dataset(
        root, seed=3, count=1, family_ids=("mis",)
    )
    responses = {}
    for entry, inst in dataset.iter_instances(root, manifest):
        doc = families.solution_to_doc(inst.reference_solution)
        key = CallKey(entry["key"], "direct-answer", "generate", 1).as_string()
        responses[key] = json.dumps(doc)
    resp_path = tmp_path / "responses.json"
    resp_path.write_text(json.dumps(responses), encoding="utf-8")
    results_root = tmp_path / "results"
    config_path = tmp_path / "config.json"
    config_path.write_text(json.dumps({
        "dataset_root": str(root),
        "strategies": ["direct-answer"],
        "providers": [{"type": "replay", "name": "replay-a", "path": str(resp_path)}],
        "results_root": str(results_root),
        "workers": 1,
    }), encoding="utf-8")

    assert main(["run", "--config", str(config_path)]) == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["executed"] == 4
    assert summary["errors"] == 0

    report = ["report", "--run", summary["run_id"], "--results-root", str(results_root)]
    assert main([*report, "--table", "1"]) == 0
    table1 = capsys.readouterr().out
    assert "direct-answer" in table1
    assert "100.0" in table1

    assert main([*report, "--table", "2", "--format", "csv"]) == 0
    table2 = capsys.readouterr().out
    assert table2.splitlines()[1].endswith("100.0 / 100.0 / 100.0 / 100.0")

    rerun = main(["run", "--config", str(config_path)])
    assert rerun == 0
    assert json.loads(capsys.readouterr().out)["executed"] == 0


def test_report_unknown_run_is_a_usage_error(tmp_path, capsys):
    code = main(["report", "--run", "feedbeef", "--table", "1",
                 "--results-root", str(tmp_path)])
    assert code == 2
    assert "error:" in capsys.readouterr().err
