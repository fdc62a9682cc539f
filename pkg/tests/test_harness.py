import json
from decimal import Decimal
from pathlib import Path

import pytest

from prefsat import dataset, families, harness
from prefsat.harness import (
    GROUP_FAMILY_MODEL,
    GROUP_FAMILY_MODEL_VARIANT,
    HarnessError,
    ResultsStore,
    RunConfig,
    acceptance_rate,
    acceptance_table,
    cell_key,
    plan_transfer_table,
    render_table,
    run_experiment,
    run_id,
)
from prefsat.providers import CallKey


@pytest.fixture(scope="module")
def mini_dataset(tmp_path_factory):
    root = tmp_path_factory.mktemp("ds")
    manifest = dataset.build_dataset(root, seed=5, count=2)
    return root, manifest


def reference_responses(root, manifest, strategy, accept=lambda key: True):
    responses = {}
    for entry, inst in dataset.iter_instances(root, manifest):
        doc = families.solution_to_doc(inst.reference_solution)
        text = json.dumps(doc) if accept(entry["key"]) else "no answer"
        responses[CallKey(entry["key"], strategy, "generate", 1).as_string()] = text
        for attempt in range(2, 6):
            responses[CallKey(entry["key"], strategy, "feedback", attempt).as_string()] = text
    return responses


def write_config(tmp_path, root, responses, **overrides):
    resp_path = tmp_path / "responses.json"
    resp_path.write_text(json.dumps(responses), encoding="utf-8")
    doc = {
        "dataset_root": str(root),
        "strategies": ["direct-answer"],
        "providers": [{"type": "replay", "name": "replay-a", "path": str(resp_path)}],
        "results_root": str(tmp_path / "results"),
        "workers": 2,
    }
    doc.update(overrides)
    path = tmp_path / "config.json"
    path.write_text(json.dumps(doc), encoding="utf-8")
    return RunConfig.from_doc(doc)


def test_mini_dataset_shape(mini_dataset):
    root, manifest = mini_dataset
    assert len(manifest["instances"]) == 3 * 2 * 4
    for entry in manifest["instances"]:
        assert (root / entry["path"]).exists()


def test_run_executes_every_cell_and_writes_artifacts(mini_dataset, tmp_path):
    root, manifest = mini_dataset
    config = write_config(tmp_path, root, reference_responses(root, manifest, "direct-answer"))
    summary = run_experiment(config)
    assert summary["expected"] == 24
    assert summary["executed"] == 24
    assert summary["errors"] == 0
    run_dir = Path(summary["run_dir"])
    assert (run_dir / "config.json").exists()
    assert (run_dir / "taskruns.jsonl").exists()
    for which in (1, 2, 3):
        assert (run_dir / f"table{which}.md").exists()
    store = ResultsStore(run_dir / "taskruns.jsonl")
    assert len(store) == 24
    assert all(d["final_verdict"]["kind"] == "accepted" for d in store.docs())


def test_interrupted_run_resumes_with_exactly_the_missing_cells(mini_dataset, tmp_path):
    root, manifest = mini_dataset
    config = write_config(tmp_path, root, reference_responses(root, manifest, "direct-answer"))
    summary = run_experiment(config)
    run_dir = Path(summary["run_dir"])
    jsonl = run_dir / "taskruns.jsonl"
    lines = jsonl.read_text(encoding="utf-8").splitlines()
    jsonl.write_text("\n".join(lines[:-1]) + "\n", encoding="utf-8")
    resumed = run_experiment(config)
    assert resumed["executed"] == 1
    assert resumed["skipped"] == 23
    assert len(ResultsStore(jsonl)) == 24


def test_results_store_drops_torn_final_line(tmp_path):
    path = tmp_path / "taskruns.jsonl"
    good = json.dumps(
        {"instance_key": "mis/0/none", "strategy": "s", "provider": "p",
         "final_verdict": {"kind": "accepted", "cost": 0}}
    )
    path.write_text(good + "\n" + '{"instance_key": "mis/1', encoding="utf-8")
    store = ResultsStore(path)
    assert len(store) == 1


def test_results_store_rejects_corrupt_middle_line(tmp_path):
    path = tmp_path / "taskruns.jsonl"
    good = json.dumps({"instance_key": "a", "strategy": "s", "provider": "p"})
    path.write_text("garbage\n" + good + "\n", encoding="utf-8")
    with pytest.raises(HarnessError):
        ResultsStore(path)


def test_run_id_changes_with_config_and_dataset(mini_dataset, tmp_path):
    root, manifest = mini_dataset
    config_a = write_config(tmp_path, root, {})
    config_b = write_config(tmp_path, root, {}, strategies=["cot-answer"])
    assert run_id(manifest, config_a) == run_id(manifest, config_a)
    assert run_id(manifest, config_a) != run_id(manifest, config_b)
    other = dict(manifest, seed=999)
    assert run_id(manifest, config_a) != run_id(other, config_a)


def test_config_validation():
    base = {
        "dataset_root": "x",
        "strategies": ["direct-answer"],
        "providers": [{"type": "replay", "name": "a"}],
    }
    RunConfig.from_doc(base)
    with pytest.raises(HarnessError):
        RunConfig.from_doc(dict(base, workers=0))
    with pytest.raises(HarnessError):
        RunConfig.from_doc(dict(base, strategies=[]))
    with pytest.raises(HarnessError):
        RunConfig.from_doc(dict(base, strategies=["maxsat-plan-from:ghost"]))
    with pytest.raises(HarnessError):
        RunConfig.from_doc(dict(base, nonsense=1))
    with pytest.raises(HarnessError):
        RunConfig.from_doc(
            dict(base, providers=[{"name": "a", "type": "replay"}, {"name": "a", "type": "replay"}])
        )


def test_provider_and_sandbox_factories():
    provider = harness.make_provider({"type": "replay", "name": "r", "responses": {}})
    assert provider.name == "r"
    sandbox = harness.make_sandbox({"type": "stub"})
    assert sandbox.run(None, timeout_sec=1.0).status == "exec_error"
    with pytest.raises(HarnessError):
        harness.make_provider({"type": "carrier-pigeon", "name": "x"})
    with pytest.raises(HarnessError):
        harness.make_sandbox({"type": "bare-metal"})


# Table arithmetic on synthetic stores.

def synthetic_manifest(count, families_order=("setcover",), variants=("none", "p1", "p2", "p3")):
    instances = []
    for family in families_order:
        for index in range(count):
            for variant in variants:
                key = f"{family}/{index}/{variant}"
                instances.append({"key": key, "path": f"{key}.json", "digest": "", "optimal_cost": 0})
    return {
        "schema_version": 1,
        "seed": 0,
        "count": count,
        "families": list(families_order),
        "variants": list(variants),
        "instances": instances,
    }


def run_doc(key, strategy, provider, accepted):
    verdict = {"kind": "accepted", "cost": 0} if accepted else {"kind": "suboptimal", "cost": 2, "optimum": 1}
    return {
        "instance_key": key,
        "strategy": strategy,
        "provider": provider,
        "final_verdict": verdict,
    }


def test_acceptance_rate_rounds_half_up():
    assert acceptance_rate(87, 100) == Decimal("87.0")
    assert acceptance_rate(1, 3) == Decimal("33.3")
    assert acceptance_rate(2, 3) == Decimal("66.7")
    assert acceptance_rate(5, 16) == Decimal("31.3")
    assert acceptance_rate(0, 7) == Decimal("0.0")
    assert acceptance_rate(7, 7) == Decimal("100.0")
    with pytest.raises(HarnessError):
        acceptance_rate(0, 0)


def test_table1_reproduces_87_of_100():
    manifest = synthetic_manifest(25)
    keys = [e["key"] for e in manifest["instances"]]
    docs = [
        run_doc(key, "maxsat-with-plan", "gemini", accepted=i < 87)
        for i, key in enumerate(keys)
    ]
    rows = acceptance_table(docs, manifest, ["maxsat-with-plan"], ["gemini"], GROUP_FAMILY_MODEL)
    assert len(rows) == 1
    assert rows[0].cells["maxsat-with-plan"] == [Decimal("87.0")]
    assert rows[0].missing == 0
    text = render_table(docs, manifest,
                        RunConfig(dataset_root="x", strategies=["maxsat-with-plan"],
                                  providers=[{"name": "gemini", "type": "replay"}]),
                        which=1)
    assert "87.0" in text


def test_table2_slash_layout_per_variant():
    manifest = synthetic_manifest(25)
    docs = []
    per_variant_accepts = {"none": 25, "p1": 11, "p2": 0, "p3": 20}
    counters = dict.fromkeys(per_variant_accepts, 0)
    for entry in manifest["instances"]:
        variant = entry["key"].rsplit("/", 1)[1]
        accepted = counters[variant] < per_variant_accepts[variant]
        counters[variant] += 1
        docs.append(run_doc(entry["key"], "maxsat-no-plan", "gpt", accepted))
    rows = acceptance_table(docs, manifest, ["maxsat-no-plan"], ["gpt"], GROUP_FAMILY_MODEL_VARIANT)
    assert rows[0].cells["maxsat-no-plan"] == [
        Decimal("100.0"), Decimal("44.0"), Decimal("0.0"), Decimal("80.0"),
    ]
    config = RunConfig(dataset_root="x", strategies=["maxsat-no-plan"],
                       providers=[{"name": "gpt", "type": "replay"}])
    text = render_table(docs, manifest, config, which=2)
    assert "100.0 / 44.0 / 0.0 / 80.0" in text


def test_missing_cells_count_as_not_accepted_and_flag_the_row():
    manifest = synthetic_manifest(1)
    keys = [e["key"] for e in manifest["instances"]]
    docs = [run_doc(keys[0], "direct-answer", "m", True)]
    rows = acceptance_table(docs, manifest, ["direct-answer"], ["m"], GROUP_FAMILY_MODEL)
    assert rows[0].missing == 3
    assert rows[0].cells["direct-answer"] == [Decimal("25.0")]
    config = RunConfig(dataset_root="x", strategies=["direct-answer"],
                       providers=[{"name": "m", "type": "replay"}])
    text = render_table(docs, manifest, config, which=1)
    assert "missing" in text
    assert "m*" in text


def test_plan_transfer_rows():
    manifest = synthetic_manifest(1, families_order=("mis",))
    docs = []
    for entry in manifest["instances"]:
        docs.append(run_doc(entry["key"], "maxsat-with-plan", "gpt", True))
        docs.append(run_doc(entry["key"], "maxsat-plan-from:gemini", "gpt", False))
    strategies = ["maxsat-with-plan", "maxsat-plan-from:gemini"]
    rows = plan_transfer_table(docs, manifest, strategies, ["gpt"])
    by_source = {row.plan_from: row for row in rows}
    assert set(by_source) == {"gpt", "gemini"}
    assert by_source["gpt"].cells["plan"] == [Decimal("100.0")] * 4
    assert by_source["gemini"].cells["plan"] == [Decimal("0.0")] * 4


def test_csv_rendering():
    manifest = synthetic_manifest(2)
    docs = [run_doc(e["key"], "direct-answer", "m", True) for e in manifest["instances"]]
    config = RunConfig(dataset_root="x", strategies=["direct-answer"],
                       providers=[{"name": "m", "type": "replay"}])
    text = render_table(docs, manifest, config, which=1, fmt="csv")
    lines = text.strip().splitlines()
    assert lines[0] == "Family,Model,direct-answer"
    assert lines[1] == "setcover,m,100.0"


def test_replay_bundle_reproduces_known_acceptance_table(tmp_path):
    """21 accepted of 25 cells in one variant group must report 84.0."""
    root = tmp_path / "ds"
    manifest = dataset.build_dataset(
        root, seed=9, count=25, family_ids=("mis",),
        variants=(families.PrefVariant.NONE,),
    )
    keys = [e["key"] for e in manifest["instances"]]
    accepted_keys = set(keys[:21])
    responses = reference_responses(root, manifest, "direct-answer",
                                    accept=lambda key: key in accepted_keys)
    config = write_config(tmp_path, root, responses)
    summary = run_experiment(config)
    store = ResultsStore(Path(summary["run_dir"]) / "taskruns.jsonl")
    rows = acceptance_table(store.docs(), manifest, ["direct-answer"], ["replay-a"],
                            GROUP_FAMILY_MODEL)
    assert rows[0].cells["direct-answer"] == [Decimal("84.0")]
    text = render_table(store.docs(), manifest, config, which=1)
    assert "84.0" in text


def test_table_render_rejects_unknown_kind():
    manifest = synthetic_manifest(1)
    config = RunConfig(dataset_root="x", strategies=["direct-answer"],
                       providers=[{"name": "m", "type": "replay"}])
    with pytest.raises(HarnessError):
        render_table([], manifest, config, which=4)
    with pytest.raises(HarnessError):
        render_table([], manifest, config, which=1, fmt="pdf")


def test_store_append_and_contains(tmp_path):
    store = ResultsStore(tmp_path / "x.jsonl")
    doc = run_doc("mis/0/none", "direct-answer", "m", True)
    store.append(doc)
    assert cell_key("mis/0/none", "direct-answer", "m") in store
    fresh = ResultsStore(tmp_path / "x.jsonl")
    assert fresh.get(cell_key("mis/0/none", "direct-answer", "m")) == doc
