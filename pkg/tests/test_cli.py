import json

import numpy as np
import pytest

from abcselect.cli import EXIT_AUDIT, EXIT_CONFIG, EXIT_DATA, EXIT_OK, main
from abcselect.harness import make_monte_carlo_instance


@pytest.fixture()
def synthetic_setup(tmp_path):
    instance = make_monte_carlo_instance(0).truncated(4)
    inst_path = tmp_path / "instance.json"
    instance.save(inst_path)
    config = {
        "backend": {"synthetic": str(inst_path)},
        "params": {"epsilon": 0.01, "delta": 0.5, "seed": 11},
        "scheduler": "gradient_ci",
        "output": {
            "trace": str(tmp_path / "trace.jsonl"),
            "report": str(tmp_path / "report.json"),
        },
    }
    config_path = tmp_path / "run.json"
    config_path.write_text(json.dumps(config))
    return tmp_path, config_path, config


def test_run_happy_path(synthetic_setup, capsys):
    tmp_path, config_path, _ = synthetic_setup
    assert main(["run", str(config_path)]) == EXIT_OK
    out = capsys.readouterr().out
    assert "selected configuration" in out
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["selected"] >= 1
    assert (tmp_path / "trace.jsonl").exists()


def test_run_missing_dataset_exits_2(tmp_path, capsys):
    config = {
        "backend": {"csv": str(tmp_path / "nope.csv"), "learners": [{"kind": "majority_class"}]},
        "output": {"trace": str(tmp_path / "t.jsonl"), "report": str(tmp_path / "r.json")},
    }
    path = tmp_path / "run.json"
    path.write_text(json.dumps(config))
    assert main(["run", str(path)]) == EXIT_DATA
    assert "nope.csv" in capsys.readouterr().err


def test_run_unknown_key_exits_1(synthetic_setup, capsys):
    tmp_path, _, config = synthetic_setup
    config["verbosity"] = 3
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(config))
    assert main(["run", str(path)]) == EXIT_CONFIG
    assert "verbosity" in capsys.readouterr().err


def test_run_full_run_method_prints_accuracy_table(synthetic_setup, capsys):
    tmp_path, config_path, _ = synthetic_setup
    assert main(["run", str(config_path), "--method", "full_run"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "per-configuration accuracies" in out
    report = json.loads((tmp_path / "report.json").read_text())
    assert set(report["accuracies"]) == {"1", "2", "3", "4"}


def test_run_budget_flag(synthetic_setup):
    tmp_path, config_path, _ = synthetic_setup
    assert main(["run", str(config_path), "--budget", "50000"]) == EXIT_OK
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["total_cost_scenario_i"] <= 50_000


def test_env_seed_override(synthetic_setup, monkeypatch):
    tmp_path, config_path, _ = synthetic_setup
    monkeypatch.setenv("ABC_SEED", "999")
    assert main(["run", str(config_path)]) == EXIT_OK
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["params"]["seed"] == 999


def test_experiment_one_cell(tmp_path):
    instance = make_monte_carlo_instance(0).truncated(3)
    inst_path = tmp_path / "inst.json"
    instance.save(inst_path)
    spec = {
        "instances": [{"name": "demo", "synthetic": "inst.json"}],
        "methods": ["full_run"],
        "epsilon_grid": [0.01],
        "n_configs_grid": [3],
        "repetitions": 1,
        "base_seed": 5,
        "output_dir": str(tmp_path / "out"),
    }
    spec_path = tmp_path / "exp.json"
    spec_path.write_text(json.dumps(spec))
    assert main(["experiment", str(spec_path), "--workers", "1"]) == EXIT_OK
    lines = (tmp_path / "out" / "metrics.csv").read_text().splitlines()
    assert len(lines) == 2  # header plus exactly one row


def test_experiment_empty_epsilon_grid_exits_1(tmp_path, capsys):
    instance = make_monte_carlo_instance(0).truncated(3)
    (tmp_path / "inst.json").write_text(json.dumps(instance.to_dict()))
    spec = {
        "instances": [{"name": "demo", "synthetic": "inst.json"}],
        "methods": ["full_run"],
        "epsilon_grid": [],
        "n_configs_grid": [3],
        "repetitions": 1,
        "base_seed": 5,
    }
    spec_path = tmp_path / "exp.json"
    spec_path.write_text(json.dumps(spec))
    assert main(["experiment", str(spec_path)]) == EXIT_CONFIG
    assert "epsilon_grid" in capsys.readouterr().err


class TestAudit:
    def run_once(self, synthetic_setup):
        tmp_path, config_path, _ = synthetic_setup
        assert main(["run", str(config_path)]) == EXIT_OK
        return tmp_path / "trace.jsonl", tmp_path / "report.json"

    def test_clean_trace_passes(self, synthetic_setup, capsys):
        trace, report = self.run_once(synthetic_setup)
        assert main(["audit", "--trace", str(trace), "--report", str(report)]) == EXIT_OK
        out = capsys.readouterr().out
        assert "structural audit passed" in out
        assert "containment" in out

    def test_corrupted_trace_exits_3_naming_round(self, synthetic_setup, capsys):
        trace, report = self.run_once(synthetic_setup)
        lines = trace.read_text().splitlines()
        record = json.loads(lines[2])
        record["lower"] = max(0.0, record["lower"] - 0.05)  # widen the interval
        lines[2] = json.dumps(record)
        trace.write_text("\n".join(lines) + "\n")
        assert main(["audit", "--trace", str(trace), "--report", str(report)]) == EXIT_AUDIT
        out = capsys.readouterr().out
        assert f"round {record['round']}" in out

    def test_structural_only_without_truth(self, synthetic_setup, capsys):
        trace, report = self.run_once(synthetic_setup)
        data = json.loads(report.read_text())
        data.pop("true_accuracies", None)
        report.write_text(json.dumps(data))
        assert main(
            ["audit", "--trace", str(trace), "--report", str(report)]
        ) == EXIT_DATA
        assert main(
            ["audit", "--trace", str(trace), "--report", str(report), "--structural-only"]
        ) == EXIT_OK


def test_report_summary(synthetic_setup, capsys):
    tmp_path, config_path, _ = synthetic_setup
    main(["run", str(config_path)])
    capsys.readouterr()
    assert main(["report", str(tmp_path / "report.json")]) == EXIT_OK
    out = capsys.readouterr().out
    assert "selected" in out and "cost (i)" in out


def test_csv_backend_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    X = rng.normal(size=(2000, 2))
    y = (X[:, 0] > 0).astype(int)
    rows = "\n".join(f"{a:.6f},{b:.6f},{c}" for (a, b), c in zip(X, y))
    csv_path = tmp_path / "data.csv"
    csv_path.write_text(rows + "\n")
    config = {
        "backend": {
            "csv": str(csv_path),
            "holdout": 0.3,
            "learners": [
                {"kind": "majority_class"},
                {"kind": "decision_stump"},
            ],
        },
        "params": {"initial_train_size": 100, "initial_test_size": 200, "seed": 1},
        "output": {
            "trace": str(tmp_path / "t.jsonl"),
            "report": str(tmp_path / "r.json"),
        },
    }
    path = tmp_path / "run.json"
    path.write_text(json.dumps(config))
    assert main(["run", str(path), "--final-train"]) == EXIT_OK
    report = json.loads((tmp_path / "r.json").read_text())
    assert report["selected"] == 2  # the stump separates this data
    assert report["final_evaluation"]["accuracy"] > 0.9
