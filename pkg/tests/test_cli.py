"""cohortsim entry point: exit codes, outputs, and failure messages."""

import json

import pytest

from coachloop.cli import main
from coachloop.events import read_log


def write_config(tmp_path, **overrides):
    doc = {"n_users": 9, "weeks": 1, "seed": 7}
    doc.update(overrides)
    path = tmp_path / "exp.json"
    path.write_text(json.dumps(doc))
    return path


def test_run_writes_report_matrix_and_log(tmp_path, capsys):
    config = write_config(tmp_path)
    out = tmp_path / "report.json"
    code = main(["run", "--config", str(config), "--out", str(out)])
    assert code == 0

    report = json.loads(out.read_text())
    assert report["config"]["seed"] == 7
    matrix = out.with_suffix(".txt").read_text()
    assert matrix.startswith("latent \\ predicted")

    data_dir = tmp_path / "report-data"
    log = read_log(data_dir / "events.ndjson")
    assert len(log) == report["events_total"]

    printed = capsys.readouterr().out
    assert "post-model accuracy:" in printed
    assert "report:" in printed and "runtime:" in printed


def test_run_wipes_stale_data_dir(tmp_path):
    config = write_config(tmp_path)
    data_dir = tmp_path / "data"
    data_dir.mkdir()
    (data_dir / "stale.ndjson").write_text("junk")
    code = main(["run", "--config", str(config),
                 "--out", str(tmp_path / "r.json"), "--data-dir", str(data_dir)])
    assert code == 0
    assert not (data_dir / "stale.ndjson").exists()
    assert (data_dir / "events.ndjson").exists()


def test_run_enforces_accuracy_floor(tmp_path, capsys):
    config = write_config(tmp_path, assert_min_accuracy=1.01)  # unreachable
    code = main(["run", "--config", str(config),
                 "--out", str(tmp_path / "r.json")])
    assert code == 1
    assert "FAIL: accuracy" in capsys.readouterr().err


def test_run_passes_reachable_floor(tmp_path, capsys):
    config = write_config(tmp_path, assert_min_accuracy=0.0)
    code = main(["run", "--config", str(config),
                 "--out", str(tmp_path / "r.json")])
    assert code == 0
    assert "accuracy check passed" in capsys.readouterr().out


def test_bad_config_reports_error_code(tmp_path, capsys):
    path = tmp_path / "exp.json"
    path.write_text(json.dumps({"n_users": 9}))  # no seed
    code = main(["run", "--config", str(path), "--out", str(tmp_path / "r.json")])
    assert code == 2
    assert "error [ConfigInvalid]:" in capsys.readouterr().err


def test_gen_writes_cohort(tmp_path, capsys):
    out = tmp_path / "cohort.json"
    code = main(["gen", "--n", "5", "--seed", "3", "--out", str(out)])
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["n"] == 5 and doc["seed"] == 3
    assert len(doc["users"]) == 5
    assert {u["chat_id"] for u in doc["users"]} == set(range(1000, 1005))


def test_gen_stdout_and_determinism(tmp_path, capsys):
    assert main(["gen", "--n", "4", "--seed", "9"]) == 0
    first = capsys.readouterr().out
    assert main(["gen", "--n", "4", "--seed", "9"]) == 0
    assert capsys.readouterr().out == first
    assert json.loads(first)["users"]


def test_gen_rejects_tiny_cohort(capsys):
    assert main(["gen", "--n", "2"]) == 2
    assert "error [ConfigInvalid]:" in capsys.readouterr().err
