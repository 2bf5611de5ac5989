"""Config loading: file formats, env overrides, and validation."""

import json

import pytest

from coachloop.config import ServiceConfig, load_config


def test_defaults_are_valid():
    cfg = ServiceConfig()
    assert cfg.k == 5
    assert cfg.slots_per_day == 3
    assert cfg.default_template == "baseline-v1"
    assert cfg.post_model_weights == {"compliance_score": 8.0, "trend_slope": 2.0}


@pytest.mark.parametrize("kwargs", [
    {"slots_per_day": 0},
    {"epsilon": -0.1},
    {"epsilon": 1.5},
    {"passive_threshold": 0.8, "active_threshold": 0.7},
    {"active_threshold": 1.2},
    {"k": 4},
    {"k": 0},
    {"k": -3},
])
def test_invalid_values_rejected(kwargs):
    with pytest.raises(ValueError):
        ServiceConfig(**kwargs)


def test_load_json_file(tmp_path):
    path = tmp_path / "svc.json"
    path.write_text(json.dumps({
        "k": 7,
        "epsilon": 0.25,
        "data_dir": "/tmp/run1",
        "meal_hours": [[7, 30], [12, 0], [18, 30]],
    }))
    cfg = load_config(path, env={})
    assert cfg.k == 7
    assert cfg.epsilon == 0.25
    assert cfg.data_dir == "/tmp/run1"
    assert cfg.meal_hours == ((7, 30), (12, 0), (18, 30))
    assert cfg.slots_per_day == 3  # untouched default


def test_load_toml_file(tmp_path):
    path = tmp_path / "svc.toml"
    path.write_text('k = 9\nport = 9001\ncaregiver_token = "hunter2"\n')
    cfg = load_config(path, env={})
    assert cfg.k == 9
    assert cfg.port == 9001
    assert cfg.caregiver_token == "hunter2"


def test_unknown_keys_rejected(tmp_path):
    path = tmp_path / "svc.json"
    path.write_text(json.dumps({"k": 7, "knn_neighbours": 9}))
    with pytest.raises(ValueError, match="knn_neighbours"):
        load_config(path, env={})


def test_env_overrides_file(tmp_path):
    path = tmp_path / "svc.json"
    path.write_text(json.dumps({"port": 8100, "epsilon": 0.25}))
    cfg = load_config(path, env={
        "COACHLOOP_PORT": "9000",
        "COACHLOOP_EPSILON": "0.5",
        "COACHLOOP_DATA_DIR": "/tmp/override",
        "COACHLOOP_FSYNC": "false",
        "COACHLOOP_K": "3",
        "UNRELATED": "ignored",
    })
    assert cfg.port == 9000
    assert cfg.epsilon == 0.5
    assert cfg.data_dir == "/tmp/override"
    assert cfg.fsync is False
    assert cfg.k == 3


@pytest.mark.parametrize("raw,expected", [
    ("1", True), ("true", True), ("YES", True), ("on", True),
    ("0", False), ("false", False), ("off", False), ("no", False),
])
def test_bool_env_parsing(raw, expected):
    cfg = load_config(None, env={"COACHLOOP_FSYNC": raw})
    assert cfg.fsync is expected


def test_no_file_no_env_gives_defaults():
    assert load_config(None, env={}) == ServiceConfig()


def test_file_values_still_validated(tmp_path):
    path = tmp_path / "svc.json"
    path.write_text(json.dumps({"k": 6}))
    with pytest.raises(ValueError, match="odd"):
        load_config(path, env={})
