"""HTTP layer: routing, error mapping, token guard, and query parameters."""

import json

import pytest
from fastapi.testclient import TestClient

from coachloop.api import create_app
from coachloop.clock import SimClock
from coachloop.config import ServiceConfig
from coachloop.service import CoachService

from conftest import MONDAY, raw_profile

NOW = "2025-03-03T07:00:00+00:00"


@pytest.fixture
def client(service, tmp_path):
    app = create_app(service, ui_dir=tmp_path / "no-ui")
    with TestClient(app) as c:
        yield c


def register_body(chat_id=100, **overrides):
    return dict(raw_profile(**overrides), chat_id=chat_id)


def test_health_echoes_log_position(client):
    doc = client.get("/health").json()
    assert doc == {"status": "ok", "as_of_seq": 0}

    client.post("/users", json=register_body())
    assert client.get("/health").json()["as_of_seq"] == 2  # registered + labeled


def test_register_assign_detail_roundtrip(client):
    res = client.post("/users", json=register_body(), params={"now": NOW})
    assert res.status_code == 200
    doc = res.json()
    assert doc["user"]["user_id"] == "u-0001"
    assert doc["suggested"]["status"] == "ColdStart"
    assert doc["chosen_template"] == "baseline-v1"
    assert doc["as_of_seq"] == 2

    res = client.post("/users/u-0001/plan", params={"now": NOW},
                      json={"week_start": "2025-03-03"})
    assert res.status_code == 200
    plan = res.json()["plan"]
    assert plan["plan_id"] == "p-000001"
    assert plan["week_start"] == "2025-03-03"
    assert len(plan["slots"]) == 21

    res = client.get("/users/u-0001", params={"as_of": "2025-03-03"})
    assert res.status_code == 200
    detail = res.json()
    assert detail["plan"]["plan_id"] == "p-000001"
    assert detail["window"]["end"] == "2025-03-03"
    assert "as_of_seq" in detail


def test_refine_flow_and_body_validation(client):
    client.post("/users", json=register_body(), params={"now": NOW})
    client.post("/users/u-0001/plan", params={"now": NOW},
                json={"week_start": "2025-03-03"})

    res = client.post("/users/u-0001/refine", json={}, params={"now": NOW})
    assert res.status_code == 422
    assert res.json()["code"] == "PayloadInvalid"

    res = client.post("/users/u-0001/refine", params={"now": NOW},
                      json={"template_id": "active-burn-v1", "as_of": "2025-03-03"})
    assert res.status_code == 200
    doc = res.json()
    # assigned slots with nothing complied score 0.0, the Passive band
    assert doc["observed_type"] == "Passive"
    assert doc["plan"]["week_start"] == "2025-03-04"


@pytest.mark.parametrize("method,path,body,status,code", [
    ("get", "/users/u-9999", None, 404, "UnknownUser"),
    ("post", "/users/u-9999/plan", {}, 404, "UnknownUser"),
    ("post", "/broadcast", {"text": "   "}, 422, "EmptyBroadcast"),
    ("post", "/broadcast", {"text": "hi", "filter": "nope"}, 422, "PayloadInvalid"),
    ("post", "/clusters/confirm", {"edits": 7}, 422, "PayloadInvalid"),
    ("get", "/ranking?as_of=not-a-date", None, 422, "PayloadInvalid"),
    ("get", "/notifications/due?now=whenever", None, 422, "PayloadInvalid"),
])
def test_error_code_mapping(client, method, path, body, status, code):
    res = getattr(client, method)(path, json=body) if body is not None \
        else getattr(client, method)(path)
    assert res.status_code == status
    doc = res.json()
    assert doc["code"] == code
    assert doc["message"]


def test_duplicate_chat_conflicts(client):
    assert client.post("/users", json=register_body()).status_code == 200
    res = client.post("/users", json=register_body(age=30))
    assert res.status_code == 409
    assert res.json()["code"] == "DuplicateChat"


def test_unknown_template_is_404(client):
    res = client.post("/users", json=dict(register_body(),
                                          template_id="missing-v1"))
    assert res.status_code == 404
    assert res.json()["code"] == "UnknownTemplate"


def test_non_json_body_rejected(client):
    res = client.post("/users", content=b"not json at all",
                      headers={"content-type": "application/json"})
    assert res.status_code == 422
    assert res.json()["code"] == "PayloadInvalid"


def test_bot_update_accepts_raw_wire_bytes(client):
    client.post("/users", json=register_body(), params={"now": NOW})
    wire = json.dumps({"update_id": 1,
                       "message": {"chat_id": 100, "text": "/help"}})
    res = client.post("/bot/update", content=wire.encode("utf-8"),
                      params={"now": NOW})
    assert res.status_code == 200
    messages = res.json()["messages"]
    assert len(messages) == 1 and messages[0]["chat_id"] == 100

    res = client.post("/bot/update", content=b'{"no": "update_id"}')
    assert res.status_code == 400
    assert res.json()["code"] == "MalformedUpdate"


def test_bot_callback_errors_map_through(client):
    client.post("/users", json=register_body(), params={"now": NOW})
    client.post("/users/u-0001/plan", params={"now": NOW},
                json={"week_start": "2025-03-03"})
    wire = json.dumps({"update_id": 1, "callback": {
        "chat_id": 100, "data": "comply:p-000001:2025-04-01:0:yes"}})
    res = client.post("/bot/update", content=wire.encode("utf-8"),
                      params={"now": NOW})
    assert res.status_code == 400
    assert res.json()["code"] == "DateOutOfPlan"


def test_ranking_endpoint_orders_rows(client):
    client.post("/users", json=register_body(chat_id=100), params={"now": NOW})
    client.post("/users", json=register_body(chat_id=200, age=30),
                params={"now": NOW})
    doc = client.get("/ranking", params={"as_of": "2025-03-03"}).json()
    assert [r["user_id"] for r in doc["rows"]] == ["u-0001", "u-0002"]
    assert doc["as_of_seq"] == 4


def test_notifications_due_dispatches_once(client):
    client.post("/users", json=register_body(), params={"now": NOW})
    client.post("/users/u-0001/plan", params={"now": NOW},
                json={"week_start": "2025-03-03"})
    night = {"now": "2025-03-03T23:00:00+00:00"}
    first = client.get("/notifications/due", params=night).json()
    assert len(first["dispatched"]) == 3
    assert client.get("/notifications/due", params=night).json()["dispatched"] == []


def test_broadcast_endpoint(client):
    client.post("/users", json=register_body(chat_id=100), params={"now": NOW})
    res = client.post("/broadcast", params={"now": NOW},
                      json={"text": "Hydrate!", "filter": "all"})
    assert res.status_code == 200
    (msg,) = res.json()["messages"]
    assert (msg["chat_id"], msg["text"]) == (100, "Hydrate!")


def test_cluster_endpoints_roundtrip(client):
    proposed = client.get("/clusters/proposed").json()["clusters"]
    assert proposed and all(not c["confirmed"] for c in proposed)

    res = client.post("/clusters/confirm", params={"now": NOW},
                      json={"edits": [{"activity_id": "a-walk-30",
                                       "cluster_id": "c-900"}]})
    assert res.status_code == 200
    confirmed = res.json()["clusters"]
    assert any(c["cluster_id"] == "c-900" and "a-walk-30" in c["member_ids"]
               for c in confirmed)


def test_token_guard(tmp_path):
    cfg = ServiceConfig(data_dir=str(tmp_path / "data"), fsync=False,
                        caregiver_token="sesame")
    service = CoachService.open(cfg, clock=SimClock(MONDAY))
    app = create_app(service, ui_dir=tmp_path / "no-ui")
    try:
        with TestClient(app) as client:
            res = client.get("/ranking")
            assert res.status_code == 401
            assert res.json()["code"] == "Unauthorized"
            assert client.get(
                "/ranking", headers={"X-Caregiver-Token": "wrong"}).status_code == 401
            assert client.get(
                "/ranking", headers={"X-Caregiver-Token": "sesame"}).status_code == 200

            # subject-facing ingress and liveness stay open
            assert client.get("/health").status_code == 200
            wire = json.dumps({"update_id": 1,
                               "message": {"chat_id": 5, "text": "/start"}})
            assert client.post("/bot/update",
                               content=wire.encode("utf-8")).status_code == 200
    finally:
        service.close()


def test_root_points_at_ui(client):
    assert client.get("/").json() == {"service": "coachloop", "ui": "/ui"}
