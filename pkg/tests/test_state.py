import json
from datetime import date, timedelta

import pytest

from coachloop.clock import utc
from coachloop.events import Event, read_log
from coachloop.knn import export_model
from coachloop.service import state_kwargs
from coachloop.state import State, replay, state_from_snapshot_doc

from conftest import MONDAY, raw_profile

D0 = date(2025, 3, 3)


def drive_scenario(service, clock):
    """A small but representative command history."""
    r1 = service.register_user(raw_profile(), chat_id=100, display_name="Ada")
    r2 = service.register_user(raw_profile(age=61, health_condition="hypertension"),
                               chat_id=101, template_id="balanced-care-v1")
    u1, u2 = r1["user"]["user_id"], r2["user"]["user_id"]
    service.assign_plan(u1, week_start=D0)
    service.assign_plan(u2, week_start=D0)
    plan = service.state.user_plans(u1)[-1]

    for day_offset in range(7):
        day = D0 + timedelta(days=day_offset)
        clock.set(utc(day.year, day.month, day.day, 20))
        for slot in plan.slots_on(day):
            wire = json.dumps({
                "update_id": day_offset * 10 + slot.slot_index + 1,
                "callback": {
                    "chat_id": 100,
                    "data": f"comply:{plan.plan_id}:{day.isoformat()}"
                            f":{slot.slot_index}:{'yes' if slot.slot_index != 2 else 'no'}",
                },
            })
            service.bot_update(wire)
    service.bot_update(json.dumps({
        "update_id": 999,
        "callback": {"chat_id": 100, "data": "emotion:happy"},
    }))
    service.refine_plan(u1, "active-burn-v1", as_of=D0 + timedelta(days=6))
    service.collect_due(now=utc(2025, 3, 3, 23))
    return u1, u2


def test_replay_reproduces_live_state(service, clock):
    u1, _ = drive_scenario(service, clock)
    live_doc = service.state.to_snapshot_doc()

    events = read_log(service.log.path)
    replayed = replay(events, **state_kwargs(service.config))
    assert replayed.to_snapshot_doc() == live_doc
    # model exports are byte-identical, not merely structurally equal
    assert export_model(replayed.pre_model) == export_model(service.state.pre_model)
    assert export_model(replayed.post_model) == export_model(service.state.post_model)


def test_snapshot_doc_round_trips(service, clock):
    drive_scenario(service, clock)
    doc = service.state.to_snapshot_doc()
    rebuilt = state_from_snapshot_doc(doc)
    assert rebuilt.to_snapshot_doc() == doc
    assert rebuilt.watermarks == service.state.watermarks
    assert rebuilt.last_seq == service.state.last_seq


def test_snapshot_plus_tail_equals_full_replay(service, clock):
    drive_scenario(service, clock)
    events = read_log(service.log.path)
    cut = len(events) // 2
    partial = replay(events[:cut], **state_kwargs(service.config))
    doc = partial.to_snapshot_doc()
    resumed = state_from_snapshot_doc(doc)
    for event in events[cut:]:
        resumed.apply(event)
    full = replay(events, **state_kwargs(service.config))
    assert resumed.to_snapshot_doc() == full.to_snapshot_doc()


def test_apply_rejects_sequence_gaps(service, clock):
    drive_scenario(service, clock)
    events = read_log(service.log.path)
    st = replay(events[:3], **state_kwargs(service.config))
    with pytest.raises(ValueError):
        st.apply(events[5])


def test_registration_sets_current_template(service):
    result = service.register_user(raw_profile(), chat_id=100,
                                   template_id="active-burn-v1")
    uid = result["user"]["user_id"]
    record = service.state.users[uid]
    assert record.registered_template == "active-burn-v1"
    assert record.current_template == "active-burn-v1"


def test_refinement_updates_current_template(service, clock):
    u1, _ = drive_scenario(service, clock)
    assert service.state.users[u1].current_template == "active-burn-v1"
    trail = service.state.label_trail[u1]
    pre_labels = [t["label"] for t in trail if t["model"] == "pre"]
    # registration label then the refinement label, no extra from the
    # refinement's internal plan assignment
    assert pre_labels == ["baseline-v1", "active-burn-v1"]
    post_labels = [t["label"] for t in trail if t["model"] == "post"]
    assert len(post_labels) == 1


def test_reassigning_same_template_adds_no_label(service):
    result = service.register_user(raw_profile(), chat_id=100)
    uid = result["user"]["user_id"]
    before = len(service.state.pre_model.instances)
    service.assign_plan(uid, week_start=D0)  # defaults to current template
    assert len(service.state.pre_model.instances) == before


def test_assigning_different_template_labels_pre_model(service):
    result = service.register_user(raw_profile(), chat_id=100)
    uid = result["user"]["user_id"]
    before = len(service.state.pre_model.instances)
    service.assign_plan(uid, template_id="active-burn-v1", week_start=D0)
    assert len(service.state.pre_model.instances) == before + 1
    assert service.state.users[uid].current_template == "active-burn-v1"


def test_watermarks_track_update_ids(service, clock):
    drive_scenario(service, clock)
    assert service.state.watermarks[100] == 999
    assert 101 not in service.state.watermarks
    doc = service.state.to_snapshot_doc()
    rebuilt = state_from_snapshot_doc(doc)
    assert rebuilt.watermarks[100] == 999


def test_ids_are_deterministic_counters(service):
    r1 = service.register_user(raw_profile(), chat_id=100)
    r2 = service.register_user(raw_profile(), chat_id=101)
    assert r1["user"]["user_id"] == "u-0001"
    assert r2["user"]["user_id"] == "u-0002"
    p1 = service.assign_plan("u-0001", week_start=D0)
    p2 = service.assign_plan("u-0002", week_start=D0)
    assert (p1.plan_id, p2.plan_id) == ("p-000001", "p-000002")
    ns = sorted(service.state.notifications)
    assert ns[0] == "n-000001" and len(ns) == 42


def test_fresh_state_has_cold_models():
    st = State()
    assert len(st.pre_model) == 0
    assert st.pre_model.default_label == "baseline-v1"
    assert st.post_model.default_label == "Neutral"
    assert st.last_seq == 0
