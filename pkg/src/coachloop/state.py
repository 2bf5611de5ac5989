"""Materialized state: a pure fold over the event log.

Live commands and replay share the single ``State.apply`` path, so a state
rebuilt from the log equals the live one field-by-field (including model
exports, byte-for-byte).  ``to_snapshot_doc``/``from_snapshot_doc`` give the
snapshot round-trip; snapshot-doc equality is the structural-equality oracle
used throughout the tests.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import date

from .clock import parse_iso
from .domain import (
    ActivityCluster,
    ComplianceReport,
    Emotion,
    EmotionReport,
    Plan,
    UserProfile,
    plan_from_dict,
    profile_from_dict,
)
from .events import Event
from .knn import (
    InstanceSource,
    KnnModel,
    add_labeled_instance,
    export_model,
    import_model,
)
from .features import FeatureVector
from .scheduling import NotificationState, ScheduledNotification


@dataclass
class UserRecord:
    user_id: str
    chat_id: int
    display_name: str
    profile: UserProfile
    registered_template: str
    current_template: str  # last caregiver-labeled template (see ModelLabelAdded)
    registered_at: str

    def to_dict(self) -> dict:
        return {
            "user_id": self.user_id,
            "chat_id": self.chat_id,
            "display_name": self.display_name,
            "profile": self.profile.to_dict(),
            "registered_template": self.registered_template,
            "current_template": self.current_template,
            "registered_at": self.registered_at,
        }


def _notification_from_dict(doc: dict) -> ScheduledNotification:
    return ScheduledNotification(
        notification_id=doc["notification_id"],
        user_id=doc["user_id"],
        plan_id=doc["plan_id"],
        date=date.fromisoformat(doc["date"]),
        slot_index=doc["slot_index"],
        fire_at=parse_iso(doc["fire_at"]),
        state=NotificationState(doc["state"]),
    )


@dataclass
class State:
    pre_default_label: str = "baseline-v1"
    post_default_label: str = "Neutral"
    k: int = 5
    pre_weights: dict = field(default_factory=dict)
    post_weights: dict = field(default_factory=dict)

    last_seq: int = 0
    users: dict = field(default_factory=dict)          # user_id -> UserRecord
    chat_index: dict = field(default_factory=dict)     # chat_id -> user_id
    plans: dict = field(default_factory=dict)          # plan_id -> Plan
    plans_by_user: dict = field(default_factory=dict)  # user_id -> [plan_id]
    reports: list = field(default_factory=list)        # ComplianceReport, append order
    reports_by_user: dict = field(default_factory=dict)
    reported_slots: set = field(default_factory=set)   # (plan_id, date_iso, slot)
    emotions: dict = field(default_factory=dict)       # user_id -> [EmotionReport]
    notifications: dict = field(default_factory=dict)  # notification_id -> ScheduledNotification
    enqueued_plans: set = field(default_factory=set)   # plan ids with notifications
    clusters: list = field(default_factory=list)       # confirmed ActivityCluster
    broadcasts: list = field(default_factory=list)     # raw payloads, audit only
    refinements: dict = field(default_factory=dict)    # user_id -> [payload]
    label_trail: dict = field(default_factory=dict)    # user_id -> [label records]
    watermarks: dict = field(default_factory=dict)     # chat_id -> last event update_id
    pre_model: KnnModel = None  # type: ignore[assignment]
    post_model: KnnModel = None  # type: ignore[assignment]

    def __post_init__(self):
        if self.pre_model is None:
            self.pre_model = KnnModel(schema_id="profile-v1",
                                      default_label=self.pre_default_label,
                                      k=self.k, weights=dict(self.pre_weights))
        if self.post_model is None:
            self.post_model = KnnModel(schema_id="performance-v1",
                                       default_label=self.post_default_label,
                                       k=self.k, weights=dict(self.post_weights))

    # -- derived serial counters (ids are a pure function of state) ----------

    def next_user_id(self) -> str:
        return f"u-{len(self.users) + 1:04d}"

    def next_plan_id(self) -> str:
        return f"p-{len(self.plans) + 1:06d}"

    def next_notification_serial(self) -> int:
        return len(self.notifications) + 1

    def next_instance_id(self, model: str) -> str:
        m = self.pre_model if model == "pre" else self.post_model
        return f"{model}-{len(m.instances) + 1:06d}"

    def user_plans(self, user_id: str) -> list[Plan]:
        return [self.plans[pid] for pid in self.plans_by_user.get(user_id, [])]

    def user_reports(self, user_id: str) -> list[ComplianceReport]:
        return self.reports_by_user.get(user_id, [])

    # -- the fold -------------------------------------------------------------

    def apply(self, event: Event) -> None:
        if event.seq != self.last_seq + 1:
            raise ValueError(f"event seq {event.seq} applied after {self.last_seq}")
        handler = getattr(self, f"_apply_{event.kind}")
        handler(event)
        self.last_seq = event.seq

    def _bump_watermark(self, user_id: str, payload: dict) -> None:
        update_id = payload.get("update_id")
        if update_id is None:
            return
        chat_id = self.users[user_id].chat_id
        if update_id > self.watermarks.get(chat_id, -1):
            self.watermarks[chat_id] = update_id

    def _apply_UserRegistered(self, event: Event) -> None:
        p = event.payload
        record = UserRecord(
            user_id=p["user_id"],
            chat_id=p["chat_id"],
            display_name=p["display_name"],
            profile=profile_from_dict(p["profile"]),
            registered_template=p["chosen_template"],
            current_template=p["chosen_template"],
            registered_at=event.ts,
        )
        self.users[record.user_id] = record
        self.chat_index[record.chat_id] = record.user_id
        self.plans_by_user.setdefault(record.user_id, [])

    def _apply_ModelLabelAdded(self, event: Event) -> None:
        p = event.payload
        features = FeatureVector.from_dict(p["features"])
        if p["model"] == "pre":
            self.pre_model = add_labeled_instance(
                self.pre_model, features, p["label"],
                InstanceSource(p["source"]), instance_id=p["instance_id"],
                created_at=event.ts)
            user = self.users.get(p["user_id"])
            if user is not None:
                user.current_template = p["label"]
        else:
            self.post_model = add_labeled_instance(
                self.post_model, features, p["label"],
                InstanceSource(p["source"]), instance_id=p["instance_id"],
                created_at=event.ts)
        self.label_trail.setdefault(p["user_id"], []).append({
            "model": p["model"],
            "instance_id": p["instance_id"],
            "label": p["label"],
            "source": p["source"],
            "ts": event.ts,
        })

    def _apply_PlanAssigned(self, event: Event) -> None:
        plan = plan_from_dict(event.payload["plan"])
        self.plans[plan.plan_id] = plan
        self.plans_by_user.setdefault(plan.user_id, []).append(plan.plan_id)

    def _apply_PlanRefined(self, event: Event) -> None:
        p = event.payload
        self.refinements.setdefault(p["user_id"], []).append(dict(p, ts=event.ts))

    def _apply_ComplianceReported(self, event: Event) -> None:
        p = event.payload
        report = ComplianceReport(
            user_id=p["user_id"],
            plan_id=p["plan_id"],
            date=date.fromisoformat(p["date"]),
            slot_index=p["slot_index"],
            complied=p["complied"],
            reported_at=parse_iso(event.ts),
        )
        self.reports.append(report)
        self.reports_by_user.setdefault(report.user_id, []).append(report)
        self.reported_slots.add((report.plan_id, p["date"], report.slot_index))
        self._bump_watermark(report.user_id, p)

    def _apply_EmotionReported(self, event: Event) -> None:
        p = event.payload
        report = EmotionReport(user_id=p["user_id"], emotion=Emotion(p["emotion"]),
                               reported_at=parse_iso(event.ts))
        self.emotions.setdefault(report.user_id, []).append(report)
        self._bump_watermark(report.user_id, p)

    def _apply_NotificationScheduled(self, event: Event) -> None:
        n = _notification_from_dict(event.payload["notification"])
        self.notifications[n.notification_id] = n
        self.enqueued_plans.add(n.plan_id)

    def _apply_NotificationDispatched(self, event: Event) -> None:
        nid = event.payload["notification_id"]
        self.notifications[nid] = self.notifications[nid].with_state(
            NotificationState.Dispatched)

    def _apply_NotificationExpired(self, event: Event) -> None:
        nid = event.payload["notification_id"]
        self.notifications[nid] = self.notifications[nid].with_state(
            NotificationState.Expired)

    def _apply_ClusterConfirmed(self, event: Event) -> None:
        self.clusters = [
            ActivityCluster(cluster_id=c["cluster_id"],
                            member_ids=frozenset(c["member_ids"]),
                            confirmed=True)
            for c in event.payload["clusters"]
        ]

    def _apply_BroadcastSent(self, event: Event) -> None:
        self.broadcasts.append(dict(event.payload, ts=event.ts))

    # -- snapshot round-trip ---------------------------------------------------

    def to_snapshot_doc(self) -> dict:
        return {
            "last_seq": self.last_seq,
            "users": {uid: u.to_dict() for uid, u in sorted(self.users.items())},
            "plans": {pid: p.to_dict() for pid, p in sorted(self.plans.items())},
            "plans_by_user": {u: list(pids) for u, pids in sorted(self.plans_by_user.items())},
            "reports": [r.to_dict() for r in self.reports],
            "emotions": {u: [e.to_dict() for e in evs]
                         for u, evs in sorted(self.emotions.items())},
            "notifications": {nid: n.to_dict()
                              for nid, n in sorted(self.notifications.items())},
            "clusters": [c.to_dict() for c in self.clusters],
            "broadcasts": list(self.broadcasts),
            "refinements": {u: list(v) for u, v in sorted(self.refinements.items())},
            "label_trail": {u: list(v) for u, v in sorted(self.label_trail.items())},
            "watermarks": {str(chat): wm for chat, wm in sorted(self.watermarks.items())},
            "models": {"pre": export_model(self.pre_model),
                       "post": export_model(self.post_model)},
        }


def state_from_snapshot_doc(doc: dict) -> State:
    state = State()
    state.last_seq = doc["last_seq"]
    for uid, u in doc["users"].items():
        record = UserRecord(
            user_id=u["user_id"], chat_id=u["chat_id"],
            display_name=u["display_name"],
            profile=profile_from_dict(u["profile"]),
            registered_template=u["registered_template"],
            current_template=u["current_template"],
            registered_at=u["registered_at"],
        )
        state.users[uid] = record
        state.chat_index[record.chat_id] = uid
    state.plans = {pid: plan_from_dict(p) for pid, p in doc["plans"].items()}
    state.plans_by_user = {u: list(pids) for u, pids in doc["plans_by_user"].items()}
    for r in doc["reports"]:
        report = ComplianceReport(
            user_id=r["user_id"], plan_id=r["plan_id"],
            date=date.fromisoformat(r["date"]), slot_index=r["slot_index"],
            complied=r["complied"], reported_at=parse_iso(r["reported_at"]))
        state.reports.append(report)
        state.reports_by_user.setdefault(report.user_id, []).append(report)
        state.reported_slots.add((report.plan_id, r["date"], report.slot_index))
    state.emotions = {
        u: [EmotionReport(user_id=e["user_id"], emotion=Emotion(e["emotion"]),
                          reported_at=parse_iso(e["reported_at"])) for e in evs]
        for u, evs in doc["emotions"].items()
    }
    state.notifications = {nid: _notification_from_dict(n)
                           for nid, n in doc["notifications"].items()}
    state.enqueued_plans = {n.plan_id for n in state.notifications.values()}
    state.clusters = [
        ActivityCluster(cluster_id=c["cluster_id"],
                        member_ids=frozenset(c["member_ids"]), confirmed=True)
        for c in doc["clusters"]
    ]
    state.broadcasts = list(doc["broadcasts"])
    state.refinements = {u: list(v) for u, v in doc["refinements"].items()}
    state.label_trail = {u: list(v) for u, v in doc["label_trail"].items()}
    state.watermarks = {int(chat): wm for chat, wm in doc["watermarks"].items()}
    state.pre_model = import_model(doc["models"]["pre"])
    state.post_model = import_model(doc["models"]["post"])
    return state


def replay(events, **state_kwargs) -> State:
    state = State(**state_kwargs)
    for event in events:
        state.apply(event)
    return state
