"""Shared domain types and their validation.

Pure values: no I/O, no clocks, safe for any number of concurrent readers.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from datetime import date, datetime, timedelta
from typing import Iterable, Mapping

from .errors import FieldOutOfRange, MalformedWeek, UnknownActivity, UnknownTag
from . import vocab

BMI_TOLERANCE = 1e-9

AGE_RANGE = (10, 120)
HEIGHT_RANGE = (0.5, 2.5)
WEIGHT_RANGE = (20.0, 300.0)


class Gender(str, enum.Enum):
    Male = "Male"
    Female = "Female"
    Other = "Other"


class Education(enum.IntEnum):
    Primary = 0
    Secondary = 1
    Tertiary = 2
    Postgraduate = 3


class ActivityKind(str, enum.Enum):
    Diet = "Diet"
    Physical = "Physical"
    Wellness = "Wellness"


class SlotOrigin(str, enum.Enum):
    Frequent = "Frequent"
    Infrequent = "Infrequent"


class Emotion(str, enum.Enum):
    Happy = "Happy"
    Sad = "Sad"
    Angry = "Angry"
    Neutral = "Neutral"


class UserType(str, enum.Enum):
    """Three-way performance class, ordered Active > Neutral > Passive."""

    Active = "Active"
    Neutral = "Neutral"
    Passive = "Passive"

    @property
    def rank(self) -> int:
        return {"Active": 2, "Neutral": 1, "Passive": 0}[self.value]


@dataclass(frozen=True)
class Vocabulary:
    """Closed tag sets a profile may draw from; configurable per deployment."""

    health_conditions: frozenset[str] = vocab.HEALTH_CONDITIONS
    activity_tags: frozenset[str] = vocab.ACTIVITY_TAGS
    food_tags: frozenset[str] = vocab.FOOD_TAGS
    resource_tags: frozenset[str] = vocab.RESOURCE_TAGS


DEFAULT_VOCABULARY = Vocabulary()


@dataclass(frozen=True)
class UserProfile:
    user_id: str
    age: int
    gender: Gender
    height_m: float
    weight_kg: float
    bmi: float                       # always recomputed, never client-supplied
    education: Education
    health_condition: str
    preferred_activities: frozenset[str] = frozenset()
    preferred_foods: frozenset[str] = frozenset()
    resources: frozenset[str] = frozenset()

    def to_dict(self) -> dict:
        return {
            "user_id": self.user_id,
            "age": self.age,
            "gender": self.gender.value,
            "height_m": self.height_m,
            "weight_kg": self.weight_kg,
            "bmi": self.bmi,
            "education": int(self.education),
            "health_condition": self.health_condition,
            "preferred_activities": sorted(self.preferred_activities),
            "preferred_foods": sorted(self.preferred_foods),
            "resources": sorted(self.resources),
        }


@dataclass(frozen=True)
class Activity:
    activity_id: str
    kind: ActivityKind
    title: str
    tags: frozenset[str]
    required_resources: frozenset[str] = frozenset()
    importance: int = 3

    def __post_init__(self):
        if not self.tags:
            raise FieldOutOfRange("tags", "must be nonempty")
        if not 1 <= self.importance <= 5:
            raise FieldOutOfRange("importance", "must be in [1, 5]")

    def to_dict(self) -> dict:
        return {
            "activity_id": self.activity_id,
            "kind": self.kind.value,
            "title": self.title,
            "tags": sorted(self.tags),
            "required_resources": sorted(self.required_resources),
            "importance": self.importance,
        }


@dataclass(frozen=True)
class ActivityCluster:
    cluster_id: str
    member_ids: frozenset[str]
    confirmed: bool = False

    def __post_init__(self):
        if not self.member_ids:
            raise FieldOutOfRange("member_ids", "cluster must be nonempty")

    def to_dict(self) -> dict:
        return {
            "cluster_id": self.cluster_id,
            "member_ids": sorted(self.member_ids),
            "confirmed": self.confirmed,
        }


@dataclass(frozen=True)
class PlanSlot:
    date: date
    slot_index: int
    activity_id: str
    origin: SlotOrigin

    def to_dict(self) -> dict:
        return {
            "date": self.date.isoformat(),
            "slot_index": self.slot_index,
            "activity_id": self.activity_id,
            "origin": self.origin.value,
        }


@dataclass(frozen=True)
class Plan:
    plan_id: str
    user_id: str
    template_id: str
    week_start: date
    slots: tuple[PlanSlot, ...]

    @property
    def week_dates(self) -> list[date]:
        return [self.week_start + timedelta(days=i) for i in range(7)]

    def slots_on(self, day: date) -> list[PlanSlot]:
        return [s for s in self.slots if s.date == day]

    def to_dict(self) -> dict:
        return {
            "plan_id": self.plan_id,
            "user_id": self.user_id,
            "template_id": self.template_id,
            "week_start": self.week_start.isoformat(),
            "slots": [s.to_dict() for s in self.slots],
        }


@dataclass(frozen=True)
class ComplianceReport:
    user_id: str
    plan_id: str
    date: date
    slot_index: int
    complied: bool
    reported_at: datetime

    def to_dict(self) -> dict:
        return {
            "user_id": self.user_id,
            "plan_id": self.plan_id,
            "date": self.date.isoformat(),
            "slot_index": self.slot_index,
            "complied": self.complied,
            "reported_at": self.reported_at.isoformat(),
        }


@dataclass(frozen=True)
class EmotionReport:
    user_id: str
    emotion: Emotion
    reported_at: datetime

    def to_dict(self) -> dict:
        return {
            "user_id": self.user_id,
            "emotion": self.emotion.value,
            "reported_at": self.reported_at.isoformat(),
        }


def _check_range(name: str, value, lo, hi):
    if not (lo <= value <= hi):
        raise FieldOutOfRange(name, f"{value!r} not in [{lo}, {hi}]")


def _check_tags(name: str, tags: Iterable[str], allowed: frozenset[str]) -> frozenset[str]:
    out = frozenset(tags)
    for t in out:
        if t not in allowed:
            raise UnknownTag(t, name)
    return out


def validate_profile(raw: Mapping | UserProfile,
                     vocabulary: Vocabulary = DEFAULT_VOCABULARY) -> UserProfile:
    """Validate a raw profile record; BMI is derived from height and weight.

    Idempotent: validating an already-validated profile yields an equal value.
    """
    if isinstance(raw, UserProfile):
        raw = raw.to_dict()

    try:
        user_id = str(raw["user_id"])
        age = int(raw["age"])
        gender = Gender(raw["gender"])
        height_m = float(raw["height_m"])
        weight_kg = float(raw["weight_kg"])
        education = Education(int(raw["education"]))
        health_condition = str(raw["health_condition"])
    except (KeyError, ValueError, TypeError) as exc:
        raise FieldOutOfRange(str(exc), "missing or malformed") from exc

    _check_range("age", age, *AGE_RANGE)
    _check_range("height_m", height_m, *HEIGHT_RANGE)
    _check_range("weight_kg", weight_kg, *WEIGHT_RANGE)
    if not (math.isfinite(height_m) and math.isfinite(weight_kg)):
        raise FieldOutOfRange("height_m/weight_kg", "must be finite")

    if health_condition not in vocabulary.health_conditions:
        raise UnknownTag(health_condition, "health_condition")

    bmi = weight_kg / (height_m * height_m)

    return UserProfile(
        user_id=user_id,
        age=age,
        gender=gender,
        height_m=height_m,
        weight_kg=weight_kg,
        bmi=bmi,
        education=education,
        health_condition=health_condition,
        preferred_activities=_check_tags(
            "preferred_activities", raw.get("preferred_activities", ()), vocabulary.activity_tags),
        preferred_foods=_check_tags(
            "preferred_foods", raw.get("preferred_foods", ()), vocabulary.food_tags),
        resources=_check_tags(
            "resources", raw.get("resources", ()), vocabulary.resource_tags),
    )


def new_plan(plan_id: str, user_id: str, template_id: str, week_start: date,
             slots: Iterable[tuple[date, int, str, SlotOrigin]],
             known_activities: Mapping[str, Activity],
             slots_per_day: int = 3) -> Plan:
    """Assemble and validate a weekly plan.

    ``slots`` must cover exactly 7 consecutive dates from ``week_start`` with
    ``slots_per_day`` slot indices each; every activity id must exist.
    """
    expected_dates = [week_start + timedelta(days=i) for i in range(7)]
    wanted = {(d, s) for d in expected_dates for s in range(slots_per_day)}

    plan_slots: list[PlanSlot] = []
    seen: set[tuple[date, int]] = set()
    for d, idx, activity_id, origin in slots:
        key = (d, idx)
        if key not in wanted:
            raise MalformedWeek(f"slot {d.isoformat()}#{idx} outside the 7x{slots_per_day} grid")
        if key in seen:
            raise MalformedWeek(f"duplicate slot {d.isoformat()}#{idx}")
        if activity_id not in known_activities:
            raise UnknownActivity(activity_id)
        seen.add(key)
        plan_slots.append(PlanSlot(d, idx, activity_id, SlotOrigin(origin)))

    missing = wanted - seen
    if missing:
        d, idx = sorted(missing)[0]
        raise MalformedWeek(f"missing slot {d.isoformat()}#{idx}")

    plan_slots.sort(key=lambda s: (s.date, s.slot_index))
    return Plan(plan_id=plan_id, user_id=user_id, template_id=template_id,
                week_start=week_start, slots=tuple(plan_slots))


def plan_from_dict(doc: Mapping) -> Plan:
    """Rebuild a Plan from its serialized form (event payloads, snapshots)."""
    slots = tuple(
        PlanSlot(date.fromisoformat(s["date"]), int(s["slot_index"]),
                 s["activity_id"], SlotOrigin(s["origin"]))
        for s in doc["slots"]
    )
    return Plan(plan_id=doc["plan_id"], user_id=doc["user_id"],
                template_id=doc["template_id"],
                week_start=date.fromisoformat(doc["week_start"]), slots=slots)


def profile_from_dict(doc: Mapping) -> UserProfile:
    return validate_profile(doc)


def default_pool() -> dict[str, Activity]:
    out = {}
    for aid, kind, title, tags, req, imp in vocab.DEFAULT_POOL:
        out[aid] = Activity(aid, ActivityKind(kind), title,
                            frozenset(tags), frozenset(req), imp)
    return out


def load_activity_pool(doc: str | bytes | list) -> dict[str, Activity]:
    """Ingest an activity pool from its JSON document form.

    Accepts the parsed list or raw JSON text of
    ``[{activity_id, kind, title, tags[], required_resources[], importance}]``.
    """
    import json as _json

    if isinstance(doc, (str, bytes)):
        doc = _json.loads(doc)
    pool: dict[str, Activity] = {}
    for rec in doc:
        act = Activity(
            activity_id=rec["activity_id"],
            kind=ActivityKind(rec["kind"]),
            title=rec["title"],
            tags=frozenset(rec["tags"]),
            required_resources=frozenset(rec.get("required_resources", ())),
            importance=int(rec.get("importance", 3)),
        )
        if act.activity_id in pool:
            raise FieldOutOfRange("activity_id", f"duplicate {act.activity_id!r}")
        pool[act.activity_id] = act
    return pool
