"""Trigger-time selection and the due-notification queue.

Diet slots fire a fixed offset before the meal the slot maps to; other
kinds fire at the hour the user has most often complied historically,
falling back to a fixed evening hour.  All times are UTC (the deployment
treats user-local time as UTC; per-user timezones would slot in here).
"""

from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass, replace
from datetime import date, datetime, time, timedelta, timezone
from typing import Iterable, Mapping, Sequence

from .domain import ActivityKind, Plan
from .errors import DuplicateEnqueue, FieldOutOfRange


@dataclass(frozen=True)
class TriggerRules:
    """Per-kind trigger policy knobs."""

    meal_hours: tuple[tuple[int, int], ...] = ((8, 0), (12, 30), (19, 0))
    pre_meal_offset_min: int = 60
    fallback_hour: int = 18

    def __post_init__(self):
        if not 0 <= self.pre_meal_offset_min <= 240:
            raise FieldOutOfRange("pre_meal_offset_min", "must be in [0, 240]")
        if not 0 <= self.fallback_hour <= 23:
            raise FieldOutOfRange("fallback_hour", "must be in [0, 23]")
        for h, m in self.meal_hours:
            if not (0 <= h <= 23 and 0 <= m <= 59):
                raise FieldOutOfRange("meal_hours", f"bad time {h}:{m}")


DEFAULT_RULES = TriggerRules()


class NotificationState(str, enum.Enum):
    Pending = "Pending"
    Dispatched = "Dispatched"
    Expired = "Expired"


@dataclass(frozen=True)
class ScheduledNotification:
    notification_id: str
    user_id: str
    plan_id: str
    date: date
    slot_index: int
    fire_at: datetime
    state: NotificationState = NotificationState.Pending

    def with_state(self, state: NotificationState) -> "ScheduledNotification":
        if self.state is not NotificationState.Pending:
            raise ValueError(f"cannot leave terminal state {self.state.value}")
        return replace(self, state=state)

    def to_dict(self) -> dict:
        return {
            "notification_id": self.notification_id,
            "user_id": self.user_id,
            "plan_id": self.plan_id,
            "date": self.date.isoformat(),
            "slot_index": self.slot_index,
            "fire_at": self.fire_at.astimezone(timezone.utc).isoformat(),
            "state": self.state.value,
        }


def trigger_time(kind: ActivityKind, slot_index: int,
                 complied_hours: Sequence[int],
                 rules: TriggerRules = DEFAULT_RULES) -> time:
    """Best time of day to nudge for a slot of this kind.

    `complied_hours` are the hours of the user's past complied reports for
    this kind; the mode wins, ties break to the earlier hour.
    """
    if kind is ActivityKind.Diet:
        h, m = rules.meal_hours[slot_index % len(rules.meal_hours)]
        fire = h * 60 + m - rules.pre_meal_offset_min
        if fire < 0:
            fire = 0  # clamp to midnight rather than drift to the prior day
        return time(fire // 60, fire % 60)
    if complied_hours:
        counts = Counter(complied_hours)
        top = max(counts.values())
        return time(min(h for h, c in counts.items() if c == top))
    return time(rules.fallback_hour)


def fire_at_for_slot(slot_date: date, tod: time) -> datetime:
    return datetime.combine(slot_date, tod, tzinfo=timezone.utc)


def plan_notifications(plan: Plan, kind_of: Mapping[str, ActivityKind],
                       complied_hours_by_kind: Mapping[ActivityKind, Sequence[int]],
                       next_serial: int,
                       rules: TriggerRules = DEFAULT_RULES) -> list[ScheduledNotification]:
    """One Pending notification per slot; ids continue from next_serial."""
    out = []
    serial = next_serial
    for slot in plan.slots:
        kind = kind_of[slot.activity_id]
        tod = trigger_time(kind, slot.slot_index,
                           complied_hours_by_kind.get(kind, ()), rules)
        out.append(ScheduledNotification(
            notification_id=f"n-{serial:06d}",
            user_id=plan.user_id,
            plan_id=plan.plan_id,
            date=slot.date,
            slot_index=slot.slot_index,
            fire_at=fire_at_for_slot(slot.date, tod),
        ))
        serial += 1
    return out


def check_not_enqueued(plan_id: str, existing: Iterable[ScheduledNotification]) -> None:
    if any(n.plan_id == plan_id for n in existing):
        raise DuplicateEnqueue(f"plan {plan_id!r} already enqueued")


def split_due(pending: Iterable[ScheduledNotification], now: datetime,
              expiry: timedelta = timedelta(hours=24),
              ) -> tuple[list[ScheduledNotification], list[ScheduledNotification]]:
    """Partition Pending notifications into (dispatch_now, expire_now).

    A notification more than `expiry` past its fire time is stale and must
    not be delivered.  Not-yet-due ones are left untouched.
    """
    dispatch: list[ScheduledNotification] = []
    expire: list[ScheduledNotification] = []
    for n in sorted(pending, key=lambda n: n.notification_id):
        if n.state is not NotificationState.Pending:
            continue
        if n.fire_at > now:
            continue
        if now - n.fire_at > expiry:
            expire.append(n)
        else:
            dispatch.append(n)
    return dispatch, expire
