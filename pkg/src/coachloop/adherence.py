"""Compliance scores, trends, user-type ground truth, and frequency stats.

Pure functions over read-only report snapshots.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from datetime import date, timedelta
from typing import Iterable, Mapping, Sequence

from .domain import Activity, ActivityKind, ComplianceReport, Plan, UserType
from .errors import FieldOutOfRange, InsufficientDays

MAX_WINDOW_DAYS = 28


@dataclass(frozen=True)
class DayRecord:
    date: date
    assigned: int
    complied: int
    reported: int

    def __post_init__(self):
        if not 0 <= self.complied <= self.assigned:
            raise FieldOutOfRange("complied", "must satisfy 0 <= complied <= assigned")


@dataclass(frozen=True)
class ComplianceWindow:
    user_id: str
    start: date
    end: date
    daily: tuple[DayRecord, ...]

    def __post_init__(self):
        if (self.end - self.start).days > MAX_WINDOW_DAYS:
            raise FieldOutOfRange("window", f"longer than {MAX_WINDOW_DAYS} days")
        if self.start > self.end:
            raise FieldOutOfRange("window", "start after end")

    @property
    def assigned_count(self) -> int:
        return sum(d.assigned for d in self.daily)

    @property
    def complied_count(self) -> int:
        return sum(d.complied for d in self.daily)

    @property
    def report_count(self) -> int:
        return sum(d.reported for d in self.daily)

    def score_points(self) -> list[tuple[float, float]]:
        """(day offset, daily score) for days that had assignments."""
        return [
            (float((d.date - self.start).days), d.complied / d.assigned)
            for d in self.daily
            if d.assigned > 0
        ]


class TrendDirection(str, enum.Enum):
    Improving = "Improving"
    Stable = "Stable"
    Declining = "Declining"


@dataclass(frozen=True)
class Trend:
    direction: TrendDirection
    slope: float


class SlotStatus(str, enum.Enum):
    Complied = "Complied"
    Declined = "Declined"
    Unreported = "Unreported"


@dataclass(frozen=True)
class FrequencyTable:
    """Complied-occurrence counts per activity over the trailing window."""

    counts: Mapping[str, int]
    min_count: int = 3

    def count(self, activity_id: str) -> int:
        return self.counts.get(activity_id, 0)

    def frequent(self, activity_id: str) -> bool:
        return self.count(activity_id) >= self.min_count

    def frequent_ids(self) -> frozenset[str]:
        return frozenset(a for a, c in self.counts.items() if c >= self.min_count)


def ols_slope(points: Sequence[tuple[float, float]]) -> float:
    """Ordinary least-squares slope; caller guarantees >= 2 distinct x."""
    n = len(points)
    mean_x = sum(x for x, _ in points) / n
    mean_y = sum(y for _, y in points) / n
    sxx = sum((x - mean_x) ** 2 for x, _ in points)
    if sxx == 0.0:
        return 0.0
    sxy = sum((x - mean_x) * (y - mean_y) for x, y in points)
    return sxy / sxx


def compliance_score(window: ComplianceWindow) -> float | None:
    """Complied/assigned over the window; None means no data (nothing assigned)."""
    assigned = window.assigned_count
    if assigned == 0:
        return None
    return window.complied_count / assigned


def trend(window: ComplianceWindow, band: float = 0.02) -> Trend:
    points = window.score_points()
    if len(points) < 2:
        raise InsufficientDays(f"need >= 2 assigned days, got {len(points)}")
    slope = ols_slope(points)
    if slope > band:
        direction = TrendDirection.Improving
    elif slope < -band:
        direction = TrendDirection.Declining
    else:
        direction = TrendDirection.Stable
    return Trend(direction=direction, slope=slope)


def ground_truth_type(score: float | None, report_count: int,
                      active_threshold: float = 0.7,
                      passive_threshold: float = 0.4) -> UserType:
    """Threshold rule used as the caregiver-judgment stand-in.

    No data at all maps to Neutral: a brand-new user is neither rewarded nor
    penalized.  A user with assignments but zero reports scores 0.0 and lands
    in Passive through the ordinary thresholds.
    """
    if score is None:
        return UserType.Neutral
    if score >= active_threshold:
        return UserType.Active
    if score >= passive_threshold:
        return UserType.Neutral
    return UserType.Passive


def build_window(user_id: str, plans: Iterable[Plan],
                 reports: Iterable[ComplianceReport],
                 start: date, end: date) -> ComplianceWindow:
    """Materialize the per-day assigned/complied/reported counts for a user."""
    assigned: dict[date, int] = {}
    complied: dict[date, int] = {}
    reported: dict[date, int] = {}
    for plan in plans:
        if plan.user_id != user_id:
            continue
        for slot in plan.slots:
            if start <= slot.date <= end:
                assigned[slot.date] = assigned.get(slot.date, 0) + 1
    for rep in reports:
        if rep.user_id != user_id or not (start <= rep.date <= end):
            continue
        reported[rep.date] = reported.get(rep.date, 0) + 1
        if rep.complied:
            complied[rep.date] = complied.get(rep.date, 0) + 1

    days = []
    d = start
    while d <= end:
        days.append(DayRecord(d, assigned.get(d, 0), complied.get(d, 0),
                              reported.get(d, 0)))
        d += timedelta(days=1)
    return ComplianceWindow(user_id=user_id, start=start, end=end,
                            daily=tuple(days))


@dataclass(frozen=True)
class SlotFeedback:
    date: date
    slot_index: int
    activity_id: str
    kind: ActivityKind
    status: SlotStatus


@dataclass(frozen=True)
class FeedbackSummary:
    plan_id: str
    user_id: str
    rows: tuple[SlotFeedback, ...]
    by_kind: Mapping[str, Mapping[str, int]]  # kind -> status -> count

    def to_dict(self) -> dict:
        return {
            "plan_id": self.plan_id,
            "user_id": self.user_id,
            "rows": [
                {
                    "date": r.date.isoformat(),
                    "slot_index": r.slot_index,
                    "activity_id": r.activity_id,
                    "kind": r.kind.value,
                    "status": r.status.value,
                }
                for r in self.rows
            ],
            "by_kind": {k: dict(v) for k, v in self.by_kind.items()},
        }


def feedback_summary(plan: Plan, reports: Iterable[ComplianceReport],
                     pool: Mapping[str, Activity]) -> FeedbackSummary:
    """Per-slot compliance status plus aggregates by activity kind."""
    by_slot = {(r.date, r.slot_index): r for r in reports if r.plan_id == plan.plan_id}
    rows = []
    agg: dict[str, dict[str, int]] = {}
    for slot in plan.slots:
        rep = by_slot.get((slot.date, slot.slot_index))
        if rep is None:
            status = SlotStatus.Unreported
        elif rep.complied:
            status = SlotStatus.Complied
        else:
            status = SlotStatus.Declined
        kind = pool[slot.activity_id].kind
        rows.append(SlotFeedback(slot.date, slot.slot_index, slot.activity_id,
                                 kind, status))
        kind_agg = agg.setdefault(kind.value, {s.value: 0 for s in SlotStatus})
        kind_agg[status.value] += 1
    return FeedbackSummary(plan_id=plan.plan_id, user_id=plan.user_id,
                           rows=tuple(rows), by_kind=agg)


def frequency_stats(user_id: str, plans: Iterable[Plan],
                    reports: Iterable[ComplianceReport], as_of: date,
                    window_days: int = 28, min_count: int = 3) -> FrequencyTable:
    """Complied occurrences per activity over the trailing window ending as_of."""
    start = as_of - timedelta(days=window_days - 1)
    slot_activity: dict[tuple[str, date, int], str] = {}
    for plan in plans:
        if plan.user_id != user_id:
            continue
        for slot in plan.slots:
            slot_activity[(plan.plan_id, slot.date, slot.slot_index)] = slot.activity_id

    counts: dict[str, int] = {}
    for rep in reports:
        if rep.user_id != user_id or not rep.complied:
            continue
        if not (start <= rep.date <= as_of):
            continue
        aid = slot_activity.get((rep.plan_id, rep.date, rep.slot_index))
        if aid is not None:
            counts[aid] = counts.get(aid, 0) + 1
    return FrequencyTable(counts=counts, min_count=min_count)
