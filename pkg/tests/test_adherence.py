import math
from datetime import date, timedelta

import pytest
from hypothesis import given
from hypothesis import strategies as st

from coachloop.adherence import (
    ComplianceWindow,
    DayRecord,
    FrequencyTable,
    SlotStatus,
    TrendDirection,
    build_window,
    compliance_score,
    feedback_summary,
    frequency_stats,
    ground_truth_type,
    ols_slope,
    trend,
)
from coachloop.clock import utc
from coachloop.domain import (
    ComplianceReport,
    SlotOrigin,
    UserType,
    default_pool,
    new_plan,
)
from coachloop.errors import FieldOutOfRange, InsufficientDays

from oracles import oracle_slope, oracle_type

D0 = date(2025, 3, 3)


def window_of(*days, start=D0):
    """days: (assigned, complied[, reported]) tuples, one per consecutive day."""
    records = []
    for i, spec in enumerate(days):
        assigned, complied = spec[0], spec[1]
        reported = spec[2] if len(spec) > 2 else complied
        records.append(DayRecord(start + timedelta(days=i), assigned, complied, reported))
    return ComplianceWindow(user_id="u-0001", start=start,
                            end=start + timedelta(days=len(days) - 1),
                            daily=tuple(records))


def plan_over(days=7, user_id="u-0001", plan_id="p-000001", start=D0,
              activity="a-walk-30", slots_per_day=1):
    pool = default_pool()
    slots = [(start + timedelta(days=d), s, activity, SlotOrigin.Frequent)
             for d in range(days) for s in range(slots_per_day)]
    return new_plan(plan_id, user_id, "baseline-v1", start, slots, pool,
                    slots_per_day=slots_per_day)


def report(day, complied, user_id="u-0001", plan_id="p-000001", slot=0):
    return ComplianceReport(user_id=user_id, plan_id=plan_id, date=day,
                            slot_index=slot, complied=complied,
                            reported_at=utc(day.year, day.month, day.day, 20))


# -- window construction -------------------------------------------------------

def test_day_record_rejects_complied_above_assigned():
    with pytest.raises(FieldOutOfRange):
        DayRecord(D0, assigned=1, complied=2, reported=2)


def test_window_rejects_inverted_or_oversized_spans():
    with pytest.raises(FieldOutOfRange):
        ComplianceWindow("u", D0, D0 - timedelta(days=1), ())
    with pytest.raises(FieldOutOfRange):
        ComplianceWindow("u", D0, D0 + timedelta(days=29), ())


def test_build_window_counts_per_day():
    plan = plan_over(days=7, slots_per_day=2)
    reports = [
        report(D0, True),
        report(D0, False, slot=1),
        report(D0 + timedelta(days=1), True),
        report(D0 + timedelta(days=1), True, user_id="u-0099"),  # other user
    ]
    w = build_window("u-0001", [plan], reports, D0, D0 + timedelta(days=6))
    assert w.daily[0] == DayRecord(D0, assigned=2, complied=1, reported=2)
    assert w.daily[1] == DayRecord(D0 + timedelta(days=1), assigned=2, complied=1, reported=1)
    assert w.assigned_count == 14
    assert w.complied_count == 2
    assert w.report_count == 3


def test_build_window_clips_to_range():
    plan = plan_over(days=7)
    w = build_window("u-0001", [plan], [], D0 + timedelta(days=2), D0 + timedelta(days=3))
    assert w.assigned_count == 2
    assert len(w.daily) == 2


# -- scores and trends ----------------------------------------------------------

def test_score_none_without_assignments():
    assert compliance_score(window_of((0, 0), (0, 0))) is None


def test_score_counts_unreported_as_noncomplied():
    # 3 assigned over two days, 1 complied; unreported slots still divide
    assert compliance_score(window_of((2, 1, 1), (1, 0, 0))) == pytest.approx(1 / 3)


def test_score_points_skip_unassigned_days():
    w = window_of((2, 1), (0, 0), (1, 1))
    assert w.score_points() == [(0.0, 0.5), (2.0, 1.0)]


@given(st.lists(
    st.tuples(st.integers(0, 27), st.floats(0, 1, allow_nan=False)),
    min_size=2, max_size=28))
def test_ols_slope_matches_oracle(int_points):
    # x values are day offsets in real use: small integers, exact in float
    points = [(float(x), y) for x, y in int_points]
    assert math.isclose(ols_slope(points), oracle_slope(points),
                        rel_tol=1e-9, abs_tol=1e-9)


def test_ols_slope_zero_for_single_x():
    assert ols_slope([(1.0, 0.2), (1.0, 0.9)]) == 0.0


def test_trend_directions_at_band_edges():
    # scores 0, 0.1, 0.2 -> slope 0.1/day
    improving = window_of((10, 0), (10, 1), (10, 2))
    assert trend(improving).direction is TrendDirection.Improving
    declining = window_of((10, 2), (10, 1), (10, 0))
    assert trend(declining).direction is TrendDirection.Declining
    # slope exactly at the band is Stable (band is inclusive); use scores
    # whose slope is exactly representable
    edge = window_of((2, 0), (2, 2))  # daily scores 0.0 then 1.0, slope 1.0
    assert trend(edge, band=1.0).slope == 1.0
    assert trend(edge, band=1.0).direction is TrendDirection.Stable
    assert trend(edge, band=0.5).direction is TrendDirection.Improving


def test_trend_needs_two_assigned_days():
    with pytest.raises(InsufficientDays):
        trend(window_of((10, 5), (0, 0)))


# -- ground-truth classification --------------------------------------------------

def test_ground_truth_thresholds():
    assert ground_truth_type(None, 0) is UserType.Neutral
    assert ground_truth_type(0.7, 5) is UserType.Active
    assert ground_truth_type(0.69, 5) is UserType.Neutral
    assert ground_truth_type(0.4, 5) is UserType.Neutral
    assert ground_truth_type(0.39, 5) is UserType.Passive
    assert ground_truth_type(0.0, 0) is UserType.Passive


@given(st.one_of(st.none(), st.floats(0, 1, allow_nan=False)),
       st.integers(0, 100))
def test_ground_truth_matches_oracle(score, reports):
    assert ground_truth_type(score, reports).value == oracle_type(score, reports)


# -- feedback summary -------------------------------------------------------------

def test_feedback_summary_statuses():
    pool = default_pool()
    plan = plan_over(days=7)
    reports = [report(D0, True), report(D0 + timedelta(days=1), False)]
    summary = feedback_summary(plan, reports, pool)
    statuses = [r.status for r in summary.rows[:3]]
    assert statuses == [SlotStatus.Complied, SlotStatus.Declined, SlotStatus.Unreported]
    assert summary.by_kind["Physical"] == {"Complied": 1, "Declined": 1, "Unreported": 5}
    doc = summary.to_dict()
    assert doc["rows"][0]["status"] == "Complied"


# -- frequency stats ---------------------------------------------------------------

def test_frequency_counts_only_complied_in_window():
    plan = plan_over(days=7)
    reports = [
        report(D0, True),
        report(D0 + timedelta(days=1), True),
        report(D0 + timedelta(days=2), False),
        report(D0 + timedelta(days=3), True),
    ]
    table = frequency_stats("u-0001", [plan], reports, as_of=D0 + timedelta(days=6))
    assert table.count("a-walk-30") == 3
    assert table.frequent("a-walk-30")
    assert table.frequent_ids() == frozenset({"a-walk-30"})


def test_frequency_respects_trailing_window():
    plan = plan_over(days=7)
    reports = [report(D0 + timedelta(days=d), True) for d in range(3)]
    # as_of 28 days after day 2: day 0 and 1 fall out, only day 2 remains
    as_of = D0 + timedelta(days=29)
    table = frequency_stats("u-0001", [plan], reports, as_of=as_of, window_days=28)
    assert table.count("a-walk-30") == 1
    assert not table.frequent("a-walk-30")


def test_frequency_min_count_boundary():
    table = FrequencyTable(counts={"a": 3, "b": 2}, min_count=3)
    assert table.frequent("a") and not table.frequent("b")
    assert table.count("missing") == 0
