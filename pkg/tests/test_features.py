from datetime import date, timedelta

import pytest

from coachloop.clock import utc
from coachloop.domain import Emotion, EmotionReport
from coachloop.features import (
    PERFORMANCE_SCHEMA,
    PROFILE_SCHEMA,
    FeatureVector,
    encode_performance,
    encode_profile,
)

from conftest import make_profile
from test_adherence import window_of

D0 = date(2025, 3, 3)


def emotion(e, hour, day=0):
    d = D0 + timedelta(days=day)
    return EmotionReport(user_id="u-0001", emotion=e,
                         reported_at=utc(d.year, d.month, d.day, hour))


def test_profile_encoding_fields_and_order():
    p = make_profile()
    v = encode_profile(p)
    assert v.schema_id == PROFILE_SCHEMA
    assert [n for n, _ in v.numeric] == ["age", "bmi", "height_m", "weight_kg", "education"]
    assert dict(v.numeric)["age"] == 44.0
    assert dict(v.numeric)["bmi"] == pytest.approx(70.5 / 1.68**2)
    assert dict(v.categorical) == {"gender": "Female", "health_condition": "none"}
    assert dict(v.setvalued)["preferred_activities"] == frozenset({"walking", "yoga"})


def test_profile_encoding_deterministic():
    assert encode_profile(make_profile()) == encode_profile(make_profile())


def test_feature_vector_rejects_nonfinite():
    with pytest.raises(ValueError):
        FeatureVector(schema_id="s", numeric=(("x", float("nan")),),
                      categorical=(), setvalued=())


def test_feature_vector_round_trips_through_dict():
    v = encode_profile(make_profile())
    assert FeatureVector.from_dict(v.to_dict()) == v


def test_performance_encoding_extends_profile():
    p = make_profile()
    w = window_of((3, 3), (3, 0), (3, 3))  # scores 1, 0, 1 over 3 days
    v = encode_performance(p, w, [])
    assert v.schema_id == PERFORMANCE_SCHEMA
    names = [n for n, _ in v.numeric]
    assert names[:5] == ["age", "bmi", "height_m", "weight_kg", "education"]
    assert names[5:] == ["compliance_score", "trend_slope", "report_count",
                         "happy_fraction", "sad_fraction", "angry_fraction",
                         "neutral_fraction", "has_emotion"]
    got = dict(v.numeric)
    assert got["compliance_score"] == pytest.approx(6 / 9)
    assert got["report_count"] == 6.0
    assert got["has_emotion"] == 0.0
    # profile fields carry over
    assert v.categorical == encode_profile(p).categorical
    assert v.setvalued == encode_profile(p).setvalued


def test_performance_empty_window_scores_zero():
    p = make_profile()
    v = encode_performance(p, window_of((0, 0)), [])
    got = dict(v.numeric)
    assert got["compliance_score"] == 0.0
    assert got["trend_slope"] == 0.0
    assert got["report_count"] == 0.0


def test_performance_single_assigned_day_has_zero_slope():
    p = make_profile()
    v = encode_performance(p, window_of((2, 1), (0, 0)), [])
    assert dict(v.numeric)["trend_slope"] == 0.0


def test_emotion_fractions_use_trailing_reports():
    p = make_profile()
    w = window_of((1, 1))
    reports = [emotion(Emotion.Sad, hour=8, day=d) for d in range(5)] + \
              [emotion(Emotion.Happy, hour=9, day=d) for d in range(5, 10)]
    v = encode_performance(p, w, reports, emotion_window=4)
    got = dict(v.numeric)
    # only the last 4 by time: all Happy
    assert got["happy_fraction"] == 1.0
    assert got["sad_fraction"] == 0.0
    assert got["has_emotion"] == 1.0


def test_emotion_fractions_sum_to_one_when_present():
    p = make_profile()
    w = window_of((1, 1))
    reports = [emotion(Emotion.Happy, 8), emotion(Emotion.Sad, 9),
               emotion(Emotion.Angry, 10)]
    v = encode_performance(p, w, reports)
    got = dict(v.numeric)
    total = got["happy_fraction"] + got["sad_fraction"] + \
        got["angry_fraction"] + got["neutral_fraction"]
    assert total == pytest.approx(1.0)
    assert got["happy_fraction"] == pytest.approx(1 / 3)
