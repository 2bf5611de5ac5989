"""Mixed-type feature encoding for the two prediction models.

Profile schema: numeric {age, bmi, height_m, weight_kg, education},
categorical {gender, health_condition}, set-valued {preferred_activities,
preferred_foods}.  The performance schema extends it with a compliance block
and emotion fractions over the last few mood reports.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .adherence import ComplianceWindow, ols_slope
from .domain import Emotion, EmotionReport, UserProfile

PROFILE_SCHEMA = "profile-v1"
PERFORMANCE_SCHEMA = "performance-v1"


@dataclass(frozen=True)
class FeatureVector:
    """Ordered mixed-type features; field order is fixed per schema."""

    schema_id: str
    numeric: tuple[tuple[str, float], ...]
    categorical: tuple[tuple[str, str], ...]
    setvalued: tuple[tuple[str, frozenset[str]], ...]

    def __post_init__(self):
        for name, value in self.numeric:
            if not math.isfinite(value):
                raise ValueError(f"numeric field {name!r} is not finite: {value!r}")

    @property
    def field_names(self) -> tuple[tuple[str, ...], tuple[str, ...], tuple[str, ...]]:
        return (tuple(n for n, _ in self.numeric),
                tuple(n for n, _ in self.categorical),
                tuple(n for n, _ in self.setvalued))

    def to_dict(self) -> dict:
        return {
            "schema_id": self.schema_id,
            "numeric": [[n, v] for n, v in self.numeric],
            "categorical": [[n, v] for n, v in self.categorical],
            "setvalued": [[n, sorted(v)] for n, v in self.setvalued],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "FeatureVector":
        return cls(
            schema_id=doc["schema_id"],
            numeric=tuple((n, float(v)) for n, v in doc["numeric"]),
            categorical=tuple((n, str(v)) for n, v in doc["categorical"]),
            setvalued=tuple((n, frozenset(v)) for n, v in doc["setvalued"]),
        )


def encode_profile(profile: UserProfile) -> FeatureVector:
    """Encode a validated profile; deterministic, equal profiles give equal vectors."""
    return FeatureVector(
        schema_id=PROFILE_SCHEMA,
        numeric=(
            ("age", float(profile.age)),
            ("bmi", profile.bmi),
            ("height_m", profile.height_m),
            ("weight_kg", profile.weight_kg),
            ("education", float(int(profile.education))),
        ),
        categorical=(
            ("gender", profile.gender.value),
            ("health_condition", profile.health_condition),
        ),
        setvalued=(
            ("preferred_activities", profile.preferred_activities),
            ("preferred_foods", profile.preferred_foods),
        ),
    )


def encode_performance(profile: UserProfile, window: ComplianceWindow,
                       emotions: Sequence[EmotionReport],
                       emotion_window: int = 7) -> FeatureVector:
    """Extend the profile encoding with performance and mood features.

    An empty window encodes as score 0 with report_count 0 so cold users stay
    classifiable; ``has_emotion`` separates "no mood reports" from a uniform
    mood distribution.
    """
    base = encode_profile(profile)

    assigned = window.assigned_count
    score = window.complied_count / assigned if assigned > 0 else 0.0
    points = window.score_points()
    slope = ols_slope(points) if len(points) >= 2 else 0.0

    recent = sorted(emotions, key=lambda e: e.reported_at)[-emotion_window:]
    fractions = {e: 0.0 for e in Emotion}
    for rep in recent:
        fractions[rep.emotion] += 1.0
    if recent:
        for e in Emotion:
            fractions[e] /= len(recent)

    return FeatureVector(
        schema_id=PERFORMANCE_SCHEMA,
        numeric=base.numeric + (
            ("compliance_score", score),
            ("trend_slope", slope),
            ("report_count", float(window.report_count)),
            ("happy_fraction", fractions[Emotion.Happy]),
            ("sad_fraction", fractions[Emotion.Sad]),
            ("angry_fraction", fractions[Emotion.Angry]),
            ("neutral_fraction", fractions[Emotion.Neutral]),
            ("has_emotion", 1.0 if recent else 0.0),
        ),
        categorical=base.categorical,
        setvalued=base.setvalued,
    )
