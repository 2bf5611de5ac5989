"""Service configuration: one file (JSON or TOML) plus env-var overrides.

Every tunable named in the module docs lives here with its shipped default;
nothing is hardcoded at call sites.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any

try:
    import tomllib  # Python >= 3.11
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

ENV_PREFIX = "COACHLOOP_"


@dataclass(frozen=True)
class ServiceConfig:
    # plan structure
    slots_per_day: int = 3
    frequent_share: float = 0.7          # minimum share of Frequent slots per week
    epsilon: float = 0.3                 # exploration rate for suggestions

    # adherence
    window_days: int = 28
    active_threshold: float = 0.7
    passive_threshold: float = 0.4
    frequent_min_count: int = 3
    trend_band: float = 0.02             # slope band (per day) around Stable

    # iml engine
    k: int = 5
    default_template: str = "baseline-v1"
    default_user_type: str = "Neutral"
    emotion_window: int = 7              # last-N emotion reports fed to features
    # per-field weight overrides; unnamed fields weigh 1.0.  The post model
    # leans on the performance block: it classifies how a user performs, and
    # with unit weights the profile fields (pure context here) drown the
    # compliance signal.
    pre_model_weights: dict[str, float] = field(default_factory=dict)
    post_model_weights: dict[str, float] = field(
        default_factory=lambda: {"compliance_score": 8.0, "trend_slope": 2.0}
    )

    # scheduling (hours are user-local; this build treats local time as UTC)
    meal_hours: tuple[tuple[int, int], ...] = ((8, 0), (12, 30), (19, 0))
    pre_meal_offset_min: int = 60
    fallback_trigger_hour: int = 18
    notification_expiry_hours: int = 24

    # service
    port: int = 8000
    data_dir: str = "data"
    caregiver_token: str = ""            # empty disables the token check
    fsync: bool = True                   # fsync each event append

    def __post_init__(self):
        if self.slots_per_day < 1:
            raise ValueError("slots_per_day must be >= 1")
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError("epsilon must be in [0, 1]")
        if not 0.0 <= self.passive_threshold <= self.active_threshold <= 1.0:
            raise ValueError("thresholds must satisfy 0 <= passive <= active <= 1")
        if self.k < 1 or self.k % 2 == 0:
            raise ValueError("k must be an odd positive integer")

    def data_path(self) -> Path:
        return Path(self.data_dir)


_CASTS = {
    int: int,
    float: float,
    str: str,
    bool: lambda s: str(s).lower() in ("1", "true", "yes", "on"),
}


def load_config(path: str | Path | None = None,
                env: dict[str, str] | None = None) -> ServiceConfig:
    """Build a config from an optional JSON/TOML file and env overrides.

    Env vars are named COACHLOOP_<FIELD> (upper-case field name) and override
    the file for scalar fields, e.g. COACHLOOP_PORT=9000, COACHLOOP_K=7,
    COACHLOOP_EPSILON=0.2, COACHLOOP_DATA_DIR=/tmp/run1.
    """
    raw: dict[str, Any] = {}
    if path is not None:
        p = Path(path)
        text = p.read_bytes()
        if p.suffix == ".toml":
            raw = tomllib.loads(text.decode("utf-8"))
        else:
            raw = json.loads(text)

    env = dict(os.environ if env is None else env)
    cfg_fields = {f.name: f for f in fields(ServiceConfig)}
    known = {k: v for k, v in raw.items() if k in cfg_fields}
    unknown = set(raw) - set(known)
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    if "meal_hours" in known:
        known["meal_hours"] = tuple(tuple(x) for x in known["meal_hours"])

    cfg = ServiceConfig(**known)

    overrides: dict[str, Any] = {}
    for name, f in cfg_fields.items():
        env_key = ENV_PREFIX + name.upper()
        if env_key in env:
            cast = _CASTS.get(f.type if isinstance(f.type, type) else type(getattr(cfg, name)))
            if cast is None:
                continue  # dict/tuple fields are file-only
            overrides[name] = cast(env[env_key])
    return replace(cfg, **overrides) if overrides else cfg
