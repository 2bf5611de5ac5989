"""Synthetic-cohort simulator and closed-loop experiment runner.

Generates a seeded cohort with latent behaviour types, drives the real
service end-to-end (registration and plans through the caregiver commands,
compliance and mood through the bot wire format, never through back-door
state writes), simulates caregiver refinements on a train split, and
evaluates the post-model on the held-out users.

Everything is a pure function of the experiment config, including the event
log bytes; wall-clock runtime is reported separately so report files stay
byte-identical across runs.
"""

from __future__ import annotations

import json
import math
import random
import time as _time
from dataclasses import dataclass, field, replace
from datetime import date, timedelta
from pathlib import Path

from . import bot
from .adherence import ground_truth_type
from .clock import SimClock, utc
from .config import ServiceConfig
from .domain import Emotion, Gender, UserType
from .errors import BadMix, ConfigInvalid
from .events import read_log
from .service import CoachService, composition_seed
from .vocab import ACTIVITY_TAGS, FOOD_TAGS, HEALTH_CONDITIONS, RESOURCE_TAGS

EPOCH = date(2025, 3, 3)  # a Monday; all experiment weeks start here

TYPE_ORDER = (UserType.Active, UserType.Neutral, UserType.Passive)

DEFAULT_COMPLY_PROBS = {"Active": 0.85, "Neutral": 0.55, "Passive": 0.25}

# weekly mood report distribution per latent type, in Emotion order
# (Happy, Sad, Angry, Neutral)
MOOD_BIAS = {
    "Active": (0.60, 0.10, 0.05, 0.25),
    "Neutral": (0.25, 0.20, 0.10, 0.45),
    "Passive": (0.10, 0.40, 0.25, 0.25),
}


@dataclass(frozen=True)
class LatentBehavior:
    latent_type: UserType
    comply_prob: float  # base prob for the type plus this user's jitter
    jitter: float

    def to_dict(self) -> dict:
        return {
            "latent_type": self.latent_type.value,
            "comply_prob": self.comply_prob,
            "jitter": self.jitter,
        }


@dataclass(frozen=True)
class SimUser:
    profile: dict
    chat_id: int
    latent: LatentBehavior

    def to_dict(self) -> dict:
        return {
            "profile": self.profile,
            "chat_id": self.chat_id,
            "latent": self.latent.to_dict(),
        }


@dataclass(frozen=True)
class SimConfig:
    n_users: int = 150
    mix: dict = field(default_factory=lambda: {"Active": 1.0, "Neutral": 1.0, "Passive": 1.0})
    train_fraction: float = 1.0 / 3.0
    weeks: int = 4
    seed: int = 42
    comply_probs: dict = field(default_factory=lambda: dict(DEFAULT_COMPLY_PROBS))
    jitter: float = 0.05
    assert_min_accuracy: float | None = None
    service: dict = field(default_factory=dict)  # ServiceConfig overrides

    def __post_init__(self):
        if self.n_users < 3:
            raise ConfigInvalid("n_users must be at least 3")
        if not 0.0 < self.train_fraction < 1.0:
            raise ConfigInvalid("train_fraction must be in (0, 1)")
        if self.weeks < 1:
            raise ConfigInvalid("weeks must be at least 1")
        if self.jitter < 0:
            raise ConfigInvalid("jitter must be nonnegative")
        for t in TYPE_ORDER:
            if t.value not in self.comply_probs:
                raise ConfigInvalid(f"comply_probs missing {t.value}")


def load_experiment_config(path: str | Path) -> SimConfig:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise ConfigInvalid(f"cannot read experiment config: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigInvalid("experiment config must be a JSON object")
    if "seed" not in doc:
        raise ConfigInvalid("experiment config must state an explicit seed")
    known = {f.name for f in SimConfig.__dataclass_fields__.values()}  # type: ignore[attr-defined]
    unknown = set(doc) - known
    if unknown:
        raise ConfigInvalid(f"unknown experiment config keys: {sorted(unknown)}")
    try:
        return SimConfig(**doc)
    except TypeError as exc:
        raise ConfigInvalid(str(exc)) from exc


def largest_remainder(total: int, weights: list[float]) -> list[int]:
    """Integer partition of `total` proportional to `weights`, exact."""
    s = sum(weights)
    quotas = [total * w / s for w in weights]
    counts = [math.floor(q) for q in quotas]
    short = total - sum(counts)
    order = sorted(range(len(weights)), key=lambda i: (-(quotas[i] - counts[i]), i))
    for i in order[:short]:
        counts[i] += 1
    return counts


def synth_cohort(n: int, mix: dict | None = None, seed: int = 42,
                 comply_probs: dict | None = None,
                 jitter: float = 0.05) -> list[SimUser]:
    """Seeded plausible profiles with latent types in exact mix proportion."""
    if n < 3:
        raise ConfigInvalid("cohort needs at least 3 users")
    mix = dict(mix) if mix else {"Active": 1.0, "Neutral": 1.0, "Passive": 1.0}
    comply_probs = dict(comply_probs) if comply_probs else dict(DEFAULT_COMPLY_PROBS)
    weights = []
    for t in TYPE_ORDER:
        w = float(mix.get(t.value, 0.0))
        if w < 0:
            raise BadMix(f"negative mix weight for {t.value}")
        weights.append(w)
    if sum(weights) <= 0:
        raise BadMix("type mix must have positive total weight")

    counts = largest_remainder(n, weights)
    types: list[UserType] = []
    for t, c in zip(TYPE_ORDER, counts):
        types.extend([t] * c)
    rng = random.Random(seed)
    rng.shuffle(types)

    activity_tags = sorted(ACTIVITY_TAGS)
    food_tags = sorted(FOOD_TAGS)
    resource_tags = sorted(RESOURCE_TAGS)
    conditions = sorted(HEALTH_CONDITIONS)
    genders = [g.value for g in Gender]

    users = []
    for i, latent_type in enumerate(types):
        height = round(rng.uniform(1.50, 1.95), 2)
        weight = round(rng.uniform(50.0, 120.0), 1)
        profile = {
            "age": rng.randint(18, 75),
            "gender": rng.choice(genders),
            "height_m": height,
            "weight_kg": weight,
            "education": rng.randint(0, 3),
            "health_condition": rng.choice(conditions),
            "preferred_activities": sorted(rng.sample(activity_tags, rng.randint(1, 4))),
            "preferred_foods": sorted(rng.sample(food_tags, rng.randint(1, 4))),
            "resources": sorted(rng.sample(resource_tags, rng.randint(0, 4))),
        }
        user_jitter = rng.uniform(-jitter, jitter)
        base = comply_probs[latent_type.value]
        prob = min(0.99, max(0.01, base + user_jitter))
        users.append(SimUser(
            profile=profile,
            chat_id=1000 + i,
            latent=LatentBehavior(latent_type=latent_type, comply_prob=prob,
                                  jitter=user_jitter),
        ))
    return users


def caregiver_template(profile: dict) -> str:
    """Stand-in for the caregiver's initial template choice."""
    bmi = profile["weight_kg"] / (profile["height_m"] ** 2)
    if bmi >= 30.0:
        return "active-burn-v1"
    if profile["health_condition"] in ("hypertension", "prediabetes"):
        return "balanced-care-v1"
    return "baseline-v1"


def _service_config(config: SimConfig, data_dir: str | Path) -> ServiceConfig:
    overrides = dict(config.service)
    unknown = set(overrides) - {f for f in ServiceConfig.__dataclass_fields__}  # type: ignore[attr-defined]
    if unknown:
        raise ConfigInvalid(f"unknown service config keys: {sorted(unknown)}")
    overrides["data_dir"] = str(data_dir)
    # batch appends: one simulated run writes tens of thousands of events
    overrides.setdefault("fsync", False)
    if "post_model_weights" in overrides:
        overrides["post_model_weights"] = dict(overrides["post_model_weights"])
    try:
        return ServiceConfig(**overrides)
    except (TypeError, ValueError) as exc:
        raise ConfigInvalid(str(exc)) from exc


@dataclass
class _ChatCounter:
    next_id: dict = field(default_factory=dict)

    def take(self, chat_id: int) -> int:
        n = self.next_id.get(chat_id, 1)
        self.next_id[chat_id] = n + 1
        return n


def _send_callback(service: CoachService, counter: _ChatCounter, chat_id: int,
                   data: str, now) -> list[dict]:
    update = {
        "update_id": counter.take(chat_id),
        "callback": {"chat_id": chat_id, "data": data},
    }
    return service.bot_update(json.dumps(update), now=now)


def simulate_weeks(service: CoachService, cohort: list[SimUser], weeks: int,
                   seed: int, clock: SimClock,
                   counter: _ChatCounter | None = None) -> None:
    """Drive compliance and weekly mood reports through the bot wire.

    Plans must already be assigned for week one; subsequent weeks are
    assigned here before their first day.
    """
    counter = counter or _ChatCounter()
    rng = random.Random(composition_seed("simulate", seed))
    chat_to_user = {u.chat_id: service.state.chat_index[u.chat_id] for u in cohort}

    for week in range(weeks):
        week_start = EPOCH + timedelta(days=7 * week)
        if week > 0:
            clock.set(utc(week_start.year, week_start.month, week_start.day, 7, 0))
            for su in cohort:
                user_id = chat_to_user[su.chat_id]
                service.assign_plan(user_id, week_start=week_start,
                                    now=clock.now())
        for day_offset in range(7):
            day = week_start + timedelta(days=day_offset)
            clock.set(utc(day.year, day.month, day.day, 20, 0))
            for su in cohort:
                user_id = chat_to_user[su.chat_id]
                plan = service.state.plans[service.state.plans_by_user[user_id][-1]]
                for slot in plan.slots_on(day):
                    complied = rng.random() < su.latent.comply_prob
                    _send_callback(
                        service, counter, su.chat_id,
                        bot.comply_data(plan.plan_id, day, slot.slot_index, complied),
                        clock.now())
            if day_offset == 6:
                for su in cohort:
                    weightsum = MOOD_BIAS[su.latent.latent_type.value]
                    emotion = rng.choices(list(Emotion), weights=weightsum, k=1)[0]
                    _send_callback(service, counter, su.chat_id,
                                   bot.emotion_data(emotion), clock.now())


def train_split(cohort: list[SimUser], train_fraction: float,
                seed: int) -> tuple[list[int], list[int]]:
    """Stratified train/test indexes: exact largest-remainder per type."""
    train_total = int(round(train_fraction * len(cohort)))
    by_type: dict[str, list[int]] = {t.value: [] for t in TYPE_ORDER}
    for i, su in enumerate(cohort):
        by_type[su.latent.latent_type.value].append(i)
    weights = [len(by_type[t.value]) for t in TYPE_ORDER]
    per_type = largest_remainder(train_total, weights)
    rng = random.Random(composition_seed("split", seed))
    train: list[int] = []
    for t, k in zip(TYPE_ORDER, per_type):
        candidates = by_type[t.value]
        train.extend(sorted(rng.sample(candidates, k)))
    train_set = set(train)
    test = [i for i in range(len(cohort)) if i not in train_set]
    return sorted(train), test


def run_experiment(config: SimConfig, data_dir: str | Path) -> dict:
    """The full closed loop; returns {"report": <deterministic>, "runtime_seconds": float}."""
    started = _time.perf_counter()
    cohort = synth_cohort(config.n_users, config.mix, config.seed,
                          config.comply_probs, config.jitter)
    service_config = _service_config(config, data_dir)
    clock = SimClock(utc(EPOCH.year, EPOCH.month, EPOCH.day, 7, 0))
    service = CoachService.open(service_config, clock=clock)
    counter = _ChatCounter()

    user_ids = []
    for su in cohort:
        result = service.register_user(
            su.profile, su.chat_id,
            template_id=caregiver_template(su.profile), now=clock.now())
        user_ids.append(result["user"]["user_id"])
    for user_id in user_ids:
        service.assign_plan(user_id, week_start=EPOCH, now=clock.now())

    simulate_weeks(service, cohort, config.weeks, config.seed, clock, counter)
    last_day = EPOCH + timedelta(days=7 * config.weeks - 1)

    train_idx, test_idx = train_split(cohort, config.train_fraction, config.seed)
    for i in train_idx:
        service.refine_plan(user_ids[i], caregiver_template(cohort[i].profile),
                            as_of=last_day, now=clock.now())

    confusion = {a.value: {b.value: 0 for b in TYPE_ORDER} for a in TYPE_ORDER}
    correct = 0
    oracle_correct = 0
    pre_agree = 0
    for i in test_idx:
        user_id = user_ids[i]
        latent = cohort[i].latent.latent_type.value
        predicted = service.post_predict(user_id, as_of=last_day).label
        confusion[latent][predicted] += 1
        if predicted == latent:
            correct += 1
        window = service._window(user_id, last_day)
        assigned = window.assigned_count
        score = (window.complied_count / assigned) if assigned else None
        oracle = ground_truth_type(
            score, window.report_count,
            active_threshold=service_config.active_threshold,
            passive_threshold=service_config.passive_threshold).value
        if oracle == latent:
            oracle_correct += 1
        if service.pre_predict(dict(cohort[i].profile, user_id=user_id)).label \
                == caregiver_template(cohort[i].profile):
            pre_agree += 1

    observed = {}
    for t in TYPE_ORDER:
        members = [user_ids[i] for i in range(len(cohort))
                   if cohort[i].latent.latent_type is t]
        scores = []
        for user_id in members:
            window = service._window(user_id, last_day)
            if window.assigned_count:
                scores.append(window.complied_count / window.assigned_count)
        observed[t.value] = round(sum(scores) / len(scores), 6) if scores else None

    service.save_snapshot()
    events_total = service.state.last_seq
    service.close()
    runtime = _time.perf_counter() - started

    report = {
        "schema_version": 1,
        "config": {
            "n_users": config.n_users,
            "mix": {t.value: config.mix.get(t.value, 0.0) for t in TYPE_ORDER},
            "train_fraction": config.train_fraction,
            "weeks": config.weeks,
            "seed": config.seed,
            "comply_probs": dict(config.comply_probs),
            "jitter": config.jitter,
            "k": service_config.k,
            "active_threshold": service_config.active_threshold,
            "passive_threshold": service_config.passive_threshold,
            "post_model_weights": dict(service_config.post_model_weights),
        },
        "counts": {
            "train": len(train_idx),
            "test": len(test_idx),
            "by_type": {t.value: sum(1 for su in cohort
                                     if su.latent.latent_type is t)
                        for t in TYPE_ORDER},
        },
        "train_user_ids": [user_ids[i] for i in train_idx],
        "post_model_accuracy": round(correct / len(test_idx), 6),
        "oracle_accuracy": round(oracle_correct / len(test_idx), 6),
        "pre_model_agreement": round(pre_agree / len(test_idx), 6),
        "confusion": confusion,
        "mean_observed_compliance": observed,
        "events_total": events_total,
    }
    return {"report": report, "runtime_seconds": runtime}


def report_to_json(report: dict) -> str:
    return json.dumps(report, sort_keys=True, separators=(",", ":")) + "\n"


def confusion_text(report: dict) -> str:
    """Fixed-width confusion matrix, rows = latent type, cols = predicted."""
    labels = [t.value for t in TYPE_ORDER]
    width = max(len(s) for s in labels) + 2
    lines = ["latent \\ predicted".ljust(20) + "".join(s.rjust(width) for s in labels)]
    for row in labels:
        cells = "".join(str(report["confusion"][row][col]).rjust(width)
                        for col in labels)
        lines.append(row.ljust(20) + cells)
    lines.append("")
    lines.append(f"post-model accuracy: {report['post_model_accuracy']:.4f}")
    lines.append(f"threshold-oracle accuracy: {report['oracle_accuracy']:.4f}")
    lines.append(f"pre-model agreement: {report['pre_model_agreement']:.4f}")
    return "\n".join(lines) + "\n"


def verify_event_log(data_dir: str | Path) -> int:
    """Gap-free scan; returns the number of events (replay raises on damage)."""
    log = read_log(Path(data_dir) / "events.ndjson")
    for i, event in enumerate(log):
        if event.seq != i + 1:
            raise ConfigInvalid(f"event log has a gap at position {i}")
    return len(log)
