"""The coaching service: command validation, event emission, and queries.

Single-writer orchestration over the event-sourced state.  Every mutation
follows the same shape: validate against the current state, compute the
outcome, append the event, fold it with ``State.apply``.  Replaying the log
through the same fold therefore reproduces the live state exactly.
"""

from __future__ import annotations

import zlib
from datetime import date, datetime, timedelta, timezone
from pathlib import Path
from typing import Mapping, Sequence

from . import bot, events, planning, scheduling
from .adherence import (
    InsufficientDays,
    build_window,
    compliance_score,
    feedback_summary,
    frequency_stats,
    ground_truth_type,
    trend,
)
from .clock import SystemClock, iso
from .config import ServiceConfig
from .domain import (
    Activity,
    ActivityKind,
    DEFAULT_VOCABULARY,
    Plan,
    UserType,
    default_pool,
    validate_profile,
)
from .errors import (
    ConfigInvalid,
    DateOutOfPlan,
    DuplicateChat,
    DuplicateEnqueue,
    EmptyBroadcast,
    NoAssignedPlan,
    PayloadInvalid,
    UnknownChat,
    UnknownPlan,
    UnknownTemplate,
    UnknownUser,
)
from .features import encode_performance, encode_profile
from .knn import Prediction, export_model, knn_predict
from .state import State, replay, state_from_snapshot_doc
from .vocab import DEFAULT_CORPUS, DEFAULT_TEMPLATES


def default_templates() -> dict[str, planning.PlanTemplate]:
    out = {}
    for template_id, mix, targets, notes in DEFAULT_TEMPLATES:
        out[template_id] = planning.PlanTemplate(
            template_id=template_id,
            kind_mix={ActivityKind(k): v for k, v in mix.items()},
            target_clusters=frozenset(targets),
            notes=notes,
        )
    return out


def composition_seed(*parts: object) -> int:
    """Stable cross-platform seed from the identifying strings of a draw."""
    return zlib.crc32("|".join(str(p) for p in parts).encode("utf-8"))


class CoachService:
    def __init__(self, config: ServiceConfig, log: events.EventLog,
                 state: State | None = None, *,
                 pool: Mapping[str, Activity] | None = None,
                 templates: Mapping[str, planning.PlanTemplate] | None = None,
                 corpus: Mapping[str, str] | None = None,
                 clock=None):
        self.config = config
        self.log = log
        self.pool = dict(pool) if pool is not None else default_pool()
        self.templates = dict(templates) if templates is not None else default_templates()
        self.corpus = bot.ensure_corpus(dict(corpus) if corpus is not None else DEFAULT_CORPUS)
        self.clock = clock if clock is not None else SystemClock()
        self.state = state if state is not None else State(**state_kwargs(config))
        self.rules = scheduling.TriggerRules(
            meal_hours=config.meal_hours,
            pre_meal_offset_min=config.pre_meal_offset_min,
            fallback_hour=config.fallback_trigger_hour,
        )
        for template in self.templates.values():
            if template.slots_per_day != config.slots_per_day:
                raise ConfigInvalid(
                    f"template {template.template_id!r} fills "
                    f"{template.slots_per_day} slots/day, config says "
                    f"{config.slots_per_day}")
        self.titles = {a.activity_id: a.title for a in self.pool.values()}
        self.kind_of = {a.activity_id: a.kind for a in self.pool.values()}

    # -- lifecycle -------------------------------------------------------------

    @classmethod
    def open(cls, config: ServiceConfig, **kwargs) -> "CoachService":
        """Boot from data_dir: latest usable snapshot plus log tail, or a
        full replay.  A corrupt log tail is truncated to the good prefix."""
        data_dir = config.data_path()
        data_dir.mkdir(parents=True, exist_ok=True)
        log_path = data_dir / "events.ndjson"
        past, corrupt_seq = events.read_log_recover(log_path)
        if corrupt_seq is not None:
            events.truncate_to(log_path, past)

        state = None
        snaps = sorted(
            (int(p.stem.split("-")[1]), p)
            for p in data_dir.glob("snapshot-*.json")
            if p.stem.split("-")[1].isdigit()
        )
        usable = [(seq, p) for seq, p in snaps if seq <= len(past)]
        if usable:
            seq, path = usable[-1]
            state = state_from_snapshot_doc(events.load_snapshot(path))
            for event in past[seq:]:
                state.apply(event)
        if state is None:
            state = replay(past, **state_kwargs(config))

        log = events.EventLog(log_path, fsync=config.fsync, next_seq=len(past) + 1)
        return cls(config, log, state, **kwargs)

    def close(self) -> None:
        self.log.close()

    def save_snapshot(self) -> Path:
        return events.save_snapshot(self.config.data_dir, self.state.last_seq,
                                    self.state.to_snapshot_doc())

    def export_models(self) -> dict[str, str]:
        return {"pre": export_model(self.state.pre_model),
                "post": export_model(self.state.post_model)}

    # -- internals -------------------------------------------------------------

    def _now(self, now: datetime | None) -> datetime:
        if now is None:
            return self.clock.now()
        if now.tzinfo is None:
            now = now.replace(tzinfo=timezone.utc)
        return now

    def _emit(self, kind: str, payload: dict, now: datetime) -> events.Event:
        event = self.log.append(kind, payload, iso(now))
        self.state.apply(event)
        return event

    def _user(self, user_id: str):
        record = self.state.users.get(user_id)
        if record is None:
            raise UnknownUser(f"no user {user_id!r}")
        return record

    def _template(self, template_id: str) -> planning.PlanTemplate:
        template = self.templates.get(template_id)
        if template is None:
            raise UnknownTemplate(f"no template {template_id!r}")
        return template

    def _freq_table(self, user_id: str, as_of: date):
        return frequency_stats(
            user_id, self.state.user_plans(user_id),
            self.state.user_reports(user_id), as_of,
            window_days=self.config.window_days,
            min_count=self.config.frequent_min_count)

    def _window(self, user_id: str, as_of: date):
        start = as_of - timedelta(days=self.config.window_days - 1)
        return build_window(user_id, self.state.user_plans(user_id),
                            self.state.user_reports(user_id), start, as_of)

    def _emotions_until(self, user_id: str, as_of: date):
        return [e for e in self.state.emotions.get(user_id, [])
                if e.reported_at.date() <= as_of]

    def _performance_features(self, user_id: str, as_of: date):
        record = self._user(user_id)
        window = self._window(user_id, as_of)
        emotions = self._emotions_until(user_id, as_of)
        return encode_performance(record.profile, window, emotions,
                                  emotion_window=self.config.emotion_window), window

    def _add_label(self, model: str, user_id: str, label: str, source: str,
                   features, now: datetime) -> None:
        self._emit("ModelLabelAdded", {
            "model": model,
            "instance_id": self.state.next_instance_id(model),
            "user_id": user_id,
            "label": label,
            "source": source,
            "features": features.to_dict(),
        }, now)

    # -- caregiver commands ------------------------------------------------------

    def register_user(self, profile: Mapping, chat_id: int,
                      display_name: str | None = None,
                      template_id: str | None = None,
                      now: datetime | None = None) -> dict:
        """Create the user, run the pre-model, and record the caregiver's
        accepted (or overriding) template choice as a training label."""
        now = self._now(now)
        if not isinstance(chat_id, int) or isinstance(chat_id, bool):
            raise PayloadInvalid("chat_id must be an integer")
        if chat_id in self.state.chat_index:
            raise DuplicateChat(f"chat {chat_id} already belongs to "
                                f"{self.state.chat_index[chat_id]!r}")
        user_id = self.state.next_user_id()
        raw = dict(profile)
        raw["user_id"] = user_id
        raw.pop("bmi", None)  # always recomputed
        validated = validate_profile(raw, DEFAULT_VOCABULARY)

        suggestion = knn_predict(self.state.pre_model, encode_profile(validated))
        chosen = template_id if template_id is not None else suggestion.label
        self._template(chosen)

        self._emit("UserRegistered", {
            "user_id": user_id,
            "chat_id": chat_id,
            "display_name": display_name or user_id,
            "profile": validated.to_dict(),
            "suggested": suggestion.to_dict(),
            "chosen_template": chosen,
        }, now)
        self._add_label("pre", user_id, chosen, "CaregiverAssignment",
                        encode_profile(validated), now)
        return {
            "user": self.state.users[user_id].to_dict(),
            "suggested": suggestion.to_dict(),
            "chosen_template": chosen,
        }

    def assign_plan(self, user_id: str, template_id: str | None = None,
                    week_start: date | None = None,
                    now: datetime | None = None) -> Plan:
        """Compose and persist a weekly plan, enqueue its notifications, and
        label the pre-model when the caregiver departs from the user's
        current template."""
        now = self._now(now)
        record = self._user(user_id)
        chosen = template_id if template_id is not None else record.current_template
        template = self._template(chosen)
        if week_start is None:
            week_start = now.date()
        missing = template.target_clusters - {c.cluster_id for c in self.state.clusters}
        if missing:
            raise ConfigInvalid(
                f"template {chosen!r} targets unconfirmed clusters: {sorted(missing)}")

        plan_id = self.state.next_plan_id()
        seed = composition_seed(plan_id, user_id, chosen, week_start.isoformat())
        plan = planning.compose_weekly_plan(
            record.profile, template, self._freq_table(user_id, week_start),
            list(self.pool.values()), self.state.clusters,
            plan_id, week_start, seed,
            frequent_share=self.config.frequent_share)

        relabel = chosen != record.current_template
        self._emit("PlanAssigned", {"plan": plan.to_dict(), "seed": seed}, now)
        if relabel:
            self._add_label("pre", user_id, chosen, "CaregiverAssignment",
                            encode_profile(record.profile), now)
        self.enqueue_plan(plan.plan_id, now=now)
        return plan

    def enqueue_plan(self, plan_id: str, now: datetime | None = None) -> list[str]:
        """One Pending notification per slot of the plan; rejects repeats."""
        now = self._now(now)
        plan = self.state.plans.get(plan_id)
        if plan is None:
            raise UnknownPlan(f"no plan {plan_id!r}")
        if plan_id in self.state.enqueued_plans:
            raise DuplicateEnqueue(f"plan {plan_id!r} already has notifications")
        hours_by_kind: dict[ActivityKind, list[int]] = {}
        for report in self.state.user_reports(plan.user_id):
            if not report.complied:
                continue
            source_plan = self.state.plans.get(report.plan_id)
            if source_plan is None:
                continue
            for slot in source_plan.slots_on(report.date):
                if slot.slot_index == report.slot_index:
                    kind = self.kind_of[slot.activity_id]
                    hours_by_kind.setdefault(kind, []).append(report.reported_at.hour)
        notifications = scheduling.plan_notifications(
            plan, self.kind_of, hours_by_kind,
            self.state.next_notification_serial(), self.rules)
        for n in notifications:
            self._emit("NotificationScheduled", {"notification": n.to_dict()}, now)
        return [n.notification_id for n in notifications]

    def refine_plan(self, user_id: str, refined_template_id: str,
                    as_of: date | None = None,
                    now: datetime | None = None) -> dict:
        """The human-in-the-loop step: the caregiver's refinement labels both
        models, then a fresh plan from the refined template starts the next
        day."""
        now = self._now(now)
        record = self._user(user_id)
        plans = self.state.user_plans(user_id)
        if not plans:
            raise NoAssignedPlan(f"user {user_id!r} has no plan to refine")
        self._template(refined_template_id)
        if as_of is None:
            as_of = now.date()

        features, window = self._performance_features(user_id, as_of)
        score = compliance_score(window)
        observed = ground_truth_type(score, window.report_count,
                                     active_threshold=self.config.active_threshold,
                                     passive_threshold=self.config.passive_threshold)

        self._emit("PlanRefined", {
            "user_id": user_id,
            "from_template": plans[-1].template_id,
            "to_template": refined_template_id,
            "as_of": as_of.isoformat(),
        }, now)
        self._add_label("pre", user_id, refined_template_id,
                        "CaregiverRefinement", encode_profile(record.profile), now)
        self._add_label("post", user_id, observed.value,
                        "CaregiverRefinement", features, now)
        plan = self.assign_plan(user_id, refined_template_id,
                                week_start=as_of + timedelta(days=1), now=now)
        return {
            "plan": plan.to_dict(),
            "observed_type": observed.value,
            "window_score": score,
        }

    # -- predictions and read models ----------------------------------------------

    def pre_predict(self, profile: Mapping) -> Prediction:
        raw = dict(profile)
        raw.setdefault("user_id", "u-probe")
        validated = validate_profile(raw, DEFAULT_VOCABULARY)
        return knn_predict(self.state.pre_model, encode_profile(validated))

    def post_predict(self, user_id: str, as_of: date | None = None,
                     now: datetime | None = None) -> Prediction:
        as_of = as_of if as_of is not None else self._now(now).date()
        features, _ = self._performance_features(user_id, as_of)
        return knn_predict(self.state.post_model, features)

    def ranking(self, as_of: date | None = None,
                now: datetime | None = None) -> list[dict]:
        """One row per user, most-at-risk (lowest score) first; users with
        nothing assigned in the window sort to the end."""
        as_of = as_of if as_of is not None else self._now(now).date()
        rows = []
        for user_id in self.state.users:
            record = self.state.users[user_id]
            window = self._window(user_id, as_of)
            score = compliance_score(window)
            prediction = knn_predict(
                self.state.post_model,
                encode_performance(record.profile, window,
                                   self._emotions_until(user_id, as_of),
                                   emotion_window=self.config.emotion_window))
            try:
                t = trend(window, band=self.config.trend_band)
                trend_doc = {"direction": t.direction.value, "slope": t.slope}
            except InsufficientDays:
                trend_doc = None
            reports = self.state.user_reports(user_id)
            last_report = max((r.reported_at for r in reports), default=None)
            rows.append({
                "user_id": user_id,
                "display_name": record.display_name,
                "compliance_score": score,
                "predicted_type": prediction.label,
                "confidence": prediction.confidence,
                "prediction_status": prediction.status.value,
                "trend": trend_doc,
                "last_report_at": iso(last_report) if last_report else None,
            })
        rows.sort(key=lambda r: (r["compliance_score"] is None,
                                 r["compliance_score"] or 0.0,
                                 r["user_id"]))
        return rows

    def user_detail(self, user_id: str, as_of: date | None = None,
                    now: datetime | None = None) -> dict:
        as_of = as_of if as_of is not None else self._now(now).date()
        record = self._user(user_id)
        window = self._window(user_id, as_of)
        plans = self.state.user_plans(user_id)
        latest = plans[-1] if plans else None
        reports = self.state.user_reports(user_id)

        feedback = None
        plan_doc = None
        if latest is not None:
            plan_doc = latest.to_dict()
            plan_doc["activities"] = {
                slot.activity_id: {
                    "title": self.titles[slot.activity_id],
                    "kind": self.kind_of[slot.activity_id].value,
                }
                for slot in latest.slots
            }
            feedback = feedback_summary(latest, reports, self.pool).to_dict()

        daily = [{
            "date": day.date.isoformat(),
            "assigned": day.assigned,
            "complied": day.complied,
            "reported": day.reported,
            "score": (day.complied / day.assigned) if day.assigned else None,
        } for day in window.daily]

        prediction = self.post_predict(user_id, as_of=as_of)
        return {
            "user": record.to_dict(),
            "plan": plan_doc,
            "feedback": feedback,
            "window": {
                "start": window.start.isoformat(),
                "end": window.end.isoformat(),
                "compliance_score": compliance_score(window),
                "daily": daily,
            },
            "emotions": [e.to_dict() for e in self.state.emotions.get(user_id, [])],
            "prediction": prediction.to_dict(),
            "label_trail": list(self.state.label_trail.get(user_id, [])),
            "refinements": list(self.state.refinements.get(user_id, [])),
        }

    def broadcast(self, text: str, cohort_filter: str = "all",
                  now: datetime | None = None) -> list[dict]:
        now = self._now(now)
        if not text or not text.strip():
            raise EmptyBroadcast("broadcast text must be nonempty")
        if cohort_filter == "all":
            matched = sorted(self.state.users)
        elif cohort_filter.startswith("type:"):
            wanted = cohort_filter.split(":", 1)[1]
            if wanted not in UserType.__members__:
                raise PayloadInvalid(f"unknown user type {wanted!r} in filter")
            matched = [uid for uid in sorted(self.state.users)
                       if self.post_predict(uid, as_of=now.date()).label == wanted]
        else:
            raise PayloadInvalid(
                f"filter must be 'all' or 'type:<UserType>', got {cohort_filter!r}")
        chat_ids = [self.state.users[uid].chat_id for uid in matched]
        self._emit("BroadcastSent", {
            "text": text,
            "filter": cohort_filter,
            "chat_ids": chat_ids,
        }, now)
        return [bot.render_broadcast(chat_id, text).to_dict() for chat_id in chat_ids]

    # -- clustering ----------------------------------------------------------------

    def propose_clusters(self, sim_threshold: float = 0.5) -> list[dict]:
        proposals = planning.propose_clusters(
            sorted(self.pool.values(), key=lambda a: a.activity_id), sim_threshold)
        return [c.to_dict() for c in proposals]

    def confirm_clusters(self, edits: Sequence[Mapping[str, str]],
                         sim_threshold: float = 0.5,
                         now: datetime | None = None) -> list[dict]:
        now = self._now(now)
        proposals = planning.propose_clusters(
            sorted(self.pool.values(), key=lambda a: a.activity_id), sim_threshold)
        confirmed = planning.confirm_clusters(proposals, edits,
                                              list(self.pool.values()))
        self._emit("ClusterConfirmed",
                   {"clusters": [c.to_dict() for c in confirmed]}, now)
        return [c.to_dict() for c in confirmed]

    # -- bot ingress and dispatch ----------------------------------------------------

    def bot_update(self, wire: str | bytes,
                   now: datetime | None = None) -> list[dict]:
        """Process one inbound update; returns outbound messages.  Updates at
        or below the chat's watermark are replays and produce nothing."""
        now = self._now(now)
        update = bot.parse_update(wire, slots_per_day=self.config.slots_per_day)
        chat_id = update.chat_id
        if update.update_id <= self.state.watermarks.get(chat_id, -1):
            return []
        user_id = self.state.chat_index.get(chat_id)

        if update.text is not None:
            return [m.to_dict() for m in
                    self._handle_message(chat_id, user_id, update.text, now)]
        if user_id is None:
            raise UnknownChat(f"chat {chat_id} is not bound to a user")
        return [m.to_dict() for m in
                self._handle_callback(chat_id, user_id, update, now)]

    def _handle_message(self, chat_id: int, user_id: str | None, text: str,
                        now: datetime) -> list[bot.OutboundMessage]:
        intent = bot.classify(text)
        if user_id is None:
            key = "register_prompt" if intent is bot.Intent.Start else "unknown_chat"
            return [bot.render_text(chat_id, self.corpus, key)]
        if intent is bot.Intent.Start:
            return [bot.render_text(chat_id, self.corpus, "register_prompt")]
        if intent is bot.Intent.Help:
            return [bot.render_text(chat_id, self.corpus, "help")]
        if intent is bot.Intent.Mood:
            return [bot.render_mood_keyboard(chat_id, self.corpus)]
        if intent is bot.Intent.NewPlan:
            today = now.date()
            for plan_id in reversed(self.state.plans_by_user.get(user_id, [])):
                plan = self.state.plans[plan_id]
                if today in plan.week_dates:
                    return [bot.render_plan_day(plan, today, self.titles, chat_id)]
            return [bot.render_text(chat_id, self.corpus, "no_plan_yet")]
        return [bot.render_text(chat_id, self.corpus, "fallback")]

    def _handle_callback(self, chat_id: int, user_id: str, update: bot.BotUpdate,
                         now: datetime) -> list[bot.OutboundMessage]:
        cb = update.callback
        if isinstance(cb, bot.EmotionCallback):
            self._emit("EmotionReported", {
                "user_id": user_id,
                "emotion": cb.emotion.value,
                "update_id": update.update_id,
            }, now)
            return [bot.render_text(chat_id, self.corpus, "mood_ack")]

        plan = self.state.plans.get(cb.plan_id)
        if plan is None or plan.user_id != user_id:
            raise UnknownPlan(f"no plan {cb.plan_id!r} for this chat")
        if cb.date not in plan.week_dates:
            raise DateOutOfPlan(f"{cb.date.isoformat()} outside plan week")
        key = (cb.plan_id, cb.date.isoformat(), cb.slot_index)
        if key in self.state.reported_slots:
            return [bot.render_text(chat_id, self.corpus, "comply_duplicate")]
        self._emit("ComplianceReported", {
            "user_id": user_id,
            "plan_id": cb.plan_id,
            "date": cb.date.isoformat(),
            "slot_index": cb.slot_index,
            "complied": cb.complied,
            "update_id": update.update_id,
        }, now)
        return [bot.render_text(chat_id, self.corpus, "comply_ack")]

    def collect_due(self, now: datetime | None = None) -> list[dict]:
        """Dispatcher poll: atomically mark due notifications Dispatched (or
        Expired when stale) and return the reminder messages to deliver."""
        now = self._now(now)
        pending = [n for n in self.state.notifications.values()
                   if n.state is scheduling.NotificationState.Pending]
        dispatch, expire = scheduling.split_due(
            pending, now,
            expiry=timedelta(hours=self.config.notification_expiry_hours))
        for n in expire:
            self._emit("NotificationExpired", {"notification_id": n.notification_id}, now)
        out = []
        for n in dispatch:
            self._emit("NotificationDispatched", {"notification_id": n.notification_id}, now)
            plan = self.state.plans[n.plan_id]
            slot = next(s for s in plan.slots_on(n.date)
                        if s.slot_index == n.slot_index)
            message = bot.render_slot_reminder(
                self.state.users[n.user_id].chat_id, n.plan_id, n.date,
                n.slot_index, self.titles[slot.activity_id], self.corpus)
            out.append({
                "notification_id": n.notification_id,
                "fire_at": iso(n.fire_at),
                "message": message.to_dict(),
            })
        return out

    # -- suggestions -------------------------------------------------------------------

    def suggestions(self, user_id: str, n: int = 3,
                    now: datetime | None = None) -> list[dict]:
        now = self._now(now)
        record = self._user(user_id)
        freq = self._freq_table(user_id, now.date())
        seed = composition_seed("suggest", user_id, now.date().isoformat(), n)
        return [s.to_dict() for s in planning.generate_suggestions(
            record.profile, freq, list(self.pool.values()), n, seed,
            epsilon=self.config.epsilon, created_at=iso(now))]


def state_kwargs(config: ServiceConfig) -> dict:
    return {
        "pre_default_label": config.default_template,
        "post_default_label": config.default_user_type,
        "k": config.k,
        "pre_weights": dict(config.pre_model_weights),
        "post_weights": dict(config.post_model_weights),
    }
