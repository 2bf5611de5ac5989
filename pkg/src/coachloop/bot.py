"""Messenger-style gateway: wire parsing, keyboards, and canned replies.

The wire shape mirrors a chat-bot HTTP API (updates in, messages with
inline keyboards out) but runs over a local transport so tests stay
hermetic.  Replies are retrieval-only: every outbound text comes from the
response corpus, never from string synthesis beyond placeholder fills.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from datetime import date
from typing import Mapping, Sequence

from .domain import Emotion, Plan
from .errors import BadCallbackData, DateOutOfPlan, MalformedUpdate

MAX_CALLBACK_BYTES = 64

REQUIRED_CORPUS_KEYS = (
    "register_prompt", "help", "no_plan_yet", "comply_ack", "comply_duplicate",
    "mood_prompt", "mood_ack", "unknown_chat", "fallback", "slot_reminder",
)

_WIRE_EMOTIONS = {
    "happy": Emotion.Happy,
    "sad": Emotion.Sad,
    "angry": Emotion.Angry,
    "neutral": Emotion.Neutral,
}


class Intent(str, enum.Enum):
    Start = "Start"
    NewPlan = "NewPlan"
    Mood = "Mood"
    Help = "Help"
    Fallback = "Fallback"


_COMMANDS = {
    "/start": Intent.Start,
    "/newplan": Intent.NewPlan,
    "/mood": Intent.Mood,
    "/help": Intent.Help,
}


def classify(text: str) -> Intent:
    return _COMMANDS.get(text.strip().split()[0] if text.strip() else "", Intent.Fallback)


def ensure_corpus(corpus: Mapping[str, str]) -> Mapping[str, str]:
    missing = [k for k in REQUIRED_CORPUS_KEYS if k not in corpus]
    if missing:
        raise ValueError(f"corpus missing replies for: {', '.join(missing)}")
    return corpus


@dataclass(frozen=True)
class Button:
    label: str
    data: str

    def __post_init__(self):
        if len(self.data.encode("utf-8")) > MAX_CALLBACK_BYTES:
            raise BadCallbackData(f"callback data exceeds {MAX_CALLBACK_BYTES} bytes")

    def to_dict(self) -> dict:
        return {"label": self.label, "data": self.data}


@dataclass(frozen=True)
class OutboundMessage:
    chat_id: int
    text: str
    keyboard: tuple[tuple[Button, ...], ...] = ()

    def to_dict(self) -> dict:
        return {
            "chat_id": self.chat_id,
            "text": self.text,
            "keyboard": [[b.to_dict() for b in row] for row in self.keyboard],
        }

    def to_wire(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))


@dataclass(frozen=True)
class ComplyCallback:
    plan_id: str
    date: date
    slot_index: int
    complied: bool


@dataclass(frozen=True)
class EmotionCallback:
    emotion: Emotion


@dataclass(frozen=True)
class BotUpdate:
    update_id: int
    chat_id: int
    text: str | None = None
    callback: ComplyCallback | EmotionCallback | None = None


def comply_data(plan_id: str, day: date, slot_index: int, complied: bool) -> str:
    data = f"comply:{plan_id}:{day.isoformat()}:{slot_index}:{'yes' if complied else 'no'}"
    if len(data.encode("utf-8")) > MAX_CALLBACK_BYTES:
        raise BadCallbackData("encoded comply callback exceeds the byte budget")
    return data


def emotion_data(emotion: Emotion) -> str:
    return f"emotion:{emotion.value.lower()}"


def parse_callback(data: str, slots_per_day: int = 3) -> ComplyCallback | EmotionCallback:
    """Decode the two callback grammars; anything else is rejected."""
    if len(data.encode("utf-8")) > MAX_CALLBACK_BYTES:
        raise BadCallbackData("callback data too long")
    parts = data.split(":")
    if parts[0] == "emotion":
        if len(parts) != 2 or parts[1] not in _WIRE_EMOTIONS:
            raise BadCallbackData(f"bad emotion callback {data!r}")
        return EmotionCallback(emotion=_WIRE_EMOTIONS[parts[1]])
    if parts[0] == "comply":
        if len(parts) != 5:
            raise BadCallbackData(f"bad comply callback {data!r}")
        _, plan_id, day_s, slot_s, answer = parts
        if not plan_id:
            raise BadCallbackData("comply callback missing plan id")
        try:
            day = date.fromisoformat(day_s)
        except ValueError as exc:
            raise BadCallbackData(f"bad date in comply callback: {day_s!r}") from exc
        try:
            slot = int(slot_s)
        except ValueError as exc:
            raise BadCallbackData(f"bad slot in comply callback: {slot_s!r}") from exc
        if not 0 <= slot < slots_per_day:
            raise BadCallbackData(f"slot {slot} outside 0..{slots_per_day - 1}")
        if answer not in ("yes", "no"):
            raise BadCallbackData(f"bad answer in comply callback: {answer!r}")
        return ComplyCallback(plan_id=plan_id, date=day, slot_index=slot,
                              complied=answer == "yes")
    raise BadCallbackData(f"unknown callback family {parts[0]!r}")


def parse_update(wire: bytes | str, slots_per_day: int = 3) -> BotUpdate:
    """Validate one inbound update; exactly one of message/callback allowed."""
    try:
        doc = json.loads(wire)
    except (ValueError, UnicodeDecodeError) as exc:
        raise MalformedUpdate(f"update is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise MalformedUpdate("update must be a JSON object")
    update_id = doc.get("update_id")
    if not isinstance(update_id, int) or isinstance(update_id, bool) or update_id < 0:
        raise MalformedUpdate("update_id must be a nonnegative integer")
    message = doc.get("message")
    callback = doc.get("callback")
    if (message is None) == (callback is None):
        raise MalformedUpdate("exactly one of message/callback must be present")

    body = message if message is not None else callback
    if not isinstance(body, dict):
        raise MalformedUpdate("message/callback must be a JSON object")
    chat_id = body.get("chat_id")
    if not isinstance(chat_id, int) or isinstance(chat_id, bool):
        raise MalformedUpdate("chat_id must be an integer")

    if message is not None:
        text = message.get("text")
        if not isinstance(text, str):
            raise MalformedUpdate("message text must be a string")
        return BotUpdate(update_id=update_id, chat_id=chat_id, text=text)
    data = callback.get("data")
    if not isinstance(data, str):
        raise MalformedUpdate("callback data must be a string")
    return BotUpdate(update_id=update_id, chat_id=chat_id,
                     callback=parse_callback(data, slots_per_day))


# -- rendering ----------------------------------------------------------------

def _slot_buttons(plan_id: str, day: date, slot_index: int) -> tuple[Button, Button]:
    return (
        Button("Done", comply_data(plan_id, day, slot_index, True)),
        Button("Skipped", comply_data(plan_id, day, slot_index, False)),
    )


def render_plan_day(plan: Plan, day: date, titles: Mapping[str, str],
                    chat_id: int) -> OutboundMessage:
    """The day's activity list with one Done/Skipped row per slot."""
    if day not in plan.week_dates:
        raise DateOutOfPlan(f"{day.isoformat()} not in week of {plan.week_start.isoformat()}")
    slots = plan.slots_on(day)
    lines = [f"Your plan for {day.isoformat()}:"]
    rows = []
    for slot in slots:
        lines.append(f"{slot.slot_index + 1}. {titles.get(slot.activity_id, slot.activity_id)}")
        rows.append(_slot_buttons(plan.plan_id, day, slot.slot_index))
    return OutboundMessage(chat_id=chat_id, text="\n".join(lines), keyboard=tuple(rows))


def render_mood_keyboard(chat_id: int, corpus: Mapping[str, str]) -> OutboundMessage:
    row = tuple(Button(e.value, emotion_data(e)) for e in Emotion)
    return OutboundMessage(chat_id=chat_id, text=corpus["mood_prompt"], keyboard=(row,))


def render_slot_reminder(chat_id: int, plan_id: str, day: date, slot_index: int,
                         title: str, corpus: Mapping[str, str]) -> OutboundMessage:
    return OutboundMessage(
        chat_id=chat_id,
        text=f"{corpus['slot_reminder']} {title}",
        keyboard=(_slot_buttons(plan_id, day, slot_index),),
    )


def render_text(chat_id: int, corpus: Mapping[str, str], key: str) -> OutboundMessage:
    return OutboundMessage(chat_id=chat_id, text=corpus[key])


def render_broadcast(chat_id: int, text: str) -> OutboundMessage:
    return OutboundMessage(chat_id=chat_id, text=text)
