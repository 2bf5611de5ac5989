"""Append-only event log: the single source of truth.

One canonical-JSON event per line (UTF-8, sorted keys, no spaces), so the
log bytes are deterministic given the event stream and any prefix of the
file replays to a valid state.  Snapshots are single JSON documents named
by the sequence number they cover.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

from .errors import CorruptLine, PayloadInvalid, StorageFailure, VersionMismatch

SCHEMA_VERSION = 1

EVENT_KINDS = (
    "UserRegistered",
    "PlanAssigned",
    "PlanRefined",
    "ComplianceReported",
    "EmotionReported",
    "NotificationScheduled",
    "NotificationDispatched",
    "NotificationExpired",
    "ClusterConfirmed",
    "BroadcastSent",
    "ModelLabelAdded",
)

# structural payload contract per kind; commands validate semantics upstream
REQUIRED_PAYLOAD_KEYS: dict[str, tuple[str, ...]] = {
    "UserRegistered": ("user_id", "chat_id", "display_name", "profile",
                       "suggested", "chosen_template"),
    "PlanAssigned": ("plan", "seed"),
    "PlanRefined": ("user_id", "from_template", "to_template", "as_of"),
    "ComplianceReported": ("user_id", "plan_id", "date", "slot_index", "complied"),
    "EmotionReported": ("user_id", "emotion"),
    "NotificationScheduled": ("notification",),
    "NotificationDispatched": ("notification_id",),
    "NotificationExpired": ("notification_id",),
    "ClusterConfirmed": ("clusters",),
    "BroadcastSent": ("text", "filter", "chat_ids"),
    "ModelLabelAdded": ("model", "instance_id", "user_id", "label", "source", "features"),
}


@dataclass(frozen=True)
class Event:
    seq: int
    ts: str
    kind: str
    payload: dict

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "seq": self.seq,
            "ts": self.ts,
            "kind": self.kind,
            "payload": self.payload,
        }


def validate_payload(kind: str, payload: Mapping) -> None:
    if kind not in REQUIRED_PAYLOAD_KEYS:
        raise PayloadInvalid(f"unknown event kind {kind!r}")
    if not isinstance(payload, Mapping):
        raise PayloadInvalid(f"{kind} payload must be a mapping")
    missing = [k for k in REQUIRED_PAYLOAD_KEYS[kind] if k not in payload]
    if missing:
        raise PayloadInvalid(f"{kind} payload missing keys: {', '.join(missing)}")


def event_to_line(event: Event) -> str:
    try:
        return json.dumps(event.to_dict(), sort_keys=True, separators=(",", ":"))
    except (TypeError, ValueError) as exc:
        raise PayloadInvalid(f"payload not JSON-serializable: {exc}") from exc


def event_from_line(line: str, expected_seq: int) -> Event:
    try:
        doc = json.loads(line)
    except ValueError as exc:
        raise CorruptLine(expected_seq, f"unparseable line at seq {expected_seq}: {exc}") from exc
    if not isinstance(doc, dict):
        raise CorruptLine(expected_seq, f"event at seq {expected_seq} is not an object")
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise VersionMismatch(
            f"event schema_version {doc.get('schema_version')!r}, expected {SCHEMA_VERSION}")
    if doc.get("seq") != expected_seq:
        raise CorruptLine(expected_seq,
                          f"seq {doc.get('seq')!r} where {expected_seq} expected")
    kind = doc.get("kind")
    payload = doc.get("payload")
    ts = doc.get("ts")
    if kind not in EVENT_KINDS or not isinstance(payload, dict) or not isinstance(ts, str):
        raise CorruptLine(expected_seq, f"malformed event at seq {expected_seq}")
    return Event(seq=expected_seq, ts=ts, kind=kind, payload=payload)


class EventLog:
    """Single-writer append handle over data_dir/events.ndjson."""

    def __init__(self, path: str | Path, fsync: bool = True, next_seq: int = 1):
        self.path = Path(path)
        self.fsync = fsync
        self.next_seq = next_seq
        self._fh = None

    def append(self, kind: str, payload: dict, ts: str) -> Event:
        validate_payload(kind, payload)
        event = Event(seq=self.next_seq, ts=ts, kind=kind, payload=payload)
        line = event_to_line(event)  # serialize before touching the file
        try:
            if self._fh is None:
                self.path.parent.mkdir(parents=True, exist_ok=True)
                self._fh = open(self.path, "a", encoding="utf-8")
            self._fh.write(line + "\n")
            self._fh.flush()
            if self.fsync:
                os.fsync(self._fh.fileno())
        except OSError as exc:
            raise StorageFailure(f"cannot append to {self.path}: {exc}") from exc
        self.next_seq += 1
        return event

    def close(self) -> None:
        if self._fh is not None:
            self._fh.close()
            self._fh = None

    def __enter__(self):
        return self

    def __exit__(self, *exc_info):
        self.close()


def read_log(path: str | Path) -> list[Event]:
    """Parse the whole log; raises CorruptLine at the first bad line."""
    path = Path(path)
    if not path.exists():
        return []
    events = []
    try:
        with open(path, encoding="utf-8") as fh:
            for i, line in enumerate(fh):
                line = line.rstrip("\n")
                if line == "" and i > 0:
                    continue  # tolerate a trailing blank line
                events.append(event_from_line(line, expected_seq=i + 1))
    except OSError as exc:
        raise StorageFailure(f"cannot read {path}: {exc}") from exc
    return events


def read_log_recover(path: str | Path) -> tuple[list[Event], int | None]:
    """Like read_log but stops at the first corrupt line instead of raising.

    Returns (good_prefix, corrupt_seq or None); the prefix is always safe to
    replay.
    """
    try:
        return read_log(path), None
    except CorruptLine as exc:
        events = []
        with open(path, encoding="utf-8") as fh:
            for i, line in enumerate(fh):
                if i + 1 >= exc.seq:
                    break
                events.append(event_from_line(line.rstrip("\n"), expected_seq=i + 1))
        return events, exc.seq


def truncate_to(path: str | Path, events: Iterable[Event]) -> None:
    """Rewrite the log to exactly the given prefix (crash recovery)."""
    path = Path(path)
    tmp = path.with_suffix(".tmp")
    with open(tmp, "w", encoding="utf-8") as fh:
        for event in events:
            fh.write(event_to_line(event) + "\n")
        fh.flush()
        os.fsync(fh.fileno())
    os.replace(tmp, path)


# -- snapshots ----------------------------------------------------------------

def snapshot_path(data_dir: str | Path, seq: int) -> Path:
    return Path(data_dir) / f"snapshot-{seq}.json"


def save_snapshot(data_dir: str | Path, seq: int, doc: dict) -> Path:
    doc = dict(doc)
    doc["schema_version"] = SCHEMA_VERSION
    doc["as_of_seq"] = seq
    path = snapshot_path(data_dir, seq)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(".tmp")
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(doc, sort_keys=True, separators=(",", ":")))
        fh.flush()
        os.fsync(fh.fileno())
    os.replace(tmp, path)
    return path


def load_snapshot(path: str | Path) -> dict:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise VersionMismatch(
            f"snapshot schema_version {doc.get('schema_version')!r}, expected {SCHEMA_VERSION}")
    return doc
