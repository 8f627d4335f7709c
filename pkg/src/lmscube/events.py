"""LMS activity event log: parsing, validated ingestion, window slicing.

Event logs are JSON Lines with fixed field names ``ts``, ``user``, ``cu``
and ``kind``; any further fields travel as scalar attrs. A schema header
line is mandatory. Individual bad lines are rejected, never fatal.
"""

from __future__ import annotations

import json
from bisect import bisect_left
from collections.abc import Iterable
from dataclasses import dataclass, field
from datetime import datetime, timedelta
from enum import Enum
from types import MappingProxyType
from typing import Any, Mapping

from .errors import DataError, QueryError
from .formats import _check_header
from .org import OrgTree
from .windows import TimeWindow, format_instant, parse_instant

EVENTS_SCHEMA = "lmscube/events"

Scalar = str | int | float | bool


class EventKind(str, Enum):
    ACCESS = "ACCESS"
    ANNOUNCEMENT = "ANNOUNCEMENT"
    MESSAGE = "MESSAGE"
    PROGRAMME_POST = "PROGRAMME_POST"
    CALENDAR_ENTRY = "CALENDAR_ENTRY"
    FORUM_OPEN = "FORUM_OPEN"
    FORUM_POST = "FORUM_POST"
    ASYNC_TOOL_USE = "ASYNC_TOOL_USE"
    CONTENT_PUBLISH = "CONTENT_PUBLISH"
    SUBMISSION_INDIVIDUAL = "SUBMISSION_INDIVIDUAL"
    SUBMISSION_GROUP = "SUBMISSION_GROUP"
    GROUP_PROGRESS_VIEW = "GROUP_PROGRESS_VIEW"
    PLAGIARISM_CHECK = "PLAGIARISM_CHECK"
    TEST_ATTEMPT = "TEST_ATTEMPT"


# Attrs a kind cannot appear without.
REQUIRED_ATTRS: dict[EventKind, tuple[str, ...]] = {
    EventKind.CONTENT_PUBLISH: ("rich",),
    EventKind.SUBMISSION_INDIVIDUAL: ("work_id",),
    EventKind.SUBMISSION_GROUP: ("work_id",),
}

_CORE_FIELDS = ("ts", "user", "cu", "kind")


class EventParseError(DataError):
    pass


@dataclass(frozen=True)
class Event:
    ts: datetime
    user_id: str
    cu_id: str
    kind: EventKind
    attrs: Mapping[str, Scalar]

    def to_record(self) -> dict[str, Any]:
        record: dict[str, Any] = {
            "ts": format_instant(self.ts),
            "user": self.user_id,
            "cu": self.cu_id,
            "kind": self.kind.value,
        }
        record.update(self.attrs)
        return record


def parse_event_line(
    line: str,
    *,
    year_range: TimeWindow | None = None,
    source: str = "<stream>",
    lineno: int = 0,
) -> Event:
    """Parse one event record line into a validated Event.

    Every failure raises EventParseError naming the line and the field
    (or byte column, for JSON syntax errors) at fault.
    """
    where = f"{source}:{lineno}"
    try:
        record = json.loads(line)
    except json.JSONDecodeError as exc:
        raise EventParseError(
            f"{where}: malformed record at column {exc.colno}: {exc.msg}"
        ) from None
    if not isinstance(record, dict):
        raise EventParseError(f"{where}: record must be a JSON object")

    missing = [name for name in _CORE_FIELDS if name not in record]
    if missing:
        raise EventParseError(f"{where}: missing field {missing[0]!r}")

    try:
        ts = parse_instant(str(record["ts"]))
    except ValueError as exc:
        raise EventParseError(f"{where}: field 'ts': {exc}") from None
    if year_range is not None and not year_range.contains(ts):
        raise EventParseError(
            f"{where}: timestamp {format_instant(ts)} outside academic year "
            f"{year_range.label}"
        )

    raw_kind = record["kind"]
    try:
        kind = EventKind(raw_kind)
    except ValueError:
        raise EventParseError(f"{where}: unknown kind {raw_kind!r}") from None

    attrs: dict[str, Scalar] = {}
    for key, value in record.items():
        if key in _CORE_FIELDS:
            continue
        if not isinstance(value, (str, int, float, bool)) or value is None:
            raise EventParseError(f"{where}: attr {key!r} must be a scalar")
        attrs[key] = value

    for required in REQUIRED_ATTRS.get(kind, ()):
        if required not in attrs:
            raise EventParseError(f"{where}: missing attr {required!r} for {kind.value}")
    if kind is EventKind.CONTENT_PUBLISH and not isinstance(attrs["rich"], bool):
        raise EventParseError(f"{where}: attr 'rich' must be a boolean")
    if kind is EventKind.ACCESS:
        mobile = attrs.setdefault("mobile", False)
        if not isinstance(mobile, bool):
            raise EventParseError(f"{where}: attr 'mobile' must be a boolean")

    return Event(
        ts=ts,
        user_id=str(record["user"]),
        cu_id=str(record["cu"]),
        kind=kind,
        attrs=MappingProxyType(attrs),
    )


@dataclass(frozen=True)
class Reject:
    lineno: int
    reason: str
    detail: str = ""


@dataclass(frozen=True)
class EventStore:
    """Frozen, per-CU time-sorted view over accepted events."""

    events: tuple[Event, ...]
    _by_cu: Mapping[str, tuple[Event, ...]] = field(repr=False)
    _ts_by_cu: Mapping[str, tuple[datetime, ...]] = field(repr=False)

    @classmethod
    def from_events(cls, events: Iterable[Event]) -> "EventStore":
        ordered = sorted(events, key=lambda e: e.ts)
        by_cu: dict[str, list[Event]] = {}
        for event in ordered:
            by_cu.setdefault(event.cu_id, []).append(event)
        return cls(
            events=tuple(ordered),
            _by_cu={cu: tuple(evs) for cu, evs in by_cu.items()},
            _ts_by_cu={cu: tuple(e.ts for e in evs) for cu, evs in by_cu.items()},
        )

    def __len__(self) -> int:
        return len(self.events)

    @property
    def cu_ids(self) -> tuple[str, ...]:
        return tuple(sorted(self._by_cu))

    def cu_events(self, cu_id: str) -> tuple[Event, ...]:
        return self._by_cu.get(cu_id, ())

    def span(self) -> TimeWindow | None:
        """Smallest window covering every event, or None for an empty store."""
        if not self.events:
            return None
        return TimeWindow(self.events[0].ts, self.events[-1].ts + timedelta(seconds=1))


class IngestAborted(DataError):
    """The stream itself broke mid-run; carries the partial-ingest marker."""

    def __init__(self, message: str, accepted: int, rejected: int):
        super().__init__(f"{message} (partial ingest: {accepted} accepted, {rejected} rejected)")
        self.accepted = accepted
        self.rejected = rejected


def ingest_events(
    lines: Iterable[str],
    tree: OrgTree,
    *,
    year_range: TimeWindow | None = None,
    source: str = "<stream>",
) -> tuple[EventStore, list[Reject]]:
    """Ingest an event log stream against an org tree.

    Events for unknown CUs, or from users who neither teach nor are
    enrolled in the referenced CU, go to the reject report. A broken
    stream (IO or encoding failure) aborts with IngestAborted.
    """
    accepted: list[Event] = []
    rejects: list[Reject] = []
    seen_header = False
    iterator = iter(lines)
    lineno = 0
    while True:
        try:
            line = next(iterator)
        except StopIteration:
            break
        except (OSError, UnicodeDecodeError, ValueError) as exc:
            raise IngestAborted(
                f"{source}: unreadable stream: {exc}", len(accepted), len(rejects)
            ) from exc
        lineno += 1
        if not line.strip():
            continue
        if not seen_header:
            _check_header(line, EVENTS_SCHEMA, source, lineno)
            seen_header = True
            continue
        try:
            event = parse_event_line(line, year_range=year_range, source=source, lineno=lineno)
        except EventParseError as exc:
            rejects.append(Reject(lineno, "parse error", str(exc)))
            continue
        cu = tree.cus.get(event.cu_id)
        if cu is None:
            rejects.append(Reject(lineno, "unknown cu", event.cu_id))
            continue
        if event.user_id not in cu.population:
            rejects.append(
                Reject(lineno, "user not in cu", f"{event.user_id} not in {event.cu_id}")
            )
            continue
        accepted.append(event)
    if not seen_header:
        raise DataError(f"{source}: missing schema header line for {EVENTS_SCHEMA!r}")
    return EventStore.from_events(accepted), rejects


def slice_window(store: EventStore, cu_id: str, window: TimeWindow) -> tuple[Event, ...]:
    """Events of one CU with window.start <= ts < window.end, in time order."""
    if cu_id not in store._by_cu:
        # Distinguish "no events" from a typo only when the caller gave us a tree;
        # here an unknown cu id simply has no partition.
        raise QueryError(f"no events for cu {cu_id!r}", unknown_ref=True)
    stamps = store._ts_by_cu[cu_id]
    lo = bisect_left(stamps, window.start)
    hi = bisect_left(stamps, window.end)
    return store._by_cu[cu_id][lo:hi]


def slice_window_or_empty(store: EventStore, cu_id: str, window: TimeWindow) -> tuple[Event, ...]:
    """Like slice_window, but a CU without any events yields an empty slice."""
    if cu_id not in store._by_cu:
        return ()
    return slice_window(store, cu_id, window)
