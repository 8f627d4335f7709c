"""Half-open UTC time windows used for slicing and period selection."""

from __future__ import annotations

from dataclasses import dataclass
from datetime import date, datetime, time, timezone

from .errors import QueryError

_SECONDS_PER_WEEK = 7 * 24 * 3600


def parse_instant(text: str) -> datetime:
    """Parse an ISO-8601 instant into an aware UTC datetime (second resolution).

    Accepts a trailing 'Z', an explicit offset, or a bare date/datetime
    (taken as UTC). Sub-second precision is truncated.
    """
    raw = text.strip()
    if raw.endswith(("Z", "z")):
        raw = raw[:-1] + "+00:00"
    try:
        parsed = datetime.fromisoformat(raw)
    except ValueError as exc:
        raise ValueError(f"bad timestamp {text!r}: {exc}") from None
    if parsed.tzinfo is None:
        parsed = parsed.replace(tzinfo=timezone.utc)
    return parsed.astimezone(timezone.utc).replace(microsecond=0)


def format_instant(ts: datetime) -> str:
    """Render an aware datetime as a compact UTC instant ('...Z')."""
    return ts.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


@dataclass(frozen=True, order=True)
class TimeWindow:
    """Half-open interval [start, end) over UTC instants."""

    start: datetime
    end: datetime

    def __post_init__(self) -> None:
        if self.start.tzinfo is None or self.end.tzinfo is None:
            raise ValueError("window bounds must be timezone-aware")
        if not self.start < self.end:
            raise ValueError(
                f"inverted window: start {format_instant(self.start)} "
                f">= end {format_instant(self.end)}"
            )

    def contains(self, ts: datetime) -> bool:
        return self.start <= ts < self.end

    @property
    def weeks(self) -> float:
        return (self.end - self.start).total_seconds() / _SECONDS_PER_WEEK

    @property
    def label(self) -> str:
        """Canonical 'start..end' text; date-only when both bounds are midnight."""
        if _is_midnight(self.start) and _is_midnight(self.end):
            return f"{self.start.date().isoformat()}..{self.end.date().isoformat()}"
        return f"{format_instant(self.start)}..{format_instant(self.end)}"

    @classmethod
    def parse(cls, text: str) -> "TimeWindow":
        """Parse 'start..end' with ISO dates or instants; dates mean midnight UTC."""
        parts = text.split("..")
        if len(parts) != 2 or not parts[0] or not parts[1]:
            raise QueryError(f"bad window {text!r}: expected 'start..end'")
        try:
            bounds = [_parse_bound(p) for p in parts]
            return cls(bounds[0], bounds[1])
        except ValueError as exc:
            raise QueryError(f"bad window {text!r}: {exc}") from None


def _parse_bound(text: str) -> datetime:
    raw = text.strip()
    if len(raw) == 10 and raw.count("-") == 2:
        return datetime.combine(date.fromisoformat(raw), time(0, 0), timezone.utc)
    return parse_instant(raw)


def _is_midnight(ts: datetime) -> bool:
    return ts.hour == 0 and ts.minute == 0 and ts.second == 0
