"""Questionnaire instruments, response ingestion, and per-dimension scoring.

Two instruments exist (teacher and student), each covering all seven
dimensions on a 1..5 Likert scale. Scores are pooled means over every
response to a dimension's items; a dimension nobody answered is MISSING,
never silently zero.
"""

from __future__ import annotations

import csv
import io
from collections.abc import Iterable, Mapping
from dataclasses import dataclass
from datetime import datetime
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Any

import yaml

from .errors import ConfigError, DataError, QueryError
from .events import Reject
from .formats import _check_header, parse_record_line
from .metrics import DIMENSIONS, Dimension
from .org import OrgTree
from .windows import TimeWindow, format_instant, parse_instant

INSTRUMENT_SCHEMA = "lmscube/instrument"
RESPONSES_SCHEMA = "lmscube/responses"

_CSV_COLUMNS = ("respondent", "cu", "item", "value", "ts")


class Audience(str, Enum):
    TEACHER = "teacher"
    STUDENT = "student"


@dataclass(frozen=True)
class InstrumentItem:
    item_id: str
    prompt: str
    dimension: Dimension


@dataclass(frozen=True)
class Instrument:
    audience: Audience
    items: tuple[InstrumentItem, ...]
    scale: tuple[int, int] = (1, 5)

    def item(self, item_id: str) -> InstrumentItem | None:
        return self._by_id.get(item_id)

    @property
    def _by_id(self) -> dict[str, InstrumentItem]:
        return {item.item_id: item for item in self.items}


@dataclass(frozen=True)
class SurveyResponse:
    respondent_id: str
    cu_id: str
    item_id: str
    value: int
    ts: datetime
    audience: Audience

    def to_record(self) -> dict[str, Any]:
        return {
            "respondent": self.respondent_id,
            "cu": self.cu_id,
            "item": self.item_id,
            "value": self.value,
            "ts": format_instant(self.ts),
        }


@dataclass(frozen=True)
class SurveyScore:
    cu_id: str
    audience: Audience
    dimension: Dimension
    score: float | None
    respondent_count: int


def load_instrument(path: Path) -> Instrument:
    try:
        raw = yaml.safe_load(path.read_text(encoding="utf-8"))
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot read instrument {path}: {exc}") from exc
    return parse_instrument(raw, source=str(path))


def parse_instrument(raw: Any, *, source: str = "<instrument>") -> Instrument:
    if not isinstance(raw, dict) or raw.get("schema") != INSTRUMENT_SCHEMA:
        raise ConfigError(f"{source}: expected schema {INSTRUMENT_SCHEMA!r}")
    if "version" not in raw:
        raise ConfigError(f"{source}: refusing unversioned instrument")
    try:
        audience = Audience(raw.get("audience"))
    except ValueError:
        raise ConfigError(f"{source}: bad audience {raw.get('audience')!r}") from None
    scale = raw.get("scale", [1, 5])
    if list(scale) != [1, 5]:
        raise ConfigError(f"{source}: bad scale {scale!r}, only Likert 1..5 is supported")

    items: list[InstrumentItem] = []
    seen: set[str] = set()
    problems: list[str] = []
    for entry in raw.get("items", []):
        item_id = str(entry.get("id", ""))
        if not item_id:
            problems.append(f"item without id: {entry!r}")
            continue
        if item_id in seen:
            problems.append(f"duplicate item_id {item_id!r}")
            continue
        seen.add(item_id)
        try:
            dimension = Dimension(entry.get("dimension"))
        except ValueError:
            problems.append(f"item {item_id!r}: unknown dimension {entry.get('dimension')!r}")
            continue
        items.append(InstrumentItem(item_id, str(entry.get("prompt", "")), dimension))

    covered = {item.dimension for item in items}
    for dimension in DIMENSIONS:
        if dimension not in covered:
            problems.append(f"dimension with zero items: {dimension.value}")
    if problems:
        raise ConfigError(f"{source}: invalid instrument: " + "; ".join(problems))
    return Instrument(audience=audience, items=tuple(items))


def default_instrument(audience: Audience) -> Instrument:
    """The placeholder instrument shipped with the package."""
    name = f"instrument_{audience.value}.yaml"
    text = resources.files("lmscube").joinpath("defaults", name).read_text(encoding="utf-8")
    return parse_instrument(yaml.safe_load(text), source=name)


def ingest_responses(
    text: str,
    instrument: Instrument,
    tree: OrgTree,
    *,
    source: str = "<responses>",
) -> tuple[list[SurveyResponse], list[Reject]]:
    """Parse and validate questionnaire responses against roles and items.

    Accepts the JSONL record format (schema header required) or a
    comma-separated table with a header row; the format is sniffed from
    the first non-blank line. Bad rows are rejected, never fatal.
    """
    rows = _read_rows(text, source)
    accepted: list[SurveyResponse] = []
    rejects: list[Reject] = []
    for lineno, row in rows:
        reject = _validate_row(row, instrument, tree, lineno, accepted)
        if reject is not None:
            rejects.append(reject)
    return accepted, rejects


def ingest_responses_mixed(
    text: str,
    instruments: Mapping[Audience, Instrument],
    tree: OrgTree,
    *,
    source: str = "<responses>",
) -> tuple[list[SurveyResponse], list[Reject]]:
    """Ingest a file holding responses to several instruments at once.

    Rows are routed to the instrument whose item set contains their item
    id; rows matching no instrument are rejected as unknown items.
    """
    rows = _read_rows(text, source)
    accepted: list[SurveyResponse] = []
    rejects: list[Reject] = []
    for lineno, row in rows:
        item_id = str(row.get("item", "")).strip()
        owner = next(
            (inst for inst in instruments.values() if inst.item(item_id) is not None),
            None,
        )
        if owner is None:
            if "_parse_error" in row:
                rejects.append(Reject(lineno, "parse error", row["_parse_error"]))
            else:
                rejects.append(Reject(lineno, "unknown item", item_id))
            continue
        reject = _validate_row(row, owner, tree, lineno, accepted)
        if reject is not None:
            rejects.append(reject)
    return accepted, rejects


def _read_rows(text: str, source: str) -> list[tuple[int, dict[str, Any]]]:
    first = next((line for line in text.splitlines() if line.strip()), "")
    if first.lstrip().startswith("{"):
        rows: list[tuple[int, dict[str, Any]]] = []
        seen_header = False
        for lineno, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            if not seen_header:
                _check_header(line, RESPONSES_SCHEMA, source, lineno)
                seen_header = True
                continue
            try:
                rows.append((lineno, parse_record_line(line, source=source, lineno=lineno)))
            except DataError as exc:
                rows.append((lineno, {"_parse_error": str(exc)}))
        if not seen_header:
            raise DataError(f"{source}: missing schema header line for {RESPONSES_SCHEMA!r}")
        return rows
    try:
        reader = csv.DictReader(io.StringIO(text))
        if reader.fieldnames is None:
            raise DataError(f"{source}: empty response file")
        missing = [c for c in _CSV_COLUMNS if c not in reader.fieldnames]
        if missing:
            raise DataError(f"{source}: response table missing columns {missing}")
        return [(lineno, dict(row)) for lineno, row in enumerate(reader, start=2)]
    except csv.Error as exc:
        raise DataError(f"{source}: unreadable response table: {exc}") from exc


def _validate_row(
    row: dict[str, Any],
    instrument: Instrument,
    tree: OrgTree,
    lineno: int,
    accepted: list[SurveyResponse],
) -> Reject | None:
    if "_parse_error" in row:
        return Reject(lineno, "parse error", row["_parse_error"])
    respondent = str(row.get("respondent", "")).strip()
    cu_id = str(row.get("cu", "")).strip()
    item_id = str(row.get("item", "")).strip()
    if not respondent or not cu_id or not item_id:
        return Reject(lineno, "parse error", f"incomplete row {row!r}")

    cu = tree.cus.get(cu_id)
    if cu is None:
        return Reject(lineno, "unknown cu", cu_id)
    item = instrument.item(item_id)
    if item is None:
        return Reject(lineno, "unknown item", item_id)
    try:
        value = int(str(row.get("value", "")).strip())
    except ValueError:
        return Reject(lineno, "scale violation", repr(row.get("value")))
    if not 1 <= value <= 5:
        return Reject(lineno, "scale violation", str(value))

    holds_role = (
        respondent in cu.enrolled_student_ids
        if instrument.audience is Audience.STUDENT
        else respondent in cu.teacher_ids
    )
    if not holds_role:
        return Reject(
            lineno,
            "audience mismatch",
            f"{respondent} is not a {instrument.audience.value} of {cu_id}",
        )
    try:
        ts = parse_instant(str(row.get("ts", "")))
    except ValueError as exc:
        return Reject(lineno, "bad timestamp", str(exc))

    accepted.append(
        SurveyResponse(
            respondent_id=respondent,
            cu_id=cu_id,
            item_id=item_id,
            value=value,
            ts=ts,
            audience=instrument.audience,
        )
    )
    return None


@dataclass(frozen=True)
class ResponseStore:
    """Frozen, deduplicated response set plus the instruments that scope it."""

    instruments: Mapping[Audience, Instrument]
    responses: tuple[SurveyResponse, ...]

    @classmethod
    def build(
        cls,
        instruments: Mapping[Audience, Instrument],
        responses: Iterable[SurveyResponse],
    ) -> "ResponseStore":
        # One response per (respondent, cu, item): the later timestamp wins,
        # later input order breaking ties.
        latest: dict[tuple[Audience, str, str, str], SurveyResponse] = {}
        for response in responses:
            key = (response.audience, response.respondent_id, response.cu_id, response.item_id)
            current = latest.get(key)
            if current is None or response.ts >= current.ts:
                latest[key] = response
        ordered = tuple(sorted(latest.values(), key=lambda r: (r.cu_id, r.ts, r.respondent_id, r.item_id)))
        return cls(instruments=dict(instruments), responses=ordered)

    def for_cu(self, cu_id: str, audience: Audience) -> tuple[SurveyResponse, ...]:
        return tuple(
            r for r in self.responses if r.cu_id == cu_id and r.audience is audience
        )


def survey_scores(
    store: ResponseStore,
    tree: OrgTree,
    cu_id: str,
    audience: Audience,
    window: TimeWindow | None = None,
) -> dict[Dimension, SurveyScore]:
    """Pooled per-dimension means for one CU and audience.

    With a window, only responses stamped inside it count (so scores align
    with the analysis periods). MISSING is an explicit None score paired
    with a zero respondent count.
    """
    if cu_id not in tree.cus:
        raise QueryError(f"unknown cu {cu_id!r}", unknown_ref=True)
    instrument = store.instruments.get(audience)
    if instrument is None:
        return {
            d: SurveyScore(cu_id, audience, d, None, 0) for d in DIMENSIONS
        }
    dim_of = {item.item_id: item.dimension for item in instrument.items}
    totals: dict[Dimension, float] = {d: 0.0 for d in DIMENSIONS}
    counts: dict[Dimension, int] = {d: 0 for d in DIMENSIONS}
    respondents: dict[Dimension, set[str]] = {d: set() for d in DIMENSIONS}
    for response in store.for_cu(cu_id, audience):
        if window is not None and not window.contains(response.ts):
            continue
        dimension = dim_of.get(response.item_id)
        if dimension is None:
            continue
        totals[dimension] += response.value
        counts[dimension] += 1
        respondents[dimension].add(response.respondent_id)
    scores: dict[Dimension, SurveyScore] = {}
    for dimension in DIMENSIONS:
        n = counts[dimension]
        scores[dimension] = SurveyScore(
            cu_id=cu_id,
            audience=audience,
            dimension=dimension,
            score=(totals[dimension] / n) if n else None,
            respondent_count=len(respondents[dimension]),
        )
    return scores
