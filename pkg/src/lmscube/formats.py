"""Reading and writing of the engine's file formats.

Two families, documented in docs/FORMATS.md:

* record files — UTF-8 JSON Lines with a mandatory schema header line,
  used for imports (org registry, event logs, survey responses, principals);
* tables — UTF-8 tab-separated values with optional ``#``-prefixed metadata
  lines before the header row, used for every export and API body.
"""

from __future__ import annotations

import json
from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from .errors import DataError


def schema_header(schema: str, version: int = 1) -> str:
    return json.dumps({"schema": schema, "version": version})


def read_records(
    lines: Iterable[str], schema: str, *, source: str = "<stream>"
) -> Iterator[tuple[int, dict[str, Any]]]:
    """Yield (line_number, record) from a JSONL stream, enforcing the header.

    The first non-blank line must be the schema header for ``schema``.
    Malformed data lines raise DataError naming the line; callers that
    tolerate bad rows should catch it per line via `parse_record_line`.
    """
    seen_header = False
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        if not seen_header:
            _check_header(line, schema, source, lineno)
            seen_header = True
            continue
        yield lineno, parse_record_line(line, source=source, lineno=lineno)
    if not seen_header:
        raise DataError(f"{source}: missing schema header line for {schema!r}")


def parse_record_line(line: str, *, source: str = "<stream>", lineno: int = 0) -> dict[str, Any]:
    try:
        record = json.loads(line)
    except json.JSONDecodeError as exc:
        raise DataError(
            f"{source}:{lineno}: malformed record at column {exc.colno}: {exc.msg}"
        ) from None
    if not isinstance(record, dict):
        raise DataError(f"{source}:{lineno}: record must be a JSON object")
    return record


def _check_header(line: str, schema: str, source: str, lineno: int) -> None:
    try:
        header = json.loads(line)
    except json.JSONDecodeError:
        raise DataError(
            f"{source}:{lineno}: first line must be the schema header "
            f'{schema_header(schema)!r}'
        ) from None
    if not isinstance(header, dict) or header.get("schema") != schema:
        raise DataError(
            f"{source}:{lineno}: expected schema {schema!r}, "
            f"got {header.get('schema') if isinstance(header, dict) else header!r}"
        )
    if "version" not in header:
        raise DataError(f"{source}:{lineno}: schema header missing version")


def write_records(
    path: Path, schema: str, records: Iterable[dict[str, Any]], *, version: int = 1
) -> int:
    """Write a JSONL record file with its schema header; returns record count."""
    count = 0
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        fh.write(schema_header(schema, version) + "\n")
        for record in records:
            fh.write(json.dumps(record, ensure_ascii=False, sort_keys=True) + "\n")
            count += 1
    return count


@dataclass(frozen=True)
class Table:
    """A delimited table: metadata pairs, a header row, and value rows."""

    meta: tuple[tuple[str, str], ...]
    columns: tuple[str, ...]
    rows: tuple[tuple[str, ...], ...]

    def meta_value(self, key: str) -> str | None:
        for k, v in self.meta:
            if k == key:
                return v
        return None


def format_cell(value: Any) -> str:
    """Canonical cell text: None -> empty (MISSING), bools lowered, floats exact.

    Floats use the shortest representation that parses back to the same
    value, so handing a table to the next pipeline stage never loses
    precision.
    """
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if value == int(value) and abs(value) < 1e15:
            return str(int(value))
        return repr(value)
    return str(value)


def render_table(
    columns: Sequence[str],
    rows: Iterable[Sequence[Any]],
    *,
    meta: Sequence[tuple[str, str]] = (),
) -> str:
    lines = [f"# {key}: {value}" for key, value in meta]
    lines.append("\t".join(columns))
    for row in rows:
        lines.append("\t".join(format_cell(cell) for cell in row))
    return "\n".join(lines) + "\n"


def write_table(
    path: Path,
    columns: Sequence[str],
    rows: Iterable[Sequence[Any]],
    *,
    meta: Sequence[tuple[str, str]] = (),
) -> None:
    path.write_text(render_table(columns, rows, meta=meta), encoding="utf-8")


def parse_table(text: str, *, source: str = "<table>") -> Table:
    meta: list[tuple[str, str]] = []
    columns: tuple[str, ...] | None = None
    rows: list[tuple[str, ...]] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        if line.startswith("#"):
            body = line.lstrip("#").strip()
            key, sep, value = body.partition(":")
            if sep:
                meta.append((key.strip(), value.strip()))
            continue
        cells = tuple(line.split("\t"))
        if columns is None:
            columns = cells
        else:
            if len(cells) != len(columns):
                raise DataError(
                    f"{source}:{lineno}: expected {len(columns)} cells, got {len(cells)}"
                )
            rows.append(cells)
    if columns is None:
        raise DataError(f"{source}: empty table")
    return Table(meta=tuple(meta), columns=columns, rows=tuple(rows))
