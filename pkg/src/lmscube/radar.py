"""Radar datasets and their deterministic SVG rendering.

Seven axes in fixed order, five level rings, up to three provenance
series. Rendering is a pure function of the dataset: identical input
bytes give identical output bytes, and MISSING values leave gaps rather
than pretending to be a level.
"""

from __future__ import annotations

import math
from collections.abc import Mapping
from dataclasses import dataclass, field

from .access import Denial, Principal, authorize
from .cube import Cube, CubeQuery, Source, aggregate_node
from .errors import DataError, QueryError
from .formats import format_cell, parse_table, render_table
from .maturity import Level
from .metrics import DIMENSIONS, Dimension
from .org import NodeKind
from .windows import TimeWindow

AXIS_ORDER: tuple[Dimension, ...] = DIMENSIONS


@dataclass(frozen=True)
class RadarSeries:
    label: str
    values: tuple[float | None, ...]

    def __post_init__(self) -> None:
        if len(self.values) != len(AXIS_ORDER):
            raise ValueError(f"series {self.label!r}: expected {len(AXIS_ORDER)} values")
        for value in self.values:
            if value is not None and not 1.0 <= value <= 5.0:
                raise ValueError(f"series {self.label!r}: value {value} outside [1, 5]")

    @property
    def present_count(self) -> int:
        return sum(1 for v in self.values if v is not None)


@dataclass(frozen=True)
class RadarDataset:
    node_id: str
    node_kind: NodeKind
    period: TimeWindow
    series: tuple[RadarSeries, ...]
    axes: tuple[Dimension, ...] = AXIS_ORDER

    def __post_init__(self) -> None:
        if self.axes != AXIS_ORDER:
            raise ValueError("axis order is fixed; reordered datasets are rejected")
        if len(self.series) > 3:
            raise ValueError("at most three provenance series")
        labels = [s.label for s in self.series]
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate series labels {labels}")


def radar_dataset(
    cube: Cube, node_id: str, period: TimeWindow, principal: Principal
) -> RadarDataset | Denial:
    """Three provenance series for one node and period, behind authorization."""
    kind = cube.org.require_node(node_id)
    if period not in cube.periods:
        raise QueryError(f"unknown period {period.label}", unknown_ref=True)
    q = CubeQuery(org_scope=node_id, granularity=kind, periods=(period,))
    decision = authorize(principal, q, cube.org)
    if isinstance(decision, Denial):
        return decision
    if decision.node_filter is not None and node_id not in decision.node_filter:
        return Denial(reason="insufficient scope", scope=f"{kind.value} {node_id}")
    series = tuple(
        RadarSeries(
            label=source.value,
            values=tuple(
                aggregate_node(cube, node_id, dimension, source, period).score
                for dimension in AXIS_ORDER
            ),
        )
        for source in Source
    )
    return RadarDataset(node_id=node_id, node_kind=kind, period=period, series=series)


# --- machine-readable dataset table ---------------------------------------

DATASET_COLUMNS = ("series",) + tuple(d.value for d in AXIS_ORDER)


def dataset_table(dataset: RadarDataset) -> str:
    meta = [
        ("node", dataset.node_id),
        ("kind", dataset.node_kind.value),
        ("period", dataset.period.label),
        ("axes", ",".join(d.value for d in AXIS_ORDER)),
    ]
    rows = [(s.label, *s.values) for s in dataset.series]
    return render_table(DATASET_COLUMNS, rows, meta=meta)


def parse_dataset_table(text: str, *, source: str = "<dataset>") -> RadarDataset:
    table = parse_table(text, source=source)
    if table.columns != DATASET_COLUMNS:
        raise DataError(f"{source}: unexpected columns {table.columns}")
    node = table.meta_value("node")
    kind = table.meta_value("kind")
    period = table.meta_value("period")
    if not node or not kind or not period:
        raise DataError(f"{source}: missing node/kind/period metadata")
    series = tuple(
        RadarSeries(
            label=row[0],
            values=tuple(float(cell) if cell else None for cell in row[1:]),
        )
        for row in table.rows
    )
    return RadarDataset(
        node_id=node,
        node_kind=NodeKind(kind),
        period=TimeWindow.parse(period),
        series=series,
    )


# --- SVG rendering ---------------------------------------------------------


@dataclass(frozen=True)
class RadarStyle:
    """Documented default visual encoding; institutions may restyle freely."""

    size: int = 520
    outer_radius: float = 200.0
    ring_color: str = "#c8cdd4"
    axis_color: str = "#9aa1ab"
    text_color: str = "#333333"
    stroke_width: float = 2.0
    vertex_radius: float = 3.0
    series_colors: Mapping[str, str] = field(
        default_factory=lambda: {
            "automatic": "#2563eb",
            "teacher": "#d97706",
            "student": "#059669",
        }
    )
    fallback_color: str = "#555555"


DEFAULT_STYLE = RadarStyle()


def _fmt(value: float) -> str:
    return f"{value:.6f}"


def _vertex(center: float, radius: float, axis_index: int) -> tuple[float, float]:
    angle = -math.pi / 2 + axis_index * 2 * math.pi / len(AXIS_ORDER)
    return center + radius * math.cos(angle), center + radius * math.sin(angle)


def value_radius(value: float, outer_radius: float) -> float:
    """Linear level-to-radius mapping: level 1 at the innermost ring, 5 at the outer."""
    return (value - 1.0) / 4.0 * outer_radius


def render_svg(dataset: RadarDataset, style: RadarStyle = DEFAULT_STYLE) -> str:
    """Render the radar as a standalone SVG document (inline styles only)."""
    c = style.size / 2.0
    out: list[str] = []
    out.append(
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{style.size}" '
        f'height="{style.size}" viewBox="0 0 {style.size} {style.size}">'
    )
    out.append(
        f"<title>{dataset.node_kind.value} {_escape(dataset.node_id)} "
        f"{dataset.period.label}</title>"
    )
    out.append(f'<rect width="{style.size}" height="{style.size}" fill="#ffffff"/>')

    out.append('<g class="rings">')
    for level in Level:
        radius = value_radius(float(level), style.outer_radius)
        out.append(
            f'<circle cx="{_fmt(c)}" cy="{_fmt(c)}" r="{_fmt(radius)}" '
            f'fill="none" stroke="{style.ring_color}" stroke-width="1"/>'
        )
        out.append(
            f'<text x="{_fmt(c + 4.0)}" y="{_fmt(c - radius - 3.0)}" '
            f'font-family="sans-serif" font-size="10" fill="{style.text_color}">'
            f"{level.label}</text>"
        )
    out.append("</g>")

    out.append('<g class="axes">')
    for index, dimension in enumerate(AXIS_ORDER):
        x, y = _vertex(c, style.outer_radius, index)
        out.append(
            f'<line x1="{_fmt(c)}" y1="{_fmt(c)}" x2="{_fmt(x)}" y2="{_fmt(y)}" '
            f'stroke="{style.axis_color}" stroke-width="1"/>'
        )
        lx, ly = _vertex(c, style.outer_radius + 16.0, index)
        out.append(
            f'<text x="{_fmt(lx)}" y="{_fmt(ly)}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="11" fill="{style.text_color}">'
            f"{dimension.value}</text>"
        )
    out.append("</g>")

    for series in dataset.series:
        color = style.series_colors.get(series.label, style.fallback_color)
        out.append(f'<g class="series" data-source="{_escape(series.label)}">')
        path = _series_path(series, c, style.outer_radius)
        if path:
            out.append(
                f'<path class="series-line" d="{path}" fill="none" '
                f'stroke="{color}" stroke-width="{style.stroke_width}"/>'
            )
        for index, value in enumerate(series.values):
            if value is None:
                continue
            x, y = _vertex(c, value_radius(value, style.outer_radius), index)
            out.append(
                f'<circle class="vertex" data-axis="{AXIS_ORDER[index].value}" '
                f'data-value="{format_cell(value)}" cx="{_fmt(x)}" cy="{_fmt(y)}" '
                f'r="{style.vertex_radius}" fill="{color}"/>'
            )
        out.append("</g>")

    out.append('<g class="legend">')
    for slot, series in enumerate(dataset.series):
        color = style.series_colors.get(series.label, style.fallback_color)
        y = 16.0 + slot * 14.0
        out.append(
            f'<rect x="8" y="{_fmt(y - 8.0)}" width="10" height="10" fill="{color}"/>'
        )
        suffix = "" if series.present_count else " (no data)"
        out.append(
            f'<text x="22" y="{_fmt(y + 1.0)}" font-family="sans-serif" '
            f'font-size="11" fill="{style.text_color}">{_escape(series.label)}{suffix}</text>'
        )
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _series_path(series: RadarSeries, center: float, outer_radius: float) -> str:
    """Path segments joining cyclically adjacent present vertices.

    A fully present series closes into a polygon; gaps split it into open
    subpaths, and isolated vertices contribute no line at all.
    """
    n = len(series.values)
    present = [i for i in range(n) if series.values[i] is not None]
    if not present:
        return ""
    points = {
        i: _vertex(center, value_radius(series.values[i], outer_radius), i)  # type: ignore[arg-type]
        for i in present
    }
    if len(present) == n:
        coords = " L ".join(f"{_fmt(points[i][0])} {_fmt(points[i][1])}" for i in range(n))
        return f"M {coords} Z"
    segments: list[str] = []
    run: list[int] = []
    # Walk axes twice so runs crossing the 12 o'clock wrap join up; start the
    # walk just after a missing axis so no run is split artificially.
    start = next(i for i in range(n) if series.values[i] is None)
    for step in range(1, n + 1):
        index = (start + step) % n
        if series.values[index] is not None:
            run.append(index)
        else:
            if len(run) >= 2:
                segments.append(
                    "M " + " L ".join(f"{_fmt(points[i][0])} {_fmt(points[i][1])}" for i in run)
                )
            run = []
    if len(run) >= 2:
        segments.append(
            "M " + " L ".join(f"{_fmt(points[i][0])} {_fmt(points[i][1])}" for i in run)
        )
    return " ".join(segments)


def _escape(text: str) -> str:
    return (
        text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;").replace('"', "&quot;")
    )
