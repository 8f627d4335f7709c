"""Multidimensional score store over (org node, dimension, source, period).

Base cells live at CU grain; every aggregate is an unweighted mean over
descendant CUs' present cells (the CU is the atom, parents never average
their children's means). Scores stay continuous reals in [1, 5]; naming a
level again is a presentation concern.
"""

from __future__ import annotations

from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field, replace
from enum import Enum

from .errors import DataError, QueryError
from .maturity import LevelProfile
from .metrics import DIMENSIONS, Dimension
from .org import KIND_DEPTH, NodeKind, OrgTree, descendant_cus
from .survey import Audience, SurveyScore
from .windows import TimeWindow


class Source(str, Enum):
    AUTOMATIC = "automatic"
    TEACHER = "teacher"
    STUDENT = "student"


SOURCES: tuple[Source, ...] = tuple(Source)

_AUDIENCE_SOURCE = {Audience.TEACHER: Source.TEACHER, Audience.STUDENT: Source.STUDENT}

CellKey = tuple[str, Dimension, Source, TimeWindow]


@dataclass(frozen=True)
class Cube:
    periods: tuple[TimeWindow, ...]
    base: Mapping[CellKey, float]
    org: OrgTree
    provenance: Mapping[str, str] = field(default_factory=dict)

    def period_by_label(self, label: str) -> TimeWindow:
        for period in self.periods:
            if period.label == label:
                return period
        raise QueryError(f"unknown period {label!r}", unknown_ref=True)


@dataclass(frozen=True)
class CubeQuery:
    org_scope: str
    granularity: NodeKind
    dimensions: tuple[Dimension, ...] = DIMENSIONS
    sources: tuple[Source, ...] = SOURCES
    periods: tuple[TimeWindow, ...] = ()
    node_filter: frozenset[str] | None = None


@dataclass(frozen=True)
class CubeCell:
    node_id: str
    kind: NodeKind
    dimension: Dimension
    source: Source
    period: TimeWindow
    score: float | None
    cu_count: int


def build_cube(
    level_profiles: Iterable[LevelProfile],
    survey_cells: Iterable[tuple[TimeWindow, SurveyScore]],
    tree: OrgTree,
    periods: Sequence[TimeWindow],
    *,
    provenance: Mapping[str, str] | None = None,
) -> Cube:
    """Populate base cells from classified levels and survey scores.

    Inputs must reference CUs in the tree and windows from ``periods``;
    anything else is an inconsistency between pipeline stages and fails
    loudly. Survey MISSING scores simply produce no cell.
    """
    known_periods = set(periods)
    base: dict[CellKey, float] = {}
    for profile in level_profiles:
        if profile.cu_id not in tree.cus:
            raise DataError(f"level profile for CU absent from tree: {profile.cu_id!r}")
        if profile.window not in known_periods:
            raise DataError(
                f"level profile period {profile.window.label} not among cube periods"
            )
        for dimension in DIMENSIONS:
            key = (profile.cu_id, dimension, Source.AUTOMATIC, profile.window)
            base[key] = float(int(profile.levels[dimension]))
    for window, score in survey_cells:
        if score.cu_id not in tree.cus:
            raise DataError(f"survey score for CU absent from tree: {score.cu_id!r}")
        if window not in known_periods:
            raise DataError(f"survey score period {window.label} not among cube periods")
        if score.score is None:
            continue
        key = (score.cu_id, score.dimension, _AUDIENCE_SOURCE[score.audience], window)
        base[key] = float(score.score)
    return Cube(
        periods=tuple(periods),
        base=base,
        org=tree,
        provenance=dict(provenance or {}),
    )


def aggregate_node(
    cube: Cube,
    node_id: str,
    dimension: Dimension,
    source: Source,
    period: TimeWindow,
) -> CubeCell:
    """Unweighted mean over descendant CUs' present base cells.

    cu_count is the number of contributing CUs; a cell with nothing to
    contribute is explicitly MISSING (score None, cu_count 0).
    """
    kind = cube.org.require_node(node_id)
    if period not in cube.periods:
        raise QueryError(f"unknown period {period.label}", unknown_ref=True)
    total = 0.0
    count = 0
    for cu_id in descendant_cus(cube.org, node_id):
        value = cube.base.get((cu_id, dimension, source, period))
        if value is not None:
            total += value
            count += 1
    return CubeCell(
        node_id=node_id,
        kind=kind,
        dimension=dimension,
        source=source,
        period=period,
        score=(total / count) if count else None,
        cu_count=count,
    )


def result_nodes(tree: OrgTree, scope: str, granularity: NodeKind) -> tuple[str, ...]:
    """Nodes of the requested kind inside the scope's subtree, sorted by id."""
    scope_kind = tree.require_node(scope)
    if KIND_DEPTH[granularity] < KIND_DEPTH[scope_kind]:
        raise QueryError(
            f"granularity {granularity.value} above scope {scope!r} ({scope_kind.value})"
        )
    if granularity is scope_kind:
        return (scope,)
    found: list[str] = []
    stack = [scope]
    while stack:
        current = stack.pop()
        for child in tree.children[current]:
            if tree.kinds[child] is granularity:
                found.append(child)
            elif KIND_DEPTH[tree.kinds[child]] < KIND_DEPTH[granularity]:
                stack.append(child)
    return tuple(sorted(found))


def validate_query(cube: Cube, q: CubeQuery) -> CubeQuery:
    cube.org.require_node(q.org_scope)
    if not q.dimensions or not q.sources:
        raise QueryError("query selects no dimensions or no sources")
    if len(set(q.dimensions)) != len(q.dimensions) or len(set(q.sources)) != len(q.sources):
        raise QueryError("duplicate dimensions or sources in query")
    periods = q.periods or cube.periods
    for period in periods:
        if period not in cube.periods:
            raise QueryError(f"unknown period {period.label}", unknown_ref=True)
    # Fix selection order so results never depend on caller ordering.
    dims = tuple(d for d in DIMENSIONS if d in set(q.dimensions))
    sources = tuple(s for s in SOURCES if s in set(q.sources))
    return replace(q, dimensions=dims, sources=sources, periods=tuple(periods))


def query(cube: Cube, q: CubeQuery) -> list[CubeCell]:
    """One cell per (node at granularity under scope, dimension, source, period)."""
    q = validate_query(cube, q)
    nodes = result_nodes(cube.org, q.org_scope, q.granularity)
    if q.node_filter is not None:
        nodes = tuple(n for n in nodes if n in q.node_filter)
    cells: list[CubeCell] = []
    for node_id in nodes:
        for dimension in q.dimensions:
            for source in q.sources:
                for period in q.periods:
                    cells.append(aggregate_node(cube, node_id, dimension, source, period))
    return cells


def drill_down(
    cube: Cube,
    node_id: str,
    dimension: Dimension,
    source: Source,
    period: TimeWindow,
) -> list[CubeCell]:
    """One aggregated cell per child of an internal node."""
    kind = cube.org.require_node(node_id)
    if kind is NodeKind.CU:
        raise QueryError(f"cannot drill below leaf node {node_id!r}")
    return [
        aggregate_node(cube, child, dimension, source, period)
        for child in cube.org.children[node_id]
    ]


def cells_table_rows(cells: Iterable[CubeCell]) -> list[tuple]:
    return [
        (
            c.node_id,
            c.kind.value,
            c.dimension.value,
            c.source.value,
            c.period.label,
            c.score,
            c.cu_count,
        )
        for c in cells
    ]


CELLS_COLUMNS = ("node", "kind", "dimension", "source", "period", "score", "cu_count")
