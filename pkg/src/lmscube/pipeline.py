"""Stage composition and the delimited intermediate artifacts between stages.

Every stage hands the next one a table file (profiles, levels, survey
scores, cells) so runs stay inspectable; this module owns those tables'
columns and round-trips, plus the frozen Snapshot the service answers from.
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from pathlib import Path

from .cube import Cube, build_cube
from .errors import DataError
from .events import EventStore, Reject, ingest_events
from .formats import Table, parse_table, read_records
from .maturity import Level, LevelProfile, ThresholdConfig, profile_levels
from .metrics import DIMENSIONS, Dimension, DimensionProfile, dimension_profile
from .org import OrgTree, build_org_tree
from .survey import (
    Audience,
    Instrument,
    ResponseStore,
    SurveyResponse,
    SurveyScore,
    default_instrument,
    ingest_responses_mixed,
    survey_scores,
)
from .windows import TimeWindow

ORG_SCHEMA = "lmscube/org"

PROFILE_COLUMNS = (
    "cu",
    "period",
    "active_users",
    "dynamics",
    "information",
    "forums_open",
    "posts_per_active_user",
    "async_pct",
    "rich_content",
    "delivery_features",
    "test_count",
    "no_activity",
)

LEVELS_COLUMNS = ("cu", "period", *(d.value for d in DIMENSIONS), "composite")

SURVEY_COLUMNS = ("cu", "audience", "dimension", "period", "score", "respondents")

REJECT_COLUMNS = ("line", "reason", "detail")


def load_org_file(path: Path) -> OrgTree:
    with path.open("r", encoding="utf-8") as fh:
        records = [r for _, r in read_records(fh, ORG_SCHEMA, source=str(path))]
    return build_org_tree(records)


def ingest_events_file(
    path: Path, tree: OrgTree, *, year_range: TimeWindow | None = None
) -> tuple[EventStore, list[Reject]]:
    with path.open("r", encoding="utf-8") as fh:
        return ingest_events(fh, tree, year_range=year_range, source=str(path))


def compute_profiles(
    store: EventStore, tree: OrgTree, periods: Sequence[TimeWindow]
) -> list[DimensionProfile]:
    profiles = []
    for cu_id in sorted(tree.cus):
        for period in periods:
            profiles.append(dimension_profile(store, tree, cu_id, period))
    return profiles


def classify_profiles(
    profiles: Iterable[DimensionProfile], thresholds: ThresholdConfig
) -> list[LevelProfile]:
    return [profile_levels(p, thresholds) for p in profiles]


def score_surveys(
    responses: ResponseStore,
    tree: OrgTree,
    periods: Sequence[TimeWindow],
) -> list[tuple[TimeWindow, SurveyScore]]:
    cells: list[tuple[TimeWindow, SurveyScore]] = []
    for cu_id in sorted(tree.cus):
        for period in periods:
            for audience in Audience:
                for score in survey_scores(responses, tree, cu_id, audience, period).values():
                    cells.append((period, score))
    return cells


# --- table round-trips -------------------------------------------------------


def profile_rows(profiles: Iterable[DimensionProfile]) -> list[tuple]:
    return [
        (
            p.cu_id,
            p.window.label,
            p.active_user_count,
            p.access_dynamics,
            p.information_presence,
            p.sync_forums_open,
            p.sync_posts_per_active_user,
            p.async_user_pct,
            p.rich_content_count,
            p.work_delivery_features,
            p.evaluation_test_count,
            p.no_activity,
        )
        for p in profiles
    ]


def parse_profiles_table(text: str, *, source: str = "<profiles>") -> list[DimensionProfile]:
    table = _expect_columns(parse_table(text, source=source), PROFILE_COLUMNS, source)
    profiles = []
    for row in table.rows:
        record = dict(zip(PROFILE_COLUMNS, row))
        profiles.append(
            DimensionProfile(
                cu_id=record["cu"],
                window=TimeWindow.parse(record["period"]),
                active_user_count=int(record["active_users"]),
                access_dynamics=float(record["dynamics"]),
                information_presence=int(record["information"]),
                sync_forums_open=int(record["forums_open"]),
                sync_posts_per_active_user=float(record["posts_per_active_user"]),
                async_user_pct=float(record["async_pct"]),
                rich_content_count=int(record["rich_content"]),
                work_delivery_features=int(record["delivery_features"]),
                evaluation_test_count=int(record["test_count"]),
                no_activity=record["no_activity"] == "true",
            )
        )
    return profiles


def level_rows(levels: Iterable[LevelProfile]) -> list[tuple]:
    return [
        (p.cu_id, p.window.label, *p.level_values(), p.composite) for p in levels
    ]


def parse_levels_table(text: str, *, source: str = "<levels>") -> list[LevelProfile]:
    table = _expect_columns(parse_table(text, source=source), LEVELS_COLUMNS, source)
    out = []
    for row in table.rows:
        record = dict(zip(LEVELS_COLUMNS, row))
        levels = {d: Level(int(record[d.value])) for d in DIMENSIONS}
        out.append(
            LevelProfile(
                cu_id=record["cu"],
                window=TimeWindow.parse(record["period"]),
                levels=levels,
                composite=float(record["composite"]),
            )
        )
    return out


def survey_rows(cells: Iterable[tuple[TimeWindow, SurveyScore]]) -> list[tuple]:
    return [
        (
            score.cu_id,
            score.audience.value,
            score.dimension.value,
            period.label,
            score.score,
            score.respondent_count,
        )
        for period, score in cells
    ]


def parse_survey_table(
    text: str, *, source: str = "<survey scores>"
) -> list[tuple[TimeWindow, SurveyScore]]:
    table = _expect_columns(parse_table(text, source=source), SURVEY_COLUMNS, source)
    cells = []
    for row in table.rows:
        record = dict(zip(SURVEY_COLUMNS, row))
        cells.append(
            (
                TimeWindow.parse(record["period"]),
                SurveyScore(
                    cu_id=record["cu"],
                    audience=Audience(record["audience"]),
                    dimension=Dimension(record["dimension"]),
                    score=float(record["score"]) if record["score"] else None,
                    respondent_count=int(record["respondents"]),
                ),
            )
        )
    return cells


def reject_rows(rejects: Iterable[Reject]) -> list[tuple]:
    return [(r.lineno, r.reason, r.detail) for r in rejects]


def _expect_columns(table: Table, columns: tuple[str, ...], source: str) -> Table:
    if table.columns != columns:
        raise DataError(f"{source}: unexpected columns {table.columns}, want {columns}")
    return table


# --- snapshots ---------------------------------------------------------------


@dataclass(frozen=True)
class Snapshot:
    """One consistently built, immutable world the read side answers from."""

    id: int
    tree: OrgTree
    store: EventStore
    responses: ResponseStore
    thresholds: ThresholdConfig
    periods: tuple[TimeWindow, ...]
    cube: Cube
    event_rejects: tuple[Reject, ...]
    survey_rejects: tuple[Reject, ...]


def build_snapshot(
    *,
    snapshot_id: int,
    tree: OrgTree,
    store: EventStore,
    responses: ResponseStore,
    thresholds: ThresholdConfig,
    periods: Sequence[TimeWindow],
    event_rejects: Sequence[Reject] = (),
    survey_rejects: Sequence[Reject] = (),
) -> Snapshot:
    profiles = compute_profiles(store, tree, periods)
    levels = classify_profiles(profiles, thresholds)
    survey_cells = score_surveys(responses, tree, periods)
    cube = build_cube(
        levels,
        survey_cells,
        tree,
        periods,
        provenance={"snapshot": str(snapshot_id)},
    )
    return Snapshot(
        id=snapshot_id,
        tree=tree,
        store=store,
        responses=responses,
        thresholds=thresholds,
        periods=tuple(periods),
        cube=cube,
        event_rejects=tuple(event_rejects),
        survey_rejects=tuple(survey_rejects),
    )


def build_snapshot_from_files(
    *,
    snapshot_id: int,
    org_path: Path,
    events_path: Path,
    response_paths: Sequence[Path] = (),
    thresholds: ThresholdConfig,
    periods: Sequence[TimeWindow],
    instruments: dict[Audience, Instrument] | None = None,
    year_range: TimeWindow | None = None,
) -> Snapshot:
    tree = load_org_file(org_path)
    store, event_rejects = ingest_events_file(events_path, tree, year_range=year_range)
    if instruments is None:
        instruments = {a: default_instrument(a) for a in Audience}
    responses: list[SurveyResponse] = []
    survey_rejects: list[Reject] = []
    for path in response_paths:
        accepted, rejects = ingest_responses_mixed(
            path.read_text(encoding="utf-8"), instruments, tree, source=str(path)
        )
        responses.extend(accepted)
        survey_rejects.extend(rejects)
    response_store = ResponseStore.build(instruments, responses)
    return build_snapshot(
        snapshot_id=snapshot_id,
        tree=tree,
        store=store,
        responses=response_store,
        thresholds=thresholds,
        periods=periods,
        event_rejects=event_rejects,
        survey_rejects=tuple(survey_rejects),
    )
