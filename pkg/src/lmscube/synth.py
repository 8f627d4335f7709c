"""Seeded synthetic campus data: org registry, event log, survey responses.

The generator is deterministic under a fixed seed and calibrated so that
(a) campus-wide usage statistics hit the configured daily-visit, pages-
per-visit and session-length targets, and (b) each CU's event mix
classifies into its intended integration level under the default
thresholds. Visits are single ACCESS events carrying session id, page
count, duration and mobile flag, so both "visits" and "pages seen"
readings can be derived from one log.
"""

from __future__ import annotations

import math
import random
from collections.abc import Sequence
from dataclasses import dataclass
from datetime import date, datetime, time, timedelta, timezone
from pathlib import Path
from typing import Any

import yaml

from .errors import ConfigError
from .events import EventKind, EventStore
from .formats import write_records
from .maturity import Cuts, DEFAULT_CUTS
from .metrics import Dimension
from .windows import TimeWindow, format_instant

GENPARAMS_SCHEMA = "lmscube/genparams"
ORG_SCHEMA = "lmscube/org"
EVENTS_SCHEMA = "lmscube/events"
RESPONSES_SCHEMA = "lmscube/responses"

# Weekly visit pattern (Mon..Sun), normalized to sum to 7 so the configured
# daily mean is preserved; weekends dip hard.
WEEK_PATTERN = (1.22, 1.25, 1.22, 1.18, 1.05, 0.60, 0.48)

# Intra-day activity profile per hour.
HOUR_WEIGHTS = (
    1, 1, 1, 1, 1, 2, 4, 8, 14, 20, 22, 20, 16, 18, 20, 20, 18, 14, 12, 10, 8, 6, 4, 2,
)

_INFO_CHANNELS = (
    EventKind.ANNOUNCEMENT,
    EventKind.MESSAGE,
    EventKind.PROGRAMME_POST,
    EventKind.CALENDAR_ENTRY,
)
_DELIVERY_CLASSES = (
    EventKind.SUBMISSION_INDIVIDUAL,
    EventKind.SUBMISSION_GROUP,
    EventKind.GROUP_PROGRESS_VIEW,
    EventKind.PLAGIARISM_CHECK,
)


@dataclass(frozen=True)
class TreeShape:
    schools: int = 3
    departments_per_school: int = 2


@dataclass(frozen=True)
class GenParams:
    seed: int = 2011
    n_users: int = 5864
    n_teachers: int = 300
    n_cus: int = 666
    days: int = 28
    start: date = date(2011, 10, 17)
    daily_visits_mean: float = 4000.0
    pages_per_visit_mean: float = 16.0
    session_seconds_mean: float = 473.0
    mobile_daily_peak: float = 150.0
    level_mix: tuple[float, float, float, float, float] = (0.2, 0.2, 0.2, 0.2, 0.2)

    @property
    def window(self) -> TimeWindow:
        start = datetime.combine(self.start, time(0, 0), timezone.utc)
        return TimeWindow(start, start + timedelta(days=self.days))


def validate_params(params: GenParams) -> None:
    problems: list[str] = []
    for name in ("n_users", "n_teachers", "n_cus", "days"):
        if getattr(params, name) <= 0:
            problems.append(f"{name} must be > 0")
    for name in ("daily_visits_mean", "pages_per_visit_mean", "session_seconds_mean"):
        if getattr(params, name) <= 0:
            problems.append(f"{name} must be > 0")
    if params.mobile_daily_peak < 0:
        problems.append("mobile_daily_peak must be >= 0")
    if params.n_teachers >= params.n_users:
        problems.append("more teachers than users is infeasible")
    if len(params.level_mix) != 5:
        problems.append("level_mix needs five proportions")
    elif any(p < 0 for p in params.level_mix) or abs(sum(params.level_mix) - 1.0) > 1e-9:
        problems.append(f"level_mix must be non-negative and sum to 1, got {params.level_mix}")
    if problems:
        raise ConfigError("infeasible generator params: " + "; ".join(problems))


@dataclass(frozen=True)
class GeneratedData:
    params: GenParams
    org_records: tuple[dict[str, Any], ...]
    event_records: tuple[dict[str, Any], ...]
    response_records: tuple[dict[str, Any], ...]
    intended_levels: dict[str, int]

    def write(self, outdir: Path) -> dict[str, Path]:
        outdir.mkdir(parents=True, exist_ok=True)
        paths = {
            "org": outdir / "org.jsonl",
            "events": outdir / "events.jsonl",
            "responses": outdir / "responses.jsonl",
        }
        write_records(paths["org"], ORG_SCHEMA, self.org_records)
        write_records(paths["events"], EVENTS_SCHEMA, self.event_records)
        write_records(paths["responses"], RESPONSES_SCHEMA, self.response_records)
        return paths


def _band_bounds(cuts: Cuts, level: int) -> tuple[float, float]:
    """[low, high) band of a level under four cuts; the top band is unbounded."""
    edges = (0.0, *cuts, math.inf)
    return edges[level - 1], edges[level]


def _band_mid(cuts: Cuts, level: int) -> float:
    low, high = _band_bounds(cuts, level)
    if math.isinf(high):
        return low * 1.5
    return (low + high) / 2.0


def _count_in_band(cuts: Cuts, level: int) -> int:
    """An integer count classifying into the level band (mid-band, safe)."""
    low, high = _band_bounds(cuts, level)
    if level == 1:
        return 0
    if math.isinf(high):
        return int(math.ceil(low * 1.5))
    value = int(round((low + high) / 2.0))
    return min(max(value, int(math.ceil(low))), int(math.ceil(high)) - 1)


def _allocate_levels(n: int, mix: Sequence[float]) -> list[int]:
    """Largest-remainder allocation of n CUs over the five levels."""
    raw = [n * p for p in mix]
    counts = [int(f) for f in raw]
    remainders = sorted(
        range(5), key=lambda i: (raw[i] - counts[i], -i), reverse=True
    )
    for i in remainders[: n - sum(counts)]:
        counts[i] += 1
    out: list[int] = []
    for level, count in enumerate(counts, start=1):
        out.extend([level] * count)
    return out


def _poisson(rng: random.Random, lam: float) -> int:
    if lam <= 0:
        return 0
    threshold = math.exp(-lam)
    k = 0
    p = 1.0
    while True:
        p *= rng.random()
        if p <= threshold:
            return k
        k += 1


class _Clock:
    """Draws event timestamps inside the run window, deterministically."""

    def __init__(self, rng: random.Random, start: date, days: int):
        self.rng = rng
        self.days = [start + timedelta(days=i) for i in range(days)]
        self.weights = [WEEK_PATTERN[d.weekday()] for d in self.days]

    def draw(self) -> datetime:
        day = self.rng.choices(self.days, weights=self.weights)[0]
        hour = self.rng.choices(range(24), weights=HOUR_WEIGHTS)[0]
        return datetime(
            day.year, day.month, day.day, hour,
            self.rng.randrange(60), self.rng.randrange(60), tzinfo=timezone.utc,
        )


def generate(params: GenParams, shape: TreeShape = TreeShape()) -> GeneratedData:
    """Produce org records, an event log and survey responses for one campus."""
    validate_params(params)
    rng = random.Random(params.seed)
    weeks = params.days / 7.0

    n_students = params.n_users - params.n_teachers
    teachers = [f"t{i:04d}" for i in range(1, params.n_teachers + 1)]
    students = [f"s{i:05d}" for i in range(1, n_students + 1)]
    cu_ids = [f"cu{i:04d}" for i in range(1, params.n_cus + 1)]

    org_records = _tree_records(params, shape, cu_ids)

    levels = _allocate_levels(params.n_cus, params.level_mix)
    rng.shuffle(levels)
    intended = dict(zip(cu_ids, levels))

    dyn_cuts = DEFAULT_CUTS[Dimension.DYNAMICS]
    dyn_target = {cu: _band_mid(dyn_cuts, intended[cu]) for cu in cu_ids}
    actives = _plan_active_users(params, cu_ids, dyn_target)

    # Members: active students first, then inactive padding; teachers cycle
    # through the pool so everyone teaches somewhere.
    student_cursor = 0
    teacher_cursor = 0
    cu_students: dict[str, list[str]] = {}
    cu_teachers: dict[str, list[str]] = {}
    for cu in cu_ids:
        enrolled = max(actives[cu] + max(2, actives[cu] // 2), 8)
        enrolled = min(enrolled, n_students)
        roster = [students[(student_cursor + k) % n_students] for k in range(enrolled)]
        student_cursor += enrolled
        cu_students[cu] = roster
        staff = 1 + (intended[cu] >= 4)
        cu_teachers[cu] = [
            teachers[(teacher_cursor + k) % params.n_teachers] for k in range(staff)
        ]
        teacher_cursor += staff

    _enroll_leftover_students(cu_students, students, cu_ids)

    for cu in cu_ids:
        for teacher_id in cu_teachers[cu]:
            org_records.append(
                {"type": "membership", "cu_id": cu, "person_id": teacher_id, "role": "teacher"}
            )
        for student_id in cu_students[cu]:
            org_records.append(
                {"type": "membership", "cu_id": cu, "person_id": student_id, "role": "student"}
            )

    clock = _Clock(rng, params.start, params.days)
    peak_daily = params.daily_visits_mean * max(WEEK_PATTERN)
    p_mobile = min(1.0, params.mobile_daily_peak / peak_daily) if peak_daily else 0.0

    event_records: list[dict[str, Any]] = []
    visit_counter = 0
    for cu in cu_ids:
        level = intended[cu]
        active = cu_students[cu][: actives[cu]]
        teacher_id = cu_teachers[cu][0]
        population = len(cu_students[cu]) + len(cu_teachers[cu])

        # Visits: a fixed per-CU total keeps the campus-wide budget exact.
        hits = max(int(round(dyn_target[cu] * len(active) * weeks)), len(active))
        for hit in range(hits):
            user = active[hit] if hit < len(active) else rng.choice(active)
            visit_counter += 1
            event_records.append(
                {
                    "ts": format_instant(clock.draw()),
                    "user": user,
                    "cu": cu,
                    "kind": EventKind.ACCESS.value,
                    "session": f"v{visit_counter:08d}",
                    "pages": 1 + _poisson(rng, params.pages_per_visit_mean - 1.0),
                    "seconds": max(1, round(rng.expovariate(1.0 / params.session_seconds_mean))),
                    "mobile": rng.random() < p_mobile,
                }
            )

        event_records.extend(
            _cu_feature_events(rng, clock, cu, level, active, teacher_id, population,
                               cu_students[cu], cu_teachers[cu])
        )

    response_records = _survey_records(rng, clock, cu_ids, intended, cu_students, cu_teachers)

    return GeneratedData(
        params=params,
        org_records=tuple(org_records),
        event_records=tuple(event_records),
        response_records=tuple(response_records),
        intended_levels=intended,
    )


def _tree_records(
    params: GenParams, shape: TreeShape, cu_ids: list[str]
) -> list[dict[str, Any]]:
    records: list[dict[str, Any]] = [
        {"type": "node", "kind": "university", "id": "univ", "name": "University"}
    ]
    dept_ids: list[str] = []
    for s in range(1, shape.schools + 1):
        school_id = f"school{s:02d}"
        records.append(
            {
                "type": "node",
                "kind": "school",
                "id": school_id,
                "name": f"School {s:02d}",
                "parent_id": "univ",
            }
        )
        for d in range(1, shape.departments_per_school + 1):
            dept_id = f"{school_id}-d{d:02d}"
            dept_ids.append(dept_id)
            records.append(
                {
                    "type": "node",
                    "kind": "department",
                    "id": dept_id,
                    "name": f"Department {s:02d}.{d:02d}",
                    "parent_id": school_id,
                }
            )
    for index, cu in enumerate(cu_ids):
        dept_id = dept_ids[index % len(dept_ids)]
        records.append(
            {
                "type": "node",
                "kind": "cu",
                "id": cu,
                "name": f"Course Unit {cu[2:]}",
                "parent_id": dept_id,
            }
        )
    return records


def _plan_active_users(
    params: GenParams, cu_ids: list[str], dyn_target: dict[str, float]
) -> dict[str, int]:
    """Per-CU active-user counts whose implied weekly visits hit the budget."""
    weekly_budget = params.daily_visits_mean * 7.0
    total_rate = sum(dyn_target[cu] for cu in cu_ids)
    base = max(1, int(weekly_budget / total_rate)) if total_rate else 1
    actives = {cu: base for cu in cu_ids}
    remainder = weekly_budget - base * total_rate
    # Greedily top up active users, biggest contributors first, so the
    # residual stays below the smallest per-user rate.
    by_rate = sorted(cu_ids, key=lambda cu: (-dyn_target[cu], cu))
    cap = base + 3
    progress = True
    while remainder > 0 and progress:
        progress = False
        for cu in by_rate:
            rate = dyn_target[cu]
            if rate <= 0 or rate > remainder or actives[cu] >= cap:
                continue
            actives[cu] += 1
            remainder -= rate
            progress = True
    return actives


def _enroll_leftover_students(
    cu_students: dict[str, list[str]], students: list[str], cu_ids: list[str]
) -> None:
    used = set()
    for roster in cu_students.values():
        used.update(roster)
    leftovers = [s for s in students if s not in used]
    for index, student in enumerate(leftovers):
        cu = cu_ids[index % len(cu_ids)]
        if student not in cu_students[cu]:
            cu_students[cu].append(student)


def _cu_feature_events(
    rng: random.Random,
    clock: _Clock,
    cu: str,
    level: int,
    active: list[str],
    teacher_id: str,
    population: int,
    students: list[str],
    teachers: list[str],
) -> list[dict[str, Any]]:
    out: list[dict[str, Any]] = []

    def emit(kind: EventKind, user: str, **attrs: Any) -> None:
        record = {
            "ts": format_instant(clock.draw()),
            "user": user,
            "cu": cu,
            "kind": kind.value,
        }
        record.update(attrs)
        out.append(record)

    for channel in _INFO_CHANNELS[: level - 1]:
        for _ in range(rng.randint(1, 3)):
            emit(channel, teacher_id)

    forums = max(level - 1, 1 if level >= 2 else 0)
    for f in range(forums):
        emit(EventKind.FORUM_OPEN, teacher_id, forum_id=f"{cu}-f{f + 1}")
    posts_rate = _band_mid(DEFAULT_CUTS[Dimension.SYNCHRONOUS], level)
    posts = int(round(posts_rate * len(active)))
    for p in range(posts):
        author = active[p % len(active)] if active else teacher_id
        emit(EventKind.FORUM_POST, author, forum_id=f"{cu}-f{(p % forums) + 1 if forums else 1}")

    async_users = _async_user_count(
        DEFAULT_CUTS[Dimension.ASYNCHRONOUS], level, population
    )
    members = students + teachers
    for member in members[:async_users]:
        for _ in range(rng.randint(1, 2)):
            emit(EventKind.ASYNC_TOOL_USE, member, tool="mail")

    rich = _count_in_band(DEFAULT_CUTS[Dimension.CONTENT], level)
    for _ in range(rich):
        emit(EventKind.CONTENT_PUBLISH, teacher_id, rich=True)
    for _ in range(rng.randint(0, 2)):
        emit(EventKind.CONTENT_PUBLISH, teacher_id, rich=False)

    for cls_index, cls in enumerate(_DELIVERY_CLASSES[: level - 1]):
        actor = teacher_id if cls in (
            EventKind.GROUP_PROGRESS_VIEW, EventKind.PLAGIARISM_CHECK
        ) else (active[0] if active else teacher_id)
        attrs = {"work_id": f"{cu}-w{cls_index + 1}"} if cls in (
            EventKind.SUBMISSION_INDIVIDUAL, EventKind.SUBMISSION_GROUP
        ) else {}
        emit(cls, actor, **attrs)

    tests = _count_in_band(DEFAULT_CUTS[Dimension.EVALUATION], level)
    for t in range(tests):
        taker = active[t % len(active)] if active else teacher_id
        emit(EventKind.TEST_ATTEMPT, taker, test_id=f"{cu}-q{(t % 3) + 1}")

    return out


def _async_user_count(cuts: Cuts, level: int, population: int) -> int:
    """Distinct async users putting the CU's percentage inside the level band."""
    low_pct, high_pct = _band_bounds(cuts, level)
    low = int(math.ceil(low_pct * population / 100.0))
    if math.isinf(high_pct):
        high = population
    else:
        high = int(math.ceil(high_pct * population / 100.0)) - 1
    if high < low:
        return min(low, population)
    target = int(round(_band_mid(cuts, level) * population / 100.0))
    return min(max(target, low), min(high, population))


def _survey_records(
    rng: random.Random,
    clock: _Clock,
    cu_ids: list[str],
    intended: dict[str, int],
    cu_students: dict[str, list[str]],
    cu_teachers: dict[str, list[str]],
) -> list[dict[str, Any]]:
    from .survey import Audience, default_instrument

    instruments = {a: default_instrument(a) for a in Audience}
    records: list[dict[str, Any]] = []

    def answer(respondent: str, cu: str, audience: Audience, level: int) -> None:
        for item in instruments[audience].items:
            value = min(5, max(1, round(rng.gauss(level, 0.7))))
            records.append(
                {
                    "respondent": respondent,
                    "cu": cu,
                    "item": item.item_id,
                    "value": value,
                    "ts": format_instant(clock.draw()),
                }
            )

    for cu in cu_ids:
        level = intended[cu]
        answer(cu_teachers[cu][0], cu, Audience.TEACHER, level)
        for student in cu_students[cu][: min(4, len(cu_students[cu]))]:
            answer(student, cu, Audience.STUDENT, level)
    return records


# --- usage summary ----------------------------------------------------------


@dataclass(frozen=True)
class DayUsage:
    day: date
    visits: int
    visitors: int
    pages: int
    mobile_hits: int


@dataclass(frozen=True)
class UsageStats:
    window: TimeWindow
    days: tuple[DayUsage, ...]
    total_visits: int
    mean_daily_visits: float
    mean_pages_per_visit: float
    mean_session_seconds: float
    peak_daily_visits: int
    peak_daily_visitors: int
    peak_daily_pages: int
    peak_daily_mobile: int
    peak_hourly_sessions: int

    def table_rows(self) -> list[tuple]:
        return [
            (d.day.isoformat(), d.visits, d.visitors, d.pages, d.mobile_hits)
            for d in self.days
        ]


USAGE_COLUMNS = ("date", "visits", "visitors", "pages", "mobile_hits")


def summarize(store: EventStore, window: TimeWindow) -> UsageStats:
    """Daily visit/visitor/page/mobile counts plus run-wide averages."""
    day_count = max(1, math.ceil((window.end - window.start) / timedelta(days=1)))
    first_day = window.start.date()
    per_day: list[dict[str, Any]] = [
        {"visits": 0, "visitors": set(), "pages": 0, "mobile": 0} for _ in range(day_count)
    ]
    total_pages = 0
    total_seconds = 0.0
    total_visits = 0
    hourly: dict[datetime, int] = {}
    for event in store.events:
        if event.kind is not EventKind.ACCESS or not window.contains(event.ts):
            continue
        index = (event.ts.date() - first_day).days
        if not 0 <= index < day_count:
            continue
        bucket = per_day[index]
        bucket["visits"] += 1
        bucket["visitors"].add(event.user_id)
        pages = int(event.attrs.get("pages", 1))
        bucket["pages"] += pages
        if event.attrs.get("mobile") is True:
            bucket["mobile"] += 1
        total_visits += 1
        total_pages += pages
        total_seconds += float(event.attrs.get("seconds", 0))
        hour = event.ts.replace(minute=0, second=0)
        hourly[hour] = hourly.get(hour, 0) + 1

    days = tuple(
        DayUsage(
            day=first_day + timedelta(days=i),
            visits=bucket["visits"],
            visitors=len(bucket["visitors"]),
            pages=bucket["pages"],
            mobile_hits=bucket["mobile"],
        )
        for i, bucket in enumerate(per_day)
    )
    return UsageStats(
        window=window,
        days=days,
        total_visits=total_visits,
        mean_daily_visits=total_visits / day_count,
        mean_pages_per_visit=(total_pages / total_visits) if total_visits else 0.0,
        mean_session_seconds=(total_seconds / total_visits) if total_visits else 0.0,
        peak_daily_visits=max((d.visits for d in days), default=0),
        peak_daily_visitors=max((d.visitors for d in days), default=0),
        peak_daily_pages=max((d.pages for d in days), default=0),
        peak_daily_mobile=max((d.mobile_hits for d in days), default=0),
        peak_hourly_sessions=max(hourly.values(), default=0),
    )


# --- params file ------------------------------------------------------------


def load_params(path: Path) -> GenParams:
    try:
        raw = yaml.safe_load(path.read_text(encoding="utf-8"))
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot read generator params {path}: {exc}") from exc
    if not isinstance(raw, dict) or raw.get("schema") != GENPARAMS_SCHEMA:
        raise ConfigError(f"{path}: expected schema {GENPARAMS_SCHEMA!r}")
    if "version" not in raw:
        raise ConfigError(f"{path}: refusing unversioned params file")
    kwargs: dict[str, Any] = {}
    fields_by_name = {f: t for f, t in GenParams.__annotations__.items()}
    for key, value in raw.items():
        if key in ("schema", "version"):
            continue
        if key not in fields_by_name:
            raise ConfigError(f"{path}: unknown param {key!r}")
        if key == "start":
            kwargs[key] = date.fromisoformat(str(value))
        elif key == "level_mix":
            kwargs[key] = tuple(float(v) for v in value)
        elif key in ("seed", "n_users", "n_teachers", "n_cus", "days"):
            kwargs[key] = int(value)
        else:
            kwargs[key] = float(value)
    params = GenParams(**kwargs)
    validate_params(params)
    return params
