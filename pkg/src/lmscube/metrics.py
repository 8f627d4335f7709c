"""The seven per-CU activity indicators computed over one time window.

All indicators are pure functions of an event slice plus the CU's
membership; recomputation always yields identical values.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from enum import Enum

from .errors import QueryError
from .events import Event, EventKind, EventStore, slice_window_or_empty
from .org import CourseUnit, OrgTree
from .windows import TimeWindow


class Dimension(str, Enum):
    """The seven assessment axes, in fixed reporting order."""

    DYNAMICS = "dynamics"
    INFORMATION = "information"
    SYNCHRONOUS = "synchronous"
    ASYNCHRONOUS = "asynchronous"
    CONTENT = "content"
    DELIVERY = "delivery"
    EVALUATION = "evaluation"


DIMENSIONS: tuple[Dimension, ...] = tuple(Dimension)

_INFORMATION_KINDS = (
    EventKind.ANNOUNCEMENT,
    EventKind.MESSAGE,
    EventKind.PROGRAMME_POST,
    EventKind.CALENDAR_ENTRY,
)
_DELIVERY_KINDS = (
    EventKind.SUBMISSION_INDIVIDUAL,
    EventKind.SUBMISSION_GROUP,
    EventKind.GROUP_PROGRESS_VIEW,
    EventKind.PLAGIARISM_CHECK,
)


@dataclass(frozen=True)
class DimensionProfile:
    cu_id: str
    window: TimeWindow
    active_user_count: int
    access_dynamics: float
    information_presence: int
    sync_forums_open: int
    sync_posts_per_active_user: float
    async_user_pct: float
    rich_content_count: int
    work_delivery_features: int
    evaluation_test_count: int
    no_activity: bool

    def scalar(self, dimension: Dimension) -> float:
        """The single value each dimension is classified on."""
        return {
            Dimension.DYNAMICS: self.access_dynamics,
            Dimension.INFORMATION: float(self.information_presence),
            Dimension.SYNCHRONOUS: self.sync_posts_per_active_user,
            Dimension.ASYNCHRONOUS: self.async_user_pct,
            Dimension.CONTENT: float(self.rich_content_count),
            Dimension.DELIVERY: float(self.work_delivery_features),
            Dimension.EVALUATION: float(self.evaluation_test_count),
        }[dimension]


def active_users(events: Sequence[Event], cu: CourseUnit) -> int:
    """Distinct CU members (students or teachers) with at least one ACCESS."""
    population = cu.population
    return len(
        {e.user_id for e in events if e.kind is EventKind.ACCESS and e.user_id in population}
    )


def access_dynamics(events: Sequence[Event], cu: CourseUnit, window: TimeWindow) -> float:
    """ACCESS events per week per active user; 0 when nobody was active."""
    active = active_users(events, cu)
    if active == 0:
        return 0.0
    hits = sum(1 for e in events if e.kind is EventKind.ACCESS)
    return hits / window.weeks / active


def information_presence(events: Sequence[Event]) -> int:
    """How many of the four information channels saw at least one event (0..4)."""
    used = {e.kind for e in events if e.kind in _INFORMATION_KINDS}
    return len(used)


def sync_comm(events: Sequence[Event], cu: CourseUnit) -> tuple[int, float]:
    """(open forums, forum posts per active user); the rate is 0 with no actives."""
    forums_open = sum(1 for e in events if e.kind is EventKind.FORUM_OPEN)
    active = active_users(events, cu)
    if active == 0:
        return forums_open, 0.0
    posts = sum(1 for e in events if e.kind is EventKind.FORUM_POST)
    return forums_open, posts / active


def async_comm(events: Sequence[Event], cu: CourseUnit) -> float:
    """Percentage of the CU population that used an asynchronous tool (0..100)."""
    population = cu.population
    if not population:
        return 0.0
    users = {
        e.user_id
        for e in events
        if e.kind is EventKind.ASYNC_TOOL_USE and e.user_id in population
    }
    return 100.0 * len(users) / len(population)


def rich_content(events: Sequence[Event]) -> int:
    return sum(
        1 for e in events if e.kind is EventKind.CONTENT_PUBLISH and e.attrs.get("rich") is True
    )


def work_delivery(events: Sequence[Event]) -> int:
    """How many of the four work-delivery feature classes were used (0..4)."""
    used = {e.kind for e in events if e.kind in _DELIVERY_KINDS}
    return len(used)


def evaluation_tests(events: Sequence[Event]) -> int:
    return sum(1 for e in events if e.kind is EventKind.TEST_ATTEMPT)


def dimension_profile(
    store: EventStore, tree: OrgTree, cu_id: str, window: TimeWindow
) -> DimensionProfile:
    """Compose every indicator over one consistent slice of a CU's events.

    A CU with zero active users yields the no-activity profile: the three
    per-user rates are forced to 0 and the flag is set, so downstream
    classification lands on the lowest level.
    """
    cu = tree.cus.get(cu_id)
    if cu is None:
        raise QueryError(f"unknown cu {cu_id!r}", unknown_ref=True)
    events = slice_window_or_empty(store, cu_id, window)

    active = active_users(events, cu)
    no_activity = active == 0
    forums_open, posts_rate = sync_comm(events, cu)
    return DimensionProfile(
        cu_id=cu_id,
        window=window,
        active_user_count=active,
        access_dynamics=0.0 if no_activity else access_dynamics(events, cu, window),
        information_presence=information_presence(events),
        sync_forums_open=forums_open,
        sync_posts_per_active_user=0.0 if no_activity else posts_rate,
        async_user_pct=0.0 if no_activity else async_comm(events, cu),
        rich_content_count=rich_content(events),
        work_delivery_features=work_delivery(events),
        evaluation_test_count=evaluation_tests(events),
        no_activity=no_activity,
    )
