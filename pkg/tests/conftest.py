"""Shared fixtures: small org trees, the scripted busy-CU log, line builders."""

from __future__ import annotations

import json
from datetime import datetime, timedelta, timezone

import pytest

from lmscube.events import EVENTS_SCHEMA, ingest_events
from lmscube.formats import schema_header
from lmscube.org import build_org_tree
from lmscube.windows import TimeWindow

BASE = datetime(2011, 10, 17, tzinfo=timezone.utc)


def ts(days: float = 0, hours: float = 0) -> str:
    stamp = BASE + timedelta(days=days, hours=hours)
    return stamp.strftime("%Y-%m-%dT%H:%M:%SZ")


def event_line(kind: str, user: str, cu: str = "c1", *, days: float = 0, hours: float = 9, **attrs):
    record = {"ts": ts(days, hours), "user": user, "cu": cu, "kind": kind}
    record.update(attrs)
    return json.dumps(record)


def node(kind: str, node_id: str, parent: str | None = None, name: str | None = None):
    record = {"type": "node", "kind": kind, "id": node_id, "name": name or node_id}
    if parent:
        record["parent_id"] = parent
    return record


def member(cu: str, person: str, role: str):
    return {"type": "membership", "cu_id": cu, "person_id": person, "role": role}


def tiny_org_records():
    """1 university, 1 school, 1 department, 2 CUs; t1 teaches both."""
    return [
        node("university", "u1", name="University"),
        node("school", "sc1", "u1"),
        node("department", "d1", "sc1"),
        node("cu", "c1", "d1"),
        node("cu", "c2", "d1"),
        member("c1", "t1", "teacher"),
        member("c2", "t1", "teacher"),
        member("c1", "s1", "student"),
        member("c1", "s2", "student"),
        member("c1", "s3", "student"),
        member("c1", "s4", "student"),
        member("c1", "s5", "student"),
        member("c2", "s1", "student"),
        member("c2", "s6", "student"),
    ]


@pytest.fixture
def tiny_tree():
    return build_org_tree(tiny_org_records())


def acl_org_records():
    """3 schools, 2 departments each, 20 CUs spread round-robin."""
    records = [node("university", "U", name="University")]
    depts = []
    for s in range(1, 4):
        school = f"S{s}"
        records.append(node("school", school, "U"))
        for d in range(1, 3):
            dept = f"S{s}D{d}"
            depts.append(dept)
            records.append(node("department", dept, school))
    for i in range(1, 21):
        cu = f"C{i:02d}"
        records.append(node("cu", cu, depts[(i - 1) % len(depts)]))
        records.append(member(cu, f"T{((i - 1) % 7) + 1}", "teacher"))
        for k in range(3):
            records.append(member(cu, f"P{i:02d}{k}", "student"))
    return records


@pytest.fixture
def acl_tree():
    return build_org_tree(acl_org_records())


# --- the scripted 40-event busy-CU log --------------------------------------

BUSY_WINDOW = TimeWindow(BASE, BASE + timedelta(days=14))

# Hand-computed expectations for the 40 events below (2-week window):
#   active users: s1, s2, s3, t1 -> 4
#   dynamics: 14 ACCESS / 2 weeks / 4 active = 1.75
#   information: announcements, messages, calendar -> 3 channels
#   synchronous: 2 forums open, 6 posts / 4 active = 1.5
#   asynchronous: {s1, s5, t1} of population 6 -> 50%
#   content: 3 rich publishes (2 non-rich ignored)
#   delivery: individual submissions + group progress -> 2 classes
#   evaluation: 2 test attempts
BUSY_EXPECTED = {
    "active_users": 4,
    "dynamics": 1.75,
    "information": 3,
    "forums_open": 2,
    "posts_per_active_user": 1.5,
    "async_pct": 50.0,
    "rich": 3,
    "delivery": 2,
    "tests": 2,
}


def busy_event_lines() -> list[str]:
    lines = []
    access = [("s1", 5), ("s2", 4), ("s3", 3), ("t1", 2)]
    day = 0
    for user, count in access:
        for i in range(count):
            lines.append(event_line("ACCESS", user, days=day % 13, hours=8 + i))
            day += 1
    lines.append(event_line("ANNOUNCEMENT", "t1", days=1))
    lines.append(event_line("ANNOUNCEMENT", "t1", days=8))
    lines.append(event_line("MESSAGE", "t1", days=2))
    lines.append(event_line("CALENDAR_ENTRY", "t1", days=3))
    lines.append(event_line("FORUM_OPEN", "t1", days=1, forum_id="f1"))
    lines.append(event_line("FORUM_OPEN", "t1", days=7, forum_id="f2"))
    for i, user in enumerate(["s1", "s1", "s1", "s2", "s2", "s4"]):
        lines.append(event_line("FORUM_POST", user, days=2 + i, forum_id="f1"))
    for i, user in enumerate(["s1", "s1", "s5", "t1"]):
        lines.append(event_line("ASYNC_TOOL_USE", user, days=4 + i, tool="mail"))
    for i in range(3):
        lines.append(event_line("CONTENT_PUBLISH", "t1", days=5 + i, rich=True))
    for i in range(2):
        lines.append(event_line("CONTENT_PUBLISH", "t1", days=9 + i, rich=False))
    lines.append(event_line("SUBMISSION_INDIVIDUAL", "s1", days=10, work_id="w1"))
    lines.append(event_line("SUBMISSION_INDIVIDUAL", "s2", days=11, work_id="w1"))
    lines.append(event_line("GROUP_PROGRESS_VIEW", "t1", days=12))
    lines.append(event_line("TEST_ATTEMPT", "s3", days=12, test_id="q1"))
    lines.append(event_line("TEST_ATTEMPT", "s5", days=13, test_id="q1"))
    assert len(lines) == 40
    return lines


@pytest.fixture
def busy_store(tiny_tree):
    lines = [schema_header(EVENTS_SCHEMA)] + busy_event_lines()
    store, rejects = ingest_events(lines, tiny_tree)
    assert not rejects
    return store
