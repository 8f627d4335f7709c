from __future__ import annotations

import json
import random
from datetime import timedelta

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lmscube.errors import DataError, QueryError
from lmscube.events import (
    EVENTS_SCHEMA,
    Event,
    EventKind,
    EventParseError,
    IngestAborted,
    ingest_events,
    parse_event_line,
    slice_window,
)
from lmscube.formats import schema_header
from lmscube.windows import TimeWindow, parse_instant

from .conftest import BASE, event_line, ts


def header() -> str:
    return schema_header(EVENTS_SCHEMA)


def test_parse_minimal_access_defaults_mobile_false():
    event = parse_event_line(
        '{"ts": "2011-10-17T09:00:00Z", "user": "u1", "cu": "c1", "kind": "ACCESS"}'
    )
    assert event.kind is EventKind.ACCESS
    assert event.attrs["mobile"] is False
    assert event.ts == parse_instant("2011-10-17T09:00:00Z")


def test_parse_content_publish_requires_rich():
    line = event_line("CONTENT_PUBLISH", "t1")
    with pytest.raises(EventParseError, match="missing attr 'rich'"):
        parse_event_line(line)


def test_parse_forum_post_round_trips_attrs():
    line = event_line("FORUM_POST", "s1", forum_id="f3")
    event = parse_event_line(line)
    assert event.attrs["forum_id"] == "f3"
    assert json.loads(json.dumps(event.to_record()))["forum_id"] == "f3"
    assert parse_event_line(json.dumps(event.to_record())) == event


def test_parse_errors_identify_the_fault():
    with pytest.raises(EventParseError, match="column"):
        parse_event_line("{not json", source="log", lineno=3)
    with pytest.raises(EventParseError, match="unknown kind"):
        parse_event_line(event_line("COFFEE_BREAK", "u1"))
    with pytest.raises(EventParseError, match="field 'ts'"):
        parse_event_line('{"ts": "yesterday", "user": "u", "cu": "c", "kind": "ACCESS"}')
    with pytest.raises(EventParseError, match="missing field 'user'"):
        parse_event_line('{"ts": "2011-10-17T09:00:00Z", "cu": "c", "kind": "ACCESS"}')


def test_parse_year_range_enforced():
    window = TimeWindow.parse("2011-09-01..2012-08-01")
    line = event_line("ACCESS", "s1")
    assert parse_event_line(line, year_range=window).cu_id == "c1"
    stale = '{"ts": "2009-01-01T00:00:00Z", "user": "s1", "cu": "c1", "kind": "ACCESS"}'
    with pytest.raises(EventParseError, match="outside academic year"):
        parse_event_line(stale, year_range=window)


def test_ingest_empty_stream(tiny_tree):
    store, rejects = ingest_events([header()], tiny_tree)
    assert len(store) == 0 and rejects == []


def test_ingest_requires_header(tiny_tree):
    with pytest.raises(DataError, match="expected schema"):
        ingest_events([event_line("ACCESS", "s1")], tiny_tree)
    with pytest.raises(DataError, match="missing schema header"):
        ingest_events([], tiny_tree)


def test_ingest_counts_and_unknown_cu_rejects(tiny_tree):
    lines = [header()]
    lines += [event_line("ACCESS", "s1", days=i) for i in range(10)]
    lines += [event_line("ACCESS", "s1", cu="ghost"), event_line("ACCESS", "s9", cu="ghost")]
    store, rejects = ingest_events(lines, tiny_tree)
    assert len(store) == 10
    assert [r.reason for r in rejects] == ["unknown cu", "unknown cu"]


def test_ingest_rejects_non_members(tiny_tree):
    lines = [header(), event_line("ACCESS", "s6", cu="c1")]  # s6 enrolled in c2 only
    store, rejects = ingest_events(lines, tiny_tree)
    assert len(store) == 0
    assert rejects[0].reason == "user not in cu"


def test_ingest_sorts_shuffled_lines_per_cu(tiny_tree):
    rng = random.Random(42)
    offsets = list(range(1000))
    rng.shuffle(offsets)
    lines = [header()]
    for i, minutes in enumerate(offsets):
        cu = "c1" if i % 2 else "c2"
        lines.append(event_line("ACCESS", "s1", cu=cu, days=0, hours=minutes / 60))
    store, rejects = ingest_events(lines, tiny_tree)
    assert not rejects and len(store) == 1000
    for cu in ("c1", "c2"):
        stamps = [e.ts for e in store.cu_events(cu)]
        assert stamps == sorted(stamps)


def test_ingest_aborts_on_broken_stream(tiny_tree):
    def lines():
        yield header()
        yield event_line("ACCESS", "s1")
        raise OSError("disk on fire")

    with pytest.raises(IngestAborted, match="partial ingest: 1 accepted"):
        ingest_events(lines(), tiny_tree)


def test_slice_window_half_open(tiny_tree):
    lines = [header()]
    for day in (1, 7, 8):
        lines.append(event_line("ACCESS", "s1", days=day, hours=0))
    store, _ = ingest_events(lines, tiny_tree)
    window = TimeWindow(BASE + timedelta(days=1), BASE + timedelta(days=8))
    sliced = slice_window(store, "c1", window)
    assert [e.ts for e in sliced] == [BASE + timedelta(days=1), BASE + timedelta(days=7)]
    # an event exactly at window.end stays out
    at_end = TimeWindow(BASE, BASE + timedelta(days=8))
    assert len(slice_window(store, "c1", at_end)) == 2
    nothing = TimeWindow(BASE + timedelta(days=2), BASE + timedelta(days=3))
    assert slice_window(store, "c1", nothing) == ()


def test_slice_unknown_cu(busy_store):
    with pytest.raises(QueryError, match="no events for cu"):
        slice_window(busy_store, "ghost", TimeWindow.parse("2011-10-17..2011-10-18"))


def test_inverted_window_rejected():
    with pytest.raises(ValueError, match="inverted window"):
        TimeWindow(BASE, BASE)


def test_full_range_slice_returns_all_accepted(tiny_tree, busy_store):
    window = TimeWindow.parse("2011-10-01..2011-12-01")
    sliced = slice_window(busy_store, "c1", window)
    assert sorted(sliced, key=lambda e: e.ts) == list(busy_store.cu_events("c1"))
    assert len(sliced) == 40


def test_partition_slices_reproduce_full_slice(busy_store):
    full = TimeWindow.parse("2011-10-17..2011-10-31")
    cut = BASE + timedelta(days=5, hours=3)
    left = slice_window(busy_store, "c1", TimeWindow(full.start, cut))
    right = slice_window(busy_store, "c1", TimeWindow(cut, full.end))
    assert list(left) + list(right) == list(slice_window(busy_store, "c1", full))


@settings(max_examples=200, deadline=None)
@given(st.text(max_size=120))
def test_parse_is_total_over_arbitrary_lines(junk):
    try:
        event = parse_event_line(junk)
    except EventParseError:
        return
    assert isinstance(event, Event)


def test_store_from_events_is_stable_under_input_order(tiny_tree):
    lines = [header()] + [event_line("ACCESS", "s1", days=i % 5, hours=i % 7) for i in range(50)]
    store_a, _ = ingest_events(lines, tiny_tree)
    reordered = [lines[0]] + list(reversed(lines[1:]))
    store_b, _ = ingest_events(reordered, tiny_tree)
    assert [e.ts for e in store_a.cu_events("c1")] == [e.ts for e in store_b.cu_events("c1")]
