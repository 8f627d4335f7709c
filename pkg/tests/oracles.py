"""Independent brute-force oracles for the acceptance suite.

Everything here works on raw record dicts with plain loops and if-chains,
on purpose: these functions must not share code with the library paths
they check.
"""

from __future__ import annotations

from datetime import datetime, timezone

INFO_KINDS = ("ANNOUNCEMENT", "MESSAGE", "PROGRAMME_POST", "CALENDAR_ENTRY")
DELIVERY_KINDS = (
    "SUBMISSION_INDIVIDUAL",
    "SUBMISSION_GROUP",
    "GROUP_PROGRESS_VIEW",
    "PLAGIARISM_CHECK",
)
DIM_ORDER = (
    "dynamics",
    "information",
    "synchronous",
    "asynchronous",
    "content",
    "delivery",
    "evaluation",
)


def parse_ts(text):
    return datetime.fromisoformat(text.replace("Z", "+00:00")).astimezone(timezone.utc)


def slice_raw(raw_events, cu, start, end):
    out = []
    for record in raw_events:
        if record["cu"] != cu:
            continue
        stamp = parse_ts(record["ts"])
        if start <= stamp < end:
            out.append(record)
    return out


def naive_indicators(raw_events, cu, students, teachers, start, end):
    """All seven scalars for one CU and window, straight off the raw records.

    Rows from users holding no role in the CU are dropped first: ingestion
    rejects them, so no indicator may ever see them.
    """
    members = set(students) | set(teachers)
    rows = [r for r in slice_raw(raw_events, cu, start, end) if r["user"] in members]
    weeks = (end - start).total_seconds() / (7 * 24 * 3600)

    active = set()
    hits = 0
    for r in rows:
        if r["kind"] == "ACCESS" and r["user"] in members:
            active.add(r["user"])
    for r in rows:
        if r["kind"] == "ACCESS":
            hits += 1
    if len(active) == 0:
        dynamics = 0.0
    else:
        dynamics = hits / weeks / len(active)

    channels = set()
    for r in rows:
        if r["kind"] in INFO_KINDS:
            channels.add(r["kind"])

    forums = 0
    posts = 0
    for r in rows:
        if r["kind"] == "FORUM_OPEN":
            forums += 1
        if r["kind"] == "FORUM_POST":
            posts += 1
    posts_rate = 0.0 if len(active) == 0 else posts / len(active)

    async_users = set()
    for r in rows:
        if r["kind"] == "ASYNC_TOOL_USE" and r["user"] in members:
            async_users.add(r["user"])
    async_pct = 0.0 if not members else 100.0 * len(async_users) / len(members)

    rich = 0
    for r in rows:
        if r["kind"] == "CONTENT_PUBLISH" and r.get("rich") is True:
            rich += 1

    delivery = set()
    for r in rows:
        if r["kind"] in DELIVERY_KINDS:
            delivery.add(r["kind"])

    tests = 0
    for r in rows:
        if r["kind"] == "TEST_ATTEMPT":
            tests += 1

    no_activity = len(active) == 0
    return {
        "dynamics": dynamics,
        "information": float(len(channels)),
        "synchronous": 0.0 if no_activity else posts_rate,
        "asynchronous": 0.0 if no_activity else async_pct,
        "content": float(rich),
        "delivery": float(len(delivery)),
        "evaluation": float(tests),
        "no_activity": no_activity,
    }


def naive_classify(value, cuts):
    c1, c2, c3, c4 = cuts
    if value < c1:
        return 1
    if value < c2:
        return 2
    if value < c3:
        return 3
    if value < c4:
        return 4
    return 5


def naive_cu_level(raw_events, cu, students, teachers, start, end, cuts_by_dim):
    """Per-dimension levels for one CU: indicators then if-chain classification."""
    ind = naive_indicators(raw_events, cu, students, teachers, start, end)
    levels = {}
    for dim in DIM_ORDER:
        if ind["no_activity"]:
            levels[dim] = 1
        else:
            levels[dim] = naive_classify(ind[dim], cuts_by_dim[dim])
    return levels


def naive_survey_score(raw_responses, cu, audience_items, holders, start, end):
    """Pooled mean per dimension from raw response records, None when empty.

    audience_items maps item_id -> dimension name for one instrument;
    holders is the set of respondents holding the matching role in the CU.
    Later timestamps win per (respondent, item).
    """
    latest = {}
    for order, r in enumerate(raw_responses):
        if r["cu"] != cu or r["item"] not in audience_items:
            continue
        if r["respondent"] not in holders:
            continue
        value = int(r["value"])
        if value < 1 or value > 5:
            continue
        key = (r["respondent"], r["item"])
        stamp = parse_ts(r["ts"])
        if key not in latest or stamp >= latest[key][0]:
            latest[key] = (stamp, order, value, r["item"])
    sums = {dim: 0.0 for dim in DIM_ORDER}
    counts = {dim: 0 for dim in DIM_ORDER}
    for stamp, _, value, item in latest.values():
        if not (start <= stamp < end):
            continue
        dim = audience_items[item]
        sums[dim] += value
        counts[dim] += 1
    return {
        dim: (sums[dim] / counts[dim] if counts[dim] else None) for dim in DIM_ORDER
    }


def naive_node_mean(per_cu_values, cu_ids):
    """Unweighted mean over present per-CU values; (None, 0) when all missing."""
    values = [per_cu_values[cu] for cu in cu_ids if per_cu_values.get(cu) is not None]
    if not values:
        return None, 0
    return sum(values) / len(values), len(values)
