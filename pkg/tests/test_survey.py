from __future__ import annotations

import json
import random

import pytest

from lmscube.errors import ConfigError
from lmscube.formats import schema_header
from lmscube.metrics import DIMENSIONS, Dimension
from lmscube.survey import (
    RESPONSES_SCHEMA,
    Audience,
    ResponseStore,
    default_instrument,
    ingest_responses,
    ingest_responses_mixed,
    parse_instrument,
    survey_scores,
)
from lmscube.windows import TimeWindow

from .conftest import ts


def instrument_doc(audience="student", items=None):
    if items is None:
        items = [
            {"id": f"q{i}", "prompt": f"prompt {i}", "dimension": d.value}
            for i, d in enumerate(DIMENSIONS, start=1)
        ]
    return {"schema": "lmscube/instrument", "version": 1, "audience": audience, "items": items}


def response_line(respondent, item, value, cu="c1", days=1):
    return json.dumps(
        {"respondent": respondent, "cu": cu, "item": item, "value": value, "ts": ts(days)}
    )


def responses_text(lines):
    return "\n".join([schema_header(RESPONSES_SCHEMA)] + lines)


def test_instrument_minimal_coverage_ok():
    instrument = parse_instrument(instrument_doc())
    assert len(instrument.items) == 7
    assert instrument.audience is Audience.STUDENT


def test_instrument_uncovered_dimension_named():
    items = [
        {"id": f"q{i}", "prompt": "p", "dimension": d.value}
        for i, d in enumerate(DIMENSIONS[:-1], start=1)
    ]
    with pytest.raises(ConfigError, match="zero items: evaluation"):
        parse_instrument(instrument_doc(items=items))


def test_instrument_duplicate_item_and_bad_scale():
    doc = instrument_doc()
    doc["items"].append({"id": "q1", "prompt": "again", "dimension": "dynamics"})
    with pytest.raises(ConfigError, match="duplicate item_id"):
        parse_instrument(doc)
    doc = instrument_doc()
    doc["scale"] = [0, 10]
    with pytest.raises(ConfigError, match="bad scale"):
        parse_instrument(doc)


def test_default_instruments_load_and_preserve_file_order():
    for audience in Audience:
        instrument = default_instrument(audience)
        assert len(instrument.items) == 14
        covered = [item.dimension for item in instrument.items]
        assert covered == sorted(covered, key=list(DIMENSIONS).index)


def test_ingest_accepts_enrolled_student(tiny_tree):
    instrument = parse_instrument(instrument_doc())
    accepted, rejects = ingest_responses(
        responses_text([response_line("s1", "q1", 4)]), instrument, tiny_tree
    )
    assert len(accepted) == 1 and not rejects
    assert accepted[0].audience is Audience.STUDENT


def test_ingest_rejects_wrong_audience_and_scale(tiny_tree):
    instrument = parse_instrument(instrument_doc())
    text = responses_text(
        [
            response_line("t1", "q1", 4),  # teacher answering student instrument
            response_line("s1", "q1", 6),  # scale violation
            response_line("s1", "nope", 3),  # unknown item
            response_line("s1", "q1", 3, cu="ghost"),  # unknown cu
        ]
    )
    accepted, rejects = ingest_responses(text, instrument, tiny_tree)
    assert not accepted
    assert [r.reason for r in rejects] == [
        "audience mismatch",
        "scale violation",
        "unknown item",
        "unknown cu",
    ]


def test_ingest_csv_with_header_row(tiny_tree):
    instrument = parse_instrument(instrument_doc())
    text = "respondent,cu,item,value,ts\n" + "\n".join(
        f"s{i},c1,q1,{i},{ts(1)}" for i in (1, 2, 3)
    )
    accepted, rejects = ingest_responses(text, instrument, tiny_tree)
    assert len(accepted) == 3 and not rejects


def test_mixed_file_routes_by_item(tiny_tree):
    instruments = {a: default_instrument(a) for a in Audience}
    text = responses_text(
        [
            response_line("t1", "t_dyn_1", 5),
            response_line("s1", "s_dyn_1", 3),
            response_line("s1", "t_dyn_1", 3),  # student answering teacher item
        ]
    )
    accepted, rejects = ingest_responses_mixed(text, instruments, tiny_tree)
    assert {(r.respondent_id, r.audience) for r in accepted} == {
        ("t1", Audience.TEACHER),
        ("s1", Audience.STUDENT),
    }
    assert [r.reason for r in rejects] == ["audience mismatch"]


def test_scores_simple_mean(tiny_tree):
    instrument = parse_instrument(instrument_doc())
    text = responses_text(
        [response_line(f"s{i}", "q1", v) for i, v in ((1, 4), (2, 5), (3, 3))]
    )
    accepted, _ = ingest_responses(text, instrument, tiny_tree)
    store = ResponseStore.build({Audience.STUDENT: instrument}, accepted)
    scores = survey_scores(store, tiny_tree, "c1", Audience.STUDENT)
    assert scores[Dimension.DYNAMICS].score == pytest.approx(4.0)
    assert scores[Dimension.DYNAMICS].respondent_count == 3


def test_missing_dimension_is_explicit(tiny_tree):
    instrument = parse_instrument(instrument_doc())
    accepted, _ = ingest_responses(
        responses_text([response_line("s1", "q1", 4)]), instrument, tiny_tree
    )
    store = ResponseStore.build({Audience.STUDENT: instrument}, accepted)
    scores = survey_scores(store, tiny_tree, "c1", Audience.STUDENT)
    missing = scores[Dimension.EVALUATION]
    assert missing.score is None and missing.respondent_count == 0


def test_pooled_mean_across_items():
    from lmscube.org import build_org_tree

    from .conftest import tiny_org_records

    tree = build_org_tree(tiny_org_records())
    items = instrument_doc()["items"] + [
        {"id": "q1b", "prompt": "second dynamics item", "dimension": "dynamics"}
    ]
    instrument = parse_instrument(instrument_doc(items=items))
    text = responses_text(
        [
            response_line("s1", "q1", 2),
            response_line("s2", "q1", 4),
            response_line("s3", "q1b", 5),
        ]
    )
    accepted, _ = ingest_responses(text, instrument, tree)
    store = ResponseStore.build({Audience.STUDENT: instrument}, accepted)
    score = survey_scores(store, tree, "c1", Audience.STUDENT)[Dimension.DYNAMICS]
    assert score.score == pytest.approx((2 + 4 + 5) / 3, abs=1e-9)
    assert score.respondent_count == 3


def test_resubmission_later_timestamp_wins(tiny_tree):
    instrument = parse_instrument(instrument_doc())
    text = responses_text(
        [response_line("s1", "q1", 1, days=5), response_line("s1", "q1", 5, days=9)]
    )
    accepted, _ = ingest_responses(text, instrument, tiny_tree)
    store = ResponseStore.build({Audience.STUDENT: instrument}, accepted)
    score = survey_scores(store, tiny_tree, "c1", Audience.STUDENT)[Dimension.DYNAMICS]
    assert score.score == pytest.approx(5.0)
    assert score.respondent_count == 1


def test_scores_invariant_under_response_reordering(tiny_tree):
    instrument = parse_instrument(instrument_doc())
    lines = [response_line(f"s{(i % 5) + 1}", f"q{(i % 7) + 1}", (i % 5) + 1, days=i % 10) for i in range(40)]
    accepted, _ = ingest_responses(responses_text(lines), instrument, tiny_tree)
    shuffled = accepted[:]
    random.Random(3).shuffle(shuffled)
    a = ResponseStore.build({Audience.STUDENT: instrument}, accepted)
    b = ResponseStore.build({Audience.STUDENT: instrument}, shuffled)
    for dimension in DIMENSIONS:
        sa = survey_scores(a, tiny_tree, "c1", Audience.STUDENT)[dimension]
        sb = survey_scores(b, tiny_tree, "c1", Audience.STUDENT)[dimension]
        assert sa == sb


def test_adding_mean_valued_response_keeps_mean(tiny_tree):
    instrument = parse_instrument(instrument_doc())
    text = responses_text(
        [response_line("s1", "q1", 2), response_line("s2", "q1", 4)]
    )
    accepted, _ = ingest_responses(text, instrument, tiny_tree)
    store = ResponseStore.build({Audience.STUDENT: instrument}, accepted)
    before = survey_scores(store, tiny_tree, "c1", Audience.STUDENT)[Dimension.DYNAMICS].score
    extra, _ = ingest_responses(
        responses_text([response_line("s3", "q1", 3)]), instrument, tiny_tree
    )
    grown = ResponseStore.build({Audience.STUDENT: instrument}, accepted + extra)
    after = survey_scores(grown, tiny_tree, "c1", Audience.STUDENT)[Dimension.DYNAMICS].score
    assert after == pytest.approx(before, abs=1e-9)


def test_window_filtering(tiny_tree):
    instrument = parse_instrument(instrument_doc())
    text = responses_text(
        [response_line("s1", "q1", 5, days=2), response_line("s2", "q1", 1, days=40)]
    )
    accepted, _ = ingest_responses(text, instrument, tiny_tree)
    store = ResponseStore.build({Audience.STUDENT: instrument}, accepted)
    window = TimeWindow.parse("2011-10-17..2011-10-31")
    score = survey_scores(store, tiny_tree, "c1", Audience.STUDENT, window)[Dimension.DYNAMICS]
    assert score.score == pytest.approx(5.0) and score.respondent_count == 1


def test_scores_always_in_range_when_present(tiny_tree):
    instrument = parse_instrument(instrument_doc())
    lines = [response_line(f"s{(i % 5) + 1}", f"q{(i % 7) + 1}", (i * 7 % 5) + 1) for i in range(70)]
    accepted, _ = ingest_responses(responses_text(lines), instrument, tiny_tree)
    store = ResponseStore.build({Audience.STUDENT: instrument}, accepted)
    for score in survey_scores(store, tiny_tree, "c1", Audience.STUDENT).values():
        if score.score is not None:
            assert 1.0 <= score.score <= 5.0
            assert score.respondent_count > 0
        else:
            assert score.respondent_count == 0
