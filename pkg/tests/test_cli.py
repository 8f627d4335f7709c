from __future__ import annotations

import subprocess
import sys

import pytest

from lmscube.cli import build_parser, main
from lmscube.formats import parse_table

WINDOW = "2011-10-17..2011-11-14"


def run(*argv):
    return main([str(a) for a in argv])


@pytest.fixture(scope="module")
def pipeline_dir(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    data = root / "data"
    assert (
        run(
            "synth", "--out", data, "--seed", 12, "--users", 120, "--teachers", 12,
            "--cus", 10, "--days", 28, "--visits-mean", 70,
            "--schools", 2, "--depts-per-school", 2,
        )
        == 0
    )
    assert run(
        "ingest", "--org", data / "org.jsonl", "--events", data / "events.jsonl",
        "--out", root / "ingest",
    ) == 0
    assert run(
        "compute", "--org", data / "org.jsonl", "--events", data / "events.jsonl",
        "--window", WINDOW, "--out", root / "profiles.tsv",
    ) == 0
    assert run(
        "classify", "--profiles", root / "profiles.tsv", "--out", root / "levels.tsv",
    ) == 0
    assert run(
        "survey-import", "--org", data / "org.jsonl",
        "--responses", data / "responses.jsonl", "--window", WINDOW,
        "--out", root / "survey",
    ) == 0
    return root


def test_pipeline_artifacts_exist(pipeline_dir):
    for name in (
        "data/org.jsonl",
        "data/events.jsonl",
        "data/responses.jsonl",
        "data/thresholds.yaml",
        "ingest/rejects.tsv",
        "ingest/accepted.jsonl",
        "profiles.tsv",
        "levels.tsv",
        "survey/survey_scores.tsv",
    ):
        assert (pipeline_dir / name).exists(), name


def test_profiles_have_one_row_per_cu(pipeline_dir):
    table = parse_table((pipeline_dir / "profiles.tsv").read_text(encoding="utf-8"))
    assert len(table.rows) == 10
    assert table.columns[0] == "cu"


def test_query_writes_cells(pipeline_dir):
    out = pipeline_dir / "cells.tsv"
    code = run(
        "query", "--org", pipeline_dir / "data/org.jsonl",
        "--levels", pipeline_dir / "levels.tsv",
        "--survey", pipeline_dir / "survey/survey_scores.tsv",
        "--scope", "univ", "--granularity", "department", "--out", out,
    )
    assert code == 0
    table = parse_table(out.read_text(encoding="utf-8"))
    assert len(table.rows) == 4 * 7 * 3  # depts x dims x sources


def test_radar_writes_svg_and_dataset(pipeline_dir):
    out = pipeline_dir / "radar" / "univ.svg"
    code = run(
        "radar", "--org", pipeline_dir / "data/org.jsonl",
        "--levels", pipeline_dir / "levels.tsv",
        "--survey", pipeline_dir / "survey/survey_scores.tsv",
        "--node", "univ", "--out", out,
    )
    assert code == 0
    svg = out.read_text(encoding="utf-8")
    assert svg.startswith("<svg") and svg.count('class="vertex"') >= 14
    dataset = parse_table(out.with_suffix(".tsv").read_text(encoding="utf-8"))
    assert [row[0] for row in dataset.rows] == ["automatic", "teacher", "student"]


def test_usage_report_writes_table_and_figure(pipeline_dir):
    out = pipeline_dir / "usage"
    code = run(
        "usage-report", "--org", pipeline_dir / "data/org.jsonl",
        "--events", pipeline_dir / "data/events.jsonl",
        "--window", WINDOW, "--out", out,
    )
    assert code == 0
    assert (out / "usage.tsv").exists()
    assert (out / "usage.png").stat().st_size > 1000
    table = parse_table((out / "usage.tsv").read_text(encoding="utf-8"))
    assert len(table.rows) == 28


def test_rerun_is_byte_identical(pipeline_dir, tmp_path):
    again = tmp_path / "profiles.tsv"
    run(
        "compute", "--org", pipeline_dir / "data/org.jsonl",
        "--events", pipeline_dir / "data/events.jsonl",
        "--window", WINDOW, "--out", again,
    )
    assert again.read_bytes() == (pipeline_dir / "profiles.tsv").read_bytes()


def test_cli_output_matches_in_process_calls(pipeline_dir, tmp_path):
    """A subcommand pipeline writes the same bytes as the equivalent library calls."""
    from lmscube.cube import CELLS_COLUMNS, CubeQuery, cells_table_rows, query
    from lmscube.formats import render_table
    from lmscube.org import NodeKind
    from lmscube.pipeline import load_org_file, parse_levels_table, parse_survey_table
    from lmscube.cube import build_cube

    out = tmp_path / "cells.tsv"
    assert run(
        "query", "--org", pipeline_dir / "data/org.jsonl",
        "--levels", pipeline_dir / "levels.tsv",
        "--survey", pipeline_dir / "survey/survey_scores.tsv",
        "--scope", "univ", "--granularity", "cu", "--out", out,
    ) == 0

    tree = load_org_file(pipeline_dir / "data/org.jsonl")
    levels = parse_levels_table((pipeline_dir / "levels.tsv").read_text(encoding="utf-8"))
    survey = parse_survey_table(
        (pipeline_dir / "survey/survey_scores.tsv").read_text(encoding="utf-8")
    )
    periods = tuple(sorted({p.window for p in levels} | {w for w, _ in survey}))
    cube = build_cube(levels, survey, tree, periods)
    cells = query(cube, CubeQuery(org_scope="univ", granularity=NodeKind.CU))
    expected = render_table(CELLS_COLUMNS, cells_table_rows(cells))
    assert out.read_text(encoding="utf-8") == expected


def test_synth_rerun_is_byte_identical(pipeline_dir, tmp_path):
    other = tmp_path / "data"
    run(
        "synth", "--out", other, "--seed", 12, "--users", 120, "--teachers", 12,
        "--cus", 10, "--days", 28, "--visits-mean", 70,
        "--schools", 2, "--depts-per-school", 2,
    )
    assert (other / "events.jsonl").read_bytes() == (
        pipeline_dir / "data/events.jsonl"
    ).read_bytes()


def test_classify_with_bad_cuts_exits_1_naming_dimension(pipeline_dir, tmp_path, capsys):
    bad = tmp_path / "bad.yaml"
    good = (pipeline_dir / "data/thresholds.yaml").read_text(encoding="utf-8")
    bad.write_text(good.replace("- 3.0", "- 1.0", 1), encoding="utf-8")
    code = run(
        "classify", "--profiles", pipeline_dir / "profiles.tsv",
        "--thresholds", bad, "--out", tmp_path / "levels.tsv",
    )
    captured = capsys.readouterr()
    assert code == 1
    assert "dynamics" in captured.err


def test_missing_input_file_exits_2(tmp_path, capsys):
    code = run(
        "compute", "--org", tmp_path / "nope.jsonl", "--events", tmp_path / "x.jsonl",
        "--window", WINDOW, "--out", tmp_path / "p.tsv",
    )
    assert code == 2
    assert "input error" in capsys.readouterr().err


def test_denied_query_exits_1(pipeline_dir, tmp_path, capsys):
    from lmscube.access import PRINCIPALS_SCHEMA, hash_token
    from lmscube.formats import write_records

    principals = tmp_path / "principals.jsonl"
    write_records(
        principals,
        PRINCIPALS_SCHEMA,
        [{"id": "t", "role": "teacher", "ref": "t0001", "token_sha256": hash_token("x")}],
    )
    code = run(
        "query", "--org", pipeline_dir / "data/org.jsonl",
        "--levels", pipeline_dir / "levels.tsv",
        "--scope", "univ", "--granularity", "university",
        "--principals", principals, "--as", "t",
    )
    assert code == 1
    assert "denied" in capsys.readouterr().err


def test_validate_config_roundtrip(pipeline_dir, capsys):
    assert run("validate-config", "--thresholds", pipeline_dir / "data/thresholds.yaml") == 0
    assert "ok" in capsys.readouterr().err
    assert run("validate-config", "--print-default") == 0
    assert "cuts:" in capsys.readouterr().out


def test_every_flag_is_documented():
    parser = build_parser()
    subactions = [
        action for action in parser._actions if hasattr(action, "choices") and action.choices
    ]
    subparsers = subactions[0].choices
    assert set(subparsers) == {
        "synth", "ingest", "survey-import", "compute", "classify",
        "query", "radar", "usage-report", "validate-config", "serve",
    }
    for name, sub in subparsers.items():
        for action in sub._actions:
            assert action.help, f"undocumented flag {action.option_strings} in {name}"


def test_console_entry_point_help():
    result = subprocess.run(
        [sys.executable, "-m", "lmscube.cli", "--help"], capture_output=True, text=True
    )
    assert result.returncode == 0
    for command in ("synth", "compute", "classify", "radar", "serve"):
        assert command in result.stdout
