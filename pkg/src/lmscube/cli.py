"""Operator command line: ingest, compute, classify, query, radar, synth.

Stages hand each other delimited files so every step of a run can be
inspected or rerun in isolation. Exit codes: 0 success, 1 validation
failure or access denial, 2 input error, 3 internal error.
"""

from __future__ import annotations

import argparse
import sys
from datetime import date
from pathlib import Path

from .access import Denial, Principal, load_principals_file
from .cube import CELLS_COLUMNS, CubeQuery, Source, build_cube, cells_table_rows, query
from .errors import ConfigError, DataError, LmscubeError, QueryError
from .formats import render_table, write_table
from .maturity import default_thresholds, dump_thresholds, load_thresholds, validate_thresholds
from .metrics import Dimension
from .org import NodeKind, Role, RoleKind
from .pipeline import (
    LEVELS_COLUMNS,
    PROFILE_COLUMNS,
    REJECT_COLUMNS,
    SURVEY_COLUMNS,
    classify_profiles,
    compute_profiles,
    ingest_events_file,
    level_rows,
    load_org_file,
    parse_levels_table,
    parse_profiles_table,
    parse_survey_table,
    profile_rows,
    reject_rows,
    score_surveys,
    survey_rows,
)
from .radar import dataset_table, radar_dataset, render_svg
from .survey import Audience, ResponseStore, default_instrument, ingest_responses_mixed, load_instrument
from .synth import GenParams, TreeShape, generate, load_params, summarize
from .windows import TimeWindow

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_INPUT = 2
EXIT_INTERNAL = 3

OPERATOR = Principal("operator", Role(RoleKind.DIRECTION))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lmscube",
        description="Turn LMS activity logs and questionnaires into integration "
        "levels, hierarchy roll-ups and radar reports.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate seeded synthetic campus data")
    p.add_argument("--out", required=True, type=Path, help="output directory")
    p.add_argument("--params", type=Path, help="generator params YAML file")
    p.add_argument("--seed", type=int, help="override: RNG seed")
    p.add_argument("--users", type=int, help="override: registered users")
    p.add_argument("--teachers", type=int, help="override: teacher count")
    p.add_argument("--cus", type=int, help="override: course unit count")
    p.add_argument("--days", type=int, help="override: days of activity")
    p.add_argument("--start", type=str, help="override: first day (ISO date)")
    p.add_argument("--visits-mean", type=float, help="override: mean daily visits")
    p.add_argument("--pages-mean", type=float, help="override: mean pages per visit")
    p.add_argument("--session-mean", type=float, help="override: mean session seconds")
    p.add_argument("--mobile-peak", type=float, help="override: peak daily mobile hits")
    p.add_argument("--mix", type=str, help="override: five level proportions, comma separated")
    p.add_argument("--schools", type=int, default=3, help="schools in the generated tree")
    p.add_argument(
        "--depts-per-school", type=int, default=2, help="departments per school"
    )

    p = sub.add_parser("ingest", help="validate an event log against the org tree")
    p.add_argument("--org", required=True, type=Path, help="org registry file")
    p.add_argument("--events", required=True, type=Path, help="event log file")
    p.add_argument("--out", required=True, type=Path, help="output directory for reports")
    p.add_argument("--year-range", type=str, help="accept timestamps inside start..end only")

    p = sub.add_parser("survey-import", help="score questionnaire responses per CU")
    p.add_argument("--org", required=True, type=Path, help="org registry file")
    p.add_argument(
        "--responses", required=True, type=Path, action="append",
        help="response file (JSONL or CSV); repeatable",
    )
    p.add_argument("--window", required=True, action="append", type=str,
                   help="scoring period start..end; repeatable")
    p.add_argument("--instrument-teacher", type=Path, help="teacher instrument file")
    p.add_argument("--instrument-student", type=Path, help="student instrument file")
    p.add_argument("--out", required=True, type=Path, help="output directory")

    p = sub.add_parser("compute", help="compute the seven indicators per CU and window")
    p.add_argument("--org", required=True, type=Path, help="org registry file")
    p.add_argument("--events", required=True, type=Path, help="event log file")
    p.add_argument("--window", required=True, action="append", type=str,
                   help="analysis period start..end; repeatable")
    p.add_argument("--out", required=True, type=Path, help="profiles table to write")

    p = sub.add_parser("classify", help="map indicator profiles onto the five levels")
    p.add_argument("--profiles", required=True, type=Path, help="profiles table from compute")
    p.add_argument("--thresholds", type=Path, help="threshold config (default: shipped cuts)")
    p.add_argument("--out", required=True, type=Path, help="levels table to write")

    p = sub.add_parser("query", help="slice the cube and export matching cells")
    p.add_argument("--org", required=True, type=Path, help="org registry file")
    p.add_argument("--levels", required=True, type=Path, help="levels table from classify")
    p.add_argument("--survey", type=Path, help="survey scores table from survey-import")
    p.add_argument("--scope", required=True, type=str, help="org node to scope the query to")
    p.add_argument("--granularity", type=str,
                   choices=[k.value for k in NodeKind], help="result grain (default: scope kind)")
    p.add_argument("--dimensions", type=str, help="comma-separated dimension subset")
    p.add_argument("--sources", type=str, help="comma-separated source subset")
    p.add_argument("--periods", type=str, help="comma-separated period labels")
    p.add_argument("--out", type=Path, help="cells table to write (default: stdout)")
    p.add_argument("--principals", type=Path, help="principal registry for --as")
    p.add_argument("--as", dest="as_principal", type=str,
                   help="run as this principal id (default: unrestricted operator)")

    p = sub.add_parser("radar", help="render a node's radar chart and dataset")
    p.add_argument("--org", required=True, type=Path, help="org registry file")
    p.add_argument("--levels", required=True, type=Path, help="levels table from classify")
    p.add_argument("--survey", type=Path, help="survey scores table from survey-import")
    p.add_argument("--node", required=True, type=str, help="org node to chart")
    p.add_argument("--period", type=str, help="period label (default: first in levels)")
    p.add_argument("--out", required=True, type=Path, help="SVG file to write")
    p.add_argument("--dataset-out", type=Path,
                   help="companion dataset table (default: SVG path with .tsv)")
    p.add_argument("--principals", type=Path, help="principal registry for --as")
    p.add_argument("--as", dest="as_principal", type=str,
                   help="run as this principal id (default: unrestricted operator)")

    p = sub.add_parser("usage-report", help="daily usage table plus rendered figure")
    p.add_argument("--org", required=True, type=Path, help="org registry file")
    p.add_argument("--events", required=True, type=Path, help="event log file")
    p.add_argument("--window", required=True, type=str, help="reporting period start..end")
    p.add_argument("--out", required=True, type=Path, help="output directory")

    p = sub.add_parser("validate-config", help="check a threshold or instrument file")
    p.add_argument("--thresholds", type=Path, help="threshold config to validate")
    p.add_argument("--instrument", type=Path, help="instrument file to validate")
    p.add_argument("--print-default", action="store_true",
                   help="print the shipped default thresholds and exit")

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--config", required=True, type=Path, help="service config file")

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handler = {
        "synth": _cmd_synth,
        "ingest": _cmd_ingest,
        "survey-import": _cmd_survey_import,
        "compute": _cmd_compute,
        "classify": _cmd_classify,
        "query": _cmd_query,
        "radar": _cmd_radar,
        "usage-report": _cmd_usage_report,
        "validate-config": _cmd_validate_config,
        "serve": _cmd_serve,
    }[args.command]
    try:
        return handler(args)
    except (ConfigError, QueryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (DataError, OSError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except LmscubeError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


def _cmd_synth(args: argparse.Namespace) -> int:
    params = load_params(args.params) if args.params else GenParams()
    overrides = {
        "seed": args.seed,
        "n_users": args.users,
        "n_teachers": args.teachers,
        "n_cus": args.cus,
        "days": args.days,
        "daily_visits_mean": args.visits_mean,
        "pages_per_visit_mean": args.pages_mean,
        "session_seconds_mean": args.session_mean,
        "mobile_daily_peak": args.mobile_peak,
    }
    fields = {k: v for k, v in overrides.items() if v is not None}
    if args.start:
        fields["start"] = date.fromisoformat(args.start)
    if args.mix:
        fields["level_mix"] = tuple(float(x) for x in args.mix.split(","))
    if fields:
        from dataclasses import replace

        params = replace(params, **fields)
    shape = TreeShape(schools=args.schools, departments_per_school=args.depts_per_school)
    data = generate(params, shape)
    paths = data.write(args.out)
    write_table(
        args.out / "intended_levels.tsv",
        ("cu", "intended_level"),
        sorted(data.intended_levels.items()),
        meta=[("seed", str(params.seed))],
    )
    (args.out / "thresholds.yaml").write_text(
        dump_thresholds(default_thresholds()), encoding="utf-8"
    )
    for name, path in sorted(paths.items()):
        print(f"wrote {name}: {path}", file=sys.stderr)
    return EXIT_OK


def _cmd_ingest(args: argparse.Namespace) -> int:
    tree = load_org_file(args.org)
    year_range = TimeWindow.parse(args.year_range) if args.year_range else None
    store, rejects = ingest_events_file(args.events, tree, year_range=year_range)
    args.out.mkdir(parents=True, exist_ok=True)
    write_table(args.out / "rejects.tsv", REJECT_COLUMNS, reject_rows(rejects))
    from .formats import write_records
    from .synth import EVENTS_SCHEMA

    write_records(
        args.out / "accepted.jsonl", EVENTS_SCHEMA, (e.to_record() for e in store.events)
    )
    print(
        f"accepted {len(store)} events, rejected {len(rejects)} "
        f"(see {args.out / 'rejects.tsv'})",
        file=sys.stderr,
    )
    return EXIT_OK


def _cmd_survey_import(args: argparse.Namespace) -> int:
    tree = load_org_file(args.org)
    instruments = {
        Audience.TEACHER: (
            load_instrument(args.instrument_teacher)
            if args.instrument_teacher
            else default_instrument(Audience.TEACHER)
        ),
        Audience.STUDENT: (
            load_instrument(args.instrument_student)
            if args.instrument_student
            else default_instrument(Audience.STUDENT)
        ),
    }
    periods = [TimeWindow.parse(w) for w in args.window]
    responses = []
    rejects = []
    for path in args.responses:
        accepted, bad = ingest_responses_mixed(
            path.read_text(encoding="utf-8"), instruments, tree, source=str(path)
        )
        responses.extend(accepted)
        rejects.extend(bad)
    store = ResponseStore.build(instruments, responses)
    cells = score_surveys(store, tree, periods)
    args.out.mkdir(parents=True, exist_ok=True)
    write_table(args.out / "survey_scores.tsv", SURVEY_COLUMNS, survey_rows(cells))
    write_table(args.out / "survey_rejects.tsv", REJECT_COLUMNS, reject_rows(rejects))
    print(
        f"scored {len(responses)} responses, rejected {len(rejects)}",
        file=sys.stderr,
    )
    return EXIT_OK


def _cmd_compute(args: argparse.Namespace) -> int:
    tree = load_org_file(args.org)
    store, rejects = ingest_events_file(args.events, tree)
    if rejects:
        print(f"note: {len(rejects)} event lines rejected during ingest", file=sys.stderr)
    periods = [TimeWindow.parse(w) for w in args.window]
    profiles = compute_profiles(store, tree, periods)
    write_table(args.out, PROFILE_COLUMNS, profile_rows(profiles))
    print(f"wrote {len(profiles)} profiles to {args.out}", file=sys.stderr)
    return EXIT_OK


def _cmd_classify(args: argparse.Namespace) -> int:
    thresholds = load_thresholds(args.thresholds) if args.thresholds else default_thresholds()
    profiles = parse_profiles_table(
        args.profiles.read_text(encoding="utf-8"), source=str(args.profiles)
    )
    levels = classify_profiles(profiles, thresholds)
    write_table(args.out, LEVELS_COLUMNS, level_rows(levels))
    print(f"wrote {len(levels)} level profiles to {args.out}", file=sys.stderr)
    return EXIT_OK


def _load_cube(args: argparse.Namespace):
    tree = load_org_file(args.org)
    levels = parse_levels_table(
        args.levels.read_text(encoding="utf-8"), source=str(args.levels)
    )
    survey_cells = (
        parse_survey_table(args.survey.read_text(encoding="utf-8"), source=str(args.survey))
        if args.survey
        else []
    )
    period_set = {p.window for p in levels} | {w for w, _ in survey_cells}
    periods = tuple(sorted(period_set))
    if not periods:
        raise DataError("no periods found in the levels/survey tables")
    return tree, build_cube(levels, survey_cells, tree, periods)


def _load_principal(args: argparse.Namespace, tree) -> Principal:
    if not args.as_principal:
        return OPERATOR
    if not args.principals:
        raise ConfigError("--as requires --principals")
    registry = load_principals_file(args.principals, tree)
    principal = registry.get(args.as_principal)
    if principal is None:
        raise ConfigError(f"unknown principal {args.as_principal!r}")
    return principal


def _cmd_query(args: argparse.Namespace) -> int:
    from .access import authorize

    tree, cube = _load_cube(args)
    principal = _load_principal(args, tree)
    q = CubeQuery(
        org_scope=args.scope,
        granularity=(
            NodeKind(args.granularity) if args.granularity else tree.require_node(args.scope)
        ),
        dimensions=(
            tuple(Dimension(d.strip()) for d in args.dimensions.split(","))
            if args.dimensions
            else tuple(Dimension)
        ),
        sources=(
            tuple(Source(s.strip()) for s in args.sources.split(","))
            if args.sources
            else tuple(Source)
        ),
        periods=(
            tuple(cube.period_by_label(TimeWindow.parse(p).label) for p in args.periods.split(","))
            if args.periods
            else ()
        ),
    )
    decision = authorize(principal, q, tree)
    if isinstance(decision, Denial):
        print(f"denied: {decision.reason} ({decision.scope})", file=sys.stderr)
        return EXIT_VALIDATION
    cells = query(cube, decision)
    body = render_table(CELLS_COLUMNS, cells_table_rows(cells))
    if args.out:
        args.out.write_text(body, encoding="utf-8")
        print(f"wrote {len(cells)} cells to {args.out}", file=sys.stderr)
    else:
        sys.stdout.write(body)
    return EXIT_OK


def _cmd_radar(args: argparse.Namespace) -> int:
    tree, cube = _load_cube(args)
    principal = _load_principal(args, tree)
    period = (
        cube.period_by_label(TimeWindow.parse(args.period).label)
        if args.period
        else cube.periods[0]
    )
    dataset = radar_dataset(cube, args.node, period, principal)
    if isinstance(dataset, Denial):
        print(f"denied: {dataset.reason} ({dataset.scope})", file=sys.stderr)
        return EXIT_VALIDATION
    args.out.parent.mkdir(parents=True, exist_ok=True)
    args.out.write_text(render_svg(dataset), encoding="utf-8")
    dataset_path = args.dataset_out or args.out.with_suffix(".tsv")
    dataset_path.write_text(dataset_table(dataset), encoding="utf-8")
    print(f"wrote {args.out} and {dataset_path}", file=sys.stderr)
    return EXIT_OK


def _cmd_usage_report(args: argparse.Namespace) -> int:
    tree = load_org_file(args.org)
    store, _ = ingest_events_file(args.events, tree)
    window = TimeWindow.parse(args.window)
    stats = summarize(store, window)
    args.out.mkdir(parents=True, exist_ok=True)
    from .synth import USAGE_COLUMNS

    write_table(
        args.out / "usage.tsv",
        USAGE_COLUMNS,
        stats.table_rows(),
        meta=[
            ("window", window.label),
            ("mean_daily_visits", f"{stats.mean_daily_visits:.3f}"),
            ("mean_pages_per_visit", f"{stats.mean_pages_per_visit:.3f}"),
            ("mean_session_seconds", f"{stats.mean_session_seconds:.3f}"),
            ("peak_hourly_sessions", str(stats.peak_hourly_sessions)),
        ],
    )
    from .figures import render_usage_figure

    render_usage_figure(stats, args.out / "usage.png")
    print(f"wrote {args.out / 'usage.tsv'} and {args.out / 'usage.png'}", file=sys.stderr)
    return EXIT_OK


def _cmd_validate_config(args: argparse.Namespace) -> int:
    if args.print_default:
        sys.stdout.write(dump_thresholds(default_thresholds()))
        return EXIT_OK
    if not args.thresholds and not args.instrument:
        raise ConfigError("nothing to validate: pass --thresholds and/or --instrument")
    if args.thresholds:
        config = load_thresholds(args.thresholds)
        problems = validate_thresholds(config)
        if problems:  # load_thresholds already raises; belt and braces
            for problem in problems:
                print(f"invalid: {problem}", file=sys.stderr)
            return EXIT_VALIDATION
        print(f"{args.thresholds}: ok", file=sys.stderr)
    if args.instrument:
        instrument = load_instrument(args.instrument)
        print(
            f"{args.instrument}: ok ({instrument.audience.value}, {len(instrument.items)} items)",
            file=sys.stderr,
        )
    return EXIT_OK


def _cmd_serve(args: argparse.Namespace) -> int:
    from .service import ServiceConfig, serve

    serve(ServiceConfig.load(args.config))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
