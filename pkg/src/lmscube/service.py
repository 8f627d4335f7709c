"""Read-mostly HTTP service over immutable snapshots.

Many concurrent readers answer from the current snapshot; a rebuild
constructs the next snapshot off to the side and swaps it in atomically,
so no request ever sees a half-built world. Responses are delimited
tables (or SVG for rendered radars) and every one cites the snapshot id
it was answered from.
"""

from __future__ import annotations

import os
import threading
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any

import yaml
from fastapi import FastAPI, Request, Response
from fastapi.responses import PlainTextResponse

from .access import (
    Denial,
    Principal,
    authenticate,
    home_nodes,
    load_principals_file,
    visible_cus,
)
from .cube import CELLS_COLUMNS, CubeQuery, Source, cells_table_rows, query
from .errors import ConfigError, DataError, LmscubeError, QueryError
from .formats import render_table
from .maturity import ThresholdConfig, default_thresholds, load_thresholds
from .metrics import Dimension
from .org import NodeKind, descendant_cus
from .pipeline import Snapshot, build_snapshot_from_files
from .radar import dataset_table, radar_dataset, render_svg
from .windows import TimeWindow

SERVICE_SCHEMA = "lmscube/service"

TSV = "text/tab-separated-values"


@dataclass(frozen=True)
class ServiceConfig:
    data_dir: Path
    principals_path: Path
    thresholds_path: Path | None = None
    periods: tuple[str, ...] = ()
    host: str = "127.0.0.1"
    port: int = 8077

    @classmethod
    def load(cls, path: Path) -> "ServiceConfig":
        """Read the single config file; environment variables override
        LMSCUBE_PORT and LMSCUBE_DATA_DIR."""
        try:
            raw = yaml.safe_load(path.read_text(encoding="utf-8"))
        except (OSError, yaml.YAMLError) as exc:
            raise ConfigError(f"cannot read service config {path}: {exc}") from exc
        if not isinstance(raw, dict) or raw.get("schema") != SERVICE_SCHEMA:
            raise ConfigError(f"{path}: expected schema {SERVICE_SCHEMA!r}")
        if "version" not in raw:
            raise ConfigError(f"{path}: refusing unversioned service config")
        base = path.parent
        config = cls(
            data_dir=(base / str(raw.get("data_dir", "data"))).resolve(),
            principals_path=(base / str(raw.get("principals", "data/principals.jsonl"))).resolve(),
            thresholds_path=(
                (base / str(raw["thresholds"])).resolve() if raw.get("thresholds") else None
            ),
            periods=tuple(str(p) for p in raw.get("periods", [])),
            host=str(raw.get("host", "127.0.0.1")),
            port=int(raw.get("port", 8077)),
        )
        if os.environ.get("LMSCUBE_DATA_DIR"):
            config = replace(config, data_dir=Path(os.environ["LMSCUBE_DATA_DIR"]).resolve())
        if os.environ.get("LMSCUBE_PORT"):
            config = replace(config, port=int(os.environ["LMSCUBE_PORT"]))
        return config


class Engine:
    """Holds the current snapshot and serializes rebuilds."""

    def __init__(self, config: ServiceConfig):
        self.config = config
        self._rebuild_lock = threading.Lock()
        self._current: Snapshot | None = None
        self.principals: dict[str, Principal] = {}

    @property
    def current(self) -> Snapshot:
        snapshot = self._current
        if snapshot is None:
            raise LmscubeError("service holds no snapshot yet")
        return snapshot

    def _thresholds(self) -> ThresholdConfig:
        if self.config.thresholds_path is not None:
            return load_thresholds(self.config.thresholds_path)
        return default_thresholds()

    def _periods(self, events_path: Path) -> tuple[TimeWindow, ...]:
        if self.config.periods:
            return tuple(TimeWindow.parse(p) for p in self.config.periods)
        # Default: one period spanning the whole event log.
        from .pipeline import ingest_events_file, load_org_file

        tree = load_org_file(self.config.data_dir / "org.jsonl")
        store, _ = ingest_events_file(events_path, tree)
        span = store.span()
        if span is None:
            raise DataError("no periods configured and the event log is empty")
        return (span,)

    def rebuild(self) -> Snapshot:
        """Build the next snapshot from the data directory and swap it in.

        Failures propagate and leave the current snapshot untouched.
        """
        with self._rebuild_lock:
            next_id = (self._current.id + 1) if self._current else 1
            data_dir = self.config.data_dir
            events_path = data_dir / "events.jsonl"
            responses_path = data_dir / "responses.jsonl"
            snapshot = build_snapshot_from_files(
                snapshot_id=next_id,
                org_path=data_dir / "org.jsonl",
                events_path=events_path,
                response_paths=(responses_path,) if responses_path.exists() else (),
                thresholds=self._thresholds(),
                periods=self._periods(events_path),
            )
            principals = load_principals_file(self.config.principals_path, snapshot.tree)
            self.principals = principals
            self._current = snapshot
            return snapshot


def create_app(config: ServiceConfig, *, build_on_start: bool = True) -> FastAPI:
    app = FastAPI(title="lmscube", docs_url=None, redoc_url=None)
    engine = Engine(config)
    app.state.engine = engine
    if build_on_start:
        engine.rebuild()

    def table_response(
        snapshot: Snapshot,
        columns: tuple[str, ...],
        rows: list[tuple],
        meta: list[tuple[str, str]] | None = None,
    ) -> Response:
        body = render_table(
            columns, rows, meta=[("snapshot", str(snapshot.id)), *(meta or [])]
        )
        return Response(
            content=body, media_type=TSV, headers={"X-Snapshot-Id": str(snapshot.id)}
        )

    def fail(status: int, message: str, snapshot: Snapshot | None = None) -> Response:
        headers = {"X-Snapshot-Id": str(snapshot.id)} if snapshot else {}
        return PlainTextResponse(message + "\n", status_code=status, headers=headers)

    def principal_of(request: Request) -> Principal | Response:
        header = request.headers.get("authorization", "")
        if not header.startswith("Bearer "):
            return fail(401, "missing bearer credential")
        principal = authenticate(engine.principals, header[len("Bearer "):].strip())
        if principal is None:
            return fail(401, "unknown credential")
        return principal

    @app.get("/snapshots/current")
    def snapshots_current(request: Request) -> Response:
        principal = principal_of(request)
        if isinstance(principal, Response):
            return principal
        snapshot = engine.current
        rows = [
            ("snapshot", str(snapshot.id)),
            ("periods", ",".join(p.label for p in snapshot.periods)),
            ("events", str(len(snapshot.store))),
            ("event_rejects", str(len(snapshot.event_rejects))),
            ("responses", str(len(snapshot.responses.responses))),
            ("survey_rejects", str(len(snapshot.survey_rejects))),
            ("cus", str(len(snapshot.tree.cus))),
        ]
        return table_response(snapshot, ("key", "value"), rows)

    @app.get("/me")
    def me(request: Request) -> Response:
        principal = principal_of(request)
        if isinstance(principal, Response):
            return principal
        snapshot = engine.current
        visible = visible_cus(principal, snapshot.tree)
        rows = [
            (
                principal.principal_id,
                principal.role.kind.value,
                principal.role.ref or "",
                ",".join(home_nodes(principal, snapshot.tree)),
                len(visible),
            )
        ]
        return table_response(
            snapshot, ("principal", "role", "ref", "home", "visible_cus"), rows
        )

    @app.get("/org")
    def org(request: Request) -> Response:
        principal = principal_of(request)
        if isinstance(principal, Response):
            return principal
        snapshot = engine.current
        tree = snapshot.tree
        visible = visible_cus(principal, tree)
        rows = []
        for node_id in sorted(tree.kinds):
            kind = tree.kinds[node_id]
            if kind is NodeKind.CU:
                keep = node_id in visible
            else:
                keep = bool(descendant_cus(tree, node_id) & visible)
            if keep:
                rows.append(
                    (node_id, kind.value, tree.names[node_id], tree.parents[node_id] or "")
                )
        return table_response(snapshot, ("id", "kind", "name", "parent_id"), rows)

    @app.get("/cube")
    def cube_query(request: Request) -> Response:
        principal = principal_of(request)
        if isinstance(principal, Response):
            return principal
        snapshot = engine.current
        params = request.query_params
        scope = params.get("scope", snapshot.tree.university_id)
        try:
            granularity = (
                NodeKind(params["granularity"])
                if "granularity" in params
                else snapshot.tree.require_node(scope)
            )
            dimensions = _csv_enum(params.get("dimensions"), Dimension)
            sources = _csv_enum(params.get("sources"), Source)
            periods = tuple(
                snapshot.cube.period_by_label(TimeWindow.parse(p).label)
                for p in params.get("periods", "").split(",")
                if p
            )
            q = CubeQuery(
                org_scope=scope,
                granularity=granularity,
                dimensions=dimensions or tuple(Dimension),
                sources=sources or tuple(Source),
                periods=periods,
            )
            decision = authorize_query(principal, q, snapshot)
            if isinstance(decision, Denial):
                return fail(403, f"{decision.reason}: {decision.scope}", snapshot)
            cells = query(snapshot.cube, decision)
        except QueryError as exc:
            return fail(404 if exc.unknown_ref else 422, str(exc), snapshot)
        except ValueError as exc:
            return fail(422, str(exc), snapshot)
        return table_response(snapshot, CELLS_COLUMNS, cells_table_rows(cells))

    @app.get("/radar/{node_id}")
    def radar(node_id: str, request: Request) -> Response:
        principal = principal_of(request)
        if isinstance(principal, Response):
            return principal
        snapshot = engine.current
        params = request.query_params
        try:
            period = (
                snapshot.cube.period_by_label(TimeWindow.parse(params["period"]).label)
                if "period" in params
                else snapshot.periods[0]
            )
            dataset = radar_dataset(snapshot.cube, node_id, period, principal)
        except QueryError as exc:
            return fail(404 if exc.unknown_ref else 422, str(exc), snapshot)
        if isinstance(dataset, Denial):
            return fail(403, f"{dataset.reason}: {dataset.scope}", snapshot)
        if params.get("format", "tsv") == "svg":
            return Response(
                content=render_svg(dataset),
                media_type="image/svg+xml",
                headers={"X-Snapshot-Id": str(snapshot.id)},
            )
        body = "\n".join(
            [f"# snapshot: {snapshot.id}", dataset_table(dataset)]
        )
        return Response(
            content=body, media_type=TSV, headers={"X-Snapshot-Id": str(snapshot.id)}
        )

    def admin_of(request: Request) -> Principal | Response:
        principal = principal_of(request)
        if isinstance(principal, Response):
            return principal
        if principal.role.kind.value != "direction":
            return fail(403, "administrative credential required", engine.current)
        return principal

    @app.post("/admin/rebuild")
    def rebuild(request: Request) -> Response:
        principal = admin_of(request)
        if isinstance(principal, Response):
            return principal
        previous = engine.current
        try:
            snapshot = engine.rebuild()
        except LmscubeError as exc:
            return fail(422, f"rebuild failed, snapshot {previous.id} kept: {exc}", previous)
        return table_response(snapshot, ("key", "value"), [("snapshot", str(snapshot.id))])

    def stage_upload(request: Request, body: bytes, filename: str) -> Response:
        principal = admin_of(request)
        if isinstance(principal, Response):
            return principal
        snapshot = engine.current
        try:
            text = body.decode("utf-8")
        except UnicodeDecodeError as exc:
            return fail(422, f"upload is not UTF-8: {exc}", snapshot)
        if not text.strip():
            return fail(422, "empty upload", snapshot)
        target = engine.config.data_dir / filename
        target.write_text(text, encoding="utf-8")
        return table_response(
            snapshot,
            ("key", "value"),
            [("staged", filename), ("bytes", str(len(body)))],
            meta=[("note", "staged; POST /admin/rebuild to apply")],
        )

    @app.post("/admin/ingest/events")
    async def ingest_events_upload(request: Request) -> Response:
        return stage_upload(request, await request.body(), "events.jsonl")

    @app.post("/admin/ingest/surveys")
    async def ingest_surveys_upload(request: Request) -> Response:
        return stage_upload(request, await request.body(), "responses.jsonl")

    return app


def authorize_query(principal: Principal, q: CubeQuery, snapshot: Snapshot):
    """Authorization strictly precedes any cube computation."""
    from .access import authorize

    return authorize(principal, q, snapshot.tree)


def _csv_enum(raw: str | None, enum_type: type) -> tuple[Any, ...]:
    if not raw:
        return ()
    return tuple(enum_type(part.strip()) for part in raw.split(",") if part.strip())


def serve(config: ServiceConfig) -> None:
    import uvicorn

    app = create_app(config)
    uvicorn.run(app, host=config.host, port=config.port, log_level="info")
