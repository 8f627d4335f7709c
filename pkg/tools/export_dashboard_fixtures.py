"""Export wire-format fixtures for the dashboard test suite.

Spins the real HTTP service over a small deterministic campus and captures
response bodies byte-for-byte into frontend/tests/fixtures/, plus a
manifest the TypeScript fixture fetch stub serves them from. Rerun after
changing wire formats:

    python tools/export_dashboard_fixtures.py
"""

from __future__ import annotations

import json
from pathlib import Path

from fastapi.testclient import TestClient

from lmscube.access import PRINCIPALS_SCHEMA, hash_token
from lmscube.formats import parse_table, write_records
from lmscube.service import ServiceConfig, create_app
from lmscube.synth import GenParams, TreeShape, generate

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "frontend" / "tests" / "fixtures"

PARAMS = GenParams(
    seed=31,
    n_users=90,
    n_teachers=9,
    n_cus=9,
    days=14,
    daily_visits_mean=40.0,
)

TOKENS = {"teacher": "tok-teacher", "direction": "tok-direction"}


def main() -> None:
    import tempfile

    FIXTURES.mkdir(parents=True, exist_ok=True)
    with tempfile.TemporaryDirectory() as tmp:
        data_dir = Path(tmp) / "data"
        generate(PARAMS, TreeShape(schools=3, departments_per_school=1)).write(data_dir)
        write_records(
            data_dir / "principals.jsonl",
            PRINCIPALS_SCHEMA,
            [
                {
                    "id": "p-t",
                    "role": "teacher",
                    "ref": "t0001",
                    "token_sha256": hash_token(TOKENS["teacher"]),
                },
                {
                    "id": "p-dir",
                    "role": "direction",
                    "token_sha256": hash_token(TOKENS["direction"]),
                },
            ],
        )
        config = ServiceConfig(
            data_dir=data_dir,
            principals_path=data_dir / "principals.jsonl",
            periods=(PARAMS.window.label,),
        )
        client = TestClient(create_app(config))

        me = client.get("/me", headers=auth("teacher"))
        own_cu = parse_table(me.text).rows[0][3].split(",")[0]
        period = PARAMS.window.label

        # The dashboard appends period/periods params once a period is known,
        # so capture both flavors of every node it can land on. The drill
        # chain below is the one the tests walk: univ -> school01 ->
        # school01-d01 -> cu0001 (direction), plus the teacher's own CU.
        captures = [
            ("GET", "/me", "teacher", "me_teacher.tsv"),
            ("GET", "/me", "direction", "me_direction.tsv"),
            ("GET", "/org", "teacher", "org_teacher.tsv"),
            ("GET", "/org", "direction", "org_direction.tsv"),
            ("GET", "/snapshots/current", "direction", "snapshot.tsv"),
            ("GET", "/cube?scope=univ&granularity=school", "direction", "cube_schools.tsv"),
            ("GET", f"/cube?scope={own_cu}&granularity=cu", "teacher", "cube_own_cu.tsv"),
            ("GET", f"/radar/{own_cu}", "teacher", "radar_own_cu.tsv"),
            ("GET", "/radar/univ", "direction", "radar_univ.tsv"),
            ("GET", "/radar/univ", "teacher", "radar_univ_denied.txt"),
            ("GET", "/radar/school02", "teacher", "radar_school_denied.txt"),
            ("GET", "/me", None, "unauthorized.txt"),
        ]
        drill = [
            ("univ", "school", "direction"),
            ("school01", "department", "direction"),
            ("school01-d01", "cu", "direction"),
            ("cu0001", "cu", "direction"),
            (own_cu, "cu", "teacher"),
        ]
        for index, (node_id, child_kind, who) in enumerate(drill):
            captures.append(
                ("GET", f"/radar/{node_id}?period={period}", who, f"radar_p_{index}.tsv")
            )
            if node_id != "univ":
                captures.append(
                    ("GET", f"/radar/{node_id}", who, f"radar_{index}.tsv")
                )
            captures.append(
                (
                    "GET",
                    f"/cube?scope={node_id}&granularity={child_kind}&periods={period}",
                    who,
                    f"cube_p_{index}.tsv",
                )
            )
        manifest = []
        for method, path, who, filename in captures:
            headers = auth(who) if who else {}
            response = client.request(method, path, headers=headers)
            (FIXTURES / filename).write_bytes(response.content)
            manifest.append(
                {
                    "method": method,
                    "path": path,
                    "token": TOKENS[who] if who else None,
                    "status": response.status_code,
                    "file": filename,
                    "contentType": response.headers.get("content-type", "text/plain"),
                }
            )
        (FIXTURES / "manifest.json").write_text(
            json.dumps({"ownCu": own_cu, "captures": manifest}, indent=2) + "\n",
            encoding="utf-8",
        )
    print(f"wrote {len(captures)} fixtures to {FIXTURES}")


def auth(who: str) -> dict[str, str]:
    return {"Authorization": f"Bearer {TOKENS[who]}"}


if __name__ == "__main__":
    main()
