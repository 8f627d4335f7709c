"""Role-based visibility over course units and query authorization.

Teachers see the CUs they teach, coordinators their department, directors
their school, and the quality service and direction see everything.
Aggregates that would mix visible with non-visible CUs are denied, never
partially computed.
"""

from __future__ import annotations

import hashlib
from collections.abc import Iterable
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any

from .cube import CubeQuery, result_nodes
from .errors import DataError
from .formats import read_records
from .org import OrgTree, Role, RoleKind, descendant_cus

PRINCIPALS_SCHEMA = "lmscube/principals"


@dataclass(frozen=True)
class Principal:
    principal_id: str
    role: Role
    token_sha256: str = ""


@dataclass(frozen=True)
class Denial:
    reason: str
    scope: str


def visible_cus(principal: Principal, tree: OrgTree) -> frozenset[str]:
    """The exact CU set this principal's role may see."""
    role = principal.role
    role.validate(tree)
    if role.kind is RoleKind.TEACHER:
        return tree.teachers[role.ref].cu_ids  # type: ignore[index]
    if role.kind is RoleKind.DEPT_COORDINATOR:
        return descendant_cus(tree, role.ref)  # type: ignore[arg-type]
    if role.kind is RoleKind.SCHOOL_DIRECTOR:
        return descendant_cus(tree, role.ref)  # type: ignore[arg-type]
    return frozenset(tree.cus)


def home_nodes(principal: Principal, tree: OrgTree) -> tuple[str, ...]:
    """The highest node(s) the role can land on: one org node, or a teacher's CUs."""
    role = principal.role
    if role.kind in (RoleKind.QUALITY_SERVICE, RoleKind.DIRECTION):
        return (tree.university_id,)
    if role.kind in (RoleKind.SCHOOL_DIRECTOR, RoleKind.DEPT_COORDINATOR):
        return (role.ref,)  # type: ignore[return-value]
    return tuple(sorted(visible_cus(principal, tree)))


def authorize(principal: Principal, q: CubeQuery, tree: OrgTree) -> CubeQuery | Denial:
    """Restrict a query to nodes whose whole CU subtree is visible.

    Nodes mixing visible and non-visible CUs are dropped; if nothing
    survives the restriction the result is a Denial, not an empty query.
    Already-filtered queries pass through unchanged (idempotent).
    """
    visible = visible_cus(principal, tree)
    nodes = result_nodes(tree, q.org_scope, q.granularity)
    if q.node_filter is not None:
        nodes = tuple(n for n in nodes if n in q.node_filter)
    allowed = tuple(n for n in nodes if descendant_cus(tree, n) <= visible)
    if not allowed:
        return Denial(
            reason="insufficient scope",
            scope=f"{q.granularity.value} under {q.org_scope}",
        )
    if len(allowed) == len(nodes):
        return q
    return replace(q, node_filter=frozenset(allowed))


def load_principals(records: Iterable[dict[str, Any]], tree: OrgTree) -> dict[str, Principal]:
    """Build the principal registry keyed by id; roles are checked against the tree."""
    principals: dict[str, Principal] = {}
    for record in records:
        pid = str(record.get("id", ""))
        if not pid:
            raise DataError(f"principal record missing id: {record!r}")
        if pid in principals:
            raise DataError(f"duplicate principal id {pid!r}")
        try:
            kind = RoleKind(record.get("role"))
        except ValueError:
            raise DataError(f"principal {pid!r}: unknown role {record.get('role')!r}") from None
        ref = record.get("ref") or None
        role = Role(kind=kind, ref=str(ref) if ref else None)
        role.validate(tree)
        principals[pid] = Principal(
            principal_id=pid,
            role=role,
            token_sha256=str(record.get("token_sha256", "")),
        )
    return principals


def load_principals_file(path: Path, tree: OrgTree) -> dict[str, Principal]:
    with path.open("r", encoding="utf-8") as fh:
        records = [record for _, record in read_records(fh, PRINCIPALS_SCHEMA, source=str(path))]
    return load_principals(records, tree)


def hash_token(token: str) -> str:
    return hashlib.sha256(token.encode("utf-8")).hexdigest()


def authenticate(principals: dict[str, Principal], token: str) -> Principal | None:
    """Opaque token to principal lookup; None when nothing matches."""
    digest = hash_token(token)
    for principal in principals.values():
        if principal.token_sha256 and principal.token_sha256 == digest:
            return principal
    return None
