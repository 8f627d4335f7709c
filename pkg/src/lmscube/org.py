"""Institutional hierarchy: university, schools, departments, course units.

The tree is built once from an import file, validated, then treated as
immutable. Course units are the leaves everything else aggregates over.
"""

from __future__ import annotations

from collections.abc import Iterable
from dataclasses import dataclass, field
from enum import Enum
from typing import Any

from .errors import DataError, QueryError


class NodeKind(str, Enum):
    UNIVERSITY = "university"
    SCHOOL = "school"
    DEPARTMENT = "department"
    CU = "cu"


_EXPECTED_PARENT = {
    NodeKind.SCHOOL: NodeKind.UNIVERSITY,
    NodeKind.DEPARTMENT: NodeKind.SCHOOL,
    NodeKind.CU: NodeKind.DEPARTMENT,
}

# Drill order, top to bottom.
KIND_DEPTH = {
    NodeKind.UNIVERSITY: 0,
    NodeKind.SCHOOL: 1,
    NodeKind.DEPARTMENT: 2,
    NodeKind.CU: 3,
}


@dataclass(frozen=True)
class CourseUnit:
    id: str
    name: str
    department_id: str
    teacher_ids: frozenset[str]
    enrolled_student_ids: frozenset[str]

    @property
    def population(self) -> frozenset[str]:
        """Everyone attached to the unit: enrolled students plus teachers."""
        return self.enrolled_student_ids | self.teacher_ids

    @property
    def has_enrollment(self) -> bool:
        return bool(self.enrolled_student_ids)


@dataclass(frozen=True)
class Teacher:
    id: str
    name: str
    school_ids: frozenset[str]
    cu_ids: frozenset[str]


class RoleKind(str, Enum):
    TEACHER = "teacher"
    DEPT_COORDINATOR = "dept_coordinator"
    SCHOOL_DIRECTOR = "school_director"
    QUALITY_SERVICE = "quality_service"
    DIRECTION = "direction"


@dataclass(frozen=True)
class Role:
    """A role variant plus the org/teacher reference it is scoped to.

    ``ref`` is a teacher id for TEACHER, a department id for
    DEPT_COORDINATOR, a school id for SCHOOL_DIRECTOR, and None for the
    two institution-wide roles.
    """

    kind: RoleKind
    ref: str | None = None

    def validate(self, tree: "OrgTree") -> None:
        if self.kind is RoleKind.TEACHER:
            if self.ref not in tree.teachers:
                raise QueryError(f"unknown teacher {self.ref!r}", unknown_ref=True)
        elif self.kind is RoleKind.DEPT_COORDINATOR:
            if tree.kinds.get(self.ref or "") is not NodeKind.DEPARTMENT:
                raise QueryError(f"unknown department {self.ref!r}", unknown_ref=True)
        elif self.kind is RoleKind.SCHOOL_DIRECTOR:
            if tree.kinds.get(self.ref or "") is not NodeKind.SCHOOL:
                raise QueryError(f"unknown school {self.ref!r}", unknown_ref=True)
        elif self.ref is not None:
            raise QueryError(f"{self.kind.value} role takes no org reference")


@dataclass(frozen=True)
class OrgTree:
    university_id: str
    names: dict[str, str]
    kinds: dict[str, NodeKind]
    parents: dict[str, str | None]
    children: dict[str, tuple[str, ...]]
    cus: dict[str, CourseUnit]
    teachers: dict[str, Teacher]
    warnings: tuple[str, ...] = field(default=())

    def require_node(self, node_id: str) -> NodeKind:
        kind = self.kinds.get(node_id)
        if kind is None:
            raise QueryError(f"unknown node {node_id!r}", unknown_ref=True)
        return kind

    def node_ids(self) -> tuple[str, ...]:
        return tuple(self.kinds)

    def ancestors(self, node_id: str) -> tuple[str, ...]:
        """Chain of parent ids from the node up to the university root."""
        self.require_node(node_id)
        chain: list[str] = []
        current = self.parents[node_id]
        while current is not None:
            chain.append(current)
            current = self.parents[current]
        return tuple(chain)


class OrgError(DataError):
    """Org import failed validation; carries every violation found."""

    def __init__(self, problems: list[str]):
        self.problems = list(problems)
        super().__init__("invalid org records: " + "; ".join(problems))


def build_org_tree(records: Iterable[dict[str, Any]]) -> OrgTree:
    """Assemble and validate an OrgTree from parsed org records.

    Records may arrive in any order. All violations are collected and
    reported together, each naming the offending id.
    """
    problems: list[str] = []
    nodes: dict[str, dict[str, Any]] = {}
    person_names: dict[str, str] = {}
    memberships: list[tuple[str, str, str]] = []

    for record in records:
        rtype = record.get("type", "node")
        if rtype == "node":
            node_id = _require_str(record, "id", problems)
            if node_id is None:
                continue
            if node_id in nodes:
                problems.append(f"duplicate id {node_id!r}")
                continue
            nodes[node_id] = record
        elif rtype == "membership":
            cu_id = record.get("cu_id")
            person_id = record.get("person_id")
            role = record.get("role")
            if not cu_id or not person_id or role not in ("teacher", "student"):
                problems.append(f"bad membership record {record!r}")
                continue
            memberships.append((str(cu_id), str(person_id), str(role)))
        elif rtype == "person":
            pid = record.get("id")
            if pid:
                person_names[str(pid)] = str(record.get("name", pid))
        else:
            problems.append(f"unknown record type {rtype!r}")

    kinds: dict[str, NodeKind] = {}
    for node_id, record in nodes.items():
        raw_kind = record.get("kind")
        try:
            kinds[node_id] = NodeKind(raw_kind)
        except ValueError:
            problems.append(f"unknown kind {raw_kind!r} for {node_id!r}")

    roots = [nid for nid, kind in kinds.items() if kind is NodeKind.UNIVERSITY]
    if len(roots) != 1:
        problems.append(
            f"expected exactly one university node, found {len(roots)}"
            + (f" ({', '.join(sorted(roots))})" if roots else "")
        )

    parents: dict[str, str | None] = {}
    for node_id, kind in kinds.items():
        parent_id = nodes[node_id].get("parent_id")
        if kind is NodeKind.UNIVERSITY:
            if parent_id:
                problems.append(f"university {node_id!r} must not have a parent")
            parents[node_id] = None
            continue
        if not parent_id:
            if kind is NodeKind.CU:
                problems.append(f"CU without department: {node_id!r}")
            else:
                problems.append(f"{kind.value} {node_id!r} missing parent_id")
            continue
        parent_kind = kinds.get(str(parent_id))
        if parent_kind is None:
            problems.append(f"dangling parent_id {parent_id!r} on {node_id!r}")
            continue
        if parent_kind is not _EXPECTED_PARENT[kind]:
            problems.append(
                f"wrong parent kind for {node_id!r}: {kind.value} under "
                f"{parent_kind.value} {parent_id!r}"
            )
            continue
        parents[node_id] = str(parent_id)

    # Kind rules make cycles impossible among accepted edges; keep an explicit
    # ancestor walk as a safety net against future kind changes.
    for node_id in parents:
        seen = {node_id}
        current = parents.get(node_id)
        while current is not None:
            if current in seen:
                problems.append(f"cycle detected at {current!r}")
                break
            seen.add(current)
            current = parents.get(current)

    teacher_cus: dict[str, set[str]] = {}
    cu_teachers: dict[str, set[str]] = {}
    cu_students: dict[str, set[str]] = {}
    for cu_id, person_id, role in memberships:
        if kinds.get(cu_id) is not NodeKind.CU:
            problems.append(f"membership for unknown CU {cu_id!r}")
            continue
        if role == "teacher":
            cu_teachers.setdefault(cu_id, set()).add(person_id)
            teacher_cus.setdefault(person_id, set()).add(cu_id)
        else:
            cu_students.setdefault(cu_id, set()).add(person_id)

    for cu_id in sorted(set(cu_teachers) & set(cu_students)):
        overlap = cu_teachers[cu_id] & cu_students[cu_id]
        for person_id in sorted(overlap):
            problems.append(
                f"person {person_id!r} is both teacher and student of CU {cu_id!r}"
            )

    if problems:
        raise OrgError(problems)

    children: dict[str, list[str]] = {nid: [] for nid in kinds}
    for node_id, parent_id in parents.items():
        if parent_id is not None:
            children[parent_id].append(node_id)

    warnings: list[str] = []
    cus: dict[str, CourseUnit] = {}
    for node_id, kind in kinds.items():
        if kind is not NodeKind.CU:
            continue
        students = frozenset(cu_students.get(node_id, set()))
        if not students:
            warnings.append(f"no-enrollment: {node_id}")
        cus[node_id] = CourseUnit(
            id=node_id,
            name=str(nodes[node_id].get("name", node_id)),
            department_id=parents[node_id] or "",
            teacher_ids=frozenset(cu_teachers.get(node_id, set())),
            enrolled_student_ids=students,
        )

    teachers: dict[str, Teacher] = {}
    for teacher_id, cu_ids in teacher_cus.items():
        school_ids = set()
        for cu_id in cu_ids:
            dept_id = parents[cu_id]
            if dept_id is not None and parents.get(dept_id) is not None:
                school_ids.add(parents[dept_id])
        teachers[teacher_id] = Teacher(
            id=teacher_id,
            name=person_names.get(teacher_id, teacher_id),
            school_ids=frozenset(s for s in school_ids if s),
            cu_ids=frozenset(cu_ids),
        )

    return OrgTree(
        university_id=roots[0],
        names={nid: str(nodes[nid].get("name", nid)) for nid in kinds},
        kinds=kinds,
        parents=parents,
        children={nid: tuple(sorted(kids)) for nid, kids in children.items()},
        cus=cus,
        teachers=teachers,
        warnings=tuple(warnings),
    )


def descendant_cus(tree: OrgTree, node_id: str) -> frozenset[str]:
    """All CU ids at or below a node; the singleton set for a CU itself."""
    kind = tree.require_node(node_id)
    if kind is NodeKind.CU:
        return frozenset((node_id,))
    found: set[str] = set()
    stack = [node_id]
    while stack:
        current = stack.pop()
        for child in tree.children[current]:
            if tree.kinds[child] is NodeKind.CU:
                found.add(child)
            else:
                stack.append(child)
    return frozenset(found)


def _require_str(record: dict[str, Any], key: str, problems: list[str]) -> str | None:
    value = record.get(key)
    if not value:
        problems.append(f"record missing {key!r}: {record!r}")
        return None
    return str(value)
