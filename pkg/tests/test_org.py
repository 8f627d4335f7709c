from __future__ import annotations

import pytest

from lmscube.errors import QueryError
from lmscube.org import NodeKind, OrgError, build_org_tree, descendant_cus

from .conftest import acl_org_records, member, node, tiny_org_records


def test_minimal_tree_depth_four():
    tree = build_org_tree(
        [
            node("university", "u"),
            node("school", "s", "u"),
            node("department", "d", "s"),
            node("cu", "c", "d"),
        ]
    )
    assert set(tree.kinds) == {"u", "s", "d", "c"}
    assert tree.ancestors("c") == ("d", "s", "u")
    assert tree.cus["c"].department_id == "d"


def test_cu_under_school_is_wrong_parent_kind():
    with pytest.raises(OrgError, match="wrong parent kind"):
        build_org_tree(
            [
                node("university", "u"),
                node("school", "s", "u"),
                node("cu", "c", "s"),
            ]
        )


def test_teacher_across_two_schools():
    records = [node("university", "u")]
    for s in ("s1", "s2"):
        records.append(node("school", s, "u"))
    records += [
        node("department", "d1", "s1"),
        node("department", "d2", "s1"),
        node("department", "d3", "s2"),
    ]
    for i in range(1, 11):
        dept = ("d1", "d2", "d3")[i % 3]
        records.append(node("cu", f"c{i}", dept))
    records.append(member("c1", "tx", "teacher"))  # c1 -> d2 -> s1
    records.append(member("c3", "tx", "teacher"))  # c3 -> d1 -> s1
    records.append(member("c5", "tx", "teacher"))  # c5 -> d3 -> s2
    tree = build_org_tree(records)
    assert tree.teachers["tx"].school_ids == frozenset({"s1", "s2"})
    assert len(tree.cus) == 10


def test_duplicate_and_dangling_ids_reported_together():
    with pytest.raises(OrgError) as err:
        build_org_tree(
            [
                node("university", "u"),
                node("school", "s", "u"),
                node("school", "s", "u"),
                node("department", "d", "nope"),
            ]
        )
    message = str(err.value)
    assert "duplicate id 's'" in message
    assert "dangling parent_id 'nope'" in message


def test_cu_without_department_named():
    with pytest.raises(OrgError, match="CU without department: 'orphan'"):
        build_org_tree([node("university", "u"), node("cu", "orphan")])


def test_person_cannot_be_teacher_and_student_of_same_cu():
    records = tiny_org_records() + [member("c1", "t1", "student")]
    with pytest.raises(OrgError, match="both teacher and student"):
        build_org_tree(records)


def test_no_enrollment_cu_accepted_with_warning():
    records = [
        node("university", "u"),
        node("school", "s", "u"),
        node("department", "d", "s"),
        node("cu", "c", "d"),
    ]
    tree = build_org_tree(records)
    assert "no-enrollment: c" in tree.warnings
    assert not tree.cus["c"].has_enrollment


def test_descendant_cus_leaf_and_root(tiny_tree):
    assert descendant_cus(tiny_tree, "c1") == {"c1"}
    assert descendant_cus(tiny_tree, "u1") == {"c1", "c2"}


def test_descendant_cus_school_union():
    records = [
        node("university", "u"),
        node("school", "s", "u"),
        node("department", "da", "s"),
        node("department", "db", "s"),
        node("cu", "a", "da"),
        node("cu", "b", "da"),
        node("cu", "c", "db"),
    ]
    tree = build_org_tree(records)
    assert descendant_cus(tree, "s") == {"a", "b", "c"}


def test_descendant_cus_unknown_node(tiny_tree):
    with pytest.raises(QueryError, match="unknown node"):
        descendant_cus(tiny_tree, "ghost")


def test_children_partition_invariant(acl_tree):
    for node_id, kind in acl_tree.kinds.items():
        if kind is NodeKind.CU:
            continue
        mine = descendant_cus(acl_tree, node_id)
        child_sets = [descendant_cus(acl_tree, c) for c in acl_tree.children[node_id]]
        union = frozenset().union(*child_sets) if child_sets else frozenset()
        assert union == mine
        assert sum(len(s) for s in child_sets) == len(mine)  # disjoint


def test_department_counts_sum_to_university(acl_tree):
    dept_total = sum(
        len(descendant_cus(acl_tree, n))
        for n, k in acl_tree.kinds.items()
        if k is NodeKind.DEPARTMENT
    )
    assert dept_total == len(descendant_cus(acl_tree, "U")) == 20


def test_build_is_deterministic():
    first = build_org_tree(acl_org_records())
    second = build_org_tree(acl_org_records())
    assert first.kinds == second.kinds
    assert first.children == second.children
    assert first.cus == second.cus
    assert first.teachers == second.teachers
