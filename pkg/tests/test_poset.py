from itertools import product
from pathlib import Path

import pytest

from kglie.catalog import STORED_TUPLES
from kglie.invariants import InvariantTuple
from kglie.poset import (
    CaseNode,
    catalog_nodes,
    detection_report,
    dot_export,
    hasse,
    json_export,
    precedes,
    transitive_closure,
)

GOLDEN = Path(__file__).parent / "golden" / "hasse.dot"

FIGURE_EDGES = {
    ("0", "1"), ("0", "2"), ("0", "3"), ("0", "4"),
    ("1", "5"), ("1", "8"), ("1", "9"),
    ("2", "6"), ("2", "7"), ("2", "9"), ("2", "10"),
    ("3", "5"), ("3", "6"),
    ("4", "5"), ("4", "6"), ("4", "7"), ("4", "8"),
    ("5", "11"), ("5", "12"),
    ("6", "12"), ("7", "12"),
    ("8", "11"), ("8", "12"),
    ("9", "12"), ("9", "13"),
}  # fmt: skip


def _pairs(sources, targets, name):
    return {(str(a), str(b)): name for a, b in product(sources, targets)}


def listed_disorderings() -> dict:
    """Pairs with n < n' listed as unordered, with the characteristic named for each."""
    out: dict = {}
    for part in (
        _pairs([3], [7, 8, 9, 10, 13], "r3"),
        _pairs([4, 5, 6, 7, 8], [9, 10, 13], "r3"),
        _pairs([11, 12], [13], "r3"),
        _pairs([2], [5, 8, 11], "r2"),
        _pairs([6, 7], [11], "r2"),
        _pairs([1], [6, 7, 10], "j1"),
        _pairs([5, 8], [10], "j1"),
        _pairs([11], [12], "j1"),
        _pairs([7], [11], "k"),
        _pairs([10], [12], "k"),
    ):
        for key, name in part.items():
            out.setdefault(key, set()).add(name)
    out[("10", "12")] |= {"m", "r1"}
    return out


@pytest.fixture(scope="module")
def nodes():
    return {c.id: c for c in catalog_nodes()}


def sub(nodes, *ids):
    return [nodes[i] for i in ids]


# ---------------------------------------------------------------- relation


def test_precedes_examples(nodes):
    assert precedes(nodes["1"], nodes["5"])
    assert not precedes(nodes["2"], nodes["5"])
    assert "r2" in detection_report(nodes["2"], nodes["5"])
    assert not precedes(nodes["0"], nodes["0"])


def test_strict_partial_order(nodes):
    cs = list(nodes.values())
    for a in cs:
        assert not precedes(a, a)
    for a, b in product(cs, cs):
        if precedes(a, b):
            assert not precedes(b, a)
    for a, b, c in product(cs, cs, cs):
        if precedes(a, b) and precedes(b, c):
            assert precedes(a, c)


def test_infinity_compares_above_naturals(nodes):
    assert precedes(nodes["9"], nodes["13"])
    assert not precedes(nodes["12"], nodes["13"])
    assert "r3" in detection_report(nodes["12"], nodes["13"])


# ---------------------------------------------------------------- Hasse diagram


def test_full_diagram_matches_figure(nodes):
    assert set(hasse(nodes.values()).edge_ids()) == FIGURE_EDGES


def test_full_diagram_figure_edges_are_present(nodes):
    edges = set(hasse(nodes.values()).edge_ids())
    assert FIGURE_EDGES <= edges
    assert edges - FIGURE_EDGES == {("10", "13")}


def test_singleton_diagram(nodes):
    assert hasse(sub(nodes, "1")).edges == ()


def test_sub_diagram(nodes):
    assert hasse(sub(nodes, "1", "5", "11")).edge_ids() == [("1", "5"), ("5", "11")]


def test_annotation(nodes):
    h = hasse(nodes.values())
    assert h.annotations == {("7", "12"): "p=2/q"}


def test_reduction_of_closure_is_stable(nodes):
    h = hasse(nodes.values())
    closure = transitive_closure(h.nodes, h.edges)
    assert closure == {(a.id, b.id) for a, b in product(h.nodes, h.nodes) if precedes(a, b)}
    by_id = {c.id: c for c in h.nodes}
    again = hasse(h.nodes)
    related = lambda a, b: (a.id, b.id) in closure  # noqa: E731
    reduced = [
        (a.id, b.id)
        for a, b in product(h.nodes, h.nodes)
        if related(a, b) and not any(related(a, c) and related(c, b) for c in h.nodes)
    ]
    assert sorted(reduced, key=lambda e: (by_id[e[0]].sort_key, by_id[e[1]].sort_key)) == again.edge_ids()


# ---------------------------------------------------------------- detection


def test_detection_examples(nodes):
    report = detection_report(nodes["3"], nodes["9"])
    assert "r3" in report and "l" in report
    assert {"k", "m", "r1"} <= set(detection_report(nodes["10"], nodes["12"]))
    assert detection_report(nodes["1"], nodes["5"]) == []


def test_detection_matches_listed_disorderings(nodes):
    listed = listed_disorderings()
    cs = list(nodes.values())
    for a, b in product(cs, cs):
        if not a.n < b.n:
            continue
        report = detection_report(a, b)
        key = (a.id, b.id)
        if key in listed:
            assert report, key
            assert listed[key] <= set(report), (key, report)
        else:
            assert report == [], (key, report)


def test_figure_pairs_are_ordered(nodes):
    closure = transitive_closure(list(nodes.values()), [(nodes[a], nodes[b]) for a, b in FIGURE_EDGES])
    for a, b in closure:
        assert detection_report(nodes[a], nodes[b]) == []


def test_stored_tuples_give_same_diagram():
    computed = hasse(catalog_nodes()).edge_ids()
    assert hasse(catalog_nodes(computed=False)).edge_ids() == computed


# ---------------------------------------------------------------- export


def test_dot_golden(nodes):
    assert dot_export(hasse(nodes.values())) == GOLDEN.read_text(encoding="utf-8")


def test_dot_structure(nodes):
    text = dot_export(hasse(nodes.values()))
    assert text.count("[label=\"Case") == 14
    assert text.count("rank=same") == 6
    assert sum(1 for line in text.splitlines() if "->" in line and "invis" not in line) == 25


def test_dot_empty():
    assert dot_export(hasse([])) == "digraph hasse {\n  rankdir=TB;\n  node [shape=box, style=rounded];\n}\n"


def test_dot_sub_diagram(nodes):
    text = dot_export(hasse(sub(nodes, "1", "5", "11")))
    assert text.count("[label=\"Case") == 3
    assert "case1 -> case5;" in text and "case5 -> case11;" in text


def test_json_export(nodes):
    import json

    data = json.loads(json_export(hasse(nodes.values())))
    assert len(data["nodes"]) == 14
    assert {"from": "7", "to": "12", "annotation": "p=2/q"} in data["edges"]
    assert next(n for n in data["nodes"] if n["id"] == "13")["tuple5"] == ["inf", "0", "inf", "inf", "inf"]


def test_custom_nodes():
    a = CaseNode("a", InvariantTuple(*([0] * 12)))
    b = CaseNode("b", STORED_TUPLES["1"])
    assert precedes(a, b) and hasse([a, b]).edge_ids() == [("a", "b")]
