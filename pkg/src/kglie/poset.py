"""Partial order of Lie-symmetry extensions and its Hasse diagram.

Case N precedes Case M when the five-tuple (n, r3, r2, j1, k) of N is
below that of M: strictly smaller n and no larger r3, r2, j1, k.  Infinite
entries compare above every natural number.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations

from .invariants import FIELD_NAMES, INF, InvariantTuple, tuple12

__all__ = [
    "CaseNode",
    "HasseDiagram",
    "precedes",
    "hasse",
    "transitive_closure",
    "detection_report",
    "catalog_nodes",
    "dot_export",
    "json_export",
    "EDGE_ANNOTATIONS",
]

EDGE_ANNOTATIONS = {("7", "12"): "p=2/q"}
DISPLAY_NAMES = {"7": "Case 7_q", "8": "Case 8_q", "12": "Case 12_p"}


@dataclass(frozen=True)
class CaseNode:
    id: str
    invariants: InvariantTuple
    name: str = ""

    @property
    def tuple5(self) -> tuple:
        return self.invariants.tuple5

    @property
    def n(self):
        return self.invariants.n

    @property
    def display(self) -> str:
        return self.name or DISPLAY_NAMES.get(self.id, f"Case {self.id}")

    @property
    def sort_key(self) -> tuple:
        return (int(self.id), self.id) if self.id.isdigit() else (10**6, self.id)


def precedes(a: CaseNode, b: CaseNode) -> bool:
    n, r3, r2, j1, k = a.tuple5
    bn, br3, br2, bj1, bk = b.tuple5
    return n < bn and r3 <= br3 and r2 <= br2 and j1 <= bj1 and k <= bk


@dataclass(frozen=True)
class HasseDiagram:
    nodes: tuple
    edges: tuple
    annotations: dict

    def edge_ids(self) -> list[tuple[str, str]]:
        return [(a.id, b.id) for a, b in self.edges]


def _sorted_nodes(nodes) -> tuple:
    return tuple(sorted(set(nodes), key=lambda c: c.sort_key))


def _edge_key(e):
    return (e[0].sort_key, e[1].sort_key)


def transitive_closure(nodes, edges) -> set:
    """All pairs reachable along ``edges`` (pairs of node ids)."""
    reach = {(a.id, b.id) for a, b in edges}
    ids = [c.id for c in nodes]
    for k in ids:
        for i in ids:
            if (i, k) not in reach:
                continue
            for j in ids:
                if (k, j) in reach:
                    reach.add((i, j))
    return reach


def _reduce(nodes, related) -> list:
    edges = []
    for a in nodes:
        for b in nodes:
            if not related(a, b):
                continue
            if any(related(a, c) and related(c, b) for c in nodes if c is not a and c is not b):
                continue
            edges.append((a, b))
    return sorted(edges, key=_edge_key)


def hasse(nodes) -> HasseDiagram:
    """Transitive reduction of ``precedes`` restricted to ``nodes``."""
    nodes = _sorted_nodes(nodes)
    edges = _reduce(nodes, precedes)
    notes = {(a.id, b.id): EDGE_ANNOTATIONS[(a.id, b.id)] for a, b in edges if (a.id, b.id) in EDGE_ANNOTATIONS}
    return HasseDiagram(nodes, tuple(edges), notes)


def detection_report(a: CaseNode, b: CaseNode) -> list[str]:
    """Characteristics among the twelve whose inequality fails for ``(a, b)``."""
    failed = []
    for name, va, vb in zip(FIELD_NAMES, a.invariants.as_tuple(), b.invariants.as_tuple()):
        if name == "n":
            if not va < vb:
                failed.append(name)
        elif va > vb:
            failed.append(name)
    return failed


def catalog_nodes(q=Fraction(1), p=Fraction(2), computed: bool = True) -> list[CaseNode]:
    """Nodes 0..13; tuples recomputed from the catalog algebras unless ``computed`` is off."""
    from .catalog import MAIN_CASES, STORED_TUPLES, get_case

    out = []
    for cid in MAIN_CASES:
        rec = get_case(cid, q=q if cid in ("7", "8") else None, p=p if cid == "12" else None)
        inv = tuple12(rec.algebra()) if computed and rec.finite else STORED_TUPLES[cid]
        out.append(CaseNode(cid, inv))
    return out


def _fmt(v) -> str:
    return "inf" if v == INF else str(v)


def _node_name(c: CaseNode) -> str:
    return "case" + "".join(ch if ch.isalnum() else "_" for ch in c.id)


def dot_export(h: HasseDiagram) -> str:
    """Deterministic DOT text with one rank group per dimension n."""
    lines = ["digraph hasse {", "  rankdir=TB;", "  node [shape=box, style=rounded];"]
    groups: dict = {}
    for c in h.nodes:
        groups.setdefault(c.n, []).append(c)
    for n in sorted(groups):
        label = "n=∞" if n == INF else f"n={n}"
        members = " ".join(f"{_node_name(c)};" for c in groups[n])
        lines.append(f'  {{ rank=same; "{label}" [shape=plaintext]; {members} }}')
    for c in h.nodes:
        lines.append(f'  {_node_name(c)} [label="{c.display}"];')
    ordered = sorted(groups)
    for lo, hi in zip(ordered, ordered[1:]):
        a = "n=∞" if lo == INF else f"n={lo}"
        b = "n=∞" if hi == INF else f"n={hi}"
        lines.append(f'  "{a}" -> "{b}" [style=invis];')
    for a, b in h.edges:
        note = h.annotations.get((a.id, b.id))
        attr = f' [label="{note}"]' if note else ""
        lines.append(f"  {_node_name(a)} -> {_node_name(b)}{attr};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def json_export(h: HasseDiagram) -> str:
    data = {
        "nodes": [
            {"id": c.id, "label": c.display, "tuple5": [_fmt(v) for v in c.tuple5]} for c in h.nodes
        ],
        "edges": [
            {"from": a.id, "to": b.id, **({"annotation": h.annotations[(a.id, b.id)]} if (a.id, b.id) in h.annotations else {})}
            for a, b in h.edges
        ],
    }
    return json.dumps(data, indent=2, sort_keys=True, ensure_ascii=False)
