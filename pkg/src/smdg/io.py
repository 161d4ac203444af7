"""JSON and DOT serialization for graphs.

Wire formats:

* partitioned DAG: ``{"vertices": [{"id": "a", "role": "visible"}, ...],
  "edges": [["a", "b"], ...]}``
* smDG: ``{"visibles": [...], "edges": [...], "marginal_faces": [["a","b"],
  ...], "selected_faces": [...]}`` (maximal faces only)

Serialization is deterministic: identical values produce identical bytes.
"""

from __future__ import annotations

import json
from typing import Any, Mapping

from .graph import GraphError, PartitionedDag, Role, SmDG


def dag_to_obj(d: PartitionedDag) -> dict[str, Any]:
    return {
        "vertices": [{"id": v, "role": r.value} for v, r in d.roles],
        "edges": [list(e) for e in d.edges],
    }


def dag_from_obj(obj: Mapping[str, Any]) -> PartitionedDag:
    try:
        roles = {item["id"]: Role.parse(item["role"]) for item in obj["vertices"]}
        edges = [(a, b) for a, b in obj["edges"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise GraphError(f"malformed DAG object: {exc}") from exc
    return PartitionedDag.from_roles(roles, edges)


def smdg_to_obj(g: SmDG) -> dict[str, Any]:
    return {
        "visibles": sorted(g.visibles),
        "edges": [list(e) for e in g.sorted_edges()],
        "marginal_faces": [list(f) for f in g.marginal_system.sorted_faces()],
        "selected_faces": [list(f) for f in g.selected_system.sorted_faces()],
    }


def smdg_from_obj(obj: Mapping[str, Any]) -> SmDG:
    try:
        return SmDG.of(
            obj["visibles"],
            [(a, b) for a, b in obj["edges"]],
            obj.get("marginal_faces", []),
            obj.get("selected_faces", []),
        )
    except (KeyError, TypeError) as exc:
        raise GraphError(f"malformed smDG object: {exc}") from exc


def graph_from_obj(obj: Mapping[str, Any]) -> PartitionedDag | SmDG:
    """Dispatch on the JSON shape: DAGs carry "vertices", smDGs "visibles"."""
    if "vertices" in obj:
        return dag_from_obj(obj)
    if "visibles" in obj:
        return smdg_from_obj(obj)
    raise GraphError("object is neither a partitioned DAG nor an smDG")


def dumps(value: PartitionedDag | SmDG) -> str:
    obj = dag_to_obj(value) if isinstance(value, PartitionedDag) else smdg_to_obj(value)
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def loads(text: str) -> PartitionedDag | SmDG:
    return graph_from_obj(json.loads(text))


_ROLE_STYLE = {
    Role.VISIBLE: 'shape=ellipse, color=black, fillcolor=white, style=solid',
    Role.MARGINALIZED: 'shape=ellipse, color=red, fillcolor=grey90, style=filled',
    Role.SELECTED: 'shape=ellipse, color=blue, fillcolor=grey90, style=filled',
}


def _quote(name: str) -> str:
    return '"' + name.replace('"', '\\"') + '"'


def dag_to_dot(d: PartitionedDag) -> str:
    lines = ["digraph {"]
    for v, role in d.roles:
        lines.append(f"  {_quote(v)} [{_ROLE_STYLE[role]}];")
    for a, b in d.edges:
        lines.append(f"  {_quote(a)} -> {_quote(b)};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def smdg_to_dot(g: SmDG) -> str:
    """Visible vertices with plain edges, red fan-out hyperedges for marginal
    faces and blue undirected fan-in hyperedges for selected faces."""
    lines = ["digraph {"]
    for v in sorted(g.visibles):
        lines.append(f"  {_quote(v)} [{_ROLE_STYLE[Role.VISIBLE]}];")
    for a, b in g.sorted_edges():
        lines.append(f"  {_quote(a)} -> {_quote(b)};")
    for i, face in enumerate(g.marginal_system.sorted_faces()):
        hub = f"__m{i}"
        lines.append(f"  {_quote(hub)} [shape=point, color=red];")
        for v in face:
            lines.append(f"  {_quote(hub)} -> {_quote(v)} [color=red];")
    for i, face in enumerate(g.selected_system.sorted_faces()):
        hub = f"__s{i}"
        lines.append(f"  {_quote(hub)} [shape=point, color=blue];")
        for v in face:
            lines.append(f"  {_quote(v)} -> {_quote(hub)} [color=blue, dir=none];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def to_dot(value: PartitionedDag | SmDG) -> str:
    return dag_to_dot(value) if isinstance(value, PartitionedDag) else smdg_to_dot(value)
