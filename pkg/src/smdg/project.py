"""Projection between partitioned DAGs and smDGs.

``slp`` maps a DAG down to the smDG over its visible vertices; ``canonical_graph``
rebuilds a role-annotated graph from an smDG (possibly cyclic). An smDG is
*liftable* when that rebuilt graph is acyclic, i.e. when it is the projection
of some actual DAG.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from . import canon
from .graph import (
    GraphError,
    PartitionedDag,
    Role,
    SmDG,
    VertexId,
    find_cycle,
    simple_cycles,
)


class NotLiftableError(GraphError):
    def __init__(self, cycle: tuple[VertexId, ...]):
        self.cycle = cycle
        super().__init__(
            "smDG is not liftable; the cycle "
            + " -> ".join(cycle + (cycle[0],))
            + " has no edge from the selected support into the marginal support"
        )


class NotCanonicalError(GraphError):
    pass


def face_label(kind: str, face) -> str:
    # curly wrapper distinguishes face vertices from rendered-pair vertices,
    # whose labels use angle brackets
    return f"{kind}{{{'·'.join(sorted(face))}}}"


def slp(d: PartitionedDag) -> SmDG:
    """Project a partitioned DAG onto its visible vertices.

    Non-canonical inputs are canonicalized first. The directed structure is
    the induced visible subgraph plus one edge a -> b per path
    a -> s <- m -> b; the marginal (selected) system collects the visible
    children (parents) of each marginalized (selected) vertex.
    """
    if not canon.is_canonical(d):
        d = canon.canonicalize(d).output
    vis = d.visible
    edges = {(a, b) for a, b in d.edges if a in vis and b in vis}
    for m in d.marginalized:
        for s in d.children_of(m) & d.selected:
            for a in d.parents_of(s) & vis:
                for b in d.children_of(m) & vis:
                    edges.add((a, b))
    marginal = [d.children_of(m) & vis for m in d.marginalized]
    selected = [d.parents_of(s) & vis for s in d.selected]
    return SmDG.of(vis, edges, marginal, selected)


@dataclass(frozen=True)
class CanonicalGraph:
    """Role-annotated directed graph rebuilt from an smDG.

    Unlike :class:`PartitionedDag` this may be cyclic; ``cycle`` carries a
    witness when it is. ``to_partitioned_dag`` is only available when acyclic.
    """

    roles: tuple[tuple[VertexId, Role], ...]
    edges: tuple[tuple[VertexId, VertexId], ...]
    cycle: Optional[tuple[VertexId, ...]]

    @property
    def is_acyclic(self) -> bool:
        return self.cycle is None

    def to_partitioned_dag(self) -> PartitionedDag:
        if self.cycle is not None:
            raise NotLiftableError(self.cycle)
        return PartitionedDag.from_roles(dict(self.roles), self.edges)


def canonical_graph(g: SmDG) -> CanonicalGraph:
    """Rebuild the canonical graph of an smDG.

    Edges whose tail lies in the selected support and whose head lies in the
    marginal support become special paths a -> s <- m -> b; other edges stay
    plain; each maximal face becomes a fresh non-visible vertex. Face
    vertices that would be dominated by a special-edge vertex (a singleton
    selected face at a special tail, or a singleton marginal face at a
    special head) are skipped: the redundancy-removal rewrite would delete
    them, and keeping them would make the output non-canonical.
    """
    sel_support = g.selected_system.support
    mar_support = g.marginal_system.support
    roles: dict[VertexId, Role] = {v: Role.VISIBLE for v in g.visibles}
    edges: set[tuple[VertexId, VertexId]] = set()
    special_tails: set[VertexId] = set()
    special_heads: set[VertexId] = set()
    taken = set(g.visibles)
    for a, b in sorted(g.edges):
        if a in sel_support and b in mar_support:
            s_label, m_label = canon.pair_labels(a, b)
            s_label = canon._fresh(s_label, taken)
            taken.add(s_label)
            m_label = canon._fresh(m_label, taken)
            taken.add(m_label)
            roles[s_label] = Role.SELECTED
            roles[m_label] = Role.MARGINALIZED
            edges.update({(a, s_label), (m_label, s_label), (m_label, b)})
            special_tails.add(a)
            special_heads.add(b)
        else:
            edges.add((a, b))
    for face in g.marginal_system.sorted_faces():
        if len(face) == 1 and face[0] in special_heads:
            continue
        label = canon._fresh(face_label("m", face), taken)
        taken.add(label)
        roles[label] = Role.MARGINALIZED
        edges.update({(label, v) for v in face})
    for face in g.selected_system.sorted_faces():
        if len(face) == 1 and face[0] in special_tails:
            continue
        label = canon._fresh(face_label("s", face), taken)
        taken.add(label)
        roles[label] = Role.SELECTED
        edges.update({(v, label) for v in face})
    cycle = find_cycle(roles, edges)
    return CanonicalGraph(
        roles=tuple(sorted(roles.items())), edges=tuple(sorted(edges)), cycle=cycle
    )


def is_liftable(g: SmDG) -> bool:
    """True when every directed cycle (self-loops included) contains an edge
    from the selected support into the marginal support."""
    sel_support = g.selected_system.support
    mar_support = g.marginal_system.support
    for cycle in simple_cycles(g.visibles, g.edges):
        pairs = list(zip(cycle, cycle[1:] + cycle[:1]))
        if not any(a in sel_support and b in mar_support for a, b in pairs):
            return False
    return True


def lift(g: SmDG) -> PartitionedDag:
    """The canonical DAG of a liftable smDG; raises with an offending cycle."""
    return canonical_graph(g).to_partitioned_dag()


def observe_and_do_equivalent(d1: PartitionedDag, d2: PartitionedDag) -> bool:
    """Whether the two DAGs are indistinguishable under every soft intervention
    combined with joint observation of natural values (equal projections)."""
    if d1.visible != d2.visible:
        raise GraphError("graphs must share the same visible vertex set")
    return slp(d1) == slp(d2)


@dataclass(frozen=True)
class CanonicalSignature:
    """Structure of a canonical DAG up to renaming of its non-visible vertices.

    The four components mirror how edges of a canonical DAG decompose:
    plain visible edges, special paths keyed by their visible endpoints, and
    the child (parent) sets of marginalized (selected) vertices that touch
    only visible vertices. The face components are multisets.
    """

    directed_edges: tuple[tuple[VertexId, VertexId], ...]
    special_pairs: tuple[tuple[VertexId, VertexId], ...]
    marginal_child_sets: tuple[tuple[VertexId, ...], ...]
    selected_parent_sets: tuple[tuple[VertexId, ...], ...]


def signature(d: PartitionedDag) -> CanonicalSignature:
    if not canon.is_canonical(d):
        raise NotCanonicalError("signature is only defined for canonical DAGs")
    vis = d.visible
    plain = sorted((a, b) for a, b in d.edges if a in vis and b in vis)
    specials: list[tuple[VertexId, VertexId]] = []
    face_m: list[tuple[VertexId, ...]] = []
    face_s: list[tuple[VertexId, ...]] = []
    for m in sorted(d.marginalized):
        ch = d.children_of(m)
        sel_children = sorted(ch & d.selected)
        if not sel_children:
            face_m.append(tuple(sorted(ch)))
            continue
        if len(sel_children) != 1 or len(ch & vis) != 1:
            raise NotCanonicalError(f"marginalized vertex {m!r} is not in canonical shape")
        (s,), (b,) = sel_children, sorted(ch & vis)
        a_candidates = sorted(d.parents_of(s) & vis)
        if len(a_candidates) != 1:
            raise NotCanonicalError(f"selected vertex {s!r} is not in canonical shape")
        specials.append((a_candidates[0], b))
    for s in sorted(d.selected):
        pa = d.parents_of(s)
        if not (pa & d.marginalized):
            face_s.append(tuple(sorted(pa)))
    return CanonicalSignature(
        directed_edges=tuple(plain),
        special_pairs=tuple(sorted(specials)),
        marginal_child_sets=tuple(sorted(face_m)),
        selected_parent_sets=tuple(sorted(face_s)),
    )
