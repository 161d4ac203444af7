"""Deterministic enumerators for small graphs.

These drive the exhaustive property sweeps: all smDGs over a few visible
vertices (complete up to three visibles; bounded and union-representative at
four, where liftability depends on the face systems only through their
unions), and all canonical DAGs within a non-visible budget, generated
constructively from the structure canonical DAGs are known to have.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterator, Optional

from . import canon, project
from .graph import PartitionedDag, Role, SmDG, VertexId, is_acyclic

VISIBLE_NAMES = ("a", "b", "c", "d", "e", "f")

DEFAULT_VISIBLE_CAP = 4


class EnumerationError(ValueError):
    pass


@dataclass(frozen=True)
class SmdgBounds:
    max_edges: Optional[int] = None
    max_face_size: int = 3
    systems: str = "antichains"  # or "singleton_unions"

    @classmethod
    def default_for(cls, n_visible: int) -> "SmdgBounds":
        if n_visible <= 3:
            return cls()
        return cls(max_edges=4, systems="singleton_unions")


def antichains(ground: tuple[VertexId, ...], max_face_size: int) -> list[tuple]:
    """All families of pairwise-incomparable non-empty subsets, smallest
    families first, in a fixed order."""
    subsets = []
    for k in range(1, min(len(ground), max_face_size) + 1):
        subsets.extend(frozenset(c) for c in combinations(ground, k))

    out: list[tuple] = []

    def extend(start: int, family: list[frozenset]) -> None:
        out.append(tuple(family))
        for i in range(start, len(subsets)):
            cand = subsets[i]
            if any(cand <= f or f <= cand for f in family):
                continue
            family.append(cand)
            extend(i + 1, family)
            family.pop()

    extend(0, [])
    return sorted(out, key=lambda fam: (len(fam), sorted(sorted(f) for f in fam)))


def _edge_universe(verts: tuple[VertexId, ...]) -> list[tuple[VertexId, VertexId]]:
    return sorted((a, b) for a in verts for b in verts)


def enumerate_smdgs(
    n_visible: int,
    bounds: Optional[SmdgBounds] = None,
    liftable_only: bool = False,
    visible_cap: int = DEFAULT_VISIBLE_CAP,
) -> Iterator[SmDG]:
    if n_visible > visible_cap:
        raise EnumerationError(f"n_visible={n_visible} exceeds the cap {visible_cap}")
    bounds = bounds or SmdgBounds.default_for(n_visible)
    verts = VISIBLE_NAMES[:n_visible]
    universe = _edge_universe(verts)
    if bounds.systems == "antichains":
        families = antichains(verts, bounds.max_face_size)
        systems = [families, families]
    elif bounds.systems == "singleton_unions":
        # representative systems with each possible support
        unions = []
        for k in range(0, n_visible + 1):
            for support in combinations(verts, k):
                unions.append(tuple(frozenset({v}) for v in support))
        systems = [unions, unions]
    else:
        raise EnumerationError(f"unknown system mode {bounds.systems!r}")

    max_edges = len(universe) if bounds.max_edges is None else bounds.max_edges
    for n_e in range(0, max_edges + 1):
        for edges in combinations(universe, n_e):
            for l_faces in systems[0]:
                for s_faces in systems[1]:
                    g = SmDG.of(verts, edges, l_faces, s_faces)
                    if liftable_only and not project.is_liftable(g):
                        continue
                    yield g


def enumerate_partitioned_dags(
    n_visible: int,
    n_marginalized: int,
    n_selected: int,
    exogenous_terminal_only: bool = True,
) -> Iterator[PartitionedDag]:
    """All partitioned DAGs over fixed labelled vertex pools; by default the
    latents are parentless and the selections childless (the shape every
    graph canonicalizes into), which keeps the space tractable."""
    vis = VISIBLE_NAMES[:n_visible]
    mar = tuple(f"m{i+1}" for i in range(n_marginalized))
    sel = tuple(f"s{i+1}" for i in range(n_selected))
    universe: list[tuple[VertexId, VertexId]] = []
    universe += [(m, v) for m in mar for v in vis]
    universe += [(m, s) for m in mar for s in sel]
    universe += [(a, b) for a in vis for b in vis if a != b]
    universe += [(v, s) for v in vis for s in sel]
    if not exogenous_terminal_only:
        universe += [(v, m) for v in vis for m in mar]
        universe += [(s, x) for s in sel for x in (*vis, *mar)]
        universe += [(m1, m2) for m1 in mar for m2 in mar if m1 != m2]
        universe += [(s1, s2) for s1 in sel for s2 in sel if s1 != s2]
    universe = sorted(set(universe))
    all_verts = (*vis, *mar, *sel)
    for mask in range(1 << len(universe)):
        edges = [universe[i] for i in range(len(universe)) if mask >> i & 1]
        if not is_acyclic(all_verts, edges):
            continue
        yield PartitionedDag.of(visible=vis, marginalized=mar, selected=sel, edges=edges)


def enumerate_canonical_dags(
    max_visible: int = 3, max_nonvisible: int = 3
) -> Iterator[PartitionedDag]:
    """Constructive enumeration of canonical DAGs: acyclic plain visible
    edges, at most one rendered special pair per non-visible budget of two,
    and face vertices for antichain families, subject to the cross-class
    exclusions that redundancy removal and special-edge exhaustiveness
    impose. Every yielded graph is a fixed point of the rewrite pipeline."""
    for n_v in range(0, max_visible + 1):
        verts = VISIBLE_NAMES[:n_v]
        plain_universe = sorted((a, b) for a in verts for b in verts if a != b)
        special_universe = sorted((a, b) for a in verts for b in verts)
        families = antichains(verts, max_face_size=len(verts) or 1)
        for n_plain in range(len(plain_universe) + 1):
            for plain in combinations(plain_universe, n_plain):
                if not is_acyclic(verts, plain):
                    continue
                max_specials = max_nonvisible // 2
                for n_spec in range(max_specials + 1):
                    for specials in combinations(special_universe, n_spec):
                        budget = max_nonvisible - 2 * n_spec
                        special_tails = {a for a, _ in specials}
                        special_heads = {b for _, b in specials}
                        for l_faces in families:
                            if len(l_faces) > budget:
                                continue
                            if any(
                                len(f) == 1 and next(iter(f)) in special_heads
                                for f in l_faces
                            ):
                                continue
                            for s_faces in families:
                                if len(l_faces) + len(s_faces) > budget:
                                    continue
                                if any(
                                    len(f) == 1 and next(iter(f)) in special_tails
                                    for f in s_faces
                                ):
                                    continue
                                d = _assemble_canonical(
                                    verts, plain, specials, l_faces, s_faces
                                )
                                if d is not None:
                                    yield d


def _assemble_canonical(verts, plain, specials, l_faces, s_faces):
    sel_support = {a for a, _ in specials} | {v for f in s_faces for v in f}
    mar_support = {b for _, b in specials} | {v for f in l_faces for v in f}
    # special-edge exhaustiveness: a plain edge may not run from the selected
    # support into the marginal support
    for a, b in plain:
        if a in sel_support and b in mar_support:
            return None
    roles: dict[VertexId, Role] = {v: Role.VISIBLE for v in verts}
    edges: set[tuple[VertexId, VertexId]] = set(plain)
    for a, b in specials:
        s_label, m_label = canon.pair_labels(a, b)
        roles[s_label] = Role.SELECTED
        roles[m_label] = Role.MARGINALIZED
        edges.update({(a, s_label), (m_label, s_label), (m_label, b)})
    for face in l_faces:
        label = project.face_label("m", face)
        roles[label] = Role.MARGINALIZED
        edges.update({(label, v) for v in face})
    for face in s_faces:
        label = project.face_label("s", face)
        roles[label] = Role.SELECTED
        edges.update({(v, label) for v in face})
    return PartitionedDag.from_roles(roles, edges)
