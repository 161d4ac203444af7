"""Equivalence-preserving rewrites of partitioned DAGs and canonicalization.

The eight rewrites (making latents exogenous, making selection vertices
terminal, the two merges, edge splitting, special-edge introduction, and the
two redundancy removals) each preserve the full interventional behaviour of
the graph. Iterating them to a fixed point yields a canonical DAG in which

* every marginalized vertex is parentless and every selected vertex childless,
* every marginalized vertex has only visible children, or exactly one
  selected child and one visible child (and dually for selected vertices),
* no visible edge a -> b remains when a feeds a selected vertex and b is fed
  by a marginalized one (such edges are re-expressed as a -> s <- m -> b),
* no redundant (dominated) marginalized or selected vertices remain.

A ninth normalization drops vacuous non-visible vertices (marginalized with
no children, selected with no parents); these influence nothing observable
and are never produced by the reverse construction.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Callable, Iterable, Optional

from .graph import GraphError, PartitionedDag, Role, VertexId


class PreconditionError(GraphError):
    """A rewrite was attempted on a graph that does not satisfy its guard."""

    def __init__(self, op: str, clause: str):
        self.op = op
        self.clause = clause
        super().__init__(f"{op}: {clause}")


class ConfluenceError(GraphError):
    """A pass that should have been a no-op changed the graph."""


CanonStep = tuple[str, tuple[str, ...]]


def _fresh(label: str, taken: Iterable[VertexId]) -> VertexId:
    taken = set(taken)
    if label not in taken:
        return label
    i = 2
    while f"{label}~{i}" in taken:
        i += 1
    return f"{label}~{i}"


def merged_label(kind: str, a: VertexId, b: VertexId) -> str:
    lo, hi = sorted((a, b))
    return f"{kind}⟨{lo}·{hi}⟩"


def pair_labels(a: VertexId, b: VertexId) -> tuple[str, str]:
    """Labels for the selected/marginalized pair inserted between a and b."""
    return f"s⟨{a}·{b}⟩", f"m⟨{a}·{b}⟩"


# --- the single-step rewrites -------------------------------------------

def exogenize(d: PartitionedDag, m: VertexId) -> PartitionedDag:
    """Reroute every parent of the marginalized vertex m directly to m's children."""
    if d.role_of(m) is not Role.MARGINALIZED:
        raise PreconditionError("exogenize", f"{m!r} is not marginalized")
    pa = d.parents_of(m)
    if not pa:
        return d
    ch = d.children_of(m)
    new_edges = {(l, k) for l in pa for k in ch}
    return d.with_edges(add=new_edges, remove={(l, m) for l in pa})


def terminalize(d: PartitionedDag, s: VertexId) -> PartitionedDag:
    """Delete every edge leaving the selected vertex s."""
    if d.role_of(s) is not Role.SELECTED:
        raise PreconditionError("terminalize", f"{s!r} is not selected")
    return d.with_edges(remove={(s, c) for c in d.children_of(s)})


def exog_all(d: PartitionedDag, rng: Optional[random.Random] = None) -> PartitionedDag:
    while True:
        pending = sorted(m for m in d.marginalized if d.parents_of(m))
        if not pending:
            return d
        if rng is not None:
            rng.shuffle(pending)
        d = exogenize(d, pending[0])


def term_all(d: PartitionedDag, rng: Optional[random.Random] = None) -> PartitionedDag:
    for s in sorted(d.selected):
        d = terminalize(d, s)
    return d


def _require_exog_term(op: str, d: PartitionedDag) -> None:
    for m in d.marginalized:
        if d.parents_of(m):
            raise PreconditionError(op, f"marginalized vertex {m!r} still has parents")
    for s in d.selected:
        if d.children_of(s):
            raise PreconditionError(op, f"selected vertex {s!r} still has children")


def merge_marginalized(d: PartitionedDag, m1: VertexId, m2: VertexId) -> PartitionedDag:
    """Fuse two marginalized vertices that share a selected child."""
    _require_exog_term("merge_marginalized", d)
    for m in (m1, m2):
        if d.role_of(m) is not Role.MARGINALIZED:
            raise PreconditionError("merge_marginalized", f"{m!r} is not marginalized")
    if m1 == m2:
        raise PreconditionError("merge_marginalized", "the two vertices must be distinct")
    if not (d.children_of(m1) & d.children_of(m2) & d.selected):
        raise PreconditionError("merge_marginalized", "no shared selected child")
    label = _fresh(merged_label("m", m1, m2), d.vertices)
    ch = d.children_of(m1) | d.children_of(m2)
    return d.with_vertices(
        add={label: Role.MARGINALIZED},
        remove={m1, m2},
        add_edges={(label, c) for c in ch},
    )


def merge_selected(d: PartitionedDag, s1: VertexId, s2: VertexId) -> PartitionedDag:
    """Fuse two selected vertices that share a marginalized parent."""
    _require_exog_term("merge_selected", d)
    for s in (s1, s2):
        if d.role_of(s) is not Role.SELECTED:
            raise PreconditionError("merge_selected", f"{s!r} is not selected")
    if s1 == s2:
        raise PreconditionError("merge_selected", "the two vertices must be distinct")
    if not (d.parents_of(s1) & d.parents_of(s2) & d.marginalized):
        raise PreconditionError("merge_selected", "no shared marginalized parent")
    label = _fresh(merged_label("s", s1, s2), d.vertices)
    pa = d.parents_of(s1) | d.parents_of(s2)
    return d.with_vertices(
        add={label: Role.SELECTED},
        remove={s1, s2},
        add_edges={(p, label) for p in pa},
    )


def _merge_m_pairs(d: PartitionedDag) -> list[tuple[VertexId, VertexId]]:
    ms = sorted(d.marginalized)
    return [
        (m1, m2)
        for i, m1 in enumerate(ms)
        for m2 in ms[i + 1:]
        if d.children_of(m1) & d.children_of(m2) & d.selected
    ]


def _merge_s_pairs(d: PartitionedDag) -> list[tuple[VertexId, VertexId]]:
    ss = sorted(d.selected)
    return [
        (s1, s2)
        for i, s1 in enumerate(ss)
        for s2 in ss[i + 1:]
        if d.parents_of(s1) & d.parents_of(s2) & d.marginalized
    ]


def merge_m_all(d: PartitionedDag, rng: Optional[random.Random] = None) -> PartitionedDag:
    while True:
        pairs = _merge_m_pairs(d)
        if not pairs:
            return d
        if rng is not None:
            rng.shuffle(pairs)
        d = merge_marginalized(d, *pairs[0])


def merge_s_all(d: PartitionedDag, rng: Optional[random.Random] = None) -> PartitionedDag:
    while True:
        pairs = _merge_s_pairs(d)
        if not pairs:
            return d
        if rng is not None:
            rng.shuffle(pairs)
        d = merge_selected(d, *pairs[0])


def _require_merged(op: str, d: PartitionedDag) -> None:
    _require_exog_term(op, d)
    if _merge_m_pairs(d):
        raise PreconditionError(op, "mergeable marginalized vertices remain")
    if _merge_s_pairs(d):
        raise PreconditionError(op, "mergeable selected vertices remain")


def split_pair_label_map(
    d: PartitionedDag, m: VertexId, s: VertexId
) -> dict[tuple[VertexId, VertexId], tuple[VertexId, VertexId]]:
    """Deterministic labels (s_ab, m_ab) for each visible pairing of a split."""
    v_s = sorted(d.parents_of(s) & d.visible)
    v_m = sorted(d.children_of(m) & d.visible)
    taken = set(d.vertices)
    out = {}
    for a in v_s:
        for b in v_m:
            s_label, m_label = pair_labels(a, b)
            s_label = _fresh(s_label, taken)
            taken.add(s_label)
            m_label = _fresh(m_label, taken)
            taken.add(m_label)
            out[(a, b)] = (s_label, m_label)
    return out


def split_m_to_s(d: PartitionedDag, m: VertexId, s: VertexId) -> PartitionedDag:
    """Replace the edge m -> s with one selected/marginalized pair per pairing
    of a visible parent of s with a visible child of m (self-pairings included).

    Legal only when a side is not a singleton; a singleton-singleton edge is
    already in final form and must be kept.
    """
    _require_merged("split_m_to_s", d)
    if (m, s) not in set(d.edges):
        raise PreconditionError("split_m_to_s", f"edge {m!r} -> {s!r} is absent")
    if d.role_of(m) is not Role.MARGINALIZED or d.role_of(s) is not Role.SELECTED:
        raise PreconditionError("split_m_to_s", "edge endpoints must be marginalized -> selected")
    v_s = sorted(d.parents_of(s) & d.visible)
    v_m = sorted(d.children_of(m) & d.visible)
    if len(v_s) == 1 and len(v_m) == 1:
        raise PreconditionError(
            "split_m_to_s", "both sides are singletons; the edge is already in final form"
        )
    add_vertices: dict[VertexId, Role] = {}
    add_edges: set[tuple[VertexId, VertexId]] = set()
    for (a, b), (s_label, m_label) in split_pair_label_map(d, m, s).items():
        add_vertices[s_label] = Role.SELECTED
        add_vertices[m_label] = Role.MARGINALIZED
        add_edges.update({(a, s_label), (m_label, s_label), (m_label, b)})
    return d.with_vertices(add=add_vertices, add_edges=add_edges, remove_edges={(m, s)})


def _split_targets(d: PartitionedDag) -> list[tuple[VertexId, VertexId]]:
    out = []
    for m, s in d.edges:
        if d.role_of(m) is Role.MARGINALIZED and d.role_of(s) is Role.SELECTED:
            if len(d.parents_of(s) & d.visible) != 1 or len(d.children_of(m) & d.visible) != 1:
                out.append((m, s))
    return sorted(out)


def split_all(d: PartitionedDag, rng: Optional[random.Random] = None) -> PartitionedDag:
    while True:
        targets = _split_targets(d)
        if not targets:
            return d
        if rng is not None:
            rng.shuffle(targets)
        d = split_m_to_s(d, *targets[0])


def to_special(d: PartitionedDag, a: VertexId, b: VertexId) -> PartitionedDag:
    """Replace the visible edge a -> b by the path a -> s <- m -> b."""
    _require_merged("to_special", d)
    if _split_targets(d):
        raise PreconditionError("to_special", "splittable marginalized -> selected edges remain")
    if (a, b) not in set(d.edges):
        raise PreconditionError("to_special", f"edge {a!r} -> {b!r} is absent")
    if d.role_of(a) is not Role.VISIBLE or d.role_of(b) is not Role.VISIBLE:
        raise PreconditionError("to_special", "both endpoints must be visible")
    if not (d.children_of(a) & d.selected):
        raise PreconditionError("to_special", f"{a!r} has no selected child")
    if not (d.parents_of(b) & d.marginalized):
        raise PreconditionError("to_special", f"{b!r} has no marginalized parent")
    s_label, m_label = pair_labels(a, b)
    s_label = _fresh(s_label, d.vertices)
    m_label = _fresh(m_label, set(d.vertices) | {s_label})
    return d.with_vertices(
        add={s_label: Role.SELECTED, m_label: Role.MARGINALIZED},
        add_edges={(a, s_label), (m_label, s_label), (m_label, b)},
        remove_edges={(a, b)},
    )


def _special_targets(d: PartitionedDag) -> list[tuple[VertexId, VertexId]]:
    vis = d.visible
    return sorted(
        (a, b)
        for a, b in d.edges
        if a in vis
        and b in vis
        and d.children_of(a) & d.selected
        and d.parents_of(b) & d.marginalized
    )


def to_special_all(d: PartitionedDag, rng: Optional[random.Random] = None) -> PartitionedDag:
    # Eligibility can grow: each replacement gives the tail a selected child
    # and the head a marginalized parent, so re-scan after every rewrite.
    while True:
        targets = _special_targets(d)
        if not targets:
            return d
        if rng is not None:
            rng.shuffle(targets)
        d = to_special(d, *targets[0])


def _redundant_marginalized(d: PartitionedDag) -> list[VertexId]:
    ms = sorted(d.marginalized)
    victims = []
    for m1 in ms:
        ch1 = d.children_of(m1)
        for m2 in ms:
            if m1 == m2:
                continue
            ch2 = d.children_of(m2)
            # Equal child sets tie-break: keep the smaller label.
            if ch1 < ch2 or (ch1 == ch2 and m1 > m2):
                victims.append(m1)
                break
    return victims


def _redundant_selected(d: PartitionedDag) -> list[VertexId]:
    ss = sorted(d.selected)
    victims = []
    for s1 in ss:
        pa1 = d.parents_of(s1)
        for s2 in ss:
            if s1 == s2:
                continue
            pa2 = d.parents_of(s2)
            if pa1 < pa2 or (pa1 == pa2 and s1 > s2):
                victims.append(s1)
                break
    return victims


def rmv_red_m(d: PartitionedDag, rng: Optional[random.Random] = None) -> PartitionedDag:
    """Delete marginalized vertices whose child set is dominated by another's."""
    while True:
        victims = _redundant_marginalized(d)
        if not victims:
            return d
        if rng is not None:
            rng.shuffle(victims)
        d = d.with_vertices(remove={victims[0]})


def rmv_red_s(d: PartitionedDag, rng: Optional[random.Random] = None) -> PartitionedDag:
    """Delete selected vertices whose parent set is dominated by another's."""
    while True:
        victims = _redundant_selected(d)
        if not victims:
            return d
        if rng is not None:
            rng.shuffle(victims)
        d = d.with_vertices(remove={victims[0]})


def _vacuous(d: PartitionedDag) -> list[VertexId]:
    out = [m for m in d.marginalized if not d.children_of(m)]
    out += [s for s in d.selected if not d.parents_of(s)]
    return sorted(out)


def drop_vacuous(d: PartitionedDag, rng: Optional[random.Random] = None) -> PartitionedDag:
    """Remove childless marginalized and parentless selected vertices.

    Such vertices have no observable influence: a childless latent is
    integrated out unchanged and a parentless selection renormalizes away.
    """
    victims = _vacuous(d)
    return d.with_vertices(remove=set(victims)) if victims else d


# --- the full pipeline ----------------------------------------------------

_PASSES: tuple[tuple[str, Callable[..., PartitionedDag]], ...] = (
    ("terminalize_all", term_all),
    ("exogenize_all", exog_all),
    ("merge_marginalized_all", merge_m_all),
    ("merge_selected_all", merge_s_all),
    ("split_all", split_all),
    ("drop_vacuous", drop_vacuous),
    ("to_special_all", to_special_all),
    ("remove_redundant_marginalized", rmv_red_m),
    ("remove_redundant_selected", rmv_red_s),
    ("drop_vacuous", drop_vacuous),
)


@dataclass(frozen=True)
class CanonReport:
    input: PartitionedDag
    output: PartitionedDag
    steps: tuple[CanonStep, ...]

    def replay(self) -> PartitionedDag:
        """Re-apply the recorded steps to the input; must reproduce the output."""
        return replay_steps(self.input, self.steps)


_STEP_OPS = {
    "terminalize": lambda d, s: terminalize(d, s),
    "exogenize": lambda d, m: exogenize(d, m),
    "merge_marginalized": lambda d, m1, m2: merge_marginalized(d, m1, m2),
    "merge_selected": lambda d, s1, s2: merge_selected(d, s1, s2),
    "split_m_to_s": lambda d, m, s: split_m_to_s(d, m, s),
    "to_special": lambda d, a, b: to_special(d, a, b),
    "remove_vertex": lambda d, v: d.with_vertices(remove={v}),
}


def replay_steps(d: PartitionedDag, steps: Iterable[CanonStep]) -> PartitionedDag:
    for name, args in steps:
        d = _STEP_OPS[name](d, *args)
    return d


def canonicalize(d: PartitionedDag, _rng: Optional[random.Random] = None) -> CanonReport:
    """Run the rewrite pipeline to a fixed point, recording each step.

    The optional rng shuffles the candidate order inside each pass; the
    result must not depend on it (tested, not assumed).
    """
    steps: list[CanonStep] = []
    current = d

    def record(name: str, args: tuple[str, ...], new: PartitionedDag) -> PartitionedDag:
        steps.append((name, args))
        return new

    for _round in range(len(d.vertices) + 2):
        before = current
        current = _run_passes(current, steps, _rng)
        if current == before:
            break
    else:
        raise ConfluenceError("canonicalization did not reach a fixed point")
    for name, pass_fn in _PASSES:
        if pass_fn(current) != current:
            raise ConfluenceError(f"pass {name} is not a no-op on the pipeline output")
    return CanonReport(input=d, output=current, steps=tuple(steps))


def _run_passes(
    d: PartitionedDag, steps: list[CanonStep], rng: Optional[random.Random]
) -> PartitionedDag:
    # terminalize, then exogenize
    for s in _maybe_shuffle(sorted(s for s in d.selected if d.children_of(s)), rng):
        steps.append(("terminalize", (s,)))
        d = terminalize(d, s)
    while True:
        pending = [m for m in sorted(d.marginalized) if d.parents_of(m)]
        if not pending:
            break
        m = _maybe_shuffle(pending, rng)[0]
        steps.append(("exogenize", (m,)))
        d = exogenize(d, m)
    # merges
    while True:
        pairs = _merge_m_pairs(d)
        if not pairs:
            break
        m1, m2 = _maybe_shuffle(pairs, rng)[0]
        steps.append(("merge_marginalized", (m1, m2)))
        d = merge_marginalized(d, m1, m2)
    while True:
        pairs = _merge_s_pairs(d)
        if not pairs:
            break
        s1, s2 = _maybe_shuffle(pairs, rng)[0]
        steps.append(("merge_selected", (s1, s2)))
        d = merge_selected(d, s1, s2)
    # splits
    while True:
        targets = _split_targets(d)
        if not targets:
            break
        m, s = _maybe_shuffle(targets, rng)[0]
        steps.append(("split_m_to_s", (m, s)))
        d = split_m_to_s(d, m, s)
    d = _record_vacuous(d, steps)
    # Splitting must not re-enable the merges; surface a counterexample
    # instead of silently re-merging.
    if _merge_m_pairs(d) or _merge_s_pairs(d):
        raise ConfluenceError("splitting re-enabled a merge; canonical order violated")
    # special edges
    while True:
        targets = _special_targets(d)
        if not targets:
            break
        a, b = _maybe_shuffle(targets, rng)[0]
        steps.append(("to_special", (a, b)))
        d = to_special(d, a, b)
    # redundancy removal
    while True:
        victims = _redundant_marginalized(d)
        if not victims:
            break
        v = _maybe_shuffle(victims, rng)[0]
        steps.append(("remove_vertex", (v,)))
        d = d.with_vertices(remove={v})
    while True:
        victims = _redundant_selected(d)
        if not victims:
            break
        v = _maybe_shuffle(victims, rng)[0]
        steps.append(("remove_vertex", (v,)))
        d = d.with_vertices(remove={v})
    return _record_vacuous(d, steps)


def _record_vacuous(d: PartitionedDag, steps: list[CanonStep]) -> PartitionedDag:
    for v in _vacuous(d):
        steps.append(("remove_vertex", (v,)))
        d = d.with_vertices(remove={v})
    return d


def _maybe_shuffle(items: list, rng: Optional[random.Random]) -> list:
    if rng is not None and len(items) > 1:
        items = list(items)
        rng.shuffle(items)
    return items


def is_canonical(d: PartitionedDag) -> bool:
    """True when every rewrite pass leaves the graph unchanged."""
    return all(pass_fn(d) == d for _, pass_fn in _PASSES)
