"""Test-only helpers."""

import itertools

from smdg.graph import PartitionedDag


def same_up_to_nonvisible_labels(d1: PartitionedDag, d2: PartitionedDag) -> bool:
    """Equality of partitioned DAGs allowing the non-visible vertices to be
    renamed (visible labels are identity and must match exactly)."""
    if d1.visible != d2.visible:
        return False
    if d1.marginalized == d2.marginalized and d1.selected == d2.selected:
        if set(d1.edges) == set(d2.edges):
            return True
    if len(d1.marginalized) != len(d2.marginalized) or len(d1.selected) != len(d2.selected):
        return False

    edges1 = set(d1.edges)

    def fingerprint(d, v):
        vis = d.visible
        return (
            d.role_of(v),
            tuple(sorted(d.parents_of(v) & vis)),
            tuple(sorted(d.children_of(v) & vis)),
            len(d.parents_of(v)),
            len(d.children_of(v)),
        )

    m1, m2 = sorted(d1.marginalized), sorted(d2.marginalized)
    s1, s2 = sorted(d1.selected), sorted(d2.selected)
    for m_perm in itertools.permutations(m2):
        if any(fingerprint(d1, a) != fingerprint(d2, b) for a, b in zip(m1, m_perm)):
            continue
        for s_perm in itertools.permutations(s2):
            if any(fingerprint(d1, a) != fingerprint(d2, b) for a, b in zip(s1, s_perm)):
                continue
            rename = {b: a for a, b in zip(m1, m_perm)}
            rename.update({b: a for a, b in zip(s1, s_perm)})
            rename.update({v: v for v in d1.visible})
            mapped = {(rename[a], rename[b]) for a, b in d2.edges}
            if mapped == edges1:
                return True
    return False
