import pytest

from smdg.canon import is_canonical
from smdg.enumeration import (
    EnumerationError,
    SmdgBounds,
    antichains,
    enumerate_canonical_dags,
    enumerate_partitioned_dags,
    enumerate_smdgs,
)
from smdg.project import signature


def test_antichain_count_three_elements():
    # families of pairwise-incomparable non-empty subsets of a 3-set
    assert len(antichains(("a", "b", "c"), 3)) == 19


def test_single_visible_smdg_counts():
    all_graphs = list(enumerate_smdgs(1))
    assert len(all_graphs) == 8  # 2 edge sets x 2 systems x 2 systems
    liftable = list(enumerate_smdgs(1, liftable_only=True))
    # the self-loop survives only when the vertex sits in both supports
    assert len(liftable) == 5


def test_zero_visible_smdg_is_single_empty_graph():
    graphs = list(enumerate_smdgs(0))
    assert len(graphs) == 1
    assert graphs[0].visibles == frozenset()


def test_visible_cap_enforced():
    with pytest.raises(EnumerationError):
        next(enumerate_smdgs(5))


def test_enumeration_is_deterministic():
    first = [g for g, _ in zip(enumerate_smdgs(2), range(200))]
    second = [g for g, _ in zip(enumerate_smdgs(2), range(200))]
    assert first == second
    dags1 = list(enumerate_partitioned_dags(2, 1, 1))
    dags2 = list(enumerate_partitioned_dags(2, 1, 1))
    assert dags1 == dags2 and len(dags1) > 0


def test_enumerated_canonical_dags_are_canonical():
    count = 0
    for d in enumerate_canonical_dags(max_visible=2, max_nonvisible=2):
        assert is_canonical(d), d
        count += 1
    assert count > 10


def test_constructive_enumeration_matches_filter_based():
    """Cross-check the constructive canonical-DAG enumerator against brute
    enumeration plus the fixed-point test, compared through signatures."""
    constructive = {
        signature(d)
        for d in enumerate_canonical_dags(max_visible=2, max_nonvisible=2)
        if len(d.visible) == 2
    }
    brute = set()
    for n_m in range(0, 3):
        for n_s in range(0, 3 - n_m):
            for d in enumerate_partitioned_dags(2, n_m, n_s):
                if is_canonical(d):
                    brute.add(signature(d))
    assert constructive == brute


def test_singleton_union_bounds_for_four_visibles():
    bounds = SmdgBounds.default_for(4)
    assert bounds.systems == "singleton_unions"
    gs = [g for g, _ in zip(enumerate_smdgs(4), range(50))]
    assert all(len(g.visibles) == 4 for g in gs)
