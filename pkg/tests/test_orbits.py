import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from reductlab import orbits, transforms
from reductlab.orbits import (
    GroupSpec,
    HostTooSmallError,
    determined_by_subtuples,
    oracle_orbits,
    orbit_partition,
    preserves,
    preserves_directly,
    signature,
    stays_in_blocks,
)
from reductlab.structures import RELATION_NAMES, Relation, n_types, named_relation

NAMED = [n for n in RELATION_NAMES if n != "SD"]
labels = st.sets(st.sampled_from(transforms.LABELS)).map(frozenset)


def test_group_spec_parse():
    assert GroupSpec.parse("bottom") == GroupSpec()
    assert str(GroupSpec.parse("hgd")) == "dgh"
    assert str(GroupSpec()) == "bottom"
    with pytest.raises(ValueError):
        GroupSpec.parse("xz")


def test_partition_examples():
    assert orbit_partition("", 2).classes == 4
    c = orbit_partition("c", 2)
    assert c.classes == 2
    # codes 0,1 share ranks (0,1); 2,3 share ranks (1,0)
    assert sorted(c.blocks()) == [[0, 1], [2, 3]]
    assert orbit_partition("abcdefghijk", 2).classes == 1


@pytest.mark.parametrize("gs,counts", [
    ("dgh", [1, 2, 6, 48, 960]),
    ("adegh", [1, 1, 3, 24, 480]),
    ("bfj", [1, 1, 2, 6, 24]),
    ("j", [1, 2, 6, 24, 120]),
])
def test_class_counts(gs, counts):
    assert [orbit_partition(gs, k).classes for k in range(1, 6)] == counts


def test_j_classes_are_orders():
    # Aut(D;<) orbits on k-tuples are the k! order patterns
    for k in range(1, 6):
        assert orbit_partition("j", k).classes == len(list(itertools.permutations(range(k))))


def test_preserves_examples():
    assert preserves("a", named_relation("E"))
    assert not preserves("a", named_relation("<"))
    assert preserves("g", named_relation("R3l"))
    assert not preserves("j", named_relation("R3l"))
    assert preserves("d", named_relation("R3"))
    assert not preserves("d", named_relation("R4"))
    for name in NAMED:
        assert preserves(GroupSpec(), named_relation(name))


def test_signature_examples():
    sig = signature("")
    assert all(p.classes == n_types(p.arity) for p in sig.partitions)
    assert signature("gh") == signature("cdgh")
    assert signature("a") != signature("e")


@settings(max_examples=25, deadline=None)
@given(labels, labels)
def test_monotone(s1, s2):
    small, big = GroupSpec(s1), GroupSpec(s1 | s2)
    for k in (2, 3, 4):
        assert orbit_partition(small, k).refines(orbit_partition(big, k))


@settings(max_examples=25, deadline=None)
@given(labels)
def test_blocks_closed_under_moves(s):
    for k in (2, 3, 4):
        part = orbit_partition(GroupSpec(s), k)
        for label in s:
            assert stays_in_blocks(part, label)


@settings(max_examples=40, deadline=None)
@given(labels, st.sampled_from(NAMED))
def test_preserves_matches_direct_check(s, name):
    r = named_relation(name)
    assert preserves(GroupSpec(s), r) == preserves_directly(GroupSpec(s), r)


@settings(max_examples=30, deadline=None)
@given(labels, st.sets(st.integers(0, 47), max_size=10))
def test_preserves_matches_direct_check_random(s, codes):
    r = Relation("r", 3, frozenset(codes))
    assert preserves(GroupSpec(s), r) == preserves_directly(GroupSpec(s), r)


@pytest.mark.parametrize("label", transforms.DETERMINISTIC)
@pytest.mark.parametrize("k", [1, 2, 3])
def test_oracle_agrees(label, k):
    assert oracle_orbits(label, k, n=16, depth=4) == orbit_partition(label, k)


def test_oracle_examples():
    assert oracle_orbits("c", 2, 16, 3) == orbit_partition("c", 2)
    assert oracle_orbits("", 3, 16, 0).classes == n_types(3)
    assert oracle_orbits("gh", 2, 16, 4) == orbit_partition("cdgh", 2)


def test_oracle_limits():
    with pytest.raises(ValueError):
        oracle_orbits("i", 2)
    with pytest.raises(HostTooSmallError):
        oracle_orbits("a", 3, n=2)


@pytest.mark.parametrize("subset", [s for r in range(6) for s in itertools.combinations("cdghj", r)])
def test_four_ary_determination(subset):
    full, induced = determined_by_subtuples(subset, 5)
    assert full == induced


def test_determination_can_fail():
    # R3 is invariant under switching but not decided by its 2-subtuples
    full, induced = determined_by_subtuples("d", 3)
    assert full != induced


def test_extend_matches_fresh():
    orbits.clear_cache()
    fresh = orbit_partition("adg", 4)
    orbits.clear_cache()
    orbit_partition("ad", 4)
    assert orbits.extend_partition("ad", "g", 4) == fresh


def test_disk_cache(tmp_path, monkeypatch):
    monkeypatch.setenv("REDUCTLAB_CACHE", str(tmp_path))
    orbits.clear_cache()
    first = orbit_partition("bd", 3)
    assert any(tmp_path.iterdir())
    orbits.clear_cache()
    assert orbit_partition("bd", 3) == first
    orbits.clear_cache()


def test_format_blocks():
    text = orbits.format_blocks(orbit_partition("c", 2))
    assert text.splitlines() == ["k=2 size=2: 0,1", "k=2 size=2: 2,3"]


def test_partition_hash_and_eq():
    a, b = orbit_partition("c", 3), orbit_partition("c", 3)
    assert a == b and hash(a) == hash(b)
    assert np.array_equal(a.parent, a.labels)
