import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from reductlab import lattice, transforms
from reductlab.lattice import (
    TABLE_COLUMNS,
    SurrogateSearchError,
    build_preservation_table,
    check_lattice_automorphism,
    compute_lattice,
    contained,
    expected_table,
    hasse_edges,
    is_closed,
    join,
    join_closure,
    label_of,
    meet,
    node_by_label,
    parse_permutation,
)
from reductlab.orbits import preserves, signature
from reductlab.structures import named_relation

COLUMNS14 = tuple(c for c in TABLE_COLUMNS if c != "SD")


@pytest.fixture(scope="module")
def nodes():
    return compute_lattice()


def members(text):
    return frozenset(text)


@pytest.mark.parametrize("s,expected", [
    ("gh", "cdgh"), ("a", "a"), ("i", "abi"), ("", ""),
    ("j", "cdghj"), ("g", "cg"), ("h", "ch"), ("k", "efk"),
])
def test_join_closure_examples(s, expected):
    assert join_closure(s).members == members(expected)


@settings(max_examples=40, deadline=None)
@given(st.sets(st.sampled_from(transforms.LABELS)))
def test_closure_is_idempotent_and_extensive(s):
    closed = join_closure(s).members
    assert frozenset(s) <= closed
    assert join_closure(closed).members == closed
    assert is_closed(closed)


@settings(max_examples=30, deadline=None)
@given(st.sets(st.sampled_from(transforms.LABELS)))
def test_closure_keeps_the_group(s):
    # closing adds only labels the group already contains
    assert signature(frozenset(s)) == join_closure(s).signature


def test_nodes_distinct_and_closed(nodes):
    sigs = [n.ideal.signature.digest() for n in nodes]
    assert len(set(sigs)) == len(nodes)
    for n in nodes:
        assert is_closed(n.members)


def test_every_subset_lands_on_a_node(nodes):
    known = {n.members for n in nodes}
    for r in range(len(transforms.LABELS) + 1):
        for subset in itertools.combinations(transforms.LABELS, r):
            assert join_closure(subset).members in known


def test_atom_law(nodes):
    for n in nodes:
        for group in ("ace", "bdf"):
            assert len(n.members & set(group)) in (0, 1, 3)


@pytest.mark.parametrize("x", "ijk")
def test_five_ideals_per_grouping_label(nodes, x):
    assert len([n for n in nodes if x in n.members]) == 5


def test_j_family(nodes):
    assert sorted(n.label for n in nodes if "j" in n.members) == ["abefj", "aej", "bfj", "ijk", "j"]


def test_bg_join_contains_j():
    # rotation conjugates g into interval complements, which yield every pair flip
    assert join_closure("bg").members == members("bcdfghj")
    assert "j" in join_closure("abdefgh").members


def test_node_count(nodes):
    # 40 proper groups, see the notes on the b,g join
    assert len(nodes) == 42
    labels = {n.label for n in nodes}
    assert "bdfgh" not in labels and "abdefgh" not in labels
    assert {"dgh", "adegh", "cei", "dfi", "cdefi"} <= labels


def test_enumerate_lattice_is_strict():
    with pytest.raises(lattice.ClassificationError):
        lattice.enumerate_lattice()


def test_labels_roundtrip(nodes):
    for n in nodes:
        if n.label != "bottom":
            assert join_closure(n.label).members == n.members
    assert label_of(frozenset()) == "bottom"


def test_hasse_examples(nodes):
    edges = {(lo.label, hi.label) for lo, hi in hasse_edges(nodes)}
    assert {hi for lo, hi in edges if lo == "bottom"} == set("abcdef")
    assert ("g", "dgh") in edges
    assert ("a", "b") not in edges and ("b", "a") not in edges


def test_hasse_is_transitively_reduced(nodes):
    edges = hasse_edges(nodes)
    up = {}
    for lo, hi in edges:
        up.setdefault(lo.label, set()).add(hi.label)

    def reach(x, seen):
        for y in up.get(x, ()):
            if y not in seen:
                seen.add(y)
                reach(y, seen)
        return seen

    for lo, hi in edges:
        others = up[lo.label] - {hi.label}
        assert not any(hi.label in reach(o, {o}) for o in others)
        assert lo.label not in reach(hi.label, set())


def test_containment_matches_ideal_order(nodes):
    for u in nodes:
        for v in nodes:
            assert contained(u, v) == (u.members <= v.members)


def test_meets_and_joins_exist(nodes):
    for u, v in itertools.combinations(nodes, 2):
        m = meet(u, v, nodes)
        assert m.members == u.members & v.members
        assert join(u, v, nodes).members == join_closure(u.members | v.members).members


@pytest.mark.parametrize("p,expected", [
    ("()", True), ("(gh)", True), ("(ik)(ae)(bf)", True), ("(ab)", False), ("(ac)", False),
])
def test_automorphisms(nodes, p, expected):
    assert check_lattice_automorphism(p, nodes) is expected


def test_parse_permutation():
    p = parse_permutation("(ik)(ae)(bf)")
    assert p["i"] == "k" and p["k"] == "i" and p["c"] == "c"
    with pytest.raises(ValueError):
        parse_permutation("(aa)")
    with pytest.raises(ValueError):
        parse_permutation("ab")


@pytest.fixture(scope="module")
def table():
    return build_preservation_table(columns=COLUMNS14)


def test_table_matches_fixture(table):
    assert table.diff(expected_table().without("SD")) == []
    assert len(table.rows) == 42


@pytest.mark.parametrize("row,cols", [
    ("a", {"E", "R3", "R4", "R5", "Betw", "Sep", "BetwT", "SepT"}),
    ("k", {"T", "BetwT", "CyclT", "SepT"}),
    ("dgh", {"<", "Betw", "Cycl", "Sep"}),
])
def test_table_rows(table, row, cols):
    assert table.row(row) == cols


def test_bold_relations_preserved(table):
    for label, names in lattice.bold_relations().items():
        for name in names:
            if name != "SD":
                assert table.cell(label, name), (label, name)


def test_bold_relations_characterize(nodes):
    for label, names in lattice.bold_relations().items():
        if "SD" not in names:
            assert lattice.characterized_by(label, names, nodes), label


def test_profiles_clash_only_where_expected_sd_differs(table):
    # without SD four row pairs share a profile; the expected SD column splits each
    seen = {}
    for label, values in zip(table.rows, table.cells):
        seen.setdefault(values.tobytes(), []).append(label)
    clashes = sorted(sorted(v) for v in seen.values() if len(v) > 1)
    assert clashes == [["abdefgh", "abefj"], ["adegh", "aej"], ["bdfgh", "bfj"], ["dgh", "j"]]
    expected = expected_table()
    for a, b in clashes:
        assert expected.cell(a, "SD") != expected.cell(b, "SD")


def test_surrogate_unavailable():
    with pytest.raises(SurrogateSearchError):
        lattice.derive_sd_surrogate()
    with pytest.raises(SurrogateSearchError):
        build_preservation_table(columns=("SD",))


def test_half_parity_candidate():
    sd = named_relation("SD", s4=lattice.half_parity_s4())
    assert preserves(join_closure("dgh").spec, sd)
    assert not preserves(join_closure("j").spec, sd)
    info = lattice.sd_findings()
    assert info["error"] is not None
    assert info["bg_closure"] == "bcdfghj"
    assert set(info["half_parity_mismatches"]) == {
        "b", "f", "ab", "af", "bc", "be", "cf", "ef", "bdf", "abce", "acef", "abdf",
        "bcdf", "bdef", "abcdef", "bdfgh", "abdefgh"}


def test_table_io_roundtrip(table):
    again = lattice.PreservationTable.from_tsv(table.to_tsv())
    assert again.diff(table) == []
    assert np.array_equal(again.cells, table.cells)


def test_dot(nodes):
    dot = lattice.to_dot(nodes)
    assert dot.startswith("digraph lattice {")
    assert dot.count("->") == len(hasse_edges(nodes))
    assert lattice.to_dot(nodes) == dot


def test_node_by_label(nodes):
    assert node_by_label("dgh", nodes).members == members("cdgh")
    with pytest.raises(KeyError):
        node_by_label("zz", nodes)
