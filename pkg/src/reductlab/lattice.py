"""Ideals of the join irreducibles, the lattice of closed groups, and the
preservation table.

A set of labels is an ideal when it already contains every label whose
moves stay inside the orbit blocks of its join.  Closing all 2048 label
sets gives the lattice nodes; groups are compared through their orbit
signatures only.
"""

import itertools
import json
import re
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from . import orbits
from .orbits import GroupSpec, as_spec, orbit_partition, preserves, signature, stays_in_blocks
from .structures import (
    D4,
    MAX_ARITY,
    RELATION_NAMES,
    enumerate_ktypes,
    Relation,
    ReductLabError,
    named_relation,
    rearrangement_table,
)
from .transforms import LABELS

EXPECTED_NODES = 44


class ClassificationError(ReductLabError):
    """The computed lattice disagrees with the classification."""


class SurrogateSearchError(ReductLabError):
    pass


@dataclass(frozen=True)
class Ideal:
    members: frozenset

    @property
    def spec(self):
        return GroupSpec(self.members)

    @property
    def signature(self):
        return signature(self.spec)

    def __str__(self):
        return "".join(sorted(self.members)) or "bottom"


@dataclass(frozen=True)
class LatticeNode:
    ideal: Ideal
    label: str
    preserved: frozenset = field(default=frozenset(), compare=False)

    @property
    def members(self):
        return self.ideal.members


# closure ----------------------------------------------------------------------

_closures = {}


def _close_step(base, label):
    """Closure of ``base + {label}`` where ``base`` is already an ideal."""
    if label in base:
        return base
    key = (base, label)
    if key in _closures:
        return _closures[key]
    start = base | {label}
    parts = [orbits.extend_partition(GroupSpec(base), label, k) for k in range(1, MAX_ARITY + 1)]
    closed = set(start)
    for other in LABELS:
        if other not in closed and all(stays_in_blocks(p, other) for p in parts):
            closed.add(other)
    closed = frozenset(closed)
    # the closed ideal has the same orbits, share the arrays instead of recomputing
    orbits.alias(GroupSpec(start), GroupSpec(closed))
    _closures[key] = closed
    return closed


def join_closure(s):
    """Smallest ideal containing the labels ``s``.

    Labels are added one at a time in alphabetical order, closing after
    each step; the join of an ideal and one label only needs the orbits
    of the ideal, which are memoised.
    """
    labels = as_spec(s).labels
    ideal = frozenset()
    for label in sorted(labels):
        ideal = _close_step(ideal, label)
    return Ideal(ideal)


def is_closed(members):
    members = frozenset(members)
    return join_closure(members).members == members


# enumeration ------------------------------------------------------------------

_lattice = None


def _below(label):
    return join_closure({label}).members


def label_of(members):
    """Concatenated maximal join irreducibles of an ideal."""
    members = frozenset(members)
    if not members:
        return "bottom"
    maximal = [x for x in members
               if not any(y != x and x in _below(y) and y not in _below(x) for y in members)]
    return "".join(sorted(maximal))


def compute_lattice():
    """All closed groups found by closing every label set.

    Bottom comes first, then nodes by size and label.  Distinct ideals must
    have distinct signatures; the node count itself is not checked here.
    """
    global _lattice
    if _lattice is not None:
        return list(_lattice)
    ideals = {}
    for size in range(len(LABELS) + 1):
        for subset in itertools.combinations(LABELS, size):
            ideal = join_closure(subset)
            ideals.setdefault(ideal.members, ideal)
    by_signature = {}
    for ideal in ideals.values():
        by_signature.setdefault(ideal.signature, ideal)
    if len(by_signature) != len(ideals):
        raise ClassificationError(
            f"{len(ideals)} ideals but only {len(by_signature)} distinct signatures")
    nodes = [LatticeNode(ideal, label_of(ideal.members)) for ideal in ideals.values()]
    nodes.sort(key=lambda n: (len(n.members), n.label))
    _lattice = tuple(nodes)
    return list(_lattice)


def enumerate_lattice():
    """The lattice, required to have exactly 44 nodes."""
    nodes = compute_lattice()
    if len(nodes) != EXPECTED_NODES:
        raise ClassificationError(f"expected {EXPECTED_NODES} closed groups, found {len(nodes)}")
    return nodes


def reset():
    """Forget memoised closures, nodes and the surrogate."""
    global _lattice, _surrogate
    _lattice = None
    _surrogate = None
    _closures.clear()


def node_by_label(label, nodes=None):
    for node in nodes or compute_lattice():
        if node.label == label:
            return node
    raise KeyError(label)


def node_of(members, nodes=None):
    target = join_closure(members).members
    for node in nodes or compute_lattice():
        if node.members == target:
            return node
    raise KeyError(members)


def contained(u, v):
    """Group of ``u`` is a subgroup of the group of ``v``."""
    return u.ideal.signature.refines(v.ideal.signature)


def hasse_edges(nodes):
    """Covering pairs ``(lower, upper)`` of the containment order."""
    n = len(nodes)
    below = np.zeros((n, n), dtype=bool)
    for i, u in enumerate(nodes):
        for j, v in enumerate(nodes):
            if i != j and contained(u, v):
                below[i, j] = True
    edges = []
    for i in range(n):
        for j in range(n):
            if below[i, j] and not (below[i, :] & below[:, j]).any():
                edges.append((nodes[i], nodes[j]))
    return edges


def join(u, v, nodes=None):
    return node_of(u.members | v.members, nodes)


def meet(u, v, nodes=None):
    """Largest node contained in both."""
    nodes = nodes or compute_lattice()
    common = [w for w in nodes if contained(w, u) and contained(w, v)]
    for w in common:
        if all(contained(x, w) for x in common):
            return w
    raise ClassificationError(f"no meet for {u.label} and {v.label}")


# automorphisms ------------------------------------------------------------------

def parse_permutation(text):
    """Cycle notation such as ``(ik)(ae)(bf)`` or ``(g h)``; returns a dict."""
    mapping = {x: x for x in LABELS}
    text = text.strip()
    if not re.fullmatch(r"(\(\s*[a-k](\s*,?\s*[a-k])*\s*\)|\(\s*\))*", text.replace(" ", "")):
        raise ValueError(f"not a permutation in cycle notation: {text!r}")
    seen = set()
    for cycle in re.findall(r"\(([^)]*)\)", text):
        items = re.findall(r"[a-k]", cycle)
        if seen & set(items) or len(set(items)) != len(items):
            raise ValueError(f"cycles of {text!r} are not disjoint")
        seen |= set(items)
        for x, y in zip(items, items[1:] + items[:1]):
            mapping[x] = y
    return mapping


def check_lattice_automorphism(p, nodes=None):
    """Does relabelling by ``p`` and re-closing permute the nodes order-preservingly?"""
    if isinstance(p, str):
        p = parse_permutation(p)
    if sorted(p) != sorted(LABELS) or sorted(p.values()) != sorted(LABELS):
        raise ValueError("p must be a permutation of the eleven labels")
    nodes = nodes or compute_lattice()
    index = {node.members: i for i, node in enumerate(nodes)}
    image = []
    for node in nodes:
        moved = join_closure({p[x] for x in node.members}).members
        if moved not in index:
            return False
        image.append(index[moved])
    if len(set(image)) != len(nodes):
        return False
    for i, u in enumerate(nodes):
        for j, v in enumerate(nodes):
            if (u.members <= v.members) != (nodes[image[i]].members <= nodes[image[j]].members):
                return False
    return True


# dihedral surrogate -------------------------------------------------------------

SD_BASE = frozenset("abdefgh")
SD_EXCLUDED = ("i", "j", "k")


def _dihedral_classes(part):
    """Blocks of a 4-ary partition grouped into classes closed under D4."""
    labels = part.labels
    roots = np.flatnonzero(labels == np.arange(labels.shape[0]))
    parent = {int(r): int(r) for r in roots}

    def find(x):
        while parent[x] != x:
            x = parent[x]
        return x

    for sigma in D4:
        moved = labels[rearrangement_table(4, sigma)]
        for r in roots:
            a, b = find(int(r)), find(int(moved[r]))
            if a != b:
                parent[max(a, b)] = min(a, b)
    classes = {}
    for r in roots:
        classes.setdefault(find(int(r)), []).append(int(r))
    return [sorted(v) for _, v in sorted(classes.items())]


def derive_sd_surrogate(max_classes=None):
    """Stand-in for the dihedral 4-ary relation whose base is unavailable.

    Candidates are unions of D4-closed classes of orbit blocks of the join of
    a, b, d, e, f, g, h on 4-types, ordered by the number of classes and then
    by the class indices.  The first one that Aut(D;E), Aut(D;<) and
    Aut(D;T) each fail to preserve is returned.
    """
    base = join_closure(SD_BASE)
    inside = sorted(set(SD_EXCLUDED) & base.members)
    if inside:
        # every union of the join's blocks is then preserved by these groups
        raise SurrogateSearchError(
            f"the join of {''.join(sorted(SD_BASE))} already contains {','.join(inside)}; "
            f"no union of its orbit blocks can be violated by them")
    part = orbit_partition(base.spec, 4)
    classes = _dihedral_classes(part)
    labels = part.labels
    limit = len(classes) - 1 if max_classes is None else min(max_classes, len(classes) - 1)
    for count in range(1, limit + 1):
        for combo in itertools.combinations(range(len(classes)), count):
            roots = [r for c in combo for r in classes[c]]
            mask = np.isin(labels, roots)
            rel = Relation("SD", 4, frozenset(np.flatnonzero(mask).tolist()))
            if not any(preserves(GroupSpec(frozenset(x)), rel) for x in SD_EXCLUDED):
                return named_relation("SD", s4=rel)
    raise SurrogateSearchError(f"no surrogate among unions of up to {limit} classes")


def half_parity_s4():
    """Increasing 4-tuples with an even number of edges between the lower
    and the upper pair; the 4-ary invariant separating dgh from j."""
    members = [t.code for t in enumerate_ktypes(4)
               if t.ranks == (0, 1, 2, 3)
               and (t.edge(0, 2) + t.edge(0, 3) + t.edge(1, 2) + t.edge(1, 3)) % 2 == 0]
    return Relation("S4", 4, frozenset(members))


_surrogate = None


def sd_surrogate():
    global _surrogate
    if _surrogate is None:
        _surrogate = derive_sd_surrogate()
    return _surrogate


def sd_findings():
    """What can be said about the dihedral column without its base relation."""
    out = {"surrogate": None, "error": None}
    try:
        sd = sd_surrogate()
        out["surrogate"] = sorted(sd.members)
    except SurrogateSearchError as exc:
        out["error"] = str(exc)
    # b and g already generate Aut(D;<) when their closure contains j
    out["bg_closure"] = str(join_closure("bg"))
    candidate = named_relation("SD", s4=half_parity_s4())
    expected = expected_table()
    rows = []
    for label in expected.rows:
        got = preserves(join_closure(set(label)).spec, candidate)
        if got != expected.cell(label, "SD"):
            rows.append(label)
    out["half_parity_mismatches"] = rows
    return out


def relation(name):
    return sd_surrogate() if name == "SD" else named_relation(name)


# preservation table ---------------------------------------------------------------

def _fixture(name):
    return resources.files("reductlab").joinpath("fixtures", name).read_text()


@dataclass(frozen=True)
class PreservationTable:
    rows: tuple
    columns: tuple
    cells: np.ndarray

    def cell(self, row, column):
        return bool(self.cells[self.rows.index(row), self.columns.index(column)])

    def row(self, label):
        i = self.rows.index(label)
        return {c for c, v in zip(self.columns, self.cells[i]) if v}

    def without(self, column):
        keep = [i for i, c in enumerate(self.columns) if c != column]
        return PreservationTable(self.rows, tuple(self.columns[i] for i in keep),
                                 self.cells[:, keep])

    def to_tsv(self):
        lines = ["\t" + "\t".join(self.columns)]
        for label, values in zip(self.rows, self.cells):
            lines.append(label + "\t" + "\t".join("x" if v else "" for v in values))
        return "\n".join(lines) + "\n"

    def to_json(self):
        data = {
            "columns": list(self.columns),
            "rows": [{"label": label, "preserved": [c for c, v in zip(self.columns, values) if v]}
                     for label, values in zip(self.rows, self.cells)],
        }
        return json.dumps(data, indent=2) + "\n"

    def diff(self, other):
        """Cells where two tables disagree, as ``(row, column, ours, theirs)``."""
        out = []
        if self.rows != other.rows or self.columns != other.columns:
            missing = set(self.rows) ^ set(other.rows)
            if missing or set(self.columns) != set(other.columns):
                return [("shape", ",".join(sorted(missing)), self.columns, other.columns)]
            other = other.reordered(self.rows, self.columns)
        for i, row in enumerate(self.rows):
            for j, col in enumerate(self.columns):
                if self.cells[i, j] != other.cells[i, j]:
                    out.append((row, col, bool(self.cells[i, j]), bool(other.cells[i, j])))
        return out

    def reordered(self, rows, columns):
        ri = [self.rows.index(r) for r in rows]
        ci = [self.columns.index(c) for c in columns]
        return PreservationTable(tuple(rows), tuple(columns), self.cells[np.ix_(ri, ci)])

    @classmethod
    def from_tsv(cls, text):
        lines = [ln for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
        columns = tuple(lines[0].split("\t")[1:])
        rows, cells = [], []
        for ln in lines[1:]:
            parts = ln.split("\t")
            parts += [""] * (len(columns) + 1 - len(parts))
            rows.append(parts[0])
            cells.append([p.strip() == "x" for p in parts[1:len(columns) + 1]])
        return cls(tuple(rows), columns, np.array(cells, dtype=bool))


TABLE_COLUMNS = ("E", "R3", "R4", "R5", "<", "Betw", "Cycl", "Sep", "T",
                 "BetwT", "CyclT", "SepT", "R3l", "R3u", "SD")
assert set(TABLE_COLUMNS) <= set(RELATION_NAMES)


def expected_table():
    return PreservationTable.from_tsv(_fixture("preservation_table.tsv"))


def bold_relations():
    out = {}
    for ln in _fixture("bold_relations.tsv").splitlines():
        if ln.strip() and not ln.startswith("#"):
            label, names = ln.split("\t")
            out[label] = tuple(names.split(","))
    return out


def build_preservation_table(rows=None, columns=TABLE_COLUMNS):
    """Recompute the table; rows default to the expected row order."""
    if rows is None:
        rows = expected_table().rows
    cells = np.zeros((len(rows), len(columns)), dtype=bool)
    rels = [relation(c) for c in columns]
    for i, label in enumerate(rows):
        # a row label lists the maximal generators, so closing it gives the group
        spec = join_closure(set(label)).spec
        for j, rel in enumerate(rels):
            cells[i, j] = preserves(spec, rel)
    return PreservationTable(tuple(rows), tuple(columns), cells)


def characterized_by(label, names, nodes=None):
    """Is the node the largest one preserving every relation in ``names``?"""
    nodes = nodes or compute_lattice()
    rels = [relation(n) for n in names]
    keeping = [n for n in nodes if all(preserves(n.ideal.spec, r) for r in rels)]
    target = node_by_label(label, nodes)
    return target in keeping and all(contained(n, target) for n in keeping)


def to_dot(nodes=None):
    nodes = nodes or compute_lattice()
    lines = ["digraph lattice {", "  rankdir=BT;"]
    for node in nodes:
        lines.append(f'  "{node.label}";')
    for lo, hi in sorted(hasse_edges(nodes), key=lambda e: (e[0].label, e[1].label)):
        lines.append(f'  "{lo.label}" -> "{hi.label}";')
    lines.append("}")
    return "\n".join(lines) + "\n"
