"""Orbit partitions of type spaces under generated groups.

The group generated by a set of families together with Aut(D;<,E) acts on
k-tuples; since Aut(D;<,E) is transitive on each k-type, its orbits on
k-tuples are unions of k-types and are found by a union-find closure of the
type-level moves.  Every family is closed under inverses at the type level,
so the symmetric closure is sound, and taking the topological closure of a
group adds no new images of a fixed finite tuple.

A group is identified with its *signature*, the tuple of its partitions
for arities 1..5.  Every group of the lattice is determined by invariant
relations of arity at most 5, so equal signatures mean equal groups there.
"""

import hashlib
import os
import threading
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _accel
from . import transforms
from .structures import (
    MAX_ARITY,
    KType,
    ReductLabError,
    build_bit_graph,
    check_arity,
    embed_pattern,
    n_types,
    pattern_of,
    subtuple_table,
    type_of_tuple,
)
from .transforms import LABELS, GROUPING, DETERMINISTIC, concrete_transform, vertex_map


class HostTooSmallError(ReductLabError):
    pass


@dataclass(frozen=True, order=True)
class GroupSpec:
    """A set of generator labels; the empty set stands for Aut(D;<,E)."""

    labels: frozenset = frozenset()

    def __post_init__(self):
        labels = frozenset(self.labels)
        unknown = labels - set(LABELS)
        if unknown:
            raise ValueError(f"unknown generator labels {sorted(unknown)}")
        object.__setattr__(self, "labels", labels)

    @classmethod
    def parse(cls, text):
        text = text.strip()
        if text in ("", "-", "0", "bottom"):
            return cls(frozenset())
        return cls(frozenset(text.replace(",", "")))

    def __str__(self):
        return "".join(sorted(self.labels)) or "bottom"

    def __or__(self, other):
        return GroupSpec(self.labels | other.labels)


def as_spec(gs):
    if isinstance(gs, GroupSpec):
        return gs
    if isinstance(gs, str):
        return GroupSpec.parse(gs)
    return GroupSpec(frozenset(gs))


@dataclass(frozen=True, eq=False)
class OrbitPartition:
    """Partition of the k-types; ``labels[code]`` is the least code of its block."""

    arity: int
    labels: np.ndarray

    @property
    def classes(self):
        return int(np.count_nonzero(self.labels == np.arange(self.labels.shape[0])))

    @property
    def parent(self):
        return self.labels

    def blocks(self):
        order = np.argsort(self.labels, kind="stable")
        bounds = np.flatnonzero(np.diff(self.labels[order])) + 1
        return [chunk.tolist() for chunk in np.split(order, bounds)]

    def same_block(self, a, b):
        return bool(self.labels[a] == self.labels[b])

    def refines(self, other):
        """Every block of self lies inside a block of other."""
        return bool(np.array_equal(other.labels, other.labels[self.labels]))

    def __eq__(self, other):
        if not isinstance(other, OrbitPartition):
            return NotImplemented
        return self.arity == other.arity and np.array_equal(self.labels, other.labels)

    def __hash__(self):
        return hash((self.arity, hashlib.sha1(self.labels.tobytes()).hexdigest()))


@dataclass(frozen=True, eq=False)
class GroupSignature:
    partitions: tuple

    def digest(self):
        h = hashlib.sha256()
        for p in self.partitions:
            h.update(p.labels.astype(np.int64).tobytes())
        return h.hexdigest()

    def refines(self, other):
        return all(p.refines(q) for p, q in zip(self.partitions, other.partitions))

    def __eq__(self, other):
        if not isinstance(other, GroupSignature):
            return NotImplemented
        return all(p == q for p, q in zip(self.partitions, other.partitions))

    def __hash__(self):
        return hash(self.digest())


# partition memo ---------------------------------------------------------------

_memo = {}
_lock = threading.Lock()


def clear_cache():
    with _lock:
        _memo.clear()


def _cache_dir():
    path = os.environ.get("REDUCTLAB_CACHE")
    return Path(path) if path else None


def _disk_name(labels, k):
    return f"orbits-{''.join(sorted(labels)) or '_'}-k{k}.npy"


def _store(labels, k, arr):
    arr.setflags(write=False)
    with _lock:
        # insert-once: a concurrent writer may have got there first
        arr = _memo.setdefault((labels, k), arr)
    directory = _cache_dir()
    if directory is not None:
        directory.mkdir(parents=True, exist_ok=True)
        target = directory / _disk_name(labels, k)
        if not target.exists():
            np.save(target, arr)
    return arr


def _lookup(labels, k):
    arr = _memo.get((labels, k))
    if arr is not None:
        return arr
    directory = _cache_dir()
    if directory is not None:
        target = directory / _disk_name(labels, k)
        if target.exists():
            return _store(labels, k, np.load(target))
    return None


def _extend(base, label, k):
    parent = np.array(base, dtype=np.int64, copy=True)
    src, dst = transforms.label_edges(label, k)
    _accel.union_pairs(parent, src, dst)
    return parent


def _labels_for(labels, k):
    found = _lookup(labels, k)
    if found is not None:
        return found
    if not labels:
        return _store(labels, k, np.arange(n_types(k), dtype=np.int64))
    ordered = sorted(labels)
    base = _labels_for(frozenset(ordered[:-1]), k)
    return _store(labels, k, _extend(base, ordered[-1], k))


def extend_partition(gs, label, k):
    """Partition of ``gs + label`` built on top of the memoised one of ``gs``."""
    gs = as_spec(gs)
    k = check_arity(k)
    target = gs.labels | {label}
    found = _lookup(target, k)
    if found is None:
        found = _store(target, k, _extend(_labels_for(gs.labels, k), label, k))
    return OrbitPartition(k, found)


def alias(gs, same_as):
    """Record that ``same_as`` generates the same group as ``gs``.

    Memoised partitions of ``gs`` are shared under the key of ``same_as``.
    """
    gs, same_as = as_spec(gs), as_spec(same_as)
    for k in range(1, MAX_ARITY + 1):
        found = _lookup(gs.labels, k)
        if found is not None and _lookup(same_as.labels, k) is None:
            _store(same_as.labels, k, found)


def orbit_partition(gs, k):
    """Orbits of the group generated by ``gs`` on the k-types."""
    gs = as_spec(gs)
    k = check_arity(k)
    return OrbitPartition(k, _labels_for(gs.labels, k))


def signature(gs):
    gs = as_spec(gs)
    return GroupSignature(tuple(orbit_partition(gs, k) for k in range(1, MAX_ARITY + 1)))


def preserves(gs, r):
    """True iff ``r`` is a union of orbits of the group."""
    part = orbit_partition(gs, r.arity)
    mask = r.mask()
    return bool(np.array_equal(mask, mask[part.labels]))


def preserves_directly(gs, r):
    """Move-by-move check, independent of the union-find closure."""
    gs = as_spec(gs)
    mask = r.mask()
    members = np.flatnonzero(mask)
    for label in sorted(gs.labels):
        for move in transforms.generator_moves(label, r.arity):
            if move.is_grouping:
                keys = transforms.group_keys(label, r.arity)
                inside = np.isin(keys, keys[members])
                if not np.array_equal(inside, mask):
                    return False
            elif not mask[transforms.move_table(move)[members]].all():
                return False
    return True


def stays_in_blocks(part, label):
    """True iff every move of ``label`` keeps each type inside its block."""
    src, dst = transforms.label_edges(label, part.arity)
    return _accel.all_equal(part.labels, src, dst)


# oracle -------------------------------------------------------------------------

def _host_params(label, n):
    if label in transforms.CUT_LABELS:
        return list(range(n + 1))
    if label == "d":
        return [frozenset([v]) for v in range(n)]
    return [None]


def oracle_orbits(gs, k, n=16, depth=4):
    """Orbits found by transforming concrete tuples of a finite bit-graph host.

    Each type is realised once in ``build_bit_graph(n)`` through its least
    embedding.  Every graph-level transform of the families in ``gs`` is
    applied, the image tuple's type is read off, and that type is realised
    afresh before the next step.  Types reached within ``depth`` steps from a
    start are merged with it.
    """
    gs = as_spec(gs)
    extra = gs.labels - set(DETERMINISTIC)
    if extra:
        raise ValueError(f"oracle handles only families a..h, got {sorted(extra)}")
    k = check_arity(k)
    host = build_bit_graph(n)
    size = n_types(k)

    reps = {}
    for code in range(size):
        t = KType.from_code(k, code)
        pattern, tup = pattern_of(t)
        image = embed_pattern(pattern, host)
        if image is None:
            raise HostTooSmallError(f"type {t} does not embed into a bit graph with {n} vertices")
        reps[code] = tuple(image[r] for r in tup)

    transformed = {}
    for label in sorted(gs.labels):
        for param in _host_params(label, n):
            transformed[label, param] = (concrete_transform(label, param, host),
                                         vertex_map(label, param, n))

    steps = {}

    def successors(code):
        if code not in steps:
            tup = reps[code]
            out = set()
            for new_host, phi in transformed.values():
                out.add(type_of_tuple(new_host, [phi[x] for x in tup]).code)
            steps[code] = out
        return steps[code]

    parent = np.arange(size, dtype=np.int64)
    src, dst = [], []
    for start in range(size):
        seen = {start}
        frontier = [start]
        for _ in range(depth):
            nxt = []
            for code in frontier:
                for image in successors(code):
                    if image not in seen:
                        seen.add(image)
                        nxt.append(image)
            frontier = nxt
        src.extend([start] * len(seen))
        dst.extend(seen)
    # independent of the numba kernels on purpose
    _accel.union_pairs(parent, np.array(src), np.array(dst), use_numba=False)
    return OrbitPartition(k, parent)


def determined_by_subtuples(gs, k=5):
    """Partition k-types by the (k-1)-orbits of their k deleted-entry subtuples.

    Returns ``(orbits, induced)``: the true k-orbit partition and the one
    induced by subtuple orbit data.  They coincide iff k-orbits are
    determined by (k-1)-orbits.
    """
    gs = as_spec(gs)
    full = orbit_partition(gs, k)
    sub = orbit_partition(gs, k - 1)
    columns = [sub.labels[subtuple_table(k, tuple(i for i in range(k) if i != drop))]
               for drop in range(k)]
    profile = np.stack(columns, axis=1)
    _, first, inverse = np.unique(profile, axis=0, return_index=True, return_inverse=True)
    size = n_types(k)
    parent = np.arange(size, dtype=np.int64)
    _accel.union_pairs(parent, np.arange(size), first[inverse.ravel()])
    return full, OrbitPartition(k, parent)


def format_blocks(part):
    """CLI rendering: one line per block, sorted by least code."""
    lines = []
    for block in sorted(part.blocks()):
        lines.append(f"k={part.arity} size={len(block)}: {','.join(map(str, block))}")
    return "\n".join(lines)


__all__ = [
    "GroupSpec",
    "GroupSignature",
    "HostTooSmallError",
    "OrbitPartition",
    "as_spec",
    "clear_cache",
    "determined_by_subtuples",
    "extend_partition",
    "format_blocks",
    "oracle_orbits",
    "orbit_partition",
    "preserves",
    "preserves_directly",
    "signature",
    "stays_in_blocks",
    "alias",
]
