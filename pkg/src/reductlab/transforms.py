"""The eleven generator families acting on k-types and on finite hosts.

Labels follow the usual naming of the join irreducibles::

    a  identity on the graph, order reversed
    b  identity on the graph, order turned at a cut
    c  graph complemented, order kept
    d  graph switched against a vertex set, order kept
    e  graph complemented, order reversed
    f  graph switched across a cut, order turned at that cut
    g  graph complemented below a cut, order kept
    h  graph complemented above a cut, order kept
    i  all permutations preserving the graph
    j  all permutations preserving the order
    k  all permutations preserving the tournament  x<y <=> E(x,y)

On types, a cut is a gap position ``0..k`` among the tuple's ranks; the
irrational defining it in the infinite structure never needs to be named.
Families a-h act by deterministic moves (one per parameter); i, j and k are
modelled by their orbit classes, which by homogeneity are the classes of
types sharing the graph, the order, or the tournament respectively.
"""

import json
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .structures import (
    OrderedGraph,
    KType,
    check_arity,
    permutation_index,
    permutations,
    position_pairs,
    type_space,
)

LABELS = tuple("abcdefghijk")
DETERMINISTIC = tuple("abcdefgh")
GROUPING = {"i": "graph", "j": "order", "k": "tournament"}
CUT_LABELS = frozenset("bfgh")

DESCRIPTIONS = {
    "a": "cl{mix id <->}",
    "b": "cl{mix id turn}",
    "c": "cl{mix - id}",
    "d": "cl{mix sw id}",
    "e": "cl{mix - <->}",
    "f": "cl{mix sw turn}",
    "g": "cl{mix l id}",
    "h": "cl{mix u id}",
    "i": "Aut(D;E)",
    "j": "Aut(D;<)",
    "k": "Aut(D;T)",
}


def check_label(label):
    if label not in LABELS:
        raise ValueError(f"unknown generator label {label!r}")
    return label


@dataclass(frozen=True)
class TypeMove:
    """One parameterised move of a generator family at a fixed arity.

    ``param`` is a cut position (b, f, g, h), a frozenset of tuple
    positions (d), None (a, c, e) or the name of the invariant grouping
    (i, j, k).
    """

    label: str
    arity: int
    param: object = None

    @property
    def is_grouping(self):
        return self.label in GROUPING


def _rule(label, param, ranks, k):
    """New rank vector and flipped position-pair bitmask for one move."""
    pairs = position_pairs(k)
    flip = 0
    if label in ("a", "e"):
        new = tuple(k - 1 - r for r in ranks)
    elif label in ("b", "f"):
        new = tuple((r - param) % k for r in ranks)
    else:
        new = tuple(ranks)
    for p, (i, j) in enumerate(pairs):
        ri, rj = ranks[i], ranks[j]
        if label in ("c", "e"):
            hit = True
        elif label == "d":
            hit = (i in param) != (j in param)
        elif label == "f":
            hit = (ri >= param) != (rj >= param)
        elif label == "g":
            hit = ri < param and rj < param
        elif label == "h":
            hit = ri >= param and rj >= param
        else:
            hit = False
        if hit:
            flip |= 1 << p
    return new, flip


def generator_moves(label, k):
    """Every parameterisation of a family at arity ``k``."""
    check_label(label)
    k = check_arity(k)
    if label in GROUPING:
        return [TypeMove(label, k, GROUPING[label])]
    if label in CUT_LABELS:
        return [TypeMove(label, k, cut) for cut in range(k + 1)]
    if label == "d":
        return [TypeMove(label, k, frozenset(i for i in range(k) if mask >> i & 1))
                for mask in range(1 << k)]
    return [TypeMove(label, k, None)]


@lru_cache(maxsize=None)
def move_table(move):
    """``table[code]`` = image code of a deterministic move."""
    if move.is_grouping:
        raise ValueError(f"{move.label} is a grouping move and has no single image")
    k = move.arity
    space = type_space(k)
    index = permutation_index(k)
    perms = permutations(k)
    new_perm = np.empty(len(perms), dtype=np.int64)
    flip = np.empty(len(perms), dtype=np.int64)
    for p, ranks in enumerate(perms):
        new, mask = _rule(move.label, move.param, ranks, k)
        new_perm[p] = index[new]
        flip[p] = mask
    table = space.code(new_perm[space.perm_of], space.adj_of ^ flip[space.perm_of])
    table.setflags(write=False)
    return table


@lru_cache(maxsize=None)
def _descending_mask(k):
    perms = permutations(k)
    out = np.zeros(len(perms), dtype=np.int64)
    for p, ranks in enumerate(perms):
        for q, (i, j) in enumerate(position_pairs(k)):
            if ranks[i] > ranks[j]:
                out[p] |= 1 << q
    return out


@lru_cache(maxsize=None)
def group_keys(label, k):
    """Invariant key per code; i/j/k orbits are exactly the key classes."""
    space = type_space(check_arity(k))
    if label == "i":
        keys = space.adj_of.copy()
    elif label == "j":
        keys = space.perm_of.copy()
    elif label == "k":
        # bit set for pair (p, q), p < q, iff the tournament arrow is p -> q
        keys = space.adj_of ^ _descending_mask(k)[space.perm_of]
    else:
        raise ValueError(f"{label} is not a grouping family")
    keys.setflags(write=False)
    return keys


def apply_move(m, t):
    """Image set of a type under a move (the full class for i/j/k)."""
    if m.arity != t.k:
        raise ValueError(f"move arity {m.arity} does not match type arity {t.k}")
    if m.is_grouping:
        keys = group_keys(m.label, t.k)
        codes = np.flatnonzero(keys == keys[t.code])
        return {KType.from_code(t.k, int(c)) for c in codes}
    return {KType.from_code(t.k, int(move_table(m)[t.code]))}


@lru_cache(maxsize=None)
def _label_edges(label, k):
    if label in GROUPING:
        keys = group_keys(label, k)
        _, first, inverse = np.unique(keys, return_index=True, return_inverse=True)
        src = np.arange(keys.shape[0], dtype=np.int64)
        dst = first[inverse.ravel()].astype(np.int64)
    else:
        tables = [move_table(m) for m in generator_moves(label, k)]
        src = np.tile(np.arange(tables[0].shape[0], dtype=np.int64), len(tables))
        dst = np.concatenate(tables)
    keep = src != dst
    src, dst = src[keep], dst[keep]
    src.setflags(write=False)
    dst.setflags(write=False)
    return src, dst


def label_edges(label, k):
    """Union-find edges ``(src, dst)`` realising a family's moves at arity k."""
    return _label_edges(check_label(label), check_arity(k))


def dump_move_table(m):
    """JSON dump of one move for debugging."""
    if m.is_grouping:
        keys = group_keys(m.label, m.arity)
        _, first, inverse = np.unique(keys, return_index=True, return_inverse=True)
        pairs = [[int(c), int(first[inverse.ravel()[c]])] for c in range(keys.shape[0])]
    else:
        pairs = [[int(c), int(v)] for c, v in enumerate(move_table(m))]
    param = sorted(m.param) if isinstance(m.param, frozenset) else m.param
    return json.dumps({"label": m.label, "arity": m.arity, "param": param, "map": pairs})


# graph-level transforms ------------------------------------------------------

def vertex_map(label, param, n):
    """Where each host vertex lands after the transform reorders the host."""
    v = np.arange(n)
    if label in ("a", "e"):
        return n - 1 - v
    if label in ("b", "f"):
        return (v - param) % n
    return v


def _check_param(label, param, n):
    if label in CUT_LABELS:
        if not isinstance(param, (int, np.integer)) or not 0 <= param <= n:
            raise ValueError(f"cut {param!r} out of range 0..{n} for {label}")
    elif label == "d":
        bad = [v for v in param if not 0 <= v < n]
        if bad:
            raise ValueError(f"switch vertices {bad} out of range 0..{n - 1}")


def concrete_transform(label, param, g):
    """Apply family ``label`` with ``param`` to a finite host.

    The result is the modified structure re-indexed so that its order is
    again the integer order; :func:`vertex_map` gives the re-indexing.
    """
    if label not in DETERMINISTIC:
        raise ValueError(f"concrete transforms exist only for a..h, got {label!r}")
    n = g.n
    _check_param(label, param, n)
    v = np.arange(n)
    if label in ("c", "e"):
        flip = np.ones((n, n), dtype=bool)
    elif label == "d":
        inside = np.isin(v, list(param))
        flip = inside[:, None] != inside[None, :]
    elif label == "f":
        above = v >= param
        flip = above[:, None] != above[None, :]
    elif label == "g":
        below = v < param
        flip = below[:, None] & below[None, :]
    elif label == "h":
        above = v >= param
        flip = above[:, None] & above[None, :]
    else:
        flip = np.zeros((n, n), dtype=bool)
    np.fill_diagonal(flip, False)
    modified = g.adj ^ flip
    phi = vertex_map(label, param, n)
    out = np.zeros((n, n), dtype=bool)
    out[np.ix_(phi, phi)] = modified
    return OrderedGraph(n, out)


def induced_param(label, param, t):
    """Type-level parameter seen by tuple ``t`` for a host-level parameter."""
    if label in CUT_LABELS:
        return sum(1 for x in t if x < param)
    if label == "d":
        return frozenset(i for i, x in enumerate(t) if x in set(param))
    return None


def cut_switch(g, cut):
    """Complement the graph on pairs crossing ``cut``; order untouched."""
    v = np.arange(g.n)
    above = v >= cut
    flip = above[:, None] != above[None, :]
    return OrderedGraph(g.n, g.adj ^ flip)
