"""Finite ordered graphs, k-types and the named relations.

A k-type records the relative order of a tuple of k distinct points and the
graph induced on it.  Because the random ordered graph is homogeneous this
quantifier-free data is the complete type, so every relation definable in
it is a set of k-types.  Types are encoded as dense integers::

    code = perm_index(ranks) * 2**C(k, 2) + adj_bits

where ``perm_index`` is the lexicographic index of ``ranks`` among the
permutations of ``range(k)`` and bit ``p`` of ``adj_bits`` is the edge bit
of the p-th position pair ``(i, j)``, ``i < j``, in lexicographic order.
"""

import itertools
import json
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

MAX_ARITY = 5


class ReductLabError(Exception):
    pass


class InvalidArityError(ReductLabError, ValueError):
    pass


class DuplicateEntryError(ReductLabError, ValueError):
    pass


class VertexRangeError(ReductLabError, IndexError):
    pass


class MissingBaseRelationError(ReductLabError, ValueError):
    pass


def check_arity(k):
    if not isinstance(k, (int, np.integer)) or not 1 <= k <= MAX_ARITY:
        raise InvalidArityError(f"arity must be in 1..{MAX_ARITY}, got {k!r}")
    return int(k)


@lru_cache(maxsize=None)
def position_pairs(k):
    """Position pairs ``(i, j)``, ``i < j``, in lexicographic order."""
    return tuple(itertools.combinations(range(k), 2))


@lru_cache(maxsize=None)
def pair_bit(k):
    """Map ``(i, j)`` (either orientation) to its bit position."""
    table = {}
    for p, (i, j) in enumerate(position_pairs(k)):
        table[i, j] = p
        table[j, i] = p
    return table


@lru_cache(maxsize=None)
def permutations(k):
    return tuple(itertools.permutations(range(k)))


@lru_cache(maxsize=None)
def permutation_index(k):
    return {perm: idx for idx, perm in enumerate(permutations(k))}


def n_pairs(k):
    return k * (k - 1) // 2


def n_types(k):
    return len(permutations(check_arity(k))) << n_pairs(k)


@dataclass(frozen=True, order=True)
class KType:
    """Order pattern plus induced graph of a tuple of distinct points.

    ``ranks[i]`` is the position of entry ``i`` in the order; ``adj`` holds
    one bit per position pair as described in the module docstring.
    """

    k: int
    ranks: tuple
    adj: int

    def __post_init__(self):
        check_arity(self.k)
        if tuple(sorted(self.ranks)) != tuple(range(self.k)):
            raise ValueError(f"ranks {self.ranks!r} is not a permutation of 0..{self.k - 1}")
        if not 0 <= self.adj < (1 << n_pairs(self.k)):
            raise ValueError(f"adjacency bits {self.adj!r} out of range for arity {self.k}")

    @property
    def code(self):
        return (permutation_index(self.k)[tuple(self.ranks)] << n_pairs(self.k)) | self.adj

    @classmethod
    def from_code(cls, k, code):
        k = check_arity(k)
        c = n_pairs(k)
        if not 0 <= code < n_types(k):
            raise ValueError(f"code {code} out of range for arity {k}")
        return cls(k, permutations(k)[code >> c], code & ((1 << c) - 1))

    def edge(self, i, j):
        return bool(self.adj >> pair_bit(self.k)[i, j] & 1)

    def less(self, i, j):
        return self.ranks[i] < self.ranks[j]

    def adj_string(self):
        return "".join("1" if self.adj >> p & 1 else "0" for p in range(n_pairs(self.k)))

    def __str__(self):
        return f"ranks=({','.join(map(str, self.ranks))});adj={self.adj_string()}"

    @classmethod
    def parse(cls, text):
        """Inverse of ``str``: ``"ranks=(1,0);adj=1"``."""
        ranks_part, adj_part = text.strip().split(";")
        ranks_text = ranks_part.split("=", 1)[1].strip("()")
        ranks = tuple(int(r) for r in ranks_text.split(",") if r != "")
        bits = adj_part.split("=", 1)[1]
        adj = sum(1 << p for p, ch in enumerate(bits) if ch == "1")
        return cls(len(ranks), ranks, adj)

    def rearranged(self, sigma):
        """Type of ``(a[sigma[0]], ..., a[sigma[k-1]])`` where ``a`` has this type."""
        k = self.k
        ranks = tuple(self.ranks[s] for s in sigma)
        adj = 0
        for p, (i, j) in enumerate(position_pairs(k)):
            if self.edge(sigma[i], sigma[j]):
                adj |= 1 << p
        return KType(k, ranks, adj)


def enumerate_ktypes(k):
    """All k-types, in increasing code order."""
    k = check_arity(k)
    return [KType.from_code(k, code) for code in range(n_types(k))]


@dataclass(frozen=True)
class TypeSpace:
    """Array view of all k-types, used by the vectorised move tables.

    ``perm_of[code]`` and ``adj_of[code]`` split each code; ``ranks[p]`` is
    the rank vector of permutation ``p``.
    """

    k: int
    ranks: np.ndarray
    perm_of: np.ndarray
    adj_of: np.ndarray

    @property
    def size(self):
        return self.perm_of.shape[0]

    @property
    def n_pairs(self):
        return n_pairs(self.k)

    def code(self, perm, adj):
        return (np.asarray(perm, dtype=np.int64) << self.n_pairs) | np.asarray(adj, dtype=np.int64)


@lru_cache(maxsize=None)
def type_space(k):
    k = check_arity(k)
    c = n_pairs(k)
    codes = np.arange(n_types(k), dtype=np.int64)
    ranks = np.array(permutations(k), dtype=np.int64).reshape(-1, k)
    space = TypeSpace(k, ranks, codes >> c, codes & ((1 << c) - 1))
    for arr in (space.ranks, space.perm_of, space.adj_of):
        arr.setflags(write=False)
    return space


# ordered graphs ------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class OrderedGraph:
    """Graph on vertices ``0..n-1``; the order is the integer order."""

    n: int
    adj: np.ndarray

    def __post_init__(self):
        adj = np.array(self.adj, dtype=bool, copy=True).reshape(self.n, self.n)
        if adj.diagonal().any():
            raise ValueError("adjacency matrix must be irreflexive")
        if not np.array_equal(adj, adj.T):
            raise ValueError("adjacency matrix must be symmetric")
        adj.setflags(write=False)
        object.__setattr__(self, "adj", adj)

    @classmethod
    def from_edges(cls, n, edges):
        adj = np.zeros((n, n), dtype=bool)
        for u, v in edges:
            adj[u, v] = adj[v, u] = True
        return cls(n, adj)

    @classmethod
    def empty(cls, n):
        return cls(n, np.zeros((n, n), dtype=bool))

    def has_edge(self, u, v):
        return bool(self.adj[u, v])

    def edges(self):
        us, vs = np.nonzero(np.triu(self.adj, 1))
        return [(int(u), int(v)) for u, v in zip(us, vs)]

    def induced(self, vertices):
        vs = list(vertices)
        return OrderedGraph(len(vs), self.adj[np.ix_(vs, vs)])

    def __eq__(self, other):
        if not isinstance(other, OrderedGraph):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.adj, other.adj)

    def __hash__(self):
        return hash((self.n, np.packbits(self.adj).tobytes()))

    def __repr__(self):
        return f"OrderedGraph(n={self.n}, edges={self.edges()})"


def type_of_tuple(g, t):
    """The k-type of the tuple ``t`` of distinct vertices of ``g``."""
    t = tuple(int(v) for v in t)
    check_arity(len(t))
    if len(set(t)) != len(t):
        raise DuplicateEntryError(f"tuple {t} has repeated entries")
    for v in t:
        if not 0 <= v < g.n:
            raise VertexRangeError(f"vertex {v} not in 0..{g.n - 1}")
    order = sorted(range(len(t)), key=lambda i: t[i])
    ranks = [0] * len(t)
    for r, i in enumerate(order):
        ranks[i] = r
    adj = 0
    for p, (i, j) in enumerate(position_pairs(len(t))):
        if g.adj[t[i], t[j]]:
            adj |= 1 << p
    return KType(len(t), tuple(ranks), adj)


def pattern_of(t):
    """Smallest ordered graph realising ``t``, with the realising tuple.

    Vertex ``r`` of the pattern is the tuple entry of rank ``r``.
    """
    adj = np.zeros((t.k, t.k), dtype=bool)
    for i, j in position_pairs(t.k):
        if t.edge(i, j):
            adj[t.ranks[i], t.ranks[j]] = adj[t.ranks[j], t.ranks[i]] = True
    return OrderedGraph(t.k, adj), tuple(t.ranks)


def build_bit_graph(n):
    """Deterministic host: ``i < j`` are adjacent iff bit ``i`` of ``j`` is set."""
    if n < 1:
        raise ValueError("host needs at least one vertex")
    j = np.arange(n)[None, :]
    i = np.arange(n)[:, None]
    upper = (i < j) & (((j >> np.minimum(i, 62)) & 1) == 1) & (i < 63)
    return OrderedGraph(n, upper | upper.T)


def embed_pattern(pattern, host):
    """Lexicographically least increasing embedding of ``pattern`` into ``host``.

    Edges and non-edges are both preserved.  Returns a tuple of host
    vertices, or None when no such embedding exists.
    """
    m, n = pattern.n, host.n
    if m > n:
        return None
    image = []

    def extend(start):
        i = len(image)
        if i == m:
            return True
        # leave room for the remaining m - i - 1 vertices
        for v in range(start, n - (m - i - 1)):
            if all(host.adj[image[p], v] == pattern.adj[p, i] for p in range(i)):
                image.append(v)
                if extend(v + 1):
                    return True
                image.pop()
        return False

    return tuple(image) if extend(0) else None


# relations -------------------------------------------------------------------

@dataclass(frozen=True)
class Relation:
    """A relation stored extensionally as a set of k-type codes."""

    name: str
    arity: int
    members: frozenset

    def __post_init__(self):
        check_arity(self.arity)
        members = frozenset(int(m) for m in self.members)
        bound = n_types(self.arity)
        bad = [m for m in members if not 0 <= m < bound]
        if bad:
            raise ValueError(f"codes {sorted(bad)[:5]} out of range for arity {self.arity}")
        object.__setattr__(self, "members", members)

    def __contains__(self, t):
        if isinstance(t, KType):
            return t.k == self.arity and t.code in self.members
        return int(t) in self.members

    def __len__(self):
        return len(self.members)

    def mask(self):
        out = np.zeros(n_types(self.arity), dtype=bool)
        out[sorted(self.members)] = True
        return out

    def to_json(self):
        return json.dumps({"name": self.name, "arity": self.arity,
                           "members": sorted(self.members)})

    @classmethod
    def from_json(cls, text):
        data = json.loads(text) if isinstance(text, str) else text
        return cls(data["name"], data["arity"], frozenset(data["members"]))


class _TupleView:
    """Order, graph and tournament predicates on one k-type's positions."""

    __slots__ = ("t",)

    def __init__(self, t):
        self.t = t

    def lt(self, i, j):
        return self.t.ranks[i] < self.t.ranks[j]

    def e(self, i, j):
        return self.t.edge(i, j)

    def T(self, i, j):
        return self.lt(i, j) == self.e(i, j)


def _betw(v, x, y, z):
    return (v.lt(x, y) and v.lt(y, z)) or (v.lt(z, y) and v.lt(y, x))


def _cycl(v, x, y, z):
    return ((v.lt(x, y) and v.lt(y, z)) or (v.lt(y, z) and v.lt(z, x))
            or (v.lt(z, x) and v.lt(x, y)))


def _sep(v, x, y, u, w):
    return ((_cycl(v, x, y, u) and _cycl(v, x, w, y))
            or (_cycl(v, x, u, y) and _cycl(v, x, y, w)))


def _odd_edges(v):
    return bin(v.t.adj).count("1") % 2 == 1


def _betw_t(v, x, y, z):
    T = v.T
    return (T(x, y) and T(y, z) and T(z, x)) or (T(z, y) and T(y, x) and T(x, z))


def _cycl_t(v, x, y, z):
    T = v.T
    return ((T(x, y) and T(y, z) and T(z, x))
            or (T(x, z) and T(z, y) and T(x, y))
            or (T(y, x) and T(x, z) and T(y, z))
            or (T(z, y) and T(y, x) and T(z, x)))


def _sep_t(v, x, y, u, w):
    count = sum(v.T(p, q) for p in (x, y) for q in (u, w))
    return count % 2 == 0


def _r3_lower(v, a1, a2, a3):
    return v.lt(a1, a2) and v.lt(a2, a3) and v.e(a1, a3) == v.e(a2, a3)


def _r3_upper(v, a1, a2, a3):
    return v.lt(a1, a2) and v.lt(a2, a3) and v.e(a1, a3) == v.e(a1, a2)


_DEFINITIONS = {
    "E": (2, lambda v: v.e(0, 1)),
    "<": (2, lambda v: v.lt(0, 1)),
    "N": (2, lambda v: not v.e(0, 1)),
    "T": (2, lambda v: v.T(0, 1)),
    "Betw": (3, lambda v: _betw(v, 0, 1, 2)),
    "Cycl": (3, lambda v: _cycl(v, 0, 1, 2)),
    "Sep": (4, lambda v: _sep(v, 0, 1, 2, 3)),
    "R3": (3, _odd_edges),
    "R4": (4, _odd_edges),
    "R5": (5, _odd_edges),
    "BetwT": (3, lambda v: _betw_t(v, 0, 1, 2)),
    "CyclT": (3, lambda v: _cycl_t(v, 0, 1, 2)),
    "SepT": (4, lambda v: _sep_t(v, 0, 1, 2, 3)),
    "R3l": (3, lambda v: _r3_lower(v, 0, 1, 2)),
    "R3u": (3, lambda v: _r3_upper(v, 0, 1, 2)),
}

RELATION_NAMES = tuple(_DEFINITIONS) + ("SD",)


@lru_cache(maxsize=None)
def _defined_relation(name):
    arity, pred = _DEFINITIONS[name]
    members = frozenset(t.code for t in enumerate_ktypes(arity) if pred(_TupleView(t)))
    return Relation(name, arity, members)


def named_relation(name, s4=None):
    """Exact set-of-types semantics of a built-in relation.

    ``SD`` is the union of the dihedral rearrangements of a 4-ary base
    relation, which must be passed as ``s4``.
    """
    if name == "SD":
        if s4 is None:
            raise MissingBaseRelationError("SD needs its 4-ary base relation (s4=...)")
        closed = dihedral_closure(s4)
        return Relation("SD", 4, closed.members)
    if name not in _DEFINITIONS:
        raise KeyError(f"unknown relation {name!r}; expected one of {RELATION_NAMES}")
    return _defined_relation(name)


# dihedral group of the square with vertices 0-1-2-3 in cyclic order
D4 = tuple(
    [tuple((i + m) % 4 for i in range(4)) for m in range(4)]
    + [tuple((m - i) % 4 for i in range(4)) for m in range(4)]
)


@lru_cache(maxsize=None)
def rearrangement_table(k, sigma):
    """``table[code]`` is the code of the sigma-rearranged tuple type."""
    return np.array([t.rearranged(sigma).code for t in enumerate_ktypes(k)], dtype=np.int64)


def dihedral_closure(r):
    """Union of ``r^sigma`` over the eight dihedral permutations."""
    if r.arity != 4:
        raise InvalidArityError(f"dihedral closure needs a 4-ary relation, got arity {r.arity}")
    mask = r.mask()
    out = np.zeros_like(mask)
    for sigma in D4:
        # t is in r^sigma iff the sigma-rearrangement of t is in r
        out |= mask[rearrangement_table(4, sigma)]
    return Relation(r.name, 4, frozenset(np.flatnonzero(out).tolist()))


@lru_cache(maxsize=None)
def subtuple_table(k, keep):
    """``table[code]`` is the code of the subtuple at positions ``keep``."""
    out = np.empty(n_types(k), dtype=np.int64)
    for t in enumerate_ktypes(k):
        sub = [t.ranks[i] for i in keep]
        order = sorted(range(len(keep)), key=sub.__getitem__)
        ranks = [0] * len(keep)
        for r, i in enumerate(order):
            ranks[i] = r
        adj = 0
        for p, (i, j) in enumerate(position_pairs(len(keep))):
            if t.edge(keep[i], keep[j]):
                adj |= 1 << p
        out[t.code] = KType(len(keep), tuple(ranks), adj).code
    out.setflags(write=False)
    return out
