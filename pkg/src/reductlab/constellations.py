"""Finite models of canonical-function behaviour on a few infinite orbits.

A constellation has slots (orbits), each sitting on a level.  Points of a
lower level lie below every point of a higher level; points on one level
interleave freely.  Each slot, and each pair of slots, carries an entry
saying what happens to the graph relation there.  A pair of slots on the
same level has two entries, one for the pairs whose point in the first slot
is the smaller one (ascending) and one for the others (descending).

Behaviours are order preserving throughout, so an instantiation on points
``0 < 1 < ... < m-1`` only needs to know which slot each point goes to.
"""

import itertools
import json
from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources

import numpy as np

from .orbits import GroupSpec, as_spec, orbit_partition
from .structures import MAX_ARITY, OrderedGraph, ReductLabError, position_pairs

KEEP = "keep"
FLIP = "flip"
ERADICATE_EDGES = "eradicateEdges"
ERADICATE_NON_EDGES = "eradicateNonEdges"
ENTRIES = (KEEP, FLIP, ERADICATE_EDGES, ERADICATE_NON_EDGES)
CATALOG_VOCAB = (KEEP, FLIP)

# labels of the order-preserving part of the lattice
OP_LABELS = frozenset("cdghj")
TARGETS = ("c", "d", "g", "h", "j")


class SizeLimitError(ReductLabError):
    pass


class InterleaveError(ReductLabError, ValueError):
    pass


def _check_entry(e):
    if e not in ENTRIES:
        raise ValueError(f"unknown behaviour entry {e!r}")
    return e


@dataclass(frozen=True)
class Constellation:
    levels: tuple
    on_slot: tuple
    # (s, t) with s < t -> (ascending, descending) if same level else entry
    between: tuple
    names: tuple = None

    def __post_init__(self):
        levels = tuple(int(x) for x in self.levels)
        object.__setattr__(self, "levels", levels)
        object.__setattr__(self, "on_slot", tuple(_check_entry(e) for e in self.on_slot))
        if len(self.on_slot) != len(levels):
            raise ValueError("one on-slot entry per slot")
        pairs = dict(self.between)
        fixed = []
        for s, t in itertools.combinations(range(len(levels)), 2):
            if (s, t) not in pairs:
                raise ValueError(f"missing entry for slots {s},{t}")
            entry = pairs.pop((s, t))
            if levels[s] == levels[t]:
                if isinstance(entry, str) or len(entry) != 2:
                    raise ValueError(f"same-level slots {s},{t} need (ascending, descending)")
                entry = (_check_entry(entry[0]), _check_entry(entry[1]))
            else:
                if not isinstance(entry, str):
                    raise ValueError(f"slots {s},{t} lie on different levels and take one entry")
                _check_entry(entry)
            fixed.append(((s, t), entry))
        if pairs:
            raise ValueError(f"entries for unknown slot pairs {sorted(pairs)}")
        object.__setattr__(self, "between", tuple(fixed))
        names = self.names or tuple("XYZWVU"[i] if i < 6 else f"S{i}" for i in range(len(levels)))
        object.__setattr__(self, "names", tuple(names))

    @property
    def k(self):
        return len(self.levels)

    def pair_entry(self, s, t):
        return dict(self.between)[(s, t)]

    def entries(self):
        out = set(self.on_slot)
        for _, e in self.between:
            out |= {e} if isinstance(e, str) else set(e)
        return out

    def describe(self):
        lines = []
        for i, (name, level, e) in enumerate(zip(self.names, self.levels, self.on_slot)):
            lines.append(f"slot {name} level={level} on={e}")
        for (s, t), e in self.between:
            a, b = self.names[s], self.names[t]
            if isinstance(e, str):
                lines.append(f"pair {a}{b} {e}")
            else:
                lines.append(f"pair {a}{b} ascending={e[0]} descending={e[1]}")
        return "\n".join(lines)

    def to_dict(self):
        return {
            "slots": list(self.names),
            "levels": list(self.levels),
            "on": list(self.on_slot),
            "pairs": {f"{s}-{t}": (e if isinstance(e, str) else list(e)) for (s, t), e in self.between},
        }

    @classmethod
    def from_dict(cls, data):
        pairs = []
        for key, e in data["pairs"].items():
            s, t = (int(x) for x in key.split("-"))
            pairs.append(((s, t), e if isinstance(e, str) else tuple(e)))
        return cls(tuple(data["levels"]), tuple(data["on"]), tuple(pairs), tuple(data["slots"]))


def all_keep(levels):
    levels = tuple(levels)
    pairs = []
    for s, t in itertools.combinations(range(len(levels)), 2):
        pairs.append(((s, t), (KEEP, KEEP) if levels[s] == levels[t] else KEEP))
    return Constellation(levels, (KEEP,) * len(levels), tuple(pairs))


def _shape_levels(k, shape):
    if shape == "same":
        return (0,) * k
    if shape == "mixed":
        return tuple(range(k))
    levels = tuple(shape)
    if len(levels) != k:
        raise ValueError(f"level shape {shape!r} does not have {k} slots")
    return levels


def enumerate_constellations(k, level_shape="same", vocab=CATALOG_VOCAB):
    """Every constellation on ``k`` slots with the given levels.

    ``level_shape`` is "same", "mixed" (all levels distinct, slot i on
    level i) or an explicit tuple of levels.
    """
    if k < 1:
        raise ValueError("need at least one slot")
    if k > 3:
        raise SizeLimitError(f"exhaustive enumeration is limited to 3 slots, got {k}")
    vocab = tuple(_check_entry(e) for e in vocab)
    levels = _shape_levels(k, level_shape)
    pairs = list(itertools.combinations(range(k), 2))
    choices = []
    for s, t in pairs:
        if levels[s] == levels[t]:
            choices.append(list(itertools.product(vocab, repeat=2)))
        else:
            choices.append(list(vocab))
    out = []
    for on in itertools.product(vocab, repeat=k):
        for picked in itertools.product(*choices):
            out.append(Constellation(levels, on, tuple(zip(pairs, picked))))
    return out


# instantiation ------------------------------------------------------------------

def valid_assignment(c, assignment):
    """Points are increasing, so their levels must not decrease."""
    levels = [c.levels[s] for s in assignment]
    return all(a <= b for a, b in zip(levels, levels[1:]))


@lru_cache(maxsize=None)
def assignments(c, m):
    """All slot assignments of ``m`` increasing points that respect levels."""
    return tuple(a for a in itertools.product(range(c.k), repeat=m) if valid_assignment(c, a))


def pair_entries(c, assignment):
    """Entry governing each position pair of the increasing points."""
    out = []
    between = dict(c.between)
    for p, q in position_pairs(len(assignment)):
        s, t = assignment[p], assignment[q]
        if s == t:
            out.append(c.on_slot[s])
        elif s < t:
            e = between[(s, t)]
            out.append(e if isinstance(e, str) else e[0])
        else:
            # the point of the first slot t is the larger one here
            e = between[(t, s)]
            out.append(e if isinstance(e, str) else e[1])
    return tuple(out)


def _apply_entries(entries, codes):
    codes = np.array(codes, dtype=np.int64, copy=True)
    for p, e in enumerate(entries):
        bit = 1 << p
        if e == FLIP:
            codes ^= bit
        elif e == ERADICATE_EDGES:
            codes &= ~bit
        elif e == ERADICATE_NON_EDGES:
            codes |= bit
    return codes


def _graph_code(g):
    code = 0
    for p, (i, j) in enumerate(position_pairs(g.n)):
        if g.adj[i, j]:
            code |= 1 << p
    return code


def _graph_of(n, code):
    edges = [(i, j) for p, (i, j) in enumerate(position_pairs(n)) if code >> p & 1]
    return OrderedGraph.from_edges(n, edges)


def instantiate(c, assignment, before):
    """Apply the behaviour to an ordered graph whose points sit in slots.

    ``assignment[v]`` is the slot of vertex v.  Returns ``(before, after)``.
    """
    assignment = tuple(assignment)
    if len(assignment) != before.n:
        raise ValueError(f"{len(assignment)} slots given for {before.n} points")
    if any(not 0 <= s < c.k for s in assignment):
        raise ValueError(f"slot index out of range in {assignment}")
    if not valid_assignment(c, assignment):
        raise InterleaveError(f"assignment {assignment} puts a higher level below a lower one")
    after = int(_apply_entries(pair_entries(c, assignment), [_graph_code(before)])[0])
    return before, _graph_of(before.n, after)


# compatibility ------------------------------------------------------------------

def check_compatible(c, gs, max_arity=4):
    """Does every before/after pair of types stay inside one orbit of ``gs``?

    All instantiations with at most ``max_arity`` points are tried, on every
    base graph.  Order is preserved, so increasing tuples suffice and the
    type code of an increasing tuple is its graph code.
    """
    gs = as_spec(gs)
    if not 1 <= max_arity <= MAX_ARITY:
        raise ValueError(f"max_arity must lie in 1..{MAX_ARITY}")
    for m in range(1, max_arity + 1):
        labels = orbit_partition(gs, m).labels
        codes = np.arange(1 << (m * (m - 1) // 2), dtype=np.int64)
        for a in assignments(c, m):
            after = _apply_entries(pair_entries(c, a), codes)
            if not np.array_equal(labels[codes], labels[after]):
                return False
    return True


def op_nodes():
    """Closed groups generated inside the order-preserving labels."""
    from .lattice import join_closure

    seen = {}
    for size in range(len(OP_LABELS) + 1):
        for subset in itertools.combinations(sorted(OP_LABELS), size):
            ideal = join_closure(subset)
            if ideal.members <= OP_LABELS:
                seen.setdefault(ideal.members, ideal)
    return sorted(seen.values(), key=lambda i: (len(i.members), str(i)))


@dataclass
class Classification:
    compatible: list
    minimal: list
    forced: object
    witnesses: dict = field(default_factory=dict)


def classify_constellation(c, candidates=None, max_arity=4, set_size=4, max_depth=6):
    """Compatible OP groups, the minimal ones, and a lower bound from witnesses."""
    from .lattice import join_closure

    candidates = candidates if candidates is not None else op_nodes()
    compatible = [i for i in candidates if check_compatible(c, i.spec, max_arity)]
    minimal = [i for i in compatible
               if not any(j.members < i.members for j in compatible)]
    found = {}
    for target in TARGETS:
        result = witness_generates(c, target, set_size, max_depth)
        if result.success:
            found[target] = result
    forced = join_closure(set(found))
    return Classification(compatible, minimal, forced, found)


# witness search -----------------------------------------------------------------

def target_family(label, n):
    """Parameterised graph maps on n increasing points, as flip masks."""
    pairs = position_pairs(n)
    full = (1 << len(pairs)) - 1

    def mask(pred):
        return sum(1 << p for p, (i, j) in enumerate(pairs) if pred(i, j))

    if label == "c":
        return {None: full}
    if label == "d":
        out = {}
        for bits in range(1, 1 << (n - 1)):
            s = frozenset(v for v in range(n) if bits >> v & 1)
            out[tuple(sorted(s))] = mask(lambda i, j: (i in s) != (j in s))
        return out
    if label == "g":
        return {cut: mask(lambda i, j: j < cut) for cut in range(2, n + 1)}
    if label == "h":
        return {cut: mask(lambda i, j: i >= cut) for cut in range(0, n - 1)}
    if label == "j":
        return {(i, j): 1 << p for p, (i, j) in enumerate(pairs)}
    raise ValueError(f"no finite target for label {label!r}")


@dataclass
class WitnessResult:
    target: str
    set_size: int
    max_depth: int
    found: dict
    missing: list
    exhausted: bool = False

    @property
    def success(self):
        return not self.missing

    @property
    def depth(self):
        return max((len(w) for w in self.found.values()), default=0)


@lru_cache(maxsize=64)
def _reachable(c, n, max_depth, budget):
    """Breadth-first search over composites of the behaviour on n points.

    A state lists, for every initial graph on the points, the graph it has
    been turned into; a move is one slot assignment.  Returns the first
    move sequence reaching each state.
    """
    codes = np.arange(1 << (n * (n - 1) // 2), dtype=np.int64)
    moves = [(a, pair_entries(c, a)) for a in assignments(c, n)]
    start = codes.tobytes()
    paths = {start: ()}
    frontier = deque([(codes, ())])
    truncated = False
    while frontier:
        state, path = frontier.popleft()
        if len(path) >= max_depth:
            continue
        for a, entries in moves:
            nxt = _apply_entries(entries, state)
            key = nxt.tobytes()
            if key in paths:
                continue
            if len(paths) >= budget:
                truncated = True
                break
            paths[key] = path + (a,)
            frontier.append((nxt, path + (a,)))
    return paths, truncated


def witness_generates(c, target, set_size=3, max_depth=6, budget=200_000):
    """Find compositions of the behaviour realising every map of a target family.

    ``target`` is one of c, d, g, h (the generator's maps restricted to
    ``set_size`` increasing points) or j, standing for the single-pair flips.
    """
    if not 1 <= set_size <= 5:
        raise ValueError("set_size must lie in 1..5")
    codes = np.arange(1 << (set_size * (set_size - 1) // 2), dtype=np.int64)
    paths, truncated = _reachable(c, set_size, max_depth, budget)
    found, missing = {}, []
    for param, mask in target_family(target, set_size).items():
        key = (codes ^ mask).tobytes()
        if key in paths:
            found[param] = paths[key]
        else:
            missing.append(param)
    return WitnessResult(target, set_size, max_depth, found, missing, exhausted=truncated)


def replay(c, moves, n):
    """Flip mask of a composite, or None when it depends on the start graph."""
    codes = np.arange(1 << (n * (n - 1) // 2), dtype=np.int64)
    state = codes
    for a in moves:
        if len(a) != n or not valid_assignment(c, a):
            raise InterleaveError(f"bad assignment {a} for {n} points")
        state = _apply_entries(pair_entries(c, a), state)
    delta = state ^ codes
    return int(delta[0]) if np.all(delta == delta[0]) else None


def four_embedding_recipe(i, j, n, inner=0, outer=1):
    """Slot assignments flipping one pair through four placements.

    All points go to ``inner`` except: nothing moved, then ``i``, then
    ``j``, then both, moved to ``outer``.
    """
    moves = []
    for moved in ((), (i,), (j,), (i, j)):
        moves.append(tuple(outer if v in moved else inner for v in range(n)))
    return moves


def format_witness(c, moves):
    return " ; ".join("".join(c.names[s] for s in a) for a in moves) or "(identity)"


# catalog ------------------------------------------------------------------------

@dataclass(frozen=True)
class CaseRecord:
    case_id: str
    constellation: Constellation
    claimed: GroupSpec
    claim_source: str = "prose"
    geometry: str = "reconstructed"

    @property
    def target(self):
        """Generator family whose maps the behaviour should produce."""
        labels = sorted(self.claimed.labels)
        return labels[0] if labels else None


@lru_cache(maxsize=None)
def _load_catalog():
    text = resources.files("reductlab").joinpath("fixtures/cases.json").read_text()
    records = []
    for entry in json.loads(text)["cases"]:
        records.append(CaseRecord(entry["id"], Constellation.from_dict(entry),
                                  GroupSpec.parse(entry["claim"])))
    return tuple(records)


def case_catalog():
    return list(_load_catalog())


def case_by_id(case_id):
    for record in _load_catalog():
        if record.case_id == case_id:
            return record
    raise KeyError(f"no case {case_id!r}")


@dataclass
class CaseCheck:
    record: CaseRecord
    compatible: bool
    witness: WitnessResult
    per_node: dict

    @property
    def ok(self):
        return self.compatible and (self.witness is None or self.witness.success)


def check_case(record, max_arity=4, set_size=4, max_depth=6):
    """Compatibility with the claimed group plus a witness for its generator."""
    from .lattice import join_closure

    claimed = join_closure(record.claimed.labels)
    compatible = check_compatible(record.constellation, claimed.spec, max_arity)
    witness = None
    if record.target is not None:
        witness = witness_generates(record.constellation, record.target, set_size, max_depth)
    per_node = {str(node): check_compatible(record.constellation, node.spec, max_arity)
                for node in op_nodes()}
    return CaseCheck(record, compatible, witness, per_node)
