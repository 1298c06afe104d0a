"""The verification report behind ``reductlab verify-all``."""

import itertools
import time
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import constellations, lattice, orbits, transforms
from .structures import OrderedGraph, build_bit_graph

AUTOMORPHISMS = ("()", "(gh)", "(ik)(ae)(bf)")
NON_AUTOMORPHISM = "(ab)"


@dataclass
class Section:
    name: str
    passed: bool
    detail: str = ""
    # findings are reported but only fail the run in strict mode
    finding: bool = False
    seconds: float = 0.0
    data: dict = field(default_factory=dict)


def _timed(fn):
    def run(cfg):
        start = time.perf_counter()
        section = fn(cfg)
        section.seconds = round(time.perf_counter() - start, 3)
        return section
    run.__name__ = fn.__name__
    return run


@_timed
def table_section(cfg):
    expected = lattice.expected_table().without("SD")
    got = lattice.build_preservation_table(columns=expected.columns)
    diff = got.diff(expected)
    return Section("preservation-table", not diff,
                   f"{len(got.rows)} rows x {len(got.columns)} columns, {len(diff)} differing cells",
                   data={"diff": [list(map(str, d)) for d in diff]})


@_timed
def sd_section(cfg):
    info = lattice.sd_findings()
    if info["error"] is not None:
        detail = f"no surrogate: {info['error']}; closure of b,g = {info['bg_closure']}"
        return Section("sd-surrogate", False, detail, finding=True, data=info)
    expected = lattice.expected_table()
    got = lattice.build_preservation_table(columns=("SD",))
    diff = got.diff(expected.reordered(expected.rows, ("SD",)))
    return Section("sd-surrogate", not diff, f"{len(diff)} SD cells differ", finding=True,
                   data={**info, "diff": [list(map(str, d)) for d in diff]})


@_timed
def lattice_section(cfg):
    nodes = lattice.compute_lattice()
    labels = Counter(n.label for n in nodes if n.label not in ("bottom", top_label(nodes)))
    rows = Counter(lattice.expected_table().rows)
    missing = sorted((rows - labels).elements())
    extra = sorted((labels - rows).elements())
    ok = len(nodes) == lattice.EXPECTED_NODES and not missing and not extra
    return Section("lattice-count", ok,
                   f"{len(nodes)} nodes; missing labels {missing}; unexpected {extra}",
                   data={"nodes": len(nodes), "missing": missing, "extra": extra})


def top_label(nodes):
    return max(nodes, key=lambda n: len(n.members)).label


def family_counts(nodes):
    out = {x: sorted(n.label for n in nodes if x in n.members) for x in "ijk"}
    out["gh_without_j"] = sorted(n.label for n in nodes
                                 if n.members & {"g", "h"} and "j" not in n.members)
    return out


GH_FAMILY = ["abdefgh", "adegh", "bdfgh", "dgh", "g", "h"]


def atom_law(members):
    return all(len(members & set(group)) in (0, 1, 3) for group in ("ace", "bdf"))


@_timed
def families_section(cfg):
    nodes = lattice.compute_lattice()
    fam = family_counts(nodes)
    atoms_ok = all(atom_law(n.members) for n in nodes)
    ok = (all(len(fam[x]) == 5 for x in "ijk") and fam["gh_without_j"] == GH_FAMILY
          and atoms_ok)
    detail = (f"i={len(fam['i'])} j={len(fam['j'])} k={len(fam['k'])} "
              f"g/h without j={fam['gh_without_j']} atom law={'ok' if atoms_ok else 'broken'}")
    return Section("ideal-families", ok, detail, data=fam)


@_timed
def automorphism_section(cfg):
    results = {p: lattice.check_lattice_automorphism(p) for p in AUTOMORPHISMS + (NON_AUTOMORPHISM,)}
    ok = all(results[p] for p in AUTOMORPHISMS) and not results[NON_AUTOMORPHISM]
    return Section("automorphisms", ok, " ".join(f"{p}={v}" for p, v in results.items()),
                   data=results)


@_timed
def atoms_section(cfg):
    nodes = lattice.compute_lattice()
    bottom = nodes[0]
    atoms = sorted(hi.label for lo, hi in lattice.hasse_edges(nodes) if lo is bottom)
    return Section("atoms", atoms == list("abcdef"), f"bottom is covered by {atoms}")


def _hosts(max_n, seed=7):
    rng = np.random.default_rng(seed)
    for n in range(1, max_n + 1):
        yield build_bit_graph(n)
        upper = np.triu(rng.random((n, n)) < 0.5, 1)
        yield OrderedGraph(n, upper | upper.T)


@_timed
def composition_section(cfg):
    bad = 0
    count = 0
    for g in _hosts(12):
        for cut in range(g.n + 1):
            composite = transforms.concrete_transform(
                "c", None, transforms.concrete_transform(
                    "g", cut, transforms.concrete_transform("h", cut, g)))
            count += 1
            bad += composite != transforms.cut_switch(g, cut)
    same = orbits.signature("gh") == orbits.signature("cdgh")
    return Section("composition", bad == 0 and same,
                   f"{count} host/cut checks, {bad} failures; signature(gh)==signature(cdgh): {same}")


@_timed
def oracle_section(cfg):
    bad = []
    for label in transforms.DETERMINISTIC:
        for k in (1, 2, 3):
            oracle = orbits.oracle_orbits(label, k, n=cfg.oracle_host_size, depth=4)
            if oracle != orbits.orbit_partition(label, k):
                bad.append(f"{label}/k={k}")
    return Section("oracle", not bad, f"mismatches: {bad or 'none'}")


@_timed
def catalog_section(cfg):
    records = constellations.case_catalog()
    depth = min(cfg.witness_depth, 6)

    def run(record):
        return constellations.check_case(record, max_arity=min(cfg.max_arity, 4),
                                         set_size=4, max_depth=depth)

    if cfg.parallelism > 1:
        with ThreadPoolExecutor(cfg.parallelism) as pool:
            checks = list(pool.map(run, records))
    else:
        checks = [run(r) for r in records]
    failed = [c.record.case_id for c in checks if not c.ok]
    a2 = constellations.witness_generates(constellations.case_by_id("C2:a2").constellation, "d", 3, 1)
    a3 = constellations.case_by_id("C2:a3").constellation
    replays = all(
        constellations.replay(a3, constellations.four_embedding_recipe(i, j, 4), 4) == 1 << p
        for p, (i, j) in enumerate(constellations.position_pairs(4)))
    ok = not failed and a2.success and replays
    return Section("constellations", ok,
                   f"{len(checks)} cases, failed {failed or 'none'}; C2:a2 depth-1 witness {a2.success}; "
                   f"C2:a3 four-placement replay {replays}")


@_timed
def determination_section(cfg):
    bad = []
    for size in range(6):
        for subset in itertools.combinations("cdghj", size):
            full, induced = orbits.determined_by_subtuples(subset, 5)
            if full != induced:
                bad.append("".join(subset) or "bottom")
    return Section("determination", not bad, f"groups where 4-subtuples do not decide: {bad or 'none'}")


SECTIONS = (table_section, sd_section, lattice_section, families_section, automorphism_section,
            atoms_section, composition_section, oracle_section, catalog_section,
            determination_section)


def run_all(cfg, sections=None):
    out = []
    for fn in sections or SECTIONS:
        try:
            out.append(fn(cfg))
        except Exception as exc:  # a crashing check is a failed check
            out.append(Section(fn.__name__.replace("_section", ""), False,
                               f"{type(exc).__name__}: {exc}"))
    return out


def overall(sections, strict=False):
    return all(s.passed or (s.finding and not strict) for s in sections)


def as_dicts(sections):
    return [asdict(s) for s in sections]
