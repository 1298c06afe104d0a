"""Command line entry point: ``reductlab <command>``.

Exit codes: 0 when everything checked passes, 1 on a verification
mismatch, 2 on a usage error.
"""

import argparse
import json
import os
import sys
from dataclasses import dataclass

from . import checks, constellations, lattice, orbits
from .orbits import GroupSpec

EXIT_OK, EXIT_MISMATCH, EXIT_USAGE = 0, 1, 2


@dataclass(frozen=True)
class Config:
    max_arity: int = 5
    oracle_host_size: int = 16
    witness_depth: int = 6
    output_format: str = "tsv"
    parallelism: int = os.cpu_count() or 1

    def __post_init__(self):
        if not 1 <= self.max_arity <= 5:
            raise ValueError("max-arity must lie in 1..5")
        if not 1 <= self.witness_depth <= 8:
            raise ValueError("witness-depth must lie in 1..8")
        if self.output_format not in ("tsv", "json", "dot", "text"):
            raise ValueError(f"unknown output format {self.output_format!r}")
        if self.parallelism < 1:
            raise ValueError("parallelism must be positive")


class UsageError(Exception):
    pass


def _config(args, fmt=None):
    try:
        return Config(max_arity=args.max_arity, oracle_host_size=args.oracle_host_size,
                      witness_depth=args.witness_depth, output_format=fmt or "tsv",
                      parallelism=args.jobs or (os.cpu_count() or 1))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def cmd_table(args, out):
    columns = lattice.TABLE_COLUMNS
    if args.skip_sd:
        columns = tuple(c for c in columns if c != "SD")
    try:
        table = lattice.build_preservation_table(columns=columns)
    except lattice.SurrogateSearchError as exc:
        print(f"error: SD column unavailable: {exc} (use --skip-sd)", file=sys.stderr)
        return EXIT_MISMATCH
    out.write(table.to_json() if args.format == "json" else table.to_tsv())
    if args.diff_expected:
        try:
            with open(args.diff_expected) as fh:
                expected = lattice.PreservationTable.from_tsv(fh.read())
        except OSError as exc:
            raise UsageError(f"cannot read {args.diff_expected}: {exc}") from exc
        if args.skip_sd and "SD" in expected.columns:
            expected = expected.without("SD")
        diff = table.diff(expected)
        for row, col, ours, theirs in diff:
            print(f"mismatch\t{row}\t{col}\tcomputed={ours}\texpected={theirs}", file=sys.stderr)
        return EXIT_MISMATCH if diff else EXIT_OK
    return EXIT_OK


def cmd_lattice(args, out):
    nodes = lattice.compute_lattice()
    edges = lattice.hasse_edges(nodes)
    if args.dot:
        with open(args.dot, "w") as fh:
            fh.write(lattice.to_dot(nodes))
    if args.format == "json":
        data = {
            "nodes": [{"label": n.label, "members": "".join(sorted(n.members))} for n in nodes],
            "edges": sorted([lo.label, hi.label] for lo, hi in edges),
        }
        out.write(json.dumps(data, indent=2) + "\n")
    else:
        out.write(f"nodes {len(nodes)}\n")
        for n in nodes:
            out.write(f"node\t{n.label}\t{''.join(sorted(n.members))}\n")
        for lo, hi in sorted(edges, key=lambda e: (e[0].label, e[1].label)):
            out.write(f"edge\t{lo.label}\t{hi.label}\n")
        atoms = sorted(hi.label for lo, hi in edges if lo is nodes[0])
        out.write(f"atoms\t{','.join(atoms)}\n")
    return EXIT_OK


def cmd_orbits(args, out):
    try:
        gs = GroupSpec.parse(args.group)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if not 1 <= args.arity <= 5:
        raise UsageError("arity must lie in 1..5")
    out.write(orbits.format_blocks(orbits.orbit_partition(gs, args.arity)) + "\n")
    return EXIT_OK


def cmd_check(args, out):
    try:
        record = constellations.case_by_id(args.case)
    except KeyError as exc:
        raise UsageError(str(exc)) from exc
    cfg = _config(args)
    result = constellations.check_case(record, max_arity=min(cfg.max_arity, 4),
                                       set_size=args.set_size, max_depth=cfg.witness_depth)
    c = record.constellation
    per_node = {lattice.label_of(node.members): result.per_node[str(node)]
                for node in constellations.op_nodes()}
    witness = result.witness
    if args.json:
        data = {
            "case": record.case_id,
            "claimed": str(record.claimed),
            "geometry": c.to_dict(),
            "reconstructed": record.geometry == "reconstructed",
            "compatible_with_claim": result.compatible,
            "compatibility": per_node,
            "witness": None if witness is None else {
                "target": witness.target,
                "success": witness.success,
                "depth": witness.depth,
                "missing": [str(m) for m in witness.missing],
                "moves": {str(k): [list(a) for a in v] for k, v in sorted(witness.found.items(), key=str)},
            },
            "ok": result.ok,
        }
        out.write(json.dumps(data, indent=2) + "\n")
    else:
        out.write(f"case {record.case_id} claimed {record.claimed} ({record.geometry} geometry)\n")
        out.write(c.describe() + "\n")
        for name, ok in per_node.items():
            out.write(f"compatible\t{name}\t{'yes' if ok else 'no'}\n")
        if witness is None:
            out.write("witness\tnot needed (identity behaviour)\n")
        elif witness.success:
            for param, moves in sorted(witness.found.items(), key=str):
                out.write(f"witness\t{witness.target}\t{param}\t{constellations.format_witness(c, moves)}\n")
        else:
            out.write(f"witness\t{witness.target}\texhausted at depth {witness.max_depth}; "
                      f"missing {witness.missing}\n")
        out.write(f"result\t{'pass' if result.ok else 'fail'}\n")
    return EXIT_OK if result.ok else EXIT_MISMATCH


def cmd_find_sd(args, out):
    info = lattice.sd_findings()
    if args.json:
        out.write(json.dumps(info, indent=2) + "\n")
    else:
        if info["error"]:
            out.write(f"surrogate\tnone\t{info['error']}\n")
        else:
            out.write(f"surrogate\t{len(info['surrogate'])} members\t"
                      f"{','.join(map(str, info['surrogate']))}\n")
        out.write(f"closure(b,g)\t{info['bg_closure']}\n")
        out.write(f"half-parity candidate mismatches\t{','.join(info['half_parity_mismatches'])}\n")
    return EXIT_OK if info["error"] is None else EXIT_MISMATCH


def cmd_verify_all(args, out):
    cfg = _config(args, "json" if args.json else "tsv")
    sections = checks.run_all(cfg)
    ok = checks.overall(sections, strict=args.strict)
    if args.json:
        data = {"ok": ok, "strict": args.strict, "sections": checks.as_dicts(sections)}
        out.write(json.dumps(data, indent=2, default=str) + "\n")
    else:
        for s in sections:
            status = "pass" if s.passed else ("finding" if s.finding and not args.strict else "FAIL")
            out.write(f"{status}\t{s.name}\t{s.detail}\n")
        out.write(f"overall\t{'pass' if ok else 'FAIL'}\n")
    return EXIT_OK if ok else EXIT_MISMATCH


def build_parser():
    p = argparse.ArgumentParser(prog="reductlab",
                                description="Verify the classification of closed groups above Aut(D;<,E).")
    p.add_argument("--max-arity", type=int, default=5)
    p.add_argument("--oracle-host-size", type=int, default=16)
    p.add_argument("--witness-depth", type=int, default=6)
    p.add_argument("--jobs", type=int, default=0, help="worker threads (default: all cores)")
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("table", help="print the preservation table")
    t.add_argument("--format", choices=("tsv", "json"), default="tsv")
    t.add_argument("--diff-expected", metavar="FILE")
    t.add_argument("--skip-sd", action="store_true", help="leave out the SD column")
    t.set_defaults(func=cmd_table)

    la = sub.add_parser("lattice", help="list nodes and covering edges")
    la.add_argument("--dot", metavar="FILE")
    la.add_argument("--format", choices=("text", "json"), default="text")
    la.set_defaults(func=cmd_lattice)

    o = sub.add_parser("orbits", help="orbit blocks of a group on k-types")
    o.add_argument("--group", required=True, help="generator labels, e.g. dgh, or bottom")
    o.add_argument("--arity", type=int, required=True)
    o.set_defaults(func=cmd_orbits)

    c = sub.add_parser("check", help="check one constellation case")
    c.add_argument("--case", required=True)
    c.add_argument("--set-size", type=int, default=4)
    c.add_argument("--json", action="store_true")
    c.set_defaults(func=cmd_check)

    f = sub.add_parser("find-sd", help="search for the dihedral 4-ary surrogate")
    f.add_argument("--json", action="store_true")
    f.set_defaults(func=cmd_find_sd)

    v = sub.add_parser("verify-all", help="run every verification section")
    v.add_argument("--strict", action="store_true", help="findings fail the run too")
    v.add_argument("--json", action="store_true")
    v.set_defaults(func=cmd_verify_all)
    return p


def main(argv=None, out=None):
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args, out)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
