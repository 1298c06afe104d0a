"""Finite verification of the closed supergroups of Aut(D;<,E)."""

from .structures import KType, OrderedGraph, Relation, named_relation
from .orbits import GroupSpec, orbit_partition, signature, preserves
from .lattice import compute_lattice, join_closure, build_preservation_table
from .constellations import Constellation, case_catalog, check_compatible, witness_generates

__version__ = "0.1.0"

__all__ = [
    "Constellation",
    "GroupSpec",
    "KType",
    "OrderedGraph",
    "Relation",
    "build_preservation_table",
    "case_catalog",
    "check_compatible",
    "compute_lattice",
    "join_closure",
    "named_relation",
    "orbit_partition",
    "preserves",
    "signature",
    "witness_generates",
]
