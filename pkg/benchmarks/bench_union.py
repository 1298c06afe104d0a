"""Compare the numba and numpy union-find paths on the arity-5 type space.

Usage: python3 benchmarks/bench_union.py [--repeat N] [--labels dgh]
"""

import argparse
import timeit

import numpy as np

from reductlab import _accel, transforms
from reductlab.structures import n_types


def edges_for(labels, k=5):
    parts = [transforms.label_edges(x, k) for x in labels]
    return (np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts]))


def run(src, dst, use_numba):
    parent = np.arange(n_types(5), dtype=np.int64)
    _accel.union_pairs(parent, src, dst, use_numba=use_numba)
    return parent


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--labels", default="dgh")
    args = ap.parse_args()

    src, dst = edges_for(args.labels)
    print(f"types={n_types(5)} edges={src.size} labels={args.labels}")
    # warm up the jit outside the timed region
    a = run(src, dst, True)
    b = run(src, dst, False)
    assert np.array_equal(a, b), "backends disagree"

    for name, flag in (("numba", True), ("numpy", False)):
        times = timeit.repeat(lambda: run(src, dst, flag), number=1, repeat=args.repeat)
        print(f"{name:6s} best={min(times) * 1e3:8.2f} ms  median={np.median(times) * 1e3:8.2f} ms")
    print(f"classes={int(np.count_nonzero(a == np.arange(a.size)))}")


if __name__ == "__main__":
    main()
