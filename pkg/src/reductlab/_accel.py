"""Union-find kernels over dense integer type codes.

Two interchangeable backends are provided.  The numba backend runs a
sequential union-find with path compression; the numpy backend runs a
vectorised hook-and-compress loop.  Both keep the invariant
``parent[x] <= x`` so that every root is the smallest code of its block,
which makes the resulting labels canonical and backend independent.

Set ``REDUCTLAB_NUMBA=0`` to force the numpy path.
"""

import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None


def _numba_requested():
    flag = os.environ.get("REDUCTLAB_NUMBA", "1").strip().lower()
    return flag not in ("0", "false", "no", "off")


USE_NUMBA = numba is not None and _numba_requested()


# numpy backend -------------------------------------------------------------

def _flatten_numpy(parent):
    while True:
        grand = parent[parent]
        if np.array_equal(grand, parent):
            return parent
        parent[:] = grand


def _union_pairs_numpy(parent, src, dst):
    _flatten_numpy(parent)
    while True:
        ru = parent[src]
        rv = parent[dst]
        diff = ru != rv
        if not diff.any():
            return
        ru = ru[diff]
        rv = rv[diff]
        lo = np.minimum(ru, rv)
        hi = np.maximum(ru, rv)
        np.minimum.at(parent, hi, lo)
        _flatten_numpy(parent)


def _all_equal_numpy(labels, src, dst):
    return bool(np.all(labels[src] == labels[dst]))


# numba backend -------------------------------------------------------------

if numba is not None:

    @numba.njit(cache=True)
    def _find(parent, x):
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            nxt = parent[x]
            parent[x] = root
            x = nxt
        return root

    @numba.njit(cache=True)
    def _union_pairs_numba(parent, src, dst):
        for e in range(src.shape[0]):
            a = _find(parent, src[e])
            b = _find(parent, dst[e])
            if a < b:
                parent[b] = a
            elif b < a:
                parent[a] = b
        # parent[x] <= x holds, so one increasing sweep flattens every chain
        for x in range(parent.shape[0]):
            parent[x] = parent[parent[x]]

    @numba.njit(cache=True)
    def _all_equal_numba(labels, src, dst):
        for e in range(src.shape[0]):
            if labels[src[e]] != labels[dst[e]]:
                return False
        return True


def union_pairs(parent, src, dst, use_numba=None):
    """Merge the blocks of ``src[e]`` and ``dst[e]`` for every edge, in place.

    On return ``parent`` is flat: ``parent[x]`` is the minimum of x's block.
    """
    if use_numba is None:
        use_numba = USE_NUMBA
    src = np.ascontiguousarray(src, dtype=np.int64)
    dst = np.ascontiguousarray(dst, dtype=np.int64)
    if use_numba and numba is not None:
        _union_pairs_numba(parent, src, dst)
    else:
        _union_pairs_numpy(parent, src, dst)
    return parent


def all_equal(labels, src, dst, use_numba=None):
    """True iff ``labels[src[e]] == labels[dst[e]]`` for every edge."""
    if use_numba is None:
        use_numba = USE_NUMBA
    if use_numba and numba is not None:
        return bool(_all_equal_numba(labels, np.ascontiguousarray(src, dtype=np.int64),
                                     np.ascontiguousarray(dst, dtype=np.int64)))
    return _all_equal_numpy(labels, src, dst)


def backend_name():
    return "numba" if (USE_NUMBA and numba is not None) else "numpy"
