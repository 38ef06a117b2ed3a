"""Depth-first Schnorr-Euchner enumeration cores.

The solver walks the levels of an upper-triangular system from the last
coordinate (root) to the first (leaf).  At every level the children are
visited in ascending order of their one-dimensional distance, so the first
leaf reached is the Babai point and each subsequent incumbent strictly
shrinks the search radius.  Once a child exceeds the radius, all of its
later siblings do too and the whole level can be abandoned.

Two twins of the same loop live here: a jitted one for the hot path and a
plain-Python one that additionally records the incumbent sequence.  Keep
them in sync; ``tests/test_mils.py`` cross-checks them.
"""

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a hard dep, but degrade gracefully
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(f):
            return f

        return wrap

# status codes returned by the cores
OK = 0
BUDGET_EXCEEDED = 1


def _sesd_loop(R, d, labels, node_cap):
    """Enumerate ``min ||d - R x||^2`` over ``labels^n`` for upper-triangular R.

    Returns (best_label_indices, best_partial_radius, nodes_visited, status).
    ``nodes_visited`` counts every candidate whose partial distance was
    evaluated against the radius.  Works for float64 and complex128 inputs
    alike; the distances are always real.
    """
    n = d.shape[0]
    nlab = labels.shape[0]

    order = np.empty((n, nlab), np.int64)  # per-level label order, ascending distance
    zsq = np.empty((n, nlab), np.float64)  # squared 1-D distances, sorted with order
    step = np.zeros(n, np.int64)  # next position in order[] to try per level
    xidx = np.zeros(n, np.int64)  # current label index per level
    best = np.full(n, -1, np.int64)
    rpart = np.zeros(n + 1, np.float64)  # rpart[m]: partial distance of levels m..n-1

    r_opt = np.inf
    nodes = 0
    status = OK
    m = n
    going_down = True

    while True:
        if going_down:
            m -= 1
            # residual target at this level given the fixed entries above
            xi = d[m]
            for j in range(m + 1, n):
                xi = xi - R[m, j] * labels[xidx[j]]
            rmm = R[m, m]
            # stable insertion sort: ties keep the lower label index first
            for lab in range(nlab):
                dv = xi - rmm * labels[lab]
                zz = abs(dv)
                zz = zz * zz
                pos = lab
                while pos > 0 and zsq[m, pos - 1] > zz:
                    zsq[m, pos] = zsq[m, pos - 1]
                    order[m, pos] = order[m, pos - 1]
                    pos -= 1
                zsq[m, pos] = zz
                order[m, pos] = lab
            step[m] = 0
        else:
            m += 1
            if m == n:
                break

        if step[m] >= nlab:
            going_down = False  # level exhausted, keep moving up
            continue

        s = step[m]
        step[m] = s + 1
        nodes += 1
        rm = zsq[m, s] + rpart[m + 1]
        if rm < r_opt:
            xidx[m] = order[m, s]
            rpart[m] = rm
            if m == 0:
                for j in range(n):
                    best[j] = xidx[j]
                r_opt = rm
                going_down = False
            else:
                going_down = True
        else:
            # children are sorted, so every remaining sibling fails as well
            going_down = False

        if nodes >= node_cap and best[0] >= 0:
            status = BUDGET_EXCEEDED
            break

    return best, r_opt, nodes, status


if HAVE_NUMBA:
    _sesd_loop_jit = njit(cache=True, nogil=True)(_sesd_loop)
else:  # pragma: no cover
    _sesd_loop_jit = _sesd_loop


def sesd_core(R, d, labels, node_cap):
    """Dispatch to the jitted loop (falls back to Python without numba)."""
    return _sesd_loop_jit(R, d, labels, node_cap)


def sesd_core_traced(R, d, labels, node_cap):
    """Same search, but also returns the incumbent (indices, radius) list.

    Diagnostic path, plain Python on purpose.
    """
    n = d.shape[0]
    nlab = labels.shape[0]
    order = np.empty((n, nlab), np.int64)
    zsq = np.empty((n, nlab), np.float64)
    step = np.zeros(n, np.int64)
    xidx = np.zeros(n, np.int64)
    best = np.full(n, -1, np.int64)
    rpart = np.zeros(n + 1, np.float64)
    trace = []

    r_opt = np.inf
    nodes = 0
    status = OK
    m = n
    going_down = True

    while True:
        if going_down:
            m -= 1
            xi = d[m]
            for j in range(m + 1, n):
                xi = xi - R[m, j] * labels[xidx[j]]
            rmm = R[m, m]
            for lab in range(nlab):
                dv = xi - rmm * labels[lab]
                zz = abs(dv)
                zz = zz * zz
                pos = lab
                while pos > 0 and zsq[m, pos - 1] > zz:
                    zsq[m, pos] = zsq[m, pos - 1]
                    order[m, pos] = order[m, pos - 1]
                    pos -= 1
                zsq[m, pos] = zz
                order[m, pos] = lab
            step[m] = 0
        else:
            m += 1
            if m == n:
                break

        if step[m] >= nlab:
            going_down = False
            continue

        s = step[m]
        step[m] = s + 1
        nodes += 1
        rm = zsq[m, s] + rpart[m + 1]
        if rm < r_opt:
            xidx[m] = order[m, s]
            rpart[m] = rm
            if m == 0:
                best[:] = xidx
                r_opt = rm
                trace.append((best.copy(), float(rm)))
                going_down = False
            else:
                going_down = True
        else:
            going_down = False

        if nodes >= node_cap and best[0] >= 0:
            status = BUDGET_EXCEEDED
            break

    return best, r_opt, nodes, status, trace


def warmup():
    """Trigger JIT compilation of both dtype specializations."""
    r = np.eye(2)
    sesd_core(r, np.zeros(2), np.array([-1.0, 1.0]), 1 << 20)
    sesd_core(
        r.astype(np.complex128),
        np.zeros(2, np.complex128),
        np.array([1.0 + 0j, -1.0 + 0j]),
        1 << 20,
    )
