"""Compiled inner loops: the root-contraction scan and exhaustive forest enumeration.

Contraction state layout (all arrays sized for the original ``n``, the live
part is the leading ``k`` slots):

* ``ids[s]``      original vertex id of the root held in slot ``s``
* ``loops[s]``    loop weight of that root
* ``P[s, t]``     cheapest original edge between the trees of slots ``s`` and ``t``
* ``V[s, t]``     ``P[s, t] - loops[s]``
* ``WA, WB``      endpoints of the edge attaining ``P[s, t]``: ``WA[s, t]`` in
                  the tree of ``s``, ``WB[s, t]`` in the tree of ``t``

Missing entries and the diagonal hold ``inf``.
"""
from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def select_min(V, ids, k):
    """Slots ``(sy, sx)`` of the smallest barrier; ties go to the smallest ``(ids[sy], ids[sx])``."""
    best = np.inf
    by = -1
    bx = -1
    iy = -1
    ix = -1
    for s in range(k):
        row = V[s]
        for t in range(k):
            v = row[t]
            if v < best:
                best = v
                by = s
                bx = t
                iy = ids[s]
                ix = ids[t]
            elif v == best and by >= 0:
                if ids[s] < iy or (ids[s] == iy and ids[t] < ix):
                    by = s
                    bx = t
                    iy = ids[s]
                    ix = ids[t]
    return by, bx, best


@njit(cache=True)
def _witness_less(a1, b1, a2, b2):
    lo1 = min(a1, b1)
    hi1 = max(a1, b1)
    lo2 = min(a2, b2)
    hi2 = max(a2, b2)
    return lo1 < lo2 or (lo1 == lo2 and hi1 < hi2)


@njit(cache=True)
def absorb(P, V, WA, WB, loops, ids, k, sy, sx):
    """Fold the tree in slot ``sy`` into slot ``sx``, then drop ``sy``. Returns the new ``k``."""
    for s in range(k):
        if s == sx or s == sy:
            continue
        py = P[s, sy]
        px = P[s, sx]
        take = py < px
        if py == px and py < np.inf:
            take = _witness_less(WA[s, sy], WB[s, sy], WA[s, sx], WB[s, sx])
        if take:
            P[s, sx] = py
            P[sx, s] = py
            WA[s, sx] = WA[s, sy]
            WB[s, sx] = WB[s, sy]
            WA[sx, s] = WA[sy, s]
            WB[sx, s] = WB[sy, s]
        V[s, sx] = P[s, sx] - loops[s]
        V[sx, s] = P[s, sx] - loops[sx]
    last = k - 1
    if sy != last:
        for t in range(k):
            P[sy, t] = P[last, t]
            V[sy, t] = V[last, t]
            WA[sy, t] = WA[last, t]
            WB[sy, t] = WB[last, t]
        for s in range(k):
            P[s, sy] = P[s, last]
            V[s, sy] = V[s, last]
            WA[s, sy] = WA[s, last]
            WB[s, sy] = WB[s, last]
        P[sy, sy] = np.inf
        V[sy, sy] = np.inf
        loops[sy] = loops[last]
        ids[sy] = ids[last]
    return last


@njit(cache=True)
def contract_all(P, V, WA, WB, loops, ids, k, out):
    """Run merges until one root is left or no barrier is finite.

    ``out[m] = (y, x, a, b)`` records merge ``m`` in original ids. Returns the
    number of merges.
    """
    m = 0
    while k > 1:
        sy, sx, best = select_min(V, ids, k)
        if best == np.inf:
            break
        out[m, 0] = ids[sy]
        out[m, 1] = ids[sx]
        out[m, 2] = WA[sy, sx]
        out[m, 3] = WB[sy, sx]
        m += 1
        k = absorb(P, V, WA, WB, loops, ids, k, sy, sx)
    return m


@njit(cache=True)
def enumerate_min(n, order, cand, candw, ncand, in_u, mode, nbins, best, best_parent, limit):
    """Exhaustive depth-first search over parent choices of the vertices in ``order``.

    ``cand[d, c]`` is the c-th parent option for vertex ``order[d]`` (``-1``
    = no arc) and ``candw[d, c]`` its weight. Parents outside the searched set
    (``in_u`` false) end a chain. A choice closing a contour is pruned.

    Each complete assignment is binned and the per-bin minimum kept:

    * mode 0: bin = number of ``-1`` choices
    * mode 1: bin = number of chain ends (``-1`` or a parent outside the set)
    * mode 2: bin = the unique chain-end vertex; assignments with several are skipped

    Returns the number of complete assignments visited, or ``-1`` once that
    exceeds ``limit`` (``limit < 0`` disables the cap).
    """
    m = order.shape[0]
    par = np.full(n, -2, dtype=np.int64)
    choice = np.full(m + 1, -1, dtype=np.int64)
    acc = np.zeros(m + 1)
    leaves = 0
    if m == 0:
        return 0
    d = 0
    while d >= 0:
        u = order[d]
        choice[d] += 1
        if choice[d] >= ncand[d]:
            choice[d] = -1
            par[u] = -2
            d -= 1
            continue
        p = cand[d, choice[d]]
        if p >= 0 and in_u[p]:
            w = p
            cyclic = False
            for _ in range(m):
                if w == u:
                    cyclic = True
                    break
                if not in_u[w]:
                    break
                nxt = par[w]
                if nxt < 0:
                    break
                w = nxt
            if cyclic:
                continue
        par[u] = p
        acc[d + 1] = acc[d] + candw[d, choice[d]]
        if d + 1 < m:
            d += 1
            continue
        leaves += 1
        if limit >= 0 and leaves > limit:
            return -1
        count = 0
        end = -1
        for t in range(m):
            v = order[t]
            pv = par[v]
            if mode == 0:
                if pv == -1:
                    count += 1
            else:
                if pv == -1 or not in_u[pv]:
                    count += 1
                    end = v
        if mode == 2:
            if count != 1:
                continue
            b = end
        else:
            b = count
        if b < nbins and acc[m] < best[b]:
            best[b] = acc[m]
            for t in range(n):
                best_parent[b, t] = par[t]
    return leaves
