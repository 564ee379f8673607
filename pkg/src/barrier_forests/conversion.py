"""Potential graph <-> barrier digraph translation and 1-D landscape ingestion."""
from __future__ import annotations

import math
from collections import deque
from typing import Mapping, Sequence

import numpy as np

from .graphs import INF, BarrierDigraph, PotentialGraph

RELATIVE_TOLERANCE = 1e-9


class GraphStructureError(ValueError):
    """Input graph lacks a structure an operation requires (connectivity, pairing)."""


class InconsistentBarrierError(GraphStructureError):
    """Barrier digraph not derivable from any potential graph."""


def potential_to_barrier(P: PotentialGraph) -> BarrierDigraph:
    """Arc ``(i, j)`` for each edge, weighted ``v_ij = p_ij - p_ii``."""
    return BarrierDigraph(P.weights - P.loops[:, None])


def shift_potential(P: PotentialGraph, d: float) -> PotentialGraph:
    return P.shifted(d)


def is_physical(P: PotentialGraph) -> bool:
    """True when every loop lies strictly below all its incident edges (all barriers positive)."""
    V = potential_to_barrier(P)
    w = V.weights[np.isfinite(V.weights)]
    return bool((w > 0).all())


def _close(x: float, y: float) -> bool:
    return abs(x - y) <= RELATIVE_TOLERANCE * max(1.0, abs(x), abs(y))


def recover_potential(
    V: BarrierDigraph,
    anchors: Mapping[int, float] | tuple[int, float] | None = None,
) -> PotentialGraph:
    """Rebuild a potential graph generating ``V``, unique up to a shift per component.

    Loops are propagated along a BFS tree using ``p_jj = p_ii + v_ij - v_ji``.
    ``anchors`` fixes one loop value per component (a single ``(vertex,
    value)`` pair is accepted); components without an anchor get their
    smallest vertex pinned at 0.

    Raises :class:`InconsistentBarrierError` when an arc lacks its reverse or
    a non-tree arc pair disagrees with the propagated loops.
    """
    if anchors is None:
        anchors = {0: 0.0} if V.n else {}
    elif isinstance(anchors, tuple):
        anchors = {anchors[0]: anchors[1]}
    w = V.weights
    present = np.isfinite(w)
    if not np.array_equal(present, present.T):
        i, j = np.argwhere(present != present.T)[0].tolist()
        if not present[i, j]:
            i, j = j, i
        raise InconsistentBarrierError(f"arc ({i},{j}) has no reverse arc ({j},{i})")

    n = V.n
    loops = np.full(n, np.nan)
    for a in anchors:
        if not 0 <= a < n:
            raise ValueError(f"anchor vertex {a} out of range")
    order = sorted(anchors) + list(range(n))
    for start in order:
        if not math.isnan(loops[start]):
            continue
        loops[start] = float(anchors.get(start, 0.0))
        comp = [start]
        queue = deque([start])
        while queue:
            i = queue.popleft()
            for j in np.nonzero(present[i])[0].tolist():
                if math.isnan(loops[j]):
                    loops[j] = loops[i] + w[i, j] - w[j, i]
                    comp.append(j)
                    queue.append(j)
        clashes = [a for a in anchors if a in comp and a != start]
        if clashes:
            raise GraphStructureError(
                f"anchors {start} and {clashes[0]} lie in the same component"
            )

    for i, j in np.argwhere(np.triu(present, 1)).tolist():
        if not _close(w[i, j] - w[j, i], loops[j] - loops[i]):
            raise InconsistentBarrierError(
                f"arc pair ({i},{j}) breaks v_ij - v_ji = p_jj - p_ii "
                f"({float(w[i, j] - w[j, i])!r} vs {float(loops[j] - loops[i])!r})"
            )

    p = np.full((n, n), INF)
    for i, j in np.argwhere(np.triu(present, 1)).tolist():
        p[i, j] = p[j, i] = w[i, j] + loops[i]
    return PotentialGraph(loops, p)


def ingest_potential_1d(
    x: Sequence[float], values: Sequence[float]
) -> tuple[PotentialGraph, list[float]]:
    """Path-shaped potential graph from a sampled 1-D potential.

    Vertices are the local minima of the samples (runs of equal values count
    once, represented by their leftmost sample; endpoints count when their
    single neighbour is higher). Loops are the minimum values; consecutive
    minima are joined by an edge weighted with the largest sample between
    them. Returns the graph and the x position of each minimum.
    """
    x = [float(t) for t in x]
    y = [float(t) for t in values]
    if len(x) != len(y):
        raise ValueError("x and values differ in length")
    if len(y) < 3:
        raise ValueError("need at least 3 samples")
    if any(b <= a for a, b in zip(x, x[1:])):
        raise ValueError("x must be strictly increasing")
    if not all(math.isfinite(t) for t in x + y):
        raise ValueError("samples must be finite")

    # runs of equal values: (value, first index)
    runs: list[tuple[float, int]] = []
    for idx, val in enumerate(y):
        if not runs or runs[-1][0] != val:
            runs.append((val, idx))
    minima = []
    for r, (val, idx) in enumerate(runs):
        left = runs[r - 1][0] if r > 0 else INF
        right = runs[r + 1][0] if r + 1 < len(runs) else INF
        if val < left and val < right:
            minima.append(idx)
    if not minima:
        raise ValueError("samples have no local minimum")

    loops = [y[i] for i in minima]
    edges = []
    for t, (i, j) in enumerate(zip(minima, minima[1:])):
        edges.append((t, t + 1, max(y[i:j + 1])))
    return PotentialGraph.from_edges(loops, edges), [x[i] for i in minima]
