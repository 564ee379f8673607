"""Closed-form tree minima on vertex subsets of a potential graph.

Everything here reduces to one greedy undirected spanning tree per subset:
the entering-tree minima only differ from the undirected minimum by loop
weights, so no directed-tree search is ever needed.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .conversion import GraphStructureError, potential_to_barrier
from .graphs import (
    INF,
    EnteringForest,
    PotentialGraph,
    UndirectedForest,
    complement,
    orient_tree,
    vertex_set,
)

# instrumentation: number of greedy spanning-tree computations performed
calls: Counter = Counter()


class UnionFind:
    def __init__(self, elements: Iterable[int]):
        self.parent = {e: e for e in elements}

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.parent[max(ra, rb)] = min(ra, rb)
        return True


def nu(P: PotentialGraph, S: Iterable[int] | None = None) -> tuple[float, UndirectedForest | None]:
    """Minimum undirected spanning tree of ``P`` restricted to ``S`` and its weight.

    Kruskal with edges ordered by ``(weight, i, j)``. Returns ``(inf, None)``
    when the restriction is disconnected.
    """
    calls["nu"] += 1
    S = tuple(range(P.n)) if S is None else vertex_set(S, P.n)
    if not S:
        raise ValueError("empty vertex set")
    idx = np.array(S)
    sub = P.weights[np.ix_(idx, idx)]
    ii, jj = np.nonzero(np.triu(np.isfinite(sub), 1))
    w = sub[ii, jj]
    order = np.lexsort((idx[jj], idx[ii], w))
    uf = UnionFind(S)
    chosen = []
    total = 0.0
    for t in order.tolist():
        a, b = S[ii[t]], S[jj[t]]
        if uf.union(a, b):
            chosen.append((a, b))
            total += float(w[t])
            if len(chosen) == len(S) - 1:
                break
    if len(chosen) != len(S) - 1:
        return INF, None
    return total, UndirectedForest(P.n, frozenset(chosen))


def lightest_vertex(P: PotentialGraph, S: Iterable[int]) -> int:
    """Vertex of ``S`` with the smallest loop weight; smallest id on ties."""
    S = vertex_set(S, P.n)
    return min(S, key=lambda t: (P.loops[t], t))


def _loop_sum(P: PotentialGraph, S: tuple[int, ...]) -> float:
    return float(sum(P.loops[t] for t in S))


def lambda_bullet(P: PotentialGraph, S: Iterable[int], q: int | None = None, *, nu_S: float | None = None) -> float:
    """Minimum weight of an entering tree spanning ``S`` rooted at ``q``.

    With ``q`` omitted the root is free, and the optimum sits at the lightest
    loop. ``nu_S`` lets callers reuse an already computed spanning-tree weight.
    """
    S = vertex_set(S, P.n)
    if q is None:
        q = lightest_vertex(P, S)
    elif q not in S:
        raise ValueError(f"root {q} not in {S}")
    if nu_S is None:
        nu_S = nu(P, S)[0]
    if nu_S == INF:
        return INF
    return nu_S - _loop_sum(P, S) + float(P.loops[q])


def boundary_edge(P: PotentialGraph, S: Iterable[int]) -> tuple[float, tuple[int, int] | None]:
    """Cheapest edge ``(a, b)`` with ``a`` in ``S`` and ``b`` outside; ties lexicographic."""
    S = vertex_set(S, P.n)
    out = complement(S, P.n)
    if not out:
        return INF, None
    block = P.weights[np.ix_(S, out)]
    best = block.min()
    if best == INF:
        return INF, None
    i, j = np.argwhere(block == best)[0].tolist()
    return float(best), (S[i], out[j])


def lambda_circ(P: PotentialGraph, S: Iterable[int]) -> tuple[float, tuple[int, int] | None]:
    """Minimum weight of a tree on ``S`` plus one arc leaving ``S``, with that arc.

    Equals the root-free entering-tree minimum on ``S``, minus the lightest
    loop, plus the cheapest boundary edge.
    """
    S = vertex_set(S, P.n)
    if len(S) == P.n:
        raise ValueError("S must be a proper subset of the vertices")
    p_ab, witness = boundary_edge(P, S)
    nu_S = nu(P, S)[0]
    if witness is None or nu_S == INF:
        return INF, None
    return nu_S - _loop_sum(P, S) + p_ab, witness


def lambda_circ_q(P: PotentialGraph, S: Iterable[int], q: int) -> float:
    """As :func:`lambda_circ` but the leaving arc must start at ``q``."""
    S = vertex_set(S, P.n)
    if q not in S:
        raise ValueError(f"vertex {q} not in {S}")
    if len(S) == P.n:
        raise ValueError("S must be a proper subset of the vertices")
    out = complement(S, P.n)
    escape = float(P.weights[q, list(out)].min()) - float(P.loops[q])
    if escape == INF:
        return INF
    return lambda_bullet(P, S, q) + escape


@dataclass(frozen=True)
class SubsetMinima:
    S: tuple[int, ...]
    nu: float
    lambda_bullet_q: dict
    lambda_bullet: float
    lambda_circ_q: dict
    lambda_circ: float
    root: int
    boundary_edge: tuple[int, int] | None


def subset_minima(P: PotentialGraph, S: Iterable[int]) -> SubsetMinima:
    """All tree minima of ``S`` from a single spanning-tree computation."""
    S = vertex_set(S, P.n)
    nu_S, _ = nu(P, S)
    loop_sum = _loop_sum(P, S)
    bullet_q = {q: (INF if nu_S == INF else nu_S - loop_sum + float(P.loops[q])) for q in S}
    y = lightest_vertex(P, S)
    out = complement(S, P.n)
    if out:
        circ_q = {}
        for q in S:
            escape = float(P.weights[q, list(out)].min()) - float(P.loops[q])
            circ_q[q] = bullet_q[q] + escape
        p_ab, witness = boundary_edge(P, S)
        circ = INF if witness is None or nu_S == INF else nu_S - loop_sum + p_ab
    else:
        circ_q = {q: INF for q in S}
        circ, witness = INF, None
    return SubsetMinima(S, nu_S, bullet_q, bullet_q[y], circ_q, circ, y, witness)


def escape_barrier(P: PotentialGraph, S: Iterable[int]) -> float:
    """Cheapest boundary edge of ``S`` minus its lightest loop (``inf`` if none)."""
    S = vertex_set(S, P.n)
    p_ab, _ = boundary_edge(P, S)
    if p_ab == INF:
        return INF
    return p_ab - float(P.loops[lightest_vertex(P, S)])


def descent_increment(P: PotentialGraph, F: EnteringForest) -> tuple[int, float]:
    """Tree of ``F`` cheapest to absorb into another, and the weight increase.

    For a minimal ``F`` with ``k`` trees the value is the gap between the
    best ``k-1`` and ``k`` tree forests. The root tie-break is the smallest id.
    Returns ``(y, inf)`` if no tree touches another.
    """
    if F.k < 2:
        raise ValueError("need at least two trees")
    best_y, best = -1, INF
    for r, verts in sorted(F.trees().items()):
        inc = escape_barrier(P, verts)
        if inc < best or best_y < 0:
            best_y, best = r, inc
    return best_y, best


def _descendant_root(F: EnteringForest, G: EnteringForest) -> int:
    """Root ``y`` of ``F`` such that ``G`` rebuilds only the tree of ``y`` into one escaping tree."""
    if F.n != G.n:
        raise ValueError("forests differ in size")
    lost = set(F.roots) - set(G.roots)
    if G.k != F.k - 1 or len(lost) != 1 or not set(G.roots) <= set(F.roots):
        raise ValueError("G is not a descendant-shaped forest of F")
    (y,) = lost
    S = set(F.trees()[y])
    for v in range(F.n):
        if v not in S and G.parent[v] != F.parent[v]:
            raise ValueError(f"G changes the arc leaving vertex {v} outside the absorbed tree")
    leaving = [v for v in S if G.parent[v] not in S]
    if len(leaving) != 1 or G.parent[leaving[0]] < 0:
        raise ValueError("exactly one arc must leave the absorbed tree")
    return y


def check_descent(P: PotentialGraph, F: EnteringForest, G: EnteringForest, tol: float = 1e-9) -> bool:
    """Decide whether descendant ``G`` of a minimal forest ``F`` is itself minimal.

    ``F`` is assumed minimal; that is not verified. Raises ``ValueError`` if
    ``G`` is not shaped as a descendant of ``F``.
    """
    y = _descendant_root(F, G)
    trees = F.trees()
    S = trees[y]
    V = potential_to_barrier(P)
    circ, _ = lambda_circ(P, S)
    if not math.isclose(G.weight(V, S), circ, rel_tol=0.0, abs_tol=tol):
        return False
    gaps = {r: escape_barrier(P, verts) for r, verts in trees.items()}
    return math.isclose(gaps[y], min(gaps.values()), rel_tol=0.0, abs_tol=tol)


def merged_lambda(lambda_x: float, lambda_circ_y: float) -> float:
    """Root-free tree minimum of the union after the tree of ``y`` is absorbed into that of ``x``."""
    return lambda_x + lambda_circ_y


@dataclass(frozen=True)
class RootedSpanningTree:
    tree: UndirectedForest
    nu: float
    root: int
    weight: float
    lambda_by_root: dict
    forest: EnteringForest


def min_spanning_entering_tree(P: PotentialGraph, root: int | None = None) -> RootedSpanningTree:
    """Minimum spanning entering tree, plus the optimum for every other root.

    A single greedy spanning tree serves all roots: re-rooting it at ``q``
    gives the best tree rooted at ``q``. The default root is the lightest loop.
    """
    value, tree = nu(P)
    if tree is None:
        raise GraphStructureError("potential graph is disconnected")
    loop_sum = float(P.loops.sum())
    by_root = {q: value - loop_sum + float(P.loops[q]) for q in range(P.n)}
    if root is None:
        root = lightest_vertex(P, range(P.n))
    elif not 0 <= root < P.n:
        raise ValueError(f"root {root} out of range")
    forest = orient_tree(tree, root)
    return RootedSpanningTree(tree, value, root, by_root[root], by_root, forest)
