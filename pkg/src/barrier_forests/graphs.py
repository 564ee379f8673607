"""Graph types: potential graphs, barrier digraphs, entering and undirected forests.

Vertices are dense integers ``0..n-1``. Both weighted graph types are stored as
dense ``n x n`` float matrices where ``inf`` marks a missing arc/edge; the
diagonal is always ``inf`` (loops of a potential graph live in a separate
vector).
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence, Union

import numpy as np

INF = math.inf

Arc = tuple[int, int]
Edge = tuple[int, int]


def vertex_set(S: Iterable[int], n: int) -> tuple[int, ...]:
    """Normalize a vertex collection to a sorted tuple, checking range and duplicates."""
    out = tuple(sorted(int(v) for v in S))
    if len(set(out)) != len(out):
        raise ValueError(f"duplicate vertices in {out}")
    if out and (out[0] < 0 or out[-1] >= n):
        raise ValueError(f"vertex set {out} out of range for n={n}")
    return out


def complement(S: Iterable[int], n: int) -> tuple[int, ...]:
    inside = set(S)
    return tuple(v for v in range(n) if v not in inside)


def _edge_key(i: int, j: int) -> Edge:
    return (i, j) if i < j else (j, i)


def _check_matrix(w: np.ndarray, name: str) -> np.ndarray:
    w = np.array(w, dtype=float)
    if w.ndim != 2 or w.shape[0] != w.shape[1]:
        raise ValueError(f"{name} must be a square matrix, got shape {w.shape}")
    np.fill_diagonal(w, INF)
    if np.isnan(w).any() or np.isneginf(w).any():
        raise ValueError(f"{name} weights must be finite or +inf (absent)")
    w.setflags(write=False)
    return w


@dataclass(frozen=True, eq=False)
class PotentialGraph:
    """Reflexive undirected graph: loop weight ``p_ii`` per vertex, edge weights ``p_ij``."""

    loops: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        loops = np.array(self.loops, dtype=float).reshape(-1)
        if not np.isfinite(loops).all():
            raise ValueError("every vertex needs a finite loop weight")
        loops.setflags(write=False)
        w = _check_matrix(self.weights, "edge")
        if w.shape[0] != loops.shape[0]:
            raise ValueError("loop vector and edge matrix disagree on n")
        if not np.array_equal(w, w.T):
            raise ValueError("potential edge weights must be symmetric")
        object.__setattr__(self, "loops", loops)
        object.__setattr__(self, "weights", w)

    @classmethod
    def from_edges(
        cls,
        loops: Sequence[float],
        edges: Union[Mapping[Edge, float], Iterable[tuple[int, int, float]]],
    ) -> "PotentialGraph":
        n = len(loops)
        w = np.full((n, n), INF)
        items = edges.items() if isinstance(edges, Mapping) else (((i, j), p) for i, j, p in edges)
        for (i, j), p in items:
            if i == j:
                raise ValueError(f"edge ({i},{j}) is a loop; pass loops separately")
            if not (0 <= i < n and 0 <= j < n):
                raise ValueError(f"edge ({i},{j}) out of range for n={n}")
            if not math.isfinite(p):
                raise ValueError(f"edge ({i},{j}) has non-finite weight {p}")
            if w[i, j] != INF:
                raise ValueError(f"edge ({i},{j}) given twice")
            w[i, j] = w[j, i] = p
        return cls(loops, w)

    @property
    def n(self) -> int:
        return self.loops.shape[0]

    def edges(self) -> Iterator[tuple[int, int, float]]:
        """Edges ``(i, j, p_ij)`` with ``i < j`` in lexicographic order."""
        ii, jj = np.nonzero(np.triu(np.isfinite(self.weights), 1))
        for i, j in zip(ii.tolist(), jj.tolist()):
            yield i, j, float(self.weights[i, j])

    def has_edge(self, i: int, j: int) -> bool:
        return i != j and math.isfinite(self.weights[i, j])

    def shifted(self, d: float) -> "PotentialGraph":
        return PotentialGraph(self.loops + d, self.weights + d)

    def is_connected(self, S: Iterable[int] | None = None) -> bool:
        return len(_components(np.isfinite(self.weights), S)) <= 1

    def components(self) -> list[tuple[int, ...]]:
        return _components(np.isfinite(self.weights), None)


@dataclass(frozen=True, eq=False)
class BarrierDigraph:
    """Loop-free weighted digraph; ``weights[i, j] = v_ij`` or ``inf`` if no arc."""

    weights: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "weights", _check_matrix(self.weights, "arc"))

    @classmethod
    def from_arcs(
        cls,
        n: int,
        arcs: Union[Mapping[Arc, float], Iterable[tuple[int, int, float]]],
    ) -> "BarrierDigraph":
        w = np.full((n, n), INF)
        items = arcs.items() if isinstance(arcs, Mapping) else (((i, j), v) for i, j, v in arcs)
        for (i, j), v in items:
            if i == j:
                raise ValueError(f"arc ({i},{j}) is a loop")
            if not (0 <= i < n and 0 <= j < n):
                raise ValueError(f"arc ({i},{j}) out of range for n={n}")
            if not math.isfinite(v):
                raise ValueError(f"arc ({i},{j}) has non-finite weight {v}")
            if w[i, j] != INF:
                raise ValueError(f"arc ({i},{j}) given twice")
            w[i, j] = v
        return cls(w)

    @property
    def n(self) -> int:
        return self.weights.shape[0]

    def arcs(self) -> Iterator[tuple[int, int, float]]:
        ii, jj = np.nonzero(np.isfinite(self.weights))
        for i, j in zip(ii.tolist(), jj.tolist()):
            yield i, j, float(self.weights[i, j])

    @property
    def paired(self) -> bool:
        """True when every arc ``(i, j)`` has its reverse ``(j, i)``."""
        present = np.isfinite(self.weights)
        return bool(np.array_equal(present, present.T))

    def is_connected(self) -> bool:
        present = np.isfinite(self.weights)
        return len(_components(present | present.T, None)) <= 1


def _components(adjacent: np.ndarray, S: Iterable[int] | None) -> list[tuple[int, ...]]:
    n = adjacent.shape[0]
    verts = list(range(n)) if S is None else list(vertex_set(S, n))
    allowed = np.zeros(n, dtype=bool)
    allowed[verts] = True
    seen = np.zeros(n, dtype=bool)
    comps = []
    for s in verts:
        if seen[s]:
            continue
        seen[s] = True
        comp, queue = [s], deque([s])
        while queue:
            u = queue.popleft()
            for w in np.nonzero(adjacent[u] & allowed & ~seen)[0].tolist():
                seen[w] = True
                comp.append(w)
                queue.append(w)
        comps.append(tuple(sorted(comp)))
    return comps


@dataclass(frozen=True)
class EnteringForest:
    """Spanning entering forest stored as a parent array (``-1`` marks a root).

    Every vertex has at most one outgoing arc ``(i, parent[i])``; following
    parents from any vertex must end at a root.
    """

    parent: tuple[int, ...]
    root_of: tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        parent = tuple(int(p) for p in self.parent)
        object.__setattr__(self, "parent", parent)
        n = len(parent)
        for i, p in enumerate(parent):
            if p == i or not (-1 <= p < n):
                raise ValueError(f"invalid parent {p} for vertex {i}")
        root_of = [-2] * n
        for start in range(n):
            path = []
            v = start
            while root_of[v] == -2:
                root_of[v] = -3  # on the current path
                path.append(v)
                if parent[v] == -1:
                    root_of[v] = v
                    break
                v = parent[v]
            if root_of[v] == -3:
                raise ValueError(f"contour through vertex {v}")
            r = root_of[v]
            for u in path:
                root_of[u] = r
        object.__setattr__(self, "root_of", tuple(root_of))

    @classmethod
    def from_arcs(cls, n: int, arcs: Iterable[Arc]) -> "EnteringForest":
        parent = [-1] * n
        for i, j in arcs:
            if parent[i] != -1:
                raise ValueError(f"two arcs leave vertex {i}")
            parent[i] = j
        return cls(tuple(parent))

    @classmethod
    def empty(cls, n: int) -> "EnteringForest":
        return cls((-1,) * n)

    @property
    def n(self) -> int:
        return len(self.parent)

    @property
    def arcs(self) -> tuple[Arc, ...]:
        return tuple((i, p) for i, p in enumerate(self.parent) if p >= 0)

    @property
    def roots(self) -> tuple[int, ...]:
        return tuple(i for i, p in enumerate(self.parent) if p < 0)

    @property
    def k(self) -> int:
        """Number of trees."""
        return sum(1 for p in self.parent if p < 0)

    def trees(self) -> dict[int, tuple[int, ...]]:
        """Map each root to the sorted vertex set of its tree."""
        out: dict[int, list[int]] = {r: [] for r in self.roots}
        for v, r in enumerate(self.root_of):
            out[r].append(v)
        return {r: tuple(vs) for r, vs in out.items()}

    def weight(self, V: BarrierDigraph, S: Iterable[int] | None = None) -> float:
        return weight_on_set(V, self, S)


def is_entering_forest(parent: Sequence[int]) -> bool:
    try:
        EnteringForest(tuple(parent))
    except ValueError:
        return False
    return True


@dataclass(frozen=True)
class UndirectedForest:
    n: int
    edges: frozenset

    def __post_init__(self):
        edges = frozenset(_edge_key(int(i), int(j)) for i, j in self.edges)
        object.__setattr__(self, "edges", edges)
        parent = list(range(self.n))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for i, j in edges:
            if i == j or not (0 <= i < self.n and 0 <= j < self.n):
                raise ValueError(f"invalid edge ({i},{j})")
            ri, rj = find(i), find(j)
            if ri == rj:
                raise ValueError(f"edge ({i},{j}) closes a cycle")
            parent[ri] = rj

    def components(self) -> list[tuple[int, ...]]:
        adj = np.zeros((self.n, self.n), dtype=bool)
        for i, j in self.edges:
            adj[i, j] = adj[j, i] = True
        return _components(adj, None)

    def weight(self, P: PotentialGraph, S: Iterable[int] | None = None) -> float:
        return weight_undirected(P, self.edges, S)


# -- weights -----------------------------------------------------------------


def _arcs_of(G) -> Iterable[Arc]:
    if isinstance(G, EnteringForest):
        return G.arcs
    if isinstance(G, BarrierDigraph):
        return [(i, j) for i, j, _ in G.arcs()]
    return G


def weight_on_set(V: BarrierDigraph, G, S: Iterable[int] | None = None) -> float:
    """Sum of ``v_ij`` over arcs of ``G`` whose tail lies in ``S`` (all arcs if ``S`` is None).

    The head may lie outside ``S``.
    """
    tails = None if S is None else set(S)
    total = 0.0
    for i, j in _arcs_of(G):
        if tails is not None and i not in tails:
            continue
        v = V.weights[i, j]
        if not math.isfinite(v):
            raise ValueError(f"arc ({i},{j}) is not an arc of the barrier digraph")
        total += v
    return total


def weight_undirected(
    P: PotentialGraph,
    edges: Iterable[Edge],
    S: Iterable[int] | None = None,
    include_loops: bool = False,
) -> float:
    """Sum of ``p_ij`` over edges with both ends in ``S``.

    With ``include_loops`` the loop weights of the vertices of ``S`` are added.
    """
    inside = None if S is None else set(S)
    total = 0.0
    for i, j in edges:
        if inside is not None and (i not in inside or j not in inside):
            continue
        p = P.weights[i, j]
        if not math.isfinite(p):
            raise ValueError(f"edge ({i},{j}) is not an edge of the potential graph")
        total += p
    if include_loops:
        verts = range(P.n) if inside is None else inside
        total += sum(float(P.loops[v]) for v in verts)
    return total


# -- structural operations ---------------------------------------------------


def induced_subgraph(G, S: Iterable[int]):
    """Restriction of ``G`` to ``S``, relabelled so that new vertex ``t`` is ``sorted(S)[t]``."""
    n = G.n
    verts = list(vertex_set(S, n))
    index = {v: t for t, v in enumerate(verts)}
    if isinstance(G, PotentialGraph):
        return PotentialGraph(G.loops[verts], G.weights[np.ix_(verts, verts)])
    if isinstance(G, BarrierDigraph):
        return BarrierDigraph(G.weights[np.ix_(verts, verts)])
    if isinstance(G, EnteringForest):
        return EnteringForest(
            tuple(index.get(G.parent[v], -1) for v in verts)
        )
    if isinstance(G, UndirectedForest):
        return UndirectedForest(
            len(verts),
            frozenset((index[i], index[j]) for i, j in G.edges if i in index and j in index),
        )
    raise TypeError(f"unsupported graph type {type(G).__name__}")


def out_neighborhood(G, S: Iterable[int]) -> frozenset:
    """Heads of arcs that leave ``S``."""
    inside = set(S)
    return frozenset(j for i, j in _arcs_of(G) if i in inside and j not in inside)


def in_neighborhood(G, S: Iterable[int]) -> frozenset:
    """Tails of arcs that enter ``S``."""
    inside = set(S)
    return frozenset(i for i, j in _arcs_of(G) if j in inside and i not in inside)


def replace_arcs(
    F: EnteringForest,
    G: EnteringForest,
    D: Iterable[int],
    g_vertices: Iterable[int] | None = None,
) -> tuple[int, ...]:
    """Parent array of ``F`` with the arcs leaving ``D`` taken from ``G`` instead.

    ``G`` is indexed like ``F``; ``g_vertices`` optionally names its vertex set
    when it is a proper subset. The result is a raw parent array because it
    need not be a forest; wrap it in :class:`EnteringForest` to validate.
    """
    if G.n != F.n:
        raise ValueError("forests must share the vertex indexing")
    D = vertex_set(D, F.n)
    if g_vertices is not None and not set(D) <= set(g_vertices):
        raise ValueError("D must be a subset of the vertex set of G")
    parent = list(F.parent)
    for v in D:
        parent[v] = G.parent[v]
    return tuple(parent)


def orient_tree(
    tree: Union[UndirectedForest, Iterable[Edge]],
    root: int,
    n: int | None = None,
    vertices: Iterable[int] | None = None,
) -> EnteringForest:
    """Direct the tree containing ``root`` towards ``root``.

    Vertices outside that tree become isolated roots. When ``vertices`` is
    given the tree must span exactly that set.
    """
    if isinstance(tree, UndirectedForest):
        n = tree.n if n is None else n
        forest = tree
    else:
        if n is None:
            raise ValueError("n is required when passing a bare edge list")
        forest = UndirectedForest(n, frozenset(tree))
    adj: dict[int, list[int]] = {}
    for i, j in sorted(forest.edges):
        adj.setdefault(i, []).append(j)
        adj.setdefault(j, []).append(i)
    parent = [-1] * n
    seen = {root}
    queue = deque([root])
    while queue:
        u = queue.popleft()
        for w in adj.get(u, ()):
            if w not in seen:
                seen.add(w)
                parent[w] = u
                queue.append(w)
    if vertices is not None:
        S = set(vertex_set(vertices, n))
        if root not in S:
            raise ValueError(f"root {root} not in the vertex set")
        if seen != S:
            raise ValueError("tree does not span the given vertex set")
        stray = [e for e in forest.edges if e[0] not in S or e[1] not in S]
        if stray:
            raise ValueError(f"edges {stray} leave the vertex set")
    return EnteringForest(tuple(parent))


def unorient(F: EnteringForest, P: PotentialGraph | None = None) -> UndirectedForest:
    """Forget arc directions; with ``P`` given, every arc must be an edge of ``P``."""
    if P is not None:
        for i, j in F.arcs:
            if not P.has_edge(i, j):
                raise ValueError(f"arc ({i},{j}) has no edge in the potential graph")
    return UndirectedForest(F.n, frozenset(F.arcs))


def reverse_arcs(V: BarrierDigraph) -> BarrierDigraph:
    return BarrierDigraph(V.weights.T.copy())
