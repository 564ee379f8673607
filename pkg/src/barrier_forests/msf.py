"""Hierarchy of minimum spanning entering forests by root contraction.

Starting from the empty forest (every vertex a root), each step merges the
pair of trees joined by the smallest inter-tree barrier

    v[l, i] = min{p_qr : q in tree l, r in tree i} - p_ll

The absorbed tree ``y`` is re-rooted at the tail ``a`` of the witness edge
``(a, b)`` and hung onto tree ``x``; the forest weight grows by
``p_ab - p_yy``. Only rows and columns of ``x`` change, so a step costs one
``k x k`` scan plus ``O(k)`` updates, ``O(N^3)`` over the whole run.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .graphs import INF, EnteringForest, PotentialGraph


class ExhaustedError(RuntimeError):
    """No finite barrier is left: the remaining trees lie in different components."""


@dataclass(frozen=True)
class MergeEvent:
    k: int  # number of trees before the merge
    y: int  # absorbed root
    x: int  # surviving root
    a: int  # witness edge tail, inside the tree of y
    b: int  # witness edge head, inside the tree of x
    height: float  # p_ab
    increment: float  # p_ab - p_yy
    phi: float  # forest weight after the merge


@dataclass
class ContractionState:
    potential: PotentialGraph
    k: int
    ids: np.ndarray
    loops: np.ndarray
    P: np.ndarray
    V: np.ndarray
    WA: np.ndarray
    WB: np.ndarray
    edges: dict = field(default_factory=dict)  # root -> list of tree edges
    total_weight: float = 0.0
    events: list = field(default_factory=list)

    @property
    def roots(self) -> tuple[int, ...]:
        return tuple(sorted(self.ids[: self.k].tolist()))

    def barrier_matrix(self) -> tuple[list[int], np.ndarray]:
        """Current barriers as a matrix indexed by the sorted root ids."""
        order = np.argsort(self.ids[: self.k])
        return self.ids[order].tolist(), self.V[np.ix_(order, order)].copy()

    def potential_matrix(self) -> tuple[list[int], np.ndarray, np.ndarray]:
        order = np.argsort(self.ids[: self.k])
        return (
            self.ids[order].tolist(),
            self.P[np.ix_(order, order)].copy(),
            self.loops[order].copy(),
        )

    def witness(self, l: int, i: int) -> tuple[int, int] | None:
        """Original edge ``(q, r)`` realising the cheapest link from tree ``l`` to tree ``i``."""
        slot = {r: s for s, r in enumerate(self.ids[: self.k].tolist())}
        s, t = slot[l], slot[i]
        if not math.isfinite(self.P[s, t]):
            return None
        return int(self.WA[s, t]), int(self.WB[s, t])


def init(P: PotentialGraph) -> ContractionState:
    n = P.n
    if n < 1:
        raise ValueError("potential graph has no vertices")
    W = np.array(P.weights, dtype=np.float64)
    V = W - P.loops[:, None]
    np.fill_diagonal(V, INF)
    ar = np.arange(n, dtype=np.int64)
    WA = np.repeat(ar[:, None], n, axis=1)
    WB = np.repeat(ar[None, :], n, axis=0)
    return ContractionState(
        potential=P,
        k=n,
        ids=ar.copy(),
        loops=np.array(P.loops, dtype=np.float64),
        P=W,
        V=np.ascontiguousarray(V),
        WA=np.ascontiguousarray(WA),
        WB=np.ascontiguousarray(WB),
        edges={v: [] for v in range(n)},
    )


def _record(state: ContractionState, y: int, x: int, a: int, b: int) -> MergeEvent:
    p = state.potential
    height = float(p.weights[a, b])
    increment = height - float(p.loops[y])
    state.total_weight += increment
    merged = state.edges.pop(y)
    state.edges[x].extend(merged)
    state.edges[x].append((a, b))
    event = MergeEvent(state.k, y, x, a, b, height, increment, state.total_weight)
    state.events.append(event)
    return event


def step(state: ContractionState) -> MergeEvent:
    """Perform one merge, mutating ``state``; raises :class:`ExhaustedError` if impossible."""
    if state.k < 2:
        raise ValueError("a single tree is left")
    sy, sx, best = _kernels.select_min(state.V, state.ids, state.k)
    if best == INF:
        raise ExhaustedError(f"no finite barrier among {state.k} trees")
    y, x = int(state.ids[sy]), int(state.ids[sx])
    a, b = int(state.WA[sy, sx]), int(state.WB[sy, sx])
    event = _record(state, y, x, a, b)
    state.k = int(
        _kernels.absorb(state.P, state.V, state.WA, state.WB, state.loops, state.ids, state.k, sy, sx)
    )
    return event


@dataclass(frozen=True)
class Dendrogram:
    n: int
    events: tuple[MergeEvent, ...]
    potential: PotentialGraph = field(repr=False, compare=False)

    @property
    def k_min(self) -> int:
        return self.n - len(self.events)

    @property
    def complete(self) -> bool:
        return self.k_min <= 1

    def phi(self, k: int) -> float:
        """Weight of the minimal ``k``-tree forest; ``inf`` when none exists."""
        if k > self.n or k < 1:
            return INF
        if k < self.k_min:
            return INF
        if k == self.n:
            return 0.0
        return self.events[self.n - k - 1].phi

    def phi_sequence(self) -> list[float]:
        """``[phi^N, phi^(N-1), ..., phi^(k_min)]``."""
        return [self.phi(k) for k in range(self.n, self.k_min - 1, -1)]

    def roots_at(self, k: int) -> tuple[int, ...]:
        self._check_level(k)
        absorbed = {e.y for e in self.events[: self.n - k]}
        return tuple(v for v in range(self.n) if v not in absorbed)

    def edges_at(self, k: int) -> frozenset:
        self._check_level(k)
        return frozenset(
            (min(e.a, e.b), max(e.a, e.b)) for e in self.events[: self.n - k]
        )

    def forest_at(self, k: int) -> EnteringForest:
        """Replay the first ``N - k`` merges and orient each tree towards its root."""
        self._check_level(k)
        adj: dict[int, list[int]] = {}
        for i, j in sorted(self.edges_at(k)):
            adj.setdefault(i, []).append(j)
            adj.setdefault(j, []).append(i)
        parent = [-1] * self.n
        for r in self.roots_at(k):
            seen = {r}
            queue = deque([r])
            while queue:
                u = queue.popleft()
                for w in adj.get(u, ()):
                    if w not in seen:
                        seen.add(w)
                        parent[w] = u
                        queue.append(w)
        return EnteringForest(tuple(parent))

    def _check_level(self, k: int) -> None:
        if not self.k_min <= k <= self.n:
            raise ValueError(f"level {k} outside the produced range [{self.k_min}, {self.n}]")


def run(P: PotentialGraph) -> Dendrogram:
    """Full hierarchy from ``N`` trees down to one (or to the number of components)."""
    state = init(P)
    out = np.zeros((max(P.n - 1, 0), 4), dtype=np.int64)
    m = _kernels.contract_all(state.P, state.V, state.WA, state.WB, state.loops, state.ids, state.k, out)
    k = P.n
    for y, x, a, b in out[:m].tolist():
        state.k = k
        _record(state, y, x, a, b)
        k -= 1
    return Dendrogram(P.n, tuple(state.events), P)


def run_stepwise(P: PotentialGraph) -> Dendrogram:
    """Same as :func:`run` but one :func:`step` at a time."""
    state = init(P)
    while state.k > 1:
        try:
            step(state)
        except ExhaustedError:
            break
    return Dendrogram(P.n, tuple(state.events), P)
