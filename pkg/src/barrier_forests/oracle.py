"""Exhaustive reference minima for certifying the fast paths on small graphs.

Nothing here uses any structural shortcut: every quantity is the minimum of
an arc-weight sum over all explicitly enumerated forests or trees. The
enumeration assigns each vertex an outgoing-arc choice (or none) and prunes
choices that would close a contour.
"""
from __future__ import annotations

import itertools
import math
import os
from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

from . import _kernels
from .graphs import INF, BarrierDigraph, EnteringForest, PotentialGraph, vertex_set

ENV_MAX_N = "BARRIER_FORESTS_MAX_N"


class BudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class EnumerationBudget:
    max_n: int = 8
    max_count: int | None = None  # cap on complete assignments visited

    @classmethod
    def from_env(cls) -> "EnumerationBudget":
        raw = os.environ.get(ENV_MAX_N)
        return cls(max_n=int(raw)) if raw else cls()

    def check(self, n: int) -> None:
        if n > self.max_n:
            raise BudgetExceeded(f"{n} vertices exceed the enumeration budget of {self.max_n}")


DEFAULT_BUDGET = EnumerationBudget()


def _budget(budget: EnumerationBudget | None) -> EnumerationBudget:
    return EnumerationBudget.from_env() if budget is None else budget


def enumerate_entering_forests(
    V: BarrierDigraph, k: int | None = None, budget: EnumerationBudget | None = None
) -> Iterator[EnteringForest]:
    """Every spanning entering forest of ``V`` (with exactly ``k`` trees if given), once each."""
    budget = _budget(budget)
    budget.check(V.n)
    n = V.n
    if k is not None and not 0 <= k <= n:
        return
    options = [[-1] + [j for j in range(n) if math.isfinite(V.weights[i, j])] for i in range(n)]
    parent = [-2] * n
    count = 0

    def closes_contour(u: int, p: int) -> bool:
        w = p
        while w >= 0:
            if w == u:
                return True
            w = parent[w]
        return False

    def extend(d: int, roots: int) -> Iterator[EnteringForest]:
        nonlocal count
        if d == n:
            if k is None or roots == k:
                count += 1
                if budget.max_count is not None and count > budget.max_count:
                    raise BudgetExceeded(f"more than {budget.max_count} forests")
                yield EnteringForest(tuple(parent))
            return
        for p in options[d]:
            if p >= 0 and closes_contour(d, p):
                continue
            parent[d] = p
            yield from extend(d + 1, roots + (p < 0))
        parent[d] = -2

    yield from extend(0, 0)


@dataclass(frozen=True)
class Enumeration:
    best: np.ndarray  # minimum weight per bin
    parents: np.ndarray  # argmin parent array per bin (-2 outside the searched set)
    visited: int


def _search(
    V: BarrierDigraph,
    order: list[int],
    options: list[list[int]],
    mode: int,
    nbins: int,
    budget: EnumerationBudget,
) -> Enumeration:
    n = V.n
    budget.check(n)
    m = len(order)
    width = max((len(o) for o in options), default=1) or 1
    cand = np.full((max(m, 1), width), -1, dtype=np.int64)
    candw = np.zeros((max(m, 1), width))
    ncand = np.zeros(max(m, 1), dtype=np.int64)
    for d, (u, opts) in enumerate(zip(order, options)):
        ncand[d] = len(opts)
        for c, p in enumerate(opts):
            cand[d, c] = p
            candw[d, c] = 0.0 if p < 0 else V.weights[u, p]
    in_u = np.zeros(n, dtype=np.bool_)
    in_u[order] = True
    best = np.full(nbins, INF)
    parents = np.full((nbins, n), -2, dtype=np.int64)
    limit = -1 if budget.max_count is None else budget.max_count
    visited = _kernels.enumerate_min(
        n, np.array(order, dtype=np.int64), cand, candw, ncand, in_u, mode, nbins, best, parents, limit
    )
    if visited < 0:
        raise BudgetExceeded(f"more than {budget.max_count} assignments")
    return Enumeration(best, parents, int(visited))


def _arcs_from(V: BarrierDigraph, u: int, targets: Iterable[int]) -> list[int]:
    return [j for j in targets if j != u and math.isfinite(V.weights[u, j])]


def phi_table(V: BarrierDigraph, budget: EnumerationBudget | None = None) -> tuple[np.ndarray, list[EnteringForest | None]]:
    """``phi[k]`` for ``k = 0..N`` and one minimal forest per ``k`` (``None`` if none exists)."""
    n = V.n
    order = list(range(n))
    options = [[-1] + _arcs_from(V, u, range(n)) for u in order]
    res = _search(V, order, options, 0, n + 1, _budget(budget))
    forests = [
        EnteringForest(tuple(int(p) for p in res.parents[k])) if math.isfinite(res.best[k]) else None
        for k in range(n + 1)
    ]
    return res.best.copy(), forests


def phi_oracle(V: BarrierDigraph, k: int, budget: EnumerationBudget | None = None) -> float:
    if not 0 <= k <= V.n:
        return INF
    return float(phi_table(V, budget)[0][k])


def _tree_search(V: BarrierDigraph, S: tuple[int, ...], variant: str, budget: EnumerationBudget) -> np.ndarray:
    """Per-vertex minima over trees on ``S``: indexed by root (bullet) or escape vertex (circ)."""
    n = V.n
    inside = set(S)
    outside = [r for r in range(n) if r not in inside]
    if variant == "bullet":
        options = [[-1] + _arcs_from(V, u, S) for u in S]
    elif variant == "circ":
        options = [_arcs_from(V, u, S) + _arcs_from(V, u, outside) for u in S]
    else:
        raise ValueError(f"unknown tree variant {variant!r}")
    return _search(V, list(S), options, 2, n, budget).best


def lambda_oracle_by_vertex(
    V: BarrierDigraph, S: Iterable[int], variant: str = "bullet", budget: EnumerationBudget | None = None
) -> dict[int, float]:
    """Brute-force tree minima on ``S`` for every root ``q`` (``bullet``) or escape vertex ``q`` (``circ``)."""
    S = vertex_set(S, V.n)
    best = _tree_search(V, S, variant, _budget(budget))
    return {q: float(best[q]) for q in S}


def lambda_oracle(
    V: BarrierDigraph,
    S: Iterable[int],
    q: int | None = None,
    variant: str = "bullet",
    budget: EnumerationBudget | None = None,
) -> float:
    """Brute-force minimum entering-tree weight on ``S``.

    ``variant="bullet"``: trees spanning ``S`` rooted at ``q`` (any root if
    ``q`` is None). ``variant="circ"``: trees spanning ``S`` plus one arc
    leaving ``S``, from ``q`` if given.
    """
    S = vertex_set(S, V.n)
    if q is not None and q not in S:
        raise ValueError(f"vertex {q} not in {S}")
    if variant == "circ" and len(S) == V.n:
        return INF
    by_vertex = lambda_oracle_by_vertex(V, S, variant, budget)
    if q is not None:
        return by_vertex[q]
    return min(by_vertex.values())


def mu_oracle(
    V: BarrierDigraph,
    S: Iterable[int],
    variant: str = "circ",
    q: int | None = None,
    budget: EnumerationBudget | None = None,
) -> float:
    """Brute-force forest minima of the arc weight leaving vertices of ``S``.

    ``circ``: spanning forests in which every vertex of ``S`` has an outgoing
    arc. ``bullet``: exactly one root inside ``S`` (``q`` if given). Arcs
    from outside ``S`` never count, so those vertices are left as roots.
    """
    S = vertex_set(S, V.n)
    n = V.n
    budget = _budget(budget)
    everything = range(n)
    if variant == "circ":
        options = [_arcs_from(V, u, everything) for u in S]
        res = _search(V, list(S), options, 0, 1, budget)
        return float(res.best[0])
    if variant == "bullet":
        if q is not None:
            if q not in S:
                raise ValueError(f"vertex {q} not in {S}")
            options = [[-1] if u == q else _arcs_from(V, u, everything) for u in S]
        else:
            options = [[-1] + _arcs_from(V, u, everything) for u in S]
        res = _search(V, list(S), options, 0, 2, budget)
        return float(res.best[1])
    raise ValueError(f"unknown forest variant {variant!r}")


def nu_oracle(P: PotentialGraph, S: Iterable[int] | None = None, budget: EnumerationBudget | None = None) -> float:
    """Minimum undirected spanning tree weight on ``S`` by trying every edge subset of size ``|S|-1``."""
    budget = _budget(budget)
    budget.check(P.n)
    S = tuple(range(P.n)) if S is None else vertex_set(S, P.n)
    edges = [(i, j, P.weights[i, j]) for i, j in itertools.combinations(S, 2) if P.has_edge(i, j)]
    best = INF
    for subset in itertools.combinations(edges, len(S) - 1):
        if _spans(S, subset):
            best = min(best, float(sum(w for _, _, w in subset)))
    return best


def _spans(S: tuple[int, ...], edges) -> bool:
    adj: dict[int, list[int]] = {v: [] for v in S}
    for i, j, _ in edges:
        adj[i].append(j)
        adj[j].append(i)
    seen = {S[0]}
    stack = [S[0]]
    while stack:
        for w in adj[stack.pop()]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == len(S)
