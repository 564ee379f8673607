"""Invariant battery: closed-form minima and the contraction hierarchy against brute force.

Each ``check_*`` function returns a list of human-readable violations; an
empty list means the invariant holds on the instance.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Iterable

import numpy as np

from . import minima, msf, oracle
from .conversion import InconsistentBarrierError, potential_to_barrier, recover_potential
from .graphs import (
    BarrierDigraph,
    EnteringForest,
    PotentialGraph,
    in_neighborhood,
    is_entering_forest,
    orient_tree,
    out_neighborhood,
    replace_arcs,
    unorient,
)

TOL = 1e-9
SHIFTS = (-5.0, 3.7)


def same(a: float, b: float, tol: float = TOL) -> bool:
    if math.isinf(a) or math.isinf(b):
        return a == b
    return abs(a - b) <= tol


def all_subsets(n: int) -> list[tuple[int, ...]]:
    return [S for r in range(1, n + 1) for S in itertools.combinations(range(n), r)]


class Instance:
    """A potential graph with lazily computed hierarchy and brute-force tables."""

    def __init__(self, P: PotentialGraph, budget: oracle.EnumerationBudget | None = None):
        self.P = P
        self.budget = budget

    @cached_property
    def V(self) -> BarrierDigraph:
        return potential_to_barrier(self.P)

    @cached_property
    def dendrogram(self) -> msf.Dendrogram:
        return msf.run(self.P)

    @cached_property
    def _phi(self):
        return oracle.phi_table(self.V, self.budget)

    @property
    def phi(self) -> np.ndarray:
        return self._phi[0]

    @property
    def minimal_forests(self) -> list[EnteringForest | None]:
        return self._phi[1]

    def levels(self) -> range:
        d = self.dendrogram
        return range(d.n, d.k_min - 1, -1)


def check_phi_equivalence(inst: Instance) -> list[str]:
    bad = []
    d = inst.dendrogram
    for k in range(1, inst.P.n + 1):
        expected = float(inst.phi[k])
        if k < d.k_min:
            if not math.isinf(expected):
                bad.append(f"k={k}: hierarchy stopped early but a {k}-tree forest exists ({expected})")
            continue
        got = d.forest_at(k).weight(inst.V)
        if not same(got, expected) or not same(d.phi(k), expected):
            bad.append(f"k={k}: forest weight {got!r}, recorded {d.phi(k)!r}, brute force {expected!r}")
    return bad


def check_phi_boundary(inst: Instance) -> list[str]:
    n = inst.P.n
    bad = []
    if inst.phi[n] != 0.0:
        bad.append(f"phi^N = {inst.phi[n]!r}")
    if n >= 2:
        finite = inst.V.weights[np.isfinite(inst.V.weights)]
        lightest = float(finite.min()) if finite.size else math.inf
        if not same(float(inst.phi[n - 1]), lightest):
            bad.append(f"phi^(N-1) = {inst.phi[n - 1]!r}, lightest arc {lightest!r}")
    return bad


def check_rooted_tree_formula(inst: Instance, subsets: Iterable[tuple[int, ...]]) -> list[str]:
    bad = []
    for S in subsets:
        brute = oracle.lambda_oracle_by_vertex(inst.V, S, "bullet", inst.budget)
        nu_S = minima.nu(inst.P, S)[0]
        for q in S:
            fast = minima.lambda_bullet(inst.P, S, q, nu_S=nu_S)
            if not same(fast, brute[q]):
                bad.append(f"S={S} q={q}: formula {fast!r}, brute force {brute[q]!r}")
        free = minima.lambda_bullet(inst.P, S, nu_S=nu_S)
        if not same(free, min(brute.values())):
            bad.append(f"S={S}: root-free formula {free!r}, brute force {min(brute.values())!r}")
    return bad


def check_escape_tree_formula(inst: Instance, subsets: Iterable[tuple[int, ...]]) -> list[str]:
    bad = []
    n = inst.P.n
    for S in subsets:
        if len(S) == n:
            continue
        brute = oracle.lambda_oracle_by_vertex(inst.V, S, "circ", inst.budget)
        mins = minima.subset_minima(inst.P, S)
        for q in S:
            if not same(mins.lambda_circ_q[q], brute[q]):
                bad.append(f"S={S} q={q}: per-vertex formula {mins.lambda_circ_q[q]!r}, brute force {brute[q]!r}")
        best = min(brute.values())
        if not same(mins.lambda_circ, best):
            bad.append(f"S={S}: formula {mins.lambda_circ!r}, brute force {best!r}")
        if not same(min(mins.lambda_circ_q.values()), mins.lambda_circ):
            bad.append(f"S={S}: per-vertex minimum disagrees with the direct formula")
        if mins.boundary_edge is not None and math.isfinite(mins.nu):
            a, b = mins.boundary_edge
            via_a = mins.lambda_bullet_q[a] + float(inst.V.weights[a, b])
            if not same(via_a, mins.lambda_circ):
                bad.append(f"S={S}: rooting at the boundary tail gives {via_a!r}, expected {mins.lambda_circ!r}")
            gap = minima.escape_barrier(inst.P, S)
            if not same(mins.lambda_circ - mins.lambda_bullet, gap):
                bad.append(f"S={S}: escape gap {mins.lambda_circ - mins.lambda_bullet!r} vs barrier {gap!r}")
    return bad


def check_reroot_constancy(inst: Instance, subsets: Iterable[tuple[int, ...]]) -> list[str]:
    """Re-rooting a fixed spanning tree shifts its weight by loop differences only,
    and re-rooting a minimal one always yields an optimal entering tree."""
    bad = []
    for S in subsets:
        value, tree = minima.nu(inst.P, S)
        if tree is None:
            continue
        brute = oracle.lambda_oracle_by_vertex(inst.V, S, "bullet", inst.budget)
        offsets = []
        for q in S:
            w = orient_tree(tree, q, vertices=S).weight(inst.V)
            offsets.append(w - float(inst.P.loops[q]))
            if not same(w, brute[q]):
                bad.append(f"S={S} q={q}: re-rooted tree weighs {w!r}, optimum {brute[q]!r}")
        if max(offsets) - min(offsets) > TOL:
            bad.append(f"S={S}: weight minus root loop varies over roots ({min(offsets)!r}..{max(offsets)!r})")
    return bad


def check_increment_identity(inst: Instance) -> list[str]:
    bad = []
    d = inst.dendrogram
    for e in d.events:
        F = d.forest_at(e.k)
        y, value = minima.descent_increment(inst.P, F)
        if not same(value, e.increment):
            bad.append(f"k={e.k}: merge increment {e.increment!r}, cheapest escape {value!r}")
        brute = float(inst.phi[e.k - 1] - inst.phi[e.k])
        if not same(e.increment, brute):
            bad.append(f"k={e.k}: merge increment {e.increment!r}, brute-force gap {brute!r}")
    return bad


def check_descent_criterion(inst: Instance) -> list[str]:
    bad = []
    d = inst.dendrogram
    for e in d.events:
        F, G = d.forest_at(e.k), d.forest_at(e.k - 1)
        if not minima.check_descent(inst.P, F, G):
            bad.append(f"k={e.k}: minimal descendant rejected by the descent criterion")
    return bad


def check_merge_recalculation(inst: Instance) -> list[str]:
    bad = []
    d = inst.dendrogram
    for e in d.events:
        trees = d.forest_at(e.k).trees()
        tx, ty = trees[e.x], trees[e.y]
        union = tuple(sorted(tx + ty))
        predicted = minima.merged_lambda(
            minima.lambda_bullet(inst.P, tx), minima.lambda_circ(inst.P, ty)[0]
        )
        brute = oracle.lambda_oracle(inst.V, union, budget=inst.budget)
        if not same(predicted, brute):
            bad.append(f"k={e.k}: merged tree minimum predicted {predicted!r}, brute force {brute!r}")
    return bad


def _minimal_forest_sets(inst: Instance) -> list[tuple[int, EnteringForest]]:
    out = []
    d = inst.dendrogram
    for k, F in enumerate(inst.minimal_forests):
        if F is not None and k >= 1:
            out.append((k, F))
    for k in inst.levels():
        out.append((k, d.forest_at(k)))
    return out


def check_forest_minima_on_minimal_trees(inst: Instance) -> list[str]:
    """On tree vertex sets of minimal forests, forest-like and tree-like minima agree."""
    bad = []
    n = inst.P.n
    for k, F in _minimal_forest_sets(inst):
        for l, S in F.trees().items():
            own = F.weight(inst.V, S)
            mu_b = oracle.mu_oracle(inst.V, S, "bullet", budget=inst.budget)
            mu_bl = oracle.mu_oracle(inst.V, S, "bullet", q=l, budget=inst.budget)
            lam_b = minima.lambda_bullet(inst.P, S)
            lam_bl = minima.lambda_bullet(inst.P, S, l)
            if not all(same(own, v) for v in (mu_b, mu_bl, lam_b, lam_bl)):
                bad.append(
                    f"k={k} root={l}: tree weight {own!r}, forest minima {mu_b!r}/{mu_bl!r}, "
                    f"tree minima {lam_b!r}/{lam_bl!r}"
                )
            if len(S) < n:
                mu_c = oracle.mu_oracle(inst.V, S, "circ", budget=inst.budget)
                lam_c = minima.lambda_circ(inst.P, S)[0]
                if not same(mu_c, lam_c):
                    bad.append(f"k={k} root={l}: escape forest minimum {mu_c!r}, escape tree minimum {lam_c!r}")
    return bad


def check_forest_escape_bound(inst: Instance, subsets: Iterable[tuple[int, ...]]) -> list[str]:
    bad = []
    for S in subsets:
        if len(S) == inst.P.n:
            continue
        mu_c = oracle.mu_oracle(inst.V, S, "circ", budget=inst.budget)
        lam_c = minima.lambda_circ(inst.P, S)[0]
        if not mu_c <= lam_c + TOL:
            bad.append(f"S={S}: forest minimum {mu_c!r} exceeds tree minimum {lam_c!r}")
    return bad


def check_nested_edges(inst: Instance) -> list[str]:
    bad = []
    d = inst.dendrogram
    levels = list(inst.levels())
    edge_sets = {k: d.edges_at(k) for k in levels}
    for hi, lo in zip(levels, levels[1:]):
        if not edge_sets[hi] < edge_sets[lo]:
            bad.append(f"edges at k={hi} not strictly inside edges at k={lo}")
        if set(unorient(d.forest_at(hi)).edges) != set(edge_sets[hi]):
            bad.append(f"k={hi}: unoriented forest differs from the recorded edge set")
    return bad


def _event_keys(d: msf.Dendrogram) -> list[tuple[int, int, int, int, int]]:
    return [(e.k, e.y, e.x, e.a, e.b) for e in d.events]


def check_shift_invariance(inst: Instance, shifts: Iterable[float] = SHIFTS) -> list[str]:
    bad = []
    base = inst.dendrogram
    for s in shifts:
        other = msf.run(inst.P.shifted(s))
        if _event_keys(other) != _event_keys(base):
            bad.append(f"shift {s}: merge sequence changed")
            continue
        for k in inst.levels():
            if not same(other.phi(k), base.phi(k)):
                bad.append(f"shift {s}: phi^{k} {other.phi(k)!r} vs {base.phi(k)!r}")
    return bad


def check_round_trip(inst: Instance) -> list[str]:
    bad = []
    P, V = inst.P, inst.V
    anchors = {c[0]: float(P.loops[c[0]]) for c in P.components()}
    R = recover_potential(V, anchors)
    scale = max(1.0, float(np.abs(P.loops).max()))
    if np.abs(R.loops - P.loops).max() > TOL * scale:
        bad.append("recovered loops differ from the original")
    back = potential_to_barrier(R)
    finite = np.isfinite(V.weights)
    if not np.array_equal(finite, np.isfinite(back.weights)):
        bad.append("recovered barrier digraph has a different arc set")
    elif finite.any() and np.abs(back.weights[finite] - V.weights[finite]).max() > TOL * scale:
        bad.append("recovered barrier weights differ")
    arc = cycle_arc(P)
    if arc is not None:
        w = V.weights.copy()
        w[arc] += 1.0
        try:
            recover_potential(BarrierDigraph(w))
        except InconsistentBarrierError:
            pass
        else:
            bad.append(f"perturbing arc {arc} went undetected")
    return bad


def cycle_arc(P: PotentialGraph) -> tuple[int, int] | None:
    """An arc whose edge lies on a cycle (the only arcs whose perturbation is detectable)."""
    edges = [(i, j) for i, j, _ in P.edges()]
    for i, j in edges:
        rest = {v: [] for v in range(P.n)}
        for a, b in edges:
            if (a, b) != (i, j):
                rest[a].append(b)
                rest[b].append(a)
        seen, stack = {i}, [i]
        while stack:
            for w in rest[stack.pop()]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        if j in seen:
            return (i, j)
    return None


def _random_forest(n: int, rng: np.random.Generator) -> EnteringForest:
    while True:
        parent = [int(rng.integers(-1, n)) for _ in range(n)]
        parent = [-1 if p == v else p for v, p in enumerate(parent)]
        if is_entering_forest(parent):
            return EnteringForest(tuple(parent))


def _upstream(F: EnteringForest, seeds: Iterable[int]) -> set[int]:
    """Seeds plus every vertex whose path in ``F`` passes through a seed."""
    seeds = set(seeds)
    out = set()
    for v in range(F.n):
        w = v
        while w >= 0:
            if w in seeds:
                out.add(v)
                break
            w = F.parent[w]
    return out


def check_arc_replacement(n: int, rng: np.random.Generator, trials: int = 200) -> list[str]:
    """Random spot checks that replacing arcs on suitable vertex sets keeps a forest."""
    bad = []
    if n < 2:
        return bad
    for _ in range(trials):
        F, G = _random_forest(n, rng), _random_forest(n, rng)
        seeds = rng.choice(n, size=int(rng.integers(1, n + 1)), replace=False).tolist()
        D = _upstream(F, seeds)
        assert not in_neighborhood(F, D)
        if not is_entering_forest(replace_arcs(F, G, D)):
            bad.append(f"single replacement: F={F.parent} G={G.parent} D={sorted(D)}")

        tf, tg = F.trees(), G.trees()
        rf = int(rng.choice(list(tf)))
        rg = int(rng.choice(list(tg)))
        common = set(tf[rf]) & set(tg[rg])
        if not common:
            continue
        D = _upstream(G, rng.choice(sorted(common), size=int(rng.integers(1, len(common) + 1)), replace=False).tolist())
        if not D <= common or in_neighborhood(G, D):
            continue
        if not out_neighborhood(G, D) <= set(tg[rg]) - set(tf[rf]):
            continue
        for X, Y in ((F, G), (G, F)):
            if not is_entering_forest(replace_arcs(X, Y, D)):
                bad.append(f"double replacement: F={F.parent} G={G.parent} D={sorted(D)}")
    return bad


def check_orientation_round_trip(inst: Instance) -> list[str]:
    bad = []
    d = inst.dendrogram
    for k in inst.levels():
        F = d.forest_at(k)
        plain = unorient(F, inst.P)
        for r, S in F.trees().items():
            again = orient_tree(plain, r)
            if any(again.parent[v] != F.parent[v] for v in S):
                bad.append(f"k={k}: re-orienting the tree of {r} does not restore it")
    return bad


@dataclass(frozen=True)
class CheckResult:
    name: str
    violations: tuple[str, ...]

    @property
    def passed(self) -> bool:
        return not self.violations


def battery(
    P: PotentialGraph,
    budget: oracle.EnumerationBudget | None = None,
    seed: int = 0,
) -> list[CheckResult]:
    """Run every check on ``P`` (all vertex subsets are examined)."""
    inst = Instance(P, budget)
    subsets = all_subsets(P.n)
    rng = np.random.default_rng(seed)
    checks: list[tuple[str, Callable[[], list[str]]]] = [
        ("hierarchy-matches-brute-force", lambda: check_phi_equivalence(inst)),
        ("extreme-levels", lambda: check_phi_boundary(inst)),
        ("rooted-tree-formula", lambda: check_rooted_tree_formula(inst, subsets)),
        ("escape-tree-formula", lambda: check_escape_tree_formula(inst, subsets)),
        ("reroot-constancy", lambda: check_reroot_constancy(inst, subsets)),
        ("merge-increment", lambda: check_increment_identity(inst)),
        ("descent-criterion", lambda: check_descent_criterion(inst)),
        ("merge-recalculation", lambda: check_merge_recalculation(inst)),
        ("minimal-tree-forest-minima", lambda: check_forest_minima_on_minimal_trees(inst)),
        ("escape-forest-bound", lambda: check_forest_escape_bound(inst, subsets)),
        ("nested-edges", lambda: check_nested_edges(inst)),
        ("shift-invariance", lambda: check_shift_invariance(inst)),
        ("potential-round-trip", lambda: check_round_trip(inst)),
        ("orientation-round-trip", lambda: check_orientation_round_trip(inst)),
        ("arc-replacement", lambda: check_arc_replacement(P.n, rng)),
    ]
    return [CheckResult(name, tuple(fn())) for name, fn in checks]
