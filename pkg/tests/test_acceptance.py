"""Acceptance criteria, one or more tests each. Run with ``pytest -v tests/test_acceptance.py``;
the terminal summary prints one PASS/FAIL line per criterion."""
import json
import time
from decimal import Decimal

import numpy as np
import pytest

from barrier_forests import cli, graphfile, minima, msf, oracle, verify
from barrier_forests.conversion import potential_to_barrier, recover_potential
from barrier_forests.graphs import BarrierDigraph, PotentialGraph, unorient
from graphgen import A, B, C, three_basins, random_potential

SEED = 20240917
SWEEP = 500
TOL = 1e-9

criterion = pytest.mark.criterion


@pytest.fixture(scope="module")
def sweep():
    """Random connected potential graphs, N in [2, 8], loops and edges uniform in [-10, 10]."""
    rng = np.random.default_rng(SEED)
    out = []
    for _ in range(SWEEP):
        n = int(rng.integers(2, 9))
        out.append(verify.Instance(random_potential(rng, n, density=float(rng.uniform(0.3, 1.0)))))
    return out


def violations_over(sweep, check):
    bad = []
    for t, inst in enumerate(sweep):
        bad.extend(f"#{t} {v}" for v in check(inst))
    return bad


# -- 1 ---------------------------------------------------------------------------


@criterion(1, "three-basin golden instance")
def test_three_basin_golden(record_property):
    P = three_basins()
    V = potential_to_barrier(P)
    assert [V.weights[A, B], V.weights[B, A], V.weights[B, C], V.weights[C, B]] == [1.0, 4.0, 3.0, 2.0]
    d = msf.run(P)
    F2 = d.forest_at(2)
    assert F2.arcs == ((A, B),) and F2.roots == (B, C)
    assert F2.weight(V) == 1.0 and d.phi(2) == 1.0
    # the only 2-tree forest of weight 1
    two = [F for F in oracle.enumerate_entering_forests(V, k=2) if F.weight(V) == 1.0]
    assert [F.parent for F in two] == [F2.parent]
    # cheapest undirected forest with two components: edge bc, a isolated, weight 4
    best = min(((p, (i, j)) for i, j, p in P.edges()))
    assert best == (4.0, (B, C))
    assert unorient(F2).edges != {best[1]}

    times = []
    for _ in range(50):
        t0 = time.perf_counter()
        msf.run(P)
        times.append(time.perf_counter() - t0)
    record_property("detail", f"run takes {min(times) * 1e6:.0f} us")
    assert min(times) < 1e-3


# -- 2 ---------------------------------------------------------------------------


@criterion(2, "hierarchy equals brute-force minima on the random sweep")
def test_oracle_equivalence(sweep, record_property):
    t0 = time.perf_counter()
    bad = violations_over(sweep, verify.check_phi_equivalence)
    elapsed = time.perf_counter() - t0
    levels = sum(inst.P.n for inst in sweep)
    record_property("detail", f"{len(sweep)} graphs, {levels} levels, {len(bad)} violations, {elapsed:.1f} s")
    assert bad == []
    assert elapsed < 60


# -- 3 ---------------------------------------------------------------------------


def all_subsets(n):
    return verify.all_subsets(n)


@criterion(3, "closed-form minima on the random sweep")
def test_rooted_tree_formula(sweep):
    assert violations_over(sweep, lambda inst: verify.check_rooted_tree_formula(inst, all_subsets(inst.P.n))) == []


@criterion(3, "closed-form minima on the random sweep")
def test_escape_tree_formula(sweep):
    assert violations_over(sweep, lambda inst: verify.check_escape_tree_formula(inst, all_subsets(inst.P.n))) == []


@criterion(3, "closed-form minima on the random sweep")
def test_reroot_constancy(sweep):
    assert violations_over(sweep, lambda inst: verify.check_reroot_constancy(inst, all_subsets(inst.P.n))) == []


@criterion(3, "closed-form minima on the random sweep")
def test_merge_increment(sweep):
    assert violations_over(sweep, verify.check_increment_identity) == []


@criterion(3, "closed-form minima on the random sweep")
def test_forest_minima_on_minimal_trees(sweep):
    assert violations_over(sweep, verify.check_forest_minima_on_minimal_trees) == []


@criterion(3, "closed-form minima on the random sweep")
def test_escape_forest_bound(sweep, record_property):
    rng = np.random.default_rng(SEED + 3)
    picked = []
    for inst in sweep:
        n = inst.P.n
        size = int(rng.integers(1, n))
        picked.append((inst, tuple(sorted(rng.choice(n, size=size, replace=False).tolist()))))
    bad = []
    for inst, S in picked:
        bad.extend(verify.check_forest_escape_bound(inst, [S]))
    record_property("detail", f"escape bound on {len(picked)} random subsets")
    assert len(picked) >= 200
    assert bad == []


# -- 4 ---------------------------------------------------------------------------


@criterion(4, "edge sets strictly nested across levels")
def test_nested_edges(sweep):
    assert violations_over(sweep, verify.check_nested_edges) == []


# -- 5 ---------------------------------------------------------------------------


@criterion(5, "shift invariance")
def test_shift_keeps_events_and_phi(sweep):
    assert violations_over(sweep, verify.check_shift_invariance) == []


def graph_text(P, shift="0"):
    d = Decimal(shift)
    lines = [f"node v{i} {Decimal(repr(float(t))) + d}" for i, t in enumerate(P.loops)]
    lines += [f"edge v{i} v{j} {Decimal(repr(p)) + d}" for i, j, p in P.edges()]
    return "\n".join(lines) + "\n"


def report_without_loops(path):
    cli.main(["msf", str(path), "-o", str(path) + ".json"])
    report = json.loads(open(str(path) + ".json").read())
    nodes = report.pop("nodes")
    return graphfile.canonical_json(report), [n["id"] for n in nodes]


@criterion(5, "shift invariance")
def test_shift_reports_byte_identical(sweep, tmp_path, record_property):
    mismatched = 0
    for t, inst in enumerate(sweep):
        base_path = tmp_path / f"g{t}.txt"
        base_path.write_text(graph_text(inst.P))
        base = report_without_loops(base_path)
        for s in ("-5", "3.7"):
            path = tmp_path / f"g{t}_{s}.txt"
            path.write_text(graph_text(inst.P, s))
            mismatched += report_without_loops(path) != base
    record_property("detail", f"{2 * len(sweep)} shifted reports, {mismatched} differ")
    assert mismatched == 0


# -- 6 ---------------------------------------------------------------------------


def dense_potential(rng, n):
    loops = rng.uniform(-10, 10, n)
    w = rng.uniform(-10, 10, (n, n))
    w = np.triu(w, 1)
    w = w + w.T
    np.fill_diagonal(w, np.inf)
    return PotentialGraph(loops, w)


@criterion(6, "cubic running time")
def test_cubic_scaling(record_property):
    rng = np.random.default_rng(SEED + 6)
    msf.run(dense_potential(rng, 20))  # compile
    sizes = [200, 400, 800]
    best = []
    for n in sizes:
        P = dense_potential(rng, n)
        times = []
        for _ in range(5):
            t0 = time.perf_counter()
            d = msf.run(P)
            times.append(time.perf_counter() - t0)
        assert d.complete
        best.append(min(times))
    slope = np.polyfit(np.log(sizes), np.log(best), 1)[0]
    record_property(
        "detail", "exponent %.2f, " % slope + ", ".join(f"N={n}: {t * 1e3:.0f} ms" for n, t in zip(sizes, best))
    )
    assert 2.6 <= slope <= 3.4
    assert best[-1] < 10.0


# -- 7 ---------------------------------------------------------------------------


@criterion(7, "spanning entering tree from one greedy spanning tree")
def test_mst_shortcut(sweep, tmp_path, capsys):
    for t, inst in enumerate(sweep):
        path = tmp_path / f"g{t}.txt"
        path.write_text(graph_text(inst.P))
        before = minima.calls["nu"]
        assert cli.main(["mst", str(path)]) == 0
        assert minima.calls["nu"] - before == 1
        report = json.loads(capsys.readouterr().out)
        assert verify.same(report["weight"], float(inst.phi[1]))
        assert verify.same(report["weight"], inst.dendrogram.phi(1))
        brute = oracle.lambda_oracle_by_vertex(inst.V, range(inst.P.n), "bullet")
        for q, value in brute.items():
            assert verify.same(report["weight_by_root"][f"v{q}"], value)


# -- 8 ---------------------------------------------------------------------------


def graphs_with_cycles(rng, count):
    out = []
    while len(out) < count:
        P = random_potential(rng, int(rng.integers(3, 9)), density=0.6)
        if verify.cycle_arc(P) is not None:
            out.append(P)
    return out


@criterion(8, "potential/barrier round trip and inconsistency detection")
def test_round_trip(record_property):
    rng = np.random.default_rng(SEED + 8)
    graphs = graphs_with_cycles(rng, 100)
    for P in graphs:
        V = potential_to_barrier(P)
        back = potential_to_barrier(recover_potential(V))
        finite = np.isfinite(V.weights)
        assert np.array_equal(finite, np.isfinite(back.weights))
        assert np.allclose(back.weights[finite], V.weights[finite], rtol=0, atol=TOL)
        R = recover_potential(V, (0, float(P.loops[0])))
        assert np.allclose(R.loops, P.loops, rtol=0, atol=TOL)
    record_property("detail", f"{len(graphs)} round trips")


@criterion(8, "potential/barrier round trip and inconsistency detection")
def test_perturbed_arc_exits_3(tmp_path, capsys):
    rng = np.random.default_rng(SEED + 88)
    for t, P in enumerate(graphs_with_cycles(rng, 100)):
        V = potential_to_barrier(P)
        i, j = verify.cycle_arc(P)
        w = V.weights.copy()
        w[i, j] += float(rng.uniform(0.01, 1.0))
        doc = graphfile.barrier_document(BarrierDigraph(w), [f"v{k}" for k in range(P.n)])
        path = tmp_path / f"bad{t}.json"
        path.write_text(graphfile.canonical_json(doc))
        assert cli.main(["msf", str(path)]) == 3
        assert "breaks" in capsys.readouterr().err
