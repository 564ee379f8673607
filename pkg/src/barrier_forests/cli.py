"""barrier-forests command line.

Exit codes: 0 ok, 2 bad input or usage, 3 graph structure (disconnected or
inconsistent barriers), 4 verification failure.
"""
from __future__ import annotations

import argparse
import csv
import sys
import time
from pathlib import Path

from . import graphfile, minima, msf, oracle, verify
from .conversion import GraphStructureError, ingest_potential_1d, potential_to_barrier, recover_potential
from .graphs import PotentialGraph

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_STRUCTURE = 3
EXIT_VERIFY = 4


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _warn(msg: str) -> None:
    print(f"warning: {msg}", file=sys.stderr)


def _load_potential(path: str) -> tuple[PotentialGraph, tuple[str, ...], graphfile.GraphFile]:
    gf = graphfile.load(path)
    if gf.kind == "potential":
        return gf.graph, gf.labels, gf
    return recover_potential(gf.graph), gf.labels, gf


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _levels(which: str, d: msf.Dendrogram) -> list[int]:
    if which == "all":
        return list(range(d.n, d.k_min - 1, -1))
    try:
        k = int(which)
    except ValueError:
        raise CliError(f"--k expects an integer or 'all', got {which!r}", EXIT_INPUT) from None
    if not 1 <= k <= d.n:
        raise CliError(f"--k must lie in [1, {d.n}]", EXIT_INPUT)
    if k < d.k_min:
        raise CliError(f"graph splits into {d.k_min} components; no forest with {k} trees", EXIT_STRUCTURE)
    return [k]


def cmd_msf(args) -> int:
    P, labels, gf = _load_potential(args.input)
    V = potential_to_barrier(P)
    t0 = time.perf_counter()
    d = msf.run(P)
    elapsed = time.perf_counter() - t0
    if not d.complete:
        _warn(f"graph has {d.k_min} components; hierarchy stops at {d.k_min} trees")
    levels = _levels(args.k, d)

    if args.verify:
        budget = oracle.EnumerationBudget.from_env()
        if P.n > budget.max_n:
            _warn(f"{P.n} vertices exceed the oracle budget of {budget.max_n}; --verify skipped")
        else:
            phi, _ = oracle.phi_table(V, budget)
            for k in range(1, P.n + 1):
                if not verify.same(d.phi(k), float(phi[k])):
                    raise CliError(
                        f"phi^{k}: hierarchy gives {d.phi(k)!r}, brute force {float(phi[k])!r}", EXIT_VERIFY
                    )

    if args.format == "dot":
        _emit(graphfile.forests_dot(d, V, labels, levels), args.output)
    else:
        timing = {"run_seconds": elapsed} if args.timing else None
        report = graphfile.hierarchy_report(d, labels, levels, timing, gf.exact_potential())
        _emit(graphfile.canonical_json(report), args.output)
    return EXIT_OK


def cmd_mst(args) -> int:
    P, labels, _ = _load_potential(args.input)
    if args.root == "auto":
        root = None
    elif args.root in labels:
        root = labels.index(args.root)
    else:
        raise CliError(f"unknown root {args.root!r}", EXIT_INPUT)
    res = minima.min_spanning_entering_tree(P, root)
    V = potential_to_barrier(P)
    report = {
        "schema": "barrier-forests/mst/1",
        "root": labels[res.root],
        "weight": res.weight,
        "spanning_tree_weight": res.nu,
        "arcs": [{"from": labels[i], "to": labels[j], "v": float(V.weights[i, j])} for i, j in res.forest.arcs],
        "weight_by_root": {labels[q]: w for q, w in res.lambda_by_root.items()},
    }
    _emit(graphfile.canonical_json(report), args.output)
    return EXIT_OK


def cmd_verify(args) -> int:
    P, labels, _ = _load_potential(args.input)
    budget = oracle.EnumerationBudget.from_env()
    if args.max_n is not None:
        budget = oracle.EnumerationBudget(max_n=args.max_n)
    if P.n > budget.max_n:
        raise CliError(f"{P.n} vertices exceed --max-n {budget.max_n}", EXIT_INPUT)
    results = verify.battery(P, budget)
    width = max(len(r.name) for r in results)
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        line = f"{status}  {r.name:<{width}}"
        if not r.passed:
            line += f"  {len(r.violations)} violation(s), first: {r.violations[0]}"
        print(line)
    failed = [r.name for r in results if not r.passed]
    if failed:
        print(f"failed: {', '.join(failed)}", file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


def cmd_roadplan(args) -> int:
    gf = graphfile.load(args.input)
    if gf.kind != "potential":
        raise CliError("road planning needs a potential file with city values as loops", EXIT_INPUT)
    P, labels = gf.graph, gf.labels
    if not 0 <= args.budget <= max(P.n - 1, 0):
        raise CliError(f"--budget must lie in [0, {max(P.n - 1, 0)}]", EXIT_INPUT)
    d = msf.run(P)
    if args.budget > len(d.events):
        raise CliError(
            f"only {len(d.events)} roads can connect anything; the cities form {d.k_min} separate groups",
            EXIT_STRUCTURE,
        )
    roads = []
    direct = 0.0
    for step, e in enumerate(d.events[: args.budget], 1):
        direct += e.height
        roads.append(
            {
                "step": step,
                "from": labels[e.a],
                "to": labels[e.b],
                "direct_cost": e.height,
                "effective_cost": e.increment,
                "cumulative_effective_cost": e.phi,
            }
        )
    plan = {
        "schema": "barrier-forests/roadplan/1",
        "budget": args.budget,
        "roads": roads,
        "total_direct_cost": direct,
        "connects_all": P.n - args.budget == 1,
    }
    if plan["connects_all"]:
        plan["note"] = "all cities connected: the total direct cost is also the minimum possible"
    _emit(graphfile.canonical_json(plan), args.output)
    return EXIT_OK


def _read_samples(path: str) -> tuple[list[float], list[float]]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc}", EXIT_INPUT) from None
    xs, ps = [], []
    for lineno, row in enumerate(csv.reader(text.splitlines()), 1):
        if not row or not "".join(row).strip() or row[0].lstrip().startswith("#"):
            continue
        if len(row) != 2:
            raise CliError(f"line {lineno}: expected two columns x,P", EXIT_INPUT)
        try:
            x, p = float(row[0]), float(row[1])
        except ValueError:
            if not xs and lineno == 1:
                continue  # header
            raise CliError(f"line {lineno}: not a number", EXIT_INPUT) from None
        xs.append(x)
        ps.append(p)
    return xs, ps


def cmd_ingest1d(args) -> int:
    xs, ps = _read_samples(args.input)
    try:
        P, at = ingest_potential_1d(xs, ps)
    except GraphStructureError:
        raise
    except ValueError as exc:
        raise CliError(str(exc), EXIT_INPUT) from None
    labels = [f"m{i}" for i in range(P.n)]
    extra = {i: {"x": float(x)} for i, x in enumerate(at)}
    _emit(graphfile.canonical_json(graphfile.potential_document(P, labels, extra)), args.output)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="barrier-forests",
        description="Hierarchies of minimum spanning entering forests on potential graphs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("msf", help="full forest hierarchy as JSON or DOT")
    p.add_argument("input")
    p.add_argument("--k", default="all", help="number of trees, or 'all' (default)")
    p.add_argument("--format", choices=("json", "dot"), default="json")
    p.add_argument("--verify", action="store_true", help="cross-check every level by brute force")
    p.add_argument("--timing", action="store_true", help="add wall time to the report")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_msf)

    p = sub.add_parser("mst", help="minimum spanning entering tree")
    p.add_argument("input")
    p.add_argument("--root", default="auto", help="root node id, or 'auto' for the lightest loop")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_mst)

    p = sub.add_parser("verify", help="run the invariant battery against brute force")
    p.add_argument("input")
    p.add_argument("--max-n", type=int, default=None, help="largest graph to enumerate")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("roadplan", help="cheapest order to build roads between cities")
    p.add_argument("input")
    p.add_argument("--budget", type=int, required=True, help="number of roads to build")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_roadplan)

    p = sub.add_parser("ingest1d", help="potential graph from sampled 1-D potential (CSV x,P)")
    p.add_argument("input")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_ingest1d)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except graphfile.GraphFileError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except GraphStructureError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_STRUCTURE


if __name__ == "__main__":
    sys.exit(main())
