"""Graph file parsing and canonical report serialization.

Two graph kinds are accepted, in JSON or a line-based text form::

    {"nodes": [{"id": "a", "loop": 4}, ...], "edges": [{"a": "a", "b": "b", "p": 5}, ...]}
    {"nodes": [{"id": "a"}, ...], "arcs": [{"from": "a", "to": "b", "v": 1}, ...]}

    node a 4          node a
    edge a b 5        arc a b 1

Blank lines and ``#`` comments are ignored in the text form.

Numbers are also kept exactly as written (as fractions) so that reports can
form differences and sums without rounding; shifting every potential in a
file by a decimal constant then leaves the report numbers unchanged.
"""
from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction
from pathlib import Path
from typing import Any, Union

from .graphs import BarrierDigraph, EnteringForest, PotentialGraph
from .msf import Dendrogram

REPORT_SCHEMA = "barrier-forests/hierarchy/1"


class GraphFileError(ValueError):
    pass


@dataclass(frozen=True)
class GraphFile:
    labels: tuple[str, ...]
    graph: Union[PotentialGraph, BarrierDigraph]
    # exact values as written: loops (None for barrier files) and edge/arc weights
    exact_loops: tuple | None = field(default=None, repr=False, compare=False)
    exact_links: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def kind(self) -> str:
        return "potential" if isinstance(self.graph, PotentialGraph) else "barrier"

    def exact_potential(self) -> "ExactPotential":
        """Loops and edge heights as fractions; barrier files get loops rebuilt like
        :func:`recover_potential` with default anchors."""
        if self.exact_loops is not None:
            return ExactPotential(list(self.exact_loops), dict(self.exact_links))
        n = len(self.labels)
        arcs = self.exact_links
        out = {i: [] for i in range(n)}
        for i, j in sorted(arcs):
            out[i].append(j)
        loops: list = [None] * n
        for start in range(n):
            if loops[start] is not None:
                continue
            loops[start] = Fraction(0)
            queue = deque([start])
            while queue:
                i = queue.popleft()
                for j in out[i]:
                    if loops[j] is None and (j, i) in arcs:
                        loops[j] = loops[i] + arcs[i, j] - arcs[j, i]
                        queue.append(j)
        heights = {(i, j): v + loops[i] for (i, j), v in arcs.items()}
        return ExactPotential(loops, heights)


@dataclass(frozen=True)
class ExactPotential:
    loops: list
    heights: dict  # (i, j) -> p_ij, both orientations

    @classmethod
    def from_graph(cls, P: PotentialGraph) -> "ExactPotential":
        heights = {}
        for i, j, p in P.edges():
            heights[i, j] = heights[j, i] = Fraction(p)
        return cls([Fraction(float(t)) for t in P.loops], heights)

    def barrier(self, i: int, j: int) -> Fraction:
        return self.heights[i, j] - self.loops[i]


def _exact(raw: Any, where: str) -> Fraction:
    if isinstance(raw, bool):
        raise GraphFileError(f"{where}: expected a number, got {raw!r}")
    try:
        if isinstance(raw, str):
            raw = Decimal(raw.strip())
        value = Fraction(raw)
        float(value)  # overflow check
        return value
    except (TypeError, ValueError, ArithmeticError):
        raise GraphFileError(f"{where}: expected a finite number, got {raw!r}") from None


def _build(nodes: list[tuple[str, Fraction | None]], links: list[tuple[str, str, Fraction]], kind: str) -> GraphFile:
    labels = [label for label, _ in nodes]
    if len(set(labels)) != len(labels):
        dup = next(label for label in labels if labels.count(label) > 1)
        raise GraphFileError(f"duplicate node id {dup!r}")
    index = {label: i for i, label in enumerate(labels)}

    def vid(label: str) -> int:
        if label not in index:
            raise GraphFileError(f"unknown node id {label!r}")
        return index[label]

    exact = {}
    if kind == "potential":
        loops = []
        for label, loop in nodes:
            if loop is None:
                raise GraphFileError(f"node {label!r} has no loop weight")
            loops.append(loop)
        for a, b, p in links:
            i, j = vid(a), vid(b)
            if i == j:
                raise GraphFileError(f"edge {a}-{b} is a loop; use the node loop weight")
            if (i, j) in exact:
                raise GraphFileError(f"edge {a}-{b} given twice")
            exact[i, j] = exact[j, i] = p
        edges = [(i, j, float(p)) for (i, j), p in exact.items() if i < j]
        graph = PotentialGraph.from_edges([float(t) for t in loops], edges)
        return GraphFile(tuple(labels), graph, tuple(loops), exact)
    for a, b, v in links:
        i, j = vid(a), vid(b)
        if i == j:
            raise GraphFileError(f"arc {a}->{b} is a loop")
        if (i, j) in exact:
            raise GraphFileError(f"arc {a}->{b} given twice")
        exact[i, j] = v
    graph = BarrierDigraph.from_arcs(len(labels), {key: float(v) for key, v in exact.items()})
    return GraphFile(tuple(labels), graph, None, exact)


def parse_json(doc: Any) -> GraphFile:
    if not isinstance(doc, dict) or not isinstance(doc.get("nodes"), list):
        raise GraphFileError("JSON graph needs a 'nodes' list")
    has_edges, has_arcs = "edges" in doc, "arcs" in doc
    if has_edges == has_arcs:
        raise GraphFileError("JSON graph needs exactly one of 'edges' or 'arcs'")
    kind = "potential" if has_edges else "barrier"
    nodes = []
    for t, node in enumerate(doc["nodes"]):
        if not isinstance(node, dict) or "id" not in node:
            raise GraphFileError(f"nodes[{t}] needs an 'id'")
        loop = _exact(node["loop"], f"nodes[{t}].loop") if "loop" in node else None
        nodes.append((str(node["id"]), loop))
    links = []
    key_a, key_b, key_w = ("a", "b", "p") if has_edges else ("from", "to", "v")
    for t, link in enumerate(doc["edges" if has_edges else "arcs"]):
        if not isinstance(link, dict) or not {key_a, key_b, key_w} <= link.keys():
            raise GraphFileError(f"link {t} needs keys {key_a!r}, {key_b!r}, {key_w!r}")
        links.append((str(link[key_a]), str(link[key_b]), _exact(link[key_w], f"link {t}")))
    return _build(nodes, links, kind)


def parse_text(text: str) -> GraphFile:
    nodes, links = [], []
    kinds = set()
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        tag = parts[0]
        where = f"line {lineno}"
        if tag == "node" and len(parts) in (2, 3):
            nodes.append((parts[1], _exact(parts[2], where) if len(parts) == 3 else None))
        elif tag in ("edge", "arc") and len(parts) == 4:
            kinds.add("potential" if tag == "edge" else "barrier")
            links.append((parts[1], parts[2], _exact(parts[3], where)))
        else:
            raise GraphFileError(f"{where}: cannot parse {line!r}")
    if len(kinds) > 1:
        raise GraphFileError("file mixes 'edge' and 'arc' lines")
    if kinds:
        kind = kinds.pop()
    else:
        kind = "barrier" if nodes and all(loop is None for _, loop in nodes) else "potential"
    return _build(nodes, links, kind)


def load(path: Union[str, Path]) -> GraphFile:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise GraphFileError(f"cannot read {path}: {exc}") from None
    if text.lstrip().startswith("{"):
        try:
            doc = json.loads(text, parse_float=Decimal)
        except json.JSONDecodeError as exc:
            raise GraphFileError(f"invalid JSON: {exc}") from None
        return parse_json(doc)
    return parse_text(text)


def potential_document(P: PotentialGraph, labels: list[str] | tuple[str, ...], extra: dict | None = None) -> dict:
    nodes = []
    for i, label in enumerate(labels):
        node = {"id": label, "loop": float(P.loops[i])}
        if extra and i in extra:
            node.update(extra[i])
        nodes.append(node)
    edges = [{"a": labels[i], "b": labels[j], "p": p} for i, j, p in P.edges()]
    return {"nodes": nodes, "edges": edges}


def barrier_document(V: BarrierDigraph, labels) -> dict:
    return {
        "nodes": [{"id": label} for label in labels],
        "arcs": [{"from": labels[i], "to": labels[j], "v": v} for i, j, v in V.arcs()],
    }


# -- canonical JSON ------------------------------------------------------------


def _encode(obj: Any) -> str:
    if obj is None or obj is True or obj is False:
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        if not math.isfinite(obj):
            return "null"
        text = format(obj, ".17g")
        if text in ("0", "-0"):
            return "0.0"
        if "." not in text and "e" not in text:
            text += ".0"
        return text
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        items = sorted(obj.items())
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_encode(v)}" for k, v in items) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_encode(v) for v in obj) + "]"
    raise TypeError(f"cannot encode {type(obj).__name__}")


def canonical_json(obj: Any) -> str:
    """Sorted keys, floats with 17 significant digits, non-finite floats as ``null``."""
    return _encode(obj) + "\n"


def hierarchy_report(
    d: Dendrogram,
    labels,
    levels: list[int],
    timing: dict | None = None,
    exact: ExactPotential | None = None,
) -> dict:
    """Report of the hierarchy; numbers are computed exactly from ``exact``
    (default: the binary values of the potential graph) and rounded once."""
    if exact is None:
        exact = ExactPotential.from_graph(d.potential)
    events = []
    phi = {d.n: Fraction(0)}
    total = Fraction(0)
    for e in d.events:
        increment = exact.heights[e.a, e.b] - exact.loops[e.y]
        total += increment
        phi[e.k - 1] = total
        events.append(
            {
                "k": e.k,
                "absorbed": labels[e.y],
                "survivor": labels[e.x],
                "a": labels[e.a],
                "b": labels[e.b],
                "barrier": float(exact.barrier(e.a, e.b)),
                "increment": float(increment),
                "phi": float(total),
            }
        )
    forests = []
    for k in levels:
        F = d.forest_at(k)
        forests.append(
            {
                "k": k,
                "roots": [labels[r] for r in F.roots],
                "arcs": [{"from": labels[i], "to": labels[j], "v": float(exact.barrier(i, j))} for i, j in F.arcs],
                "weight": float(phi[k]),
            }
        )
    report = {
        "schema": REPORT_SCHEMA,
        "n": d.n,
        "complete": d.complete,
        "nodes": [{"id": label, "loop": float(exact.loops[i])} for i, label in enumerate(labels)],
        "phi": [{"k": k, "phi": float(phi[k])} for k in range(d.n, d.k_min - 1, -1)],
        "events": events,
        "forests": forests,
    }
    if timing is not None:
        report["timing"] = timing
    return report


def _dot_id(label: str) -> str:
    return json.dumps(label)


def forests_dot(d: Dendrogram, V: BarrierDigraph, labels, levels: list[int]) -> str:
    """One ``digraph`` block per level, arcs labelled with their barrier."""
    out = []
    for k in levels:
        F = d.forest_at(k)
        out.append(f"digraph forest_{k} {{")
        out.append(f'  label="k={k}, weight={format(F.weight(V), ".17g")}";')
        for i, label in enumerate(labels):
            shape = "doublecircle" if F.parent[i] < 0 else "circle"
            out.append(f"  {_dot_id(label)} [shape={shape}];")
        for i, j in F.arcs:
            out.append(
                f'  {_dot_id(labels[i])} -> {_dot_id(labels[j])} [label="{format(float(V.weights[i, j]), ".17g")}"];'
            )
        out.append("}")
    return "\n".join(out) + "\n"
