"""Text format for metric ribbon graphs.

::

    halfedges 6
    twin: 0 3
    twin: 1 4
    twin: 2 5
    vertex: 0 1 2
    vertex: 3 4 5
    length: 0 1/3
    length: 1 1/3
    length: 2 1/3

``length`` lines are keyed by the smaller half-edge of the edge.  Values are
decimals or ``p/q`` rationals and are parsed exactly.  ``#`` starts a comment.
"""

from __future__ import annotations

from fractions import Fraction
from pathlib import Path

from .errors import GraphFormatError, RibbonZetaError
from .ribbon import MetricRibbonGraph, graph_from_cycles


def _parse_value(tok: str) -> Fraction:
    try:
        return Fraction(tok)
    except (ValueError, ZeroDivisionError) as exc:
        raise GraphFormatError(f"bad length value {tok!r}") from exc


def _ints(tokens, lineno):
    try:
        return [int(t) for t in tokens]
    except ValueError as exc:
        raise GraphFormatError(f"line {lineno}: expected integers") from exc


def parse_graph(text: str) -> MetricRibbonGraph:
    n_half = None
    pairs = []
    cycles = []
    lengths = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("halfedges"):
            (n_half,) = _ints(line.split()[1:2], lineno) or [None]
            continue
        key, _, rest = line.partition(":")
        toks = rest.split()
        if key == "twin":
            if len(toks) != 2:
                raise GraphFormatError(f"line {lineno}: twin needs two half-edges")
            pairs.append(tuple(_ints(toks, lineno)))
        elif key == "vertex":
            if not toks:
                raise GraphFormatError(f"line {lineno}: empty vertex")
            cycles.append(tuple(_ints(toks, lineno)))
        elif key == "length":
            if len(toks) != 2:
                raise GraphFormatError(f"line {lineno}: length needs an edge id and a value")
            (eid,) = _ints(toks[:1], lineno)
            if eid in lengths:
                raise GraphFormatError(f"line {lineno}: duplicate length for edge {eid}")
            lengths[eid] = _parse_value(toks[1])
        else:
            raise GraphFormatError(f"line {lineno}: unknown directive {key!r}")
    if n_half is None:
        raise GraphFormatError("missing 'halfedges' line")
    if n_half != 2 * len(pairs):
        raise GraphFormatError(f"halfedges {n_half} but {len(pairs)} twin pairs")
    graph = graph_from_cycles(pairs, cycles)
    ordered = []
    for a, _ in graph.edges:
        if a not in lengths:
            raise GraphFormatError(f"missing length for edge {a}")
        ordered.append(lengths.pop(a))
    if lengths:
        raise GraphFormatError(f"lengths given for unknown edge ids {sorted(lengths)}")
    return MetricRibbonGraph(graph, tuple(_simplify(x) for x in ordered))


def _simplify(x: Fraction):
    return int(x) if x.denominator == 1 else x


def read_graph(path) -> MetricRibbonGraph:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise GraphFormatError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        return parse_graph(text)
    except RibbonZetaError:
        raise
    except (TypeError, ValueError) as exc:
        raise GraphFormatError(str(exc)) from exc


def format_graph(mg: MetricRibbonGraph) -> str:
    g = mg.graph
    lines = [f"halfedges {g.n_half_edges}"]
    lines += [f"twin: {a} {b}" for a, b in g.edges]
    lines += ["vertex: " + " ".join(map(str, cyc)) for cyc in g.vertices]
    lines += [f"length: {a} {x}" for (a, _), x in zip(g.edges, mg.lengths)]
    return "\n".join(lines) + "\n"
