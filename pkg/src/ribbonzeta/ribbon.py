"""Ribbon graphs as pairs of permutations on half-edges.

A ribbon graph on half-edges ``0..2E-1`` is encoded by two permutations:

``twin``
    fixed-point-free involution pairing the two halves of every edge;
``next_at_vertex``
    permutation whose cycles list the half-edges around each vertex in
    counterclockwise order.

A half-edge ``h`` also names the directed edge leaving its vertex, so the
face permutation ``h -> next_at_vertex[twin[h]]`` walks around a face: leave
along ``h``, arrive at the far vertex, turn to the next half-edge there.
Every face therefore traverses each edge once per side.

Edges are numbered densely in increasing order of their smaller half-edge.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from numbers import Rational
from typing import Sequence

import numpy as np

from .errors import (
    Disconnected,
    FixedPointInTwin,
    InadmissibleType,
    InvalidEuler,
    LoopContraction,
    NonPositiveLength,
    NonPositiveScale,
    NotInvolution,
    PermutationInvalid,
    UnstableType,
)


def _cycles(perm: Sequence[int]) -> tuple[tuple[int, ...], ...]:
    """Cycles of ``perm``, each rotated to start at its smallest element,
    ordered by that element."""
    seen = [False] * len(perm)
    out = []
    for start in range(len(perm)):
        if seen[start]:
            continue
        cyc = []
        h = start
        while not seen[h]:
            seen[h] = True
            cyc.append(h)
            h = perm[h]
        out.append(tuple(cyc))
    return tuple(out)


@dataclass(frozen=True, eq=False)
class RibbonGraph:
    twin: tuple[int, ...]
    next_at_vertex: tuple[int, ...]
    vertices: tuple[tuple[int, ...], ...] = field(init=False, repr=False)
    vertex_of: tuple[int, ...] = field(init=False, repr=False)
    edges: tuple[tuple[int, int], ...] = field(init=False, repr=False)
    edge_of: tuple[int, ...] = field(init=False, repr=False)
    faces: tuple[tuple[int, ...], ...] = field(init=False, repr=False)
    face_of: tuple[int, ...] = field(init=False, repr=False)

    def __post_init__(self):
        n = len(self.twin)
        verts = _cycles(self.next_at_vertex)
        vertex_of = [0] * n
        for i, cyc in enumerate(verts):
            for h in cyc:
                vertex_of[h] = i
        edges = tuple((h, self.twin[h]) for h in range(n) if h < self.twin[h])
        edge_of = [0] * n
        for i, (a, b) in enumerate(edges):
            edge_of[a] = edge_of[b] = i
        face_perm = [self.next_at_vertex[self.twin[h]] for h in range(n)]
        fcs = _cycles(face_perm)
        face_of = [0] * n
        for i, cyc in enumerate(fcs):
            for h in cyc:
                face_of[h] = i
        object.__setattr__(self, "vertices", verts)
        object.__setattr__(self, "vertex_of", tuple(vertex_of))
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "edge_of", tuple(edge_of))
        object.__setattr__(self, "faces", fcs)
        object.__setattr__(self, "face_of", tuple(face_of))

    def __eq__(self, other):
        if not isinstance(other, RibbonGraph):
            return NotImplemented
        return self.twin == other.twin and self.next_at_vertex == other.next_at_vertex

    def __hash__(self):
        return hash((self.twin, self.next_at_vertex))

    @property
    def n_half_edges(self) -> int:
        return len(self.twin)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def n_faces(self) -> int:
        return len(self.faces)

    @property
    def euler_characteristic(self) -> int:
        return self.n_vertices - self.n_edges + self.n_faces

    @property
    def genus(self) -> int:
        return (2 - self.euler_characteristic) // 2

    def face_step(self, h: int) -> int:
        return self.next_at_vertex[self.twin[h]]

    def tail(self, h: int) -> int:
        """Vertex the directed edge ``h`` leaves from."""
        return self.vertex_of[h]

    def head(self, h: int) -> int:
        """Vertex the directed edge ``h`` arrives at."""
        return self.vertex_of[self.twin[h]]

    def degree(self, v: int) -> int:
        return len(self.vertices[v])

    @property
    def is_trivalent(self) -> bool:
        return all(len(c) == 3 for c in self.vertices)

    def is_loop(self, e: int) -> bool:
        a, b = self.edges[e]
        return self.vertex_of[a] == self.vertex_of[b]

    def successors(self, h: int) -> tuple[int, ...]:
        """Directed edges that may follow ``h`` without backtracking."""
        back = self.twin[h]
        out = []
        x = self.next_at_vertex[back]
        while x != back:
            out.append(x)
            x = self.next_at_vertex[x]
        return tuple(out)


def build_graph(twin: Sequence[int], next_at_vertex: Sequence[int], *, stable: bool = True) -> RibbonGraph:
    """Validate the two permutations and return the ribbon graph.

    With ``stable=True`` genus-zero graphs must have at least three faces.
    """
    twin = tuple(int(x) for x in twin)
    nxt = tuple(int(x) for x in next_at_vertex)
    n = len(twin)
    if n == 0:
        raise PermutationInvalid("empty half-edge set")
    if len(nxt) != n or sorted(nxt) != list(range(n)):
        raise PermutationInvalid("next_at_vertex is not a permutation of the half-edge set")
    for h, t in enumerate(twin):
        if not 0 <= t < n or twin[t] != h:
            raise NotInvolution(f"twin is not an involution at half-edge {h}")
    for h, t in enumerate(twin):
        if t == h:
            raise FixedPointInTwin(f"half-edge {h} is its own twin")
    g = RibbonGraph(twin, nxt)
    _check_connected(g)
    chi = g.euler_characteristic
    if chi % 2 or chi > 2:
        raise InvalidEuler(f"V - E + F = {chi} is not of the form 2 - 2g with g >= 0")
    if stable and g.genus == 0 and g.n_faces < 3:
        raise UnstableType(f"genus 0 with {g.n_faces} faces (need at least 3)")
    return g


def graph_from_cycles(twin_pairs, vertex_cycles, *, stable: bool = True) -> RibbonGraph:
    """Build from ``[(a, b), ...]`` edge pairs and vertex cycles in
    counterclockwise order."""
    n = 2 * len(twin_pairs)
    twin = [-1] * n
    for a, b in twin_pairs:
        if not (0 <= a < n and 0 <= b < n):
            raise PermutationInvalid(f"twin pair ({a}, {b}) out of range")
        if twin[a] != -1 or twin[b] != -1:
            raise NotInvolution(f"half-edge paired twice in ({a}, {b})")
        twin[a], twin[b] = b, a
    nxt = [-1] * n
    for cyc in vertex_cycles:
        for i, h in enumerate(cyc):
            if not 0 <= h < n or nxt[h] != -1:
                raise PermutationInvalid(f"half-edge {h} missing or repeated in vertex cycles")
            nxt[h] = cyc[(i + 1) % len(cyc)]
    if -1 in nxt:
        raise PermutationInvalid("some half-edges belong to no vertex")
    return build_graph(twin, nxt, stable=stable)


def _check_connected(g: RibbonGraph) -> None:
    parent = list(range(g.n_vertices))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in g.edges:
        ra, rb = find(g.vertex_of[a]), find(g.vertex_of[b])
        if ra != rb:
            parent[ra] = rb
    if len({find(v) for v in range(g.n_vertices)}) != 1:
        raise Disconnected("ribbon graph is not connected")


def faces(g: RibbonGraph) -> tuple[tuple[int, ...], ...]:
    return g.faces


def topological_type(g: RibbonGraph) -> tuple[int, int]:
    chi = g.euler_characteristic
    if chi % 2 or chi > 2:
        raise InvalidEuler(f"V - E + F = {chi}")
    return g.genus, g.n_faces


# ---------------------------------------------------------------------------
# metric ribbon graphs


@dataclass(frozen=True, eq=False)
class MetricRibbonGraph:
    """Ribbon graph with one positive length per edge (dense edge index).

    Lengths may be floats or exact rationals (``int``/``Fraction``); exact
    values are kept as given so the polynomial route can use them.
    """

    graph: RibbonGraph
    lengths: tuple

    def __post_init__(self):
        lengths = tuple(self.lengths)
        if len(lengths) != self.graph.n_edges:
            raise ValueError(f"expected {self.graph.n_edges} lengths, got {len(lengths)}")
        for e, x in enumerate(lengths):
            if not x > 0:
                raise NonPositiveLength(f"edge {e} has length {x}")
        object.__setattr__(self, "lengths", lengths)

    def __eq__(self, other):
        if not isinstance(other, MetricRibbonGraph):
            return NotImplemented
        return self.graph == other.graph and self.lengths == other.lengths

    def __hash__(self):
        return hash((self.graph, self.lengths))

    @property
    def length_array(self) -> np.ndarray:
        return np.array([float(x) for x in self.lengths])

    @property
    def halfedge_lengths(self) -> np.ndarray:
        lengths = self.length_array
        return lengths[list(self.graph.edge_of)]

    @property
    def is_rational(self) -> bool:
        return all(isinstance(x, Rational) for x in self.lengths)

    def exact_lengths(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(x) for x in self.lengths)


def face_lengths(mg: MetricRibbonGraph) -> tuple:
    g = mg.graph
    return tuple(sum((mg.lengths[g.edge_of[h]] for h in cyc), start=0 * mg.lengths[0]) for cyc in g.faces)


def face_incidence(g: RibbonGraph) -> np.ndarray:
    """Faces x edges matrix counting how many sides of each edge lie on
    each face (every column sums to 2)."""
    A = np.zeros((g.n_faces, g.n_edges), dtype=int)
    for h in range(g.n_half_edges):
        A[g.face_of[h], g.edge_of[h]] += 1
    return A


def scale(mg: MetricRibbonGraph, alpha) -> MetricRibbonGraph:
    if not alpha > 0:
        raise NonPositiveScale(f"scale factor must be positive, got {alpha}")
    return MetricRibbonGraph(mg.graph, tuple(x * alpha for x in mg.lengths))


def with_lengths(g: RibbonGraph, lengths) -> MetricRibbonGraph:
    return MetricRibbonGraph(g, tuple(lengths))


# ---------------------------------------------------------------------------
# isomorphism


def _code_from_root(twin, nxt, root: int) -> tuple[tuple[int, ...], list[int]]:
    label = {root: 0}
    order = [root]
    i = 0
    while i < len(order):
        h = order[i]
        i += 1
        for x in (nxt[h], twin[h]):
            if x not in label:
                label[x] = len(order)
                order.append(x)
    code = tuple(label[twin[h]] for h in order) + tuple(label[nxt[h]] for h in order)
    return code, order


def canonical_form(g: RibbonGraph) -> tuple[int, ...]:
    """Lexicographically least breadth-first relabelling code over all roots.

    Two connected ribbon graphs are isomorphic iff their codes are equal.
    """
    return min(_code_from_root(g.twin, g.next_at_vertex, r)[0] for r in range(g.n_half_edges))


def automorphisms(g: RibbonGraph) -> int:
    """Number of half-edge bijections commuting with twin and next_at_vertex.

    The group acts freely on half-edges of a connected graph, so it has as
    many elements as there are roots realising the minimal code.
    """
    codes = [_code_from_root(g.twin, g.next_at_vertex, r)[0] for r in range(g.n_half_edges)]
    best = min(codes)
    return sum(1 for c in codes if c == best)


def automorphism_maps(g: RibbonGraph) -> tuple[tuple[int, ...], ...]:
    """The automorphisms as half-edge maps ``phi`` (identity first)."""
    traversals = [_code_from_root(g.twin, g.next_at_vertex, r) for r in range(g.n_half_edges)]
    best = min(code for code, _ in traversals)
    base = next(order for code, order in traversals if code == best)
    maps = []
    for code, order in traversals:
        if code == best:
            phi = [0] * g.n_half_edges
            for a, b in zip(base, order):
                phi[a] = b
            maps.append(tuple(phi))
    return tuple(sorted(maps, key=lambda m: m != tuple(range(g.n_half_edges))))


def face_labelings(g: RibbonGraph) -> tuple[tuple[tuple[int, ...], int], ...]:
    """Distinct ways to label the faces by ``0..n-1`` up to automorphism.

    Returns ``(labels, stabilizer_order)`` pairs where ``labels[f]`` is the
    boundary index of face ``f`` and the stabilizer counts automorphisms
    preserving that labeling.
    """
    face_maps = [tuple(g.face_of[phi[g.faces[f][0]]] for f in range(g.n_faces))
                 for phi in automorphism_maps(g)]
    seen = set()
    out = []
    for labels in itertools.permutations(range(g.n_faces)):
        if labels in seen:
            continue
        orbit = set()
        stab = 0
        for fm in face_maps:
            moved = [0] * g.n_faces
            for f in range(g.n_faces):
                moved[fm[f]] = labels[f]
            moved = tuple(moved)
            orbit.add(moved)
            stab += moved == labels
        seen |= orbit
        out.append((labels, stab))
    return tuple(out)


def is_isomorphic(a: RibbonGraph, b: RibbonGraph) -> bool:
    if (a.n_half_edges, a.n_vertices, a.n_faces) != (b.n_half_edges, b.n_vertices, b.n_faces):
        return False
    return canonical_form(a) == canonical_form(b)


def canonical_relabel(g: RibbonGraph) -> RibbonGraph:
    """Isomorphic copy whose labels follow the canonical traversal."""
    code = canonical_form(g)
    n = g.n_half_edges
    return RibbonGraph(tuple(code[:n]), tuple(code[n:]))


# ---------------------------------------------------------------------------
# enumeration of trivalent types


@dataclass(frozen=True)
class CellDescriptor:
    representative: RibbonGraph
    automorphism_count: int
    genus: int
    n_faces: int

    @property
    def n_edges(self) -> int:
        return self.representative.n_edges

    @property
    def dimension(self) -> int:
        return 6 * self.genus - 6 + 2 * self.n_faces


def check_admissible(g: int, n: int) -> None:
    if g < 0 or n < 1 or (g == 0 and n < 3) or 6 * g - 6 + 3 * n <= 0:
        raise InadmissibleType(f"(g, n) = ({g}, {n}) is not admissible")


def _matchings(items: list[int]):
    if not items:
        yield []
        return
    a = items[0]
    for i in range(1, len(items)):
        b = items[i]
        rest = items[1:i] + items[i + 1:]
        for m in _matchings(rest):
            yield [(a, b)] + m


@lru_cache(maxsize=None)
def enumerate_trivalent_types(g: int, n: int) -> tuple[CellDescriptor, ...]:
    """All connected trivalent ribbon graphs of type (g, n) up to isomorphism.

    Every trivalent rotation system is conjugate to ``(0 1 2)(3 4 5)...``, so
    it suffices to fix that one and run over all perfect matchings.
    """
    check_admissible(g, n)
    n_edges = 6 * g - 6 + 3 * n
    n_half = 2 * n_edges
    nxt = tuple(3 * (h // 3) + (h + 1) % 3 for h in range(n_half))
    found: dict[tuple[int, ...], RibbonGraph] = {}
    for matching in _matchings(list(range(n_half))):
        twin = [0] * n_half
        for a, b in matching:
            twin[a], twin[b] = b, a
        cand = RibbonGraph(tuple(twin), nxt)
        if cand.n_faces != n:
            continue
        try:
            _check_connected(cand)
        except Disconnected:
            continue
        code = canonical_form(cand)
        if code not in found:
            found[code] = cand
    out = []
    for code in sorted(found):
        rep = RibbonGraph(tuple(code[:n_half]), tuple(code[n_half:]))
        out.append(CellDescriptor(rep, automorphisms(rep), g, n))
    return tuple(out)


# ---------------------------------------------------------------------------
# surgery


def contract_edge(mg: MetricRibbonGraph, e: int) -> MetricRibbonGraph:
    """Collapse the non-loop edge ``e``, splicing the two cyclic orders."""
    g = mg.graph
    if g.is_loop(e):
        raise LoopContraction(f"edge {e} is a loop")
    a, b = g.edges[e]
    nxt = list(g.next_at_vertex)

    def rest_of_cycle(h):
        out = []
        x = nxt[h]
        while x != h:
            out.append(x)
            x = nxt[x]
        return out

    merged = rest_of_cycle(a) + rest_of_cycle(b)
    keep = [h for h in range(g.n_half_edges) if h not in (a, b)]
    relabel = {h: i for i, h in enumerate(keep)}
    new_nxt = [0] * len(keep)
    ends = (g.vertex_of[a], g.vertex_of[b])
    for h in keep:
        if g.vertex_of[h] not in ends:
            new_nxt[relabel[h]] = relabel[nxt[h]]
    for i, h in enumerate(merged):
        new_nxt[relabel[h]] = relabel[merged[(i + 1) % len(merged)]]
    new_twin = [relabel[g.twin[h]] for h in keep]
    new_graph = build_graph(new_twin, new_nxt, stable=False)
    lengths = [None] * new_graph.n_edges
    for h in keep:
        lengths[new_graph.edge_of[relabel[h]]] = mg.lengths[g.edge_of[h]]
    return MetricRibbonGraph(new_graph, tuple(lengths))


def rerandomize_cyclic_orders(mg: MetricRibbonGraph, rng: np.random.Generator) -> MetricRibbonGraph:
    """Same metric graph with fresh uniformly random cyclic orders."""
    g = mg.graph
    nxt = [0] * g.n_half_edges
    for cyc in g.vertices:
        order = list(rng.permutation(cyc))
        for i, h in enumerate(order):
            nxt[h] = int(order[(i + 1) % len(order)])
    return MetricRibbonGraph(build_graph(g.twin, nxt, stable=False), mg.lengths)


# ---------------------------------------------------------------------------
# a few named graphs used throughout


def theta_graph(genus_one: bool = True) -> RibbonGraph:
    """Two trivalent vertices joined by three edges: one face (type (1,1))
    or three faces (type (0,3))."""
    second = (3, 4, 5) if genus_one else (3, 5, 4)
    return graph_from_cycles([(0, 3), (1, 4), (2, 5)], [(0, 1, 2), second])


def rose_graph(k: int = 2, one_face: bool = True) -> RibbonGraph:
    """One vertex with ``k`` loops.

    ``one_face`` interleaves the loop ends so that k = 2 gives type (1,1);
    otherwise loops are nested side by side (planar).
    """
    pairs = [(2 * i, 2 * i + 1) for i in range(k)]
    if one_face and k == 2:
        cycle = (0, 2, 1, 3)
    else:
        cycle = tuple(range(2 * k))
    return graph_from_cycles(pairs, [cycle], stable=False)
