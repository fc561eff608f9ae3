"""Closed geodesics on ribbon graphs.

A closed geodesic is a cyclic sequence of directed edges (half-edges) in
which no step is followed by its own reverse, wraparound included.  Paths are
stored in their lexicographically least rotation with orientation kept; two
paths are the same unoriented class when their :func:`class_key` agree.

Intersections follow the trivalent definition: a pair of maximal shared runs
("bodies") whose tails diverge at both end vertices, and which cross iff the
cyclic order of (body, tail of the first path, tail of the second path) is
the same at both ends.  The crossing sign is that cyclic order at either end:
``+1`` when the first path's tail follows the body counterclockwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .errors import BudgetExceeded, NotClosed, NotTrivalent, NullHomotopic, SameGeodesic
from .ribbon import MetricRibbonGraph, RibbonGraph

DEFAULT_CAP = 10**7
# Integer-unit counting is used when the length grid stays below this size.
MAX_UNITS = 2_000_000


def _graph(obj) -> RibbonGraph:
    return obj.graph if isinstance(obj, MetricRibbonGraph) else obj


def canonical_rotation(seq: Sequence[int]) -> tuple[int, ...]:
    seq = tuple(seq)
    if not seq:
        return seq
    return min(seq[i:] + seq[:i] for i in range(len(seq)))


def reverse_steps(g: RibbonGraph, seq: Sequence[int]) -> tuple[int, ...]:
    return tuple(g.twin[h] for h in reversed(seq))


def class_key(g: RibbonGraph, seq: Sequence[int]) -> tuple[int, ...]:
    """Key identifying the unoriented free-homotopy class."""
    return min(canonical_rotation(seq), canonical_rotation(reverse_steps(g, seq)))


def is_primitive(seq: Sequence[int]) -> bool:
    k = len(seq)
    for p in range(1, k):
        if k % p == 0 and tuple(seq[p:]) + tuple(seq[:p]) == tuple(seq):
            return False
    return True


@dataclass(frozen=True)
class GeodesicPath:
    steps: tuple[int, ...]
    metric_length: float

    @property
    def combinatorial_length(self) -> int:
        return len(self.steps)

    def __len__(self):
        return len(self.steps)


def _is_closed_nonbacktracking(g: RibbonGraph, steps: Sequence[int]) -> bool:
    k = len(steps)
    for i in range(k):
        a, b = steps[i], steps[(i + 1) % k]
        if g.head(a) != g.tail(b) or b == g.twin[a]:
            return False
    return True


def make_geodesic(mg: MetricRibbonGraph, steps: Sequence[int]) -> GeodesicPath:
    g = mg.graph
    steps = tuple(int(h) for h in steps)
    if not steps or not _is_closed_nonbacktracking(g, steps):
        raise NotClosed(f"{steps} is not a closed non-backtracking walk")
    lengths = mg.halfedge_lengths
    return GeodesicPath(canonical_rotation(steps), float(sum(lengths[h] for h in steps)))


def geodesic_representative(mg: MetricRibbonGraph, walk: Sequence[int]) -> GeodesicPath:
    """Cancel backtracks (cyclically) until the walk is a geodesic."""
    g = mg.graph
    walk = [int(h) for h in walk]
    if not walk:
        raise NullHomotopic("empty walk")
    for i in range(len(walk)):
        if g.head(walk[i]) != g.tail(walk[(i + 1) % len(walk)]):
            raise NotClosed(f"steps {walk[i]} and {walk[(i + 1) % len(walk)]} are not incident")
    stack: list[int] = []
    for h in walk:
        if stack and stack[-1] == g.twin[h]:
            stack.pop()
        else:
            stack.append(h)
    lo, hi = 0, len(stack)
    while hi - lo >= 2 and stack[lo] == g.twin[stack[hi - 1]]:
        lo += 1
        hi -= 1
    reduced = stack[lo:hi]
    if not reduced:
        raise NullHomotopic("walk is null-homotopic")
    return make_geodesic(mg, reduced)


# ---------------------------------------------------------------------------
# length units


def _integer_units(mg: MetricRibbonGraph):
    """``(unit, per-half-edge integer lengths)`` for rational graphs, else None."""
    if not mg.is_rational:
        return None
    fr = mg.exact_lengths()
    denom = reduce(math.lcm, (x.denominator for x in fr), 1)
    nums = [int(x * denom) for x in fr]
    common = reduce(math.gcd, nums)
    unit = Fraction(common, denom)
    per_edge = [n // common for n in nums]
    return unit, np.array([per_edge[e] for e in mg.graph.edge_of], dtype=np.int64)


# ---------------------------------------------------------------------------
# enumeration


def enumerate_geodesics(mg: MetricRibbonGraph, x_max: float, *, oriented: bool = False,
                        cap: int = DEFAULT_CAP) -> list[GeodesicPath]:
    """All primitive closed geodesics of length at most ``x_max``.

    One representative per class (unoriented by default), sorted by
    ``(metric_length, steps)``.  Depth-first search from each start edge
    ``s`` only visits edges ``>= s`` so each rotation class is reached from
    its least element.
    """
    if not x_max > 0:
        raise ValueError("x_max must be positive")
    g = mg.graph
    units = _integer_units(mg)
    if units is not None:
        unit, w = units
        budget = math.floor(Fraction(x_max) / unit)
        w = [int(x) for x in w]
    else:
        w = [float(x) for x in mg.halfedge_lengths]
        budget = x_max * (1 + 1e-12)
    succ = [g.successors(h) for h in range(g.n_half_edges)]
    hl = mg.halfedge_lengths
    found: dict[tuple[int, ...], GeodesicPath] = {}
    for s in range(g.n_half_edges):
        if w[s] > budget:
            continue
        path = [s]
        total = [w[s]]
        iters = [iter(succ[s])]
        while iters:
            nxt = next(iters[-1], None)
            if nxt is None:
                iters.pop()
                path.pop()
                total.pop()
                continue
            if nxt < s:
                continue
            if nxt == s:
                seq = tuple(path)
                if is_primitive(seq) and canonical_rotation(seq) == seq:
                    key = seq if oriented else class_key(g, seq)
                    if key == seq and key not in found:
                        found[key] = GeodesicPath(seq, float(sum(hl[h] for h in seq)))
                        if len(found) > cap:
                            raise BudgetExceeded(f"more than {cap} geodesics below {x_max}")
            t = total[-1] + w[nxt]
            if t > budget:
                continue
            path.append(nxt)
            total.append(t)
            iters.append(iter(succ[nxt]))
    return sorted(found.values(), key=lambda p: (p.metric_length, p.steps))


# ---------------------------------------------------------------------------
# counting


def _mobius(n: int) -> int:
    out = 1
    p = 2
    while p * p <= n:
        if n % p == 0:
            n //= p
            if n % p == 0:
                return 0
            out = -out
        p += 1
    return -out if n > 1 else out


@dataclass(frozen=True)
class CountingFunction:
    """Right-continuous step function ``x -> L(x)``."""

    jumps: np.ndarray       # sorted lengths where the count increases
    cumulative: np.ndarray  # count of geodesics with length <= jumps[i]
    x_max: float

    def __call__(self, x):
        idx = np.searchsorted(self.jumps, np.asarray(x, dtype=float), side="right")
        cum = np.concatenate([[0], self.cumulative])
        return cum[idx]


def _rooted_closed_walks(succ, w: np.ndarray, n_units: int) -> dict[int, np.ndarray]:
    """``W[k][L]`` = number of rooted closed non-backtracking walks with
    ``k`` steps and total length ``L`` units."""
    H = len(succ)
    preds = [[e for e in range(H) if f in succ[e]] for f in range(H)]
    closes = np.zeros((H, H), dtype=bool)  # closes[s, e]: e may be followed by s
    for e in range(H):
        for s in succ[e]:
            closes[s, e] = True
    C = np.zeros((H, H, n_units + 1), dtype=np.int64)
    for s in range(H):
        if w[s] <= n_units:
            C[s, s, w[s]] = 1
    W = {}
    k = 1
    limit = np.int64(2) ** 60
    while C.any():
        W[k] = np.einsum("se,sel->l", closes.astype(np.int64), C)
        new = np.zeros_like(C)
        for f in range(H):
            m = int(w[f])
            if m > n_units:
                continue
            for e in preds[f]:
                new[:, f, m:] += C[:, e, : n_units + 1 - m]
        if new.max(initial=0) > limit:
            raise BudgetExceeded("walk counts overflow 64-bit integers")
        C = new
        k += 1
    return W


def _primitive_class_counts(W: dict[int, np.ndarray], n_units: int) -> np.ndarray:
    """Oriented primitive classes per length unit, by Mobius inversion over
    common divisors of step count and length."""
    out = np.zeros(n_units + 1, dtype=np.int64)
    for k in W:
        acc = np.zeros(n_units + 1, dtype=np.int64)
        for d in range(1, k + 1):
            if k % d:
                continue
            mu = _mobius(d)
            if mu == 0 or (k // d) not in W:
                continue
            base = W[k // d]
            acc[::d] += mu * base[: n_units // d + 1]
        if np.any(acc % k):
            raise AssertionError("primitive rooted walks not divisible by step count")
        out += acc // k
    return out


def counting_function(mg: MetricRibbonGraph, x_max: float, *, oriented: bool = False,
                      cap: int = DEFAULT_CAP) -> CountingFunction:
    """``L(x)`` for ``x <= x_max`` without listing the geodesics when the
    lengths are rational (transfer counting on an integer length grid);
    otherwise by enumeration."""
    units = _integer_units(mg)
    n_units = None
    if units is not None:
        unit, w = units
        n_units = math.floor(Fraction(x_max) / unit)
    if n_units is None or n_units > MAX_UNITS:
        paths = enumerate_geodesics(mg, x_max, oriented=oriented, cap=cap)
        lens = np.array([p.metric_length for p in paths])
        jumps, counts = np.unique(lens, return_counts=True)
        return CountingFunction(jumps, np.cumsum(counts), float(x_max))
    g = mg.graph
    succ = [g.successors(h) for h in range(g.n_half_edges)]
    W = _rooted_closed_walks(succ, w, n_units)
    per_unit = _primitive_class_counts(W, n_units)
    if not oriented:
        if np.any(per_unit % 2):
            raise AssertionError("oriented classes do not pair with their reverses")
        per_unit //= 2
    nz = np.nonzero(per_unit)[0]
    jumps = nz * float(unit)
    return CountingFunction(jumps, np.cumsum(per_unit[nz]), float(x_max))


def count_geodesics(mg: MetricRibbonGraph, x: float, *, oriented: bool = False,
                    cap: int = DEFAULT_CAP) -> int:
    """Number of primitive closed geodesics with length at most ``x``."""
    if x <= 0:
        return 0
    return int(counting_function(mg, x, oriented=oriented, cap=cap)(x))


# ---------------------------------------------------------------------------
# intersections


class _MaxPair(NamedTuple):
    i: int
    j: int
    length: int
    reversed: bool
    start_sign: int
    end_sign: int
    body: tuple[int, ...]
    tails: tuple[int, int, int, int]


def _require_trivalent(g: RibbonGraph) -> None:
    if not g.is_trivalent:
        raise NotTrivalent("intersections are defined on trivalent graphs only")


def _orientation_sign(g: RibbonGraph, body_half: int, first_tail: int) -> int:
    return 1 if g.next_at_vertex[body_half] == first_tail else -1


def _maximal_pairs(g: RibbonGraph, G: Sequence[int], eta: Sequence[int]) -> list[_MaxPair]:
    """Every maximal shared run of ``G`` against ``eta`` in either relative
    orientation.  Runs are maximal, so tails differ at both ends."""
    out = []
    m = len(G)
    for rev, H in ((False, tuple(eta)), (True, reverse_steps(g, eta))):
        n = len(H)
        period = math.lcm(m, n)
        for i in range(m):
            gi, gprev = G[i], G[i - 1]
            for j in range(n):
                if gi != H[j] or gprev == H[j - 1]:
                    continue
                T = 1
                while T < period and G[(i + T) % m] == H[(j + T) % n]:
                    T += 1
                body = tuple(G[(i + t) % m] for t in range(T))
                start_b, t1, t2 = gi, g.twin[gprev], g.twin[H[j - 1]]
                end_b = g.twin[G[(i + T - 1) % m]]
                u1, u2 = G[(i + T) % m], H[(j + T) % n]
                out.append(_MaxPair(i, j, T, rev,
                                    _orientation_sign(g, start_b, t1),
                                    _orientation_sign(g, end_b, u1),
                                    body, (t1, t2, u1, u2)))
    return out


@dataclass(frozen=True)
class GraphIntersection:
    body: tuple[int, ...]             # directed edges, in the first path's direction
    tails: tuple[int, int, int, int]  # (first in, second in, first out, second out)
    sign: int


def _steps(p) -> tuple[int, ...]:
    return p.steps if isinstance(p, GeodesicPath) else tuple(p)


def intersections(graph, gamma, eta) -> list[GraphIntersection]:
    g = _graph(graph)
    _require_trivalent(g)
    G, E = _steps(gamma), _steps(eta)
    if class_key(g, G) == class_key(g, E):
        raise SameGeodesic("intersections of a geodesic with itself: use is_simple")
    return [GraphIntersection(p.body, p.tails, p.start_sign)
            for p in _maximal_pairs(g, G, E) if p.start_sign == p.end_sign]


def intersection_number(graph, gamma, eta) -> int:
    return len(intersections(graph, gamma, eta))


def self_intersections(graph, gamma) -> list[GraphIntersection]:
    """Crossing pairs of distinct subarcs of one geodesic (each unordered
    pair once)."""
    g = _graph(graph)
    _require_trivalent(g)
    G = _steps(gamma)
    seen = set()
    out = []
    for p in _maximal_pairs(g, G, G):
        if p.start_sign != p.end_sign:
            continue
        m = len(G)
        if p.reversed:
            other = ((m - 1 - ((p.j + p.length - 1) % m)) % m, True)
        else:
            other = (p.j, False)
        mine = (p.i, other[0], p.reversed)
        mirror = (other[0], p.i, p.reversed)
        if mirror in seen:
            continue
        seen.add(mine)
        out.append(GraphIntersection(p.body, p.tails, p.start_sign))
    return out


def is_simple(graph, gamma) -> bool:
    g = _graph(graph)
    _require_trivalent(g)
    G = _steps(gamma)
    return not any(p.start_sign == p.end_sign for p in _maximal_pairs(g, G, G))


def ideal_wolpert_pairs(graph, gamma, eta) -> int:
    """Sum of signed crossing numbers over all maximal intersection pairs."""
    g = _graph(graph)
    _require_trivalent(g)
    return sum(p.start_sign for p in _maximal_pairs(g, _steps(gamma), _steps(eta))
               if p.start_sign == p.end_sign)


def traversal_counts(g: RibbonGraph, path) -> np.ndarray:
    counts = np.zeros(g.n_edges, dtype=np.int64)
    for h in _steps(path):
        counts[g.edge_of[h]] += 1
    return counts


def edge_rule_profile(g: RibbonGraph, path) -> np.ndarray:
    """Per-edge sum of the local twist contributions of ``path``.

    On each traversal the third edge at the entry vertex and at the exit
    vertex lies left or right of the path; branches on opposite sides give
    ``+1`` (left then right) or ``-1`` (right then left), same side gives 0.
    """
    _require_trivalent(g)
    H = _steps(path)
    k = len(H)
    prof = np.zeros(g.n_edges, dtype=np.int64)
    nxt = g.next_at_vertex
    for idx, d in enumerate(H):
        prev, after = H[idx - 1], H[(idx + 1) % k]
        left_entry = nxt[d] != g.twin[prev]
        left_exit = nxt[g.twin[d]] == after
        prof[g.edge_of[d]] += int(left_entry) - int(left_exit)
    return prof


def ideal_wolpert_edgerule(graph, gamma, eta) -> int:
    """Twist contributions of ``eta`` weighted by how often ``gamma`` runs
    over each edge."""
    g = _graph(graph)
    _require_trivalent(g)
    return int(traversal_counts(g, gamma) @ edge_rule_profile(g, eta))


# ---------------------------------------------------------------------------
# derived geodesics and the S-matrix


def derived_geodesic(mg: MetricRibbonGraph, e: int) -> tuple[GeodesicPath, ...]:
    """Simple multi-geodesic built from the face(s) on the two sides of ``e``.

    Two distinct faces: walk around the first face, skipping ``e``, then
    around the second, giving the third boundary of the pair of pants they
    span with ``e``.  One face on both sides: the face walk splits at the two
    traversals of ``e`` into two closed walks, the other two pants
    boundaries.  Components are deduplicated by unoriented class.
    """
    g = mg.graph
    _require_trivalent(g)
    d, dr = g.edges[e]

    def face_from(h):
        cyc = g.faces[g.face_of[h]]
        k = cyc.index(h)
        return list(cyc[k:] + cyc[:k])

    if g.face_of[d] != g.face_of[dr]:
        walks = [face_from(d)[1:] + face_from(dr)[1:]]
    else:
        walk = face_from(d)
        k = walk.index(dr)
        walks = [walk[1:k], walk[k + 1:]]
    comps: dict[tuple[int, ...], GeodesicPath] = {}
    for w in walks:
        p = geodesic_representative(mg, w)
        comps.setdefault(class_key(g, p.steps), p)
    return tuple(comps[k] for k in sorted(comps))


def iw_multi(graph, A: Iterable, B: Iterable, *, method: str = "edgerule") -> int:
    fn = ideal_wolpert_edgerule if method == "edgerule" else ideal_wolpert_pairs
    return sum(fn(graph, a, b) for a in A for b in B)


class SMatrix(NamedTuple):
    matrix: np.ndarray
    rank: int


def s_matrix(graph, multis: Sequence, *, method: str = "edgerule") -> SMatrix:
    """``S[i, j] = iw(multis[i], multis[j])``; each entry of ``multis`` is a
    geodesic or a collection of geodesic components."""
    g = _graph(graph)
    _require_trivalent(g)
    ms = [(m,) if isinstance(m, GeodesicPath) else tuple(m) for m in multis]
    k = len(ms)
    S = np.zeros((k, k), dtype=np.int64)
    for a in range(k):
        for b in range(a + 1, k):
            S[a, b] = iw_multi(g, ms[a], ms[b], method=method)
            S[b, a] = iw_multi(g, ms[b], ms[a], method=method)
    rank = int(np.linalg.matrix_rank(S.astype(float))) if k else 0
    return SMatrix(S, rank)


def derived_s_matrix(mg: MetricRibbonGraph, *, method: str = "edgerule") -> SMatrix:
    return s_matrix(mg, [derived_geodesic(mg, e) for e in range(mg.graph.n_edges)], method=method)
