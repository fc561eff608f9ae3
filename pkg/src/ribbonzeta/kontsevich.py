"""Sampling the Kontsevich measure on combinatorial moduli space.

A top-dimensional cell is the set of positive edge-length vectors of one
trivalent ribbon graph with prescribed face lengths.  In edge-length
coordinates the Kontsevich volume form is a constant multiple of Lebesgue
measure, the constant being fixed by the ideal Wolpert matrix of the derived
geodesics.  Everything here works in an orthonormal chart ``l = l0 + Q t`` of
the constraint affine space; volumes and constants refer to that chart, so
only their products are chart-independent.
"""

from __future__ import annotations

import itertools
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import null_space
from scipy.optimize import linprog
from scipy.spatial import ConvexHull

from .errors import EmptyCell, NonPositiveLength, RankDeficient, UnknownMode, ZeroDimensional
from .geodesics import derived_s_matrix, derived_geodesic, traversal_counts
from .ribbon import (CellDescriptor, MetricRibbonGraph, enumerate_trivalent_types, face_incidence,
                     face_labelings)
from .zeta import systole_batch

MODES = ("standard", "paper-11")
STREAM_CHUNK = 10_000
BURN_IN = 1000
THINNING = 10


def _constraint_matrix(cell: CellDescriptor, mode: str) -> np.ndarray:
    if mode == "standard":
        return face_incidence(cell.representative)
    if mode == "paper-11":
        if (cell.genus, cell.n_faces) != (1, 1):
            raise UnknownMode("mode 'paper-11' applies to type (1,1) only")
        return np.ones((1, cell.n_edges), dtype=int)
    raise UnknownMode(f"unknown constraint mode {mode!r}; expected one of {MODES}")


def _targets(L, n: int) -> np.ndarray:
    target = np.atleast_1d(np.asarray(L, dtype=float))
    if target.shape == (1,) and n > 1:
        target = np.full(n, target[0])
    if target.shape != (n,):
        raise ValueError(f"expected {n} boundary lengths, got {target.size}")
    if not np.all(target > 0):
        raise NonPositiveLength("boundary lengths must be positive")
    return target


@dataclass(frozen=True, eq=False)
class CellPolytope:
    cell: CellDescriptor
    constraint_matrix: np.ndarray
    target: np.ndarray
    mode: str
    interior: np.ndarray  # strictly positive feasible length vector
    basis: np.ndarray     # E x d, orthonormal, spans the constraint null space
    vertices: np.ndarray  # polytope vertices as length vectors

    @property
    def dimension(self) -> int:
        return self.basis.shape[1]

    @property
    def is_simplex(self) -> bool:
        return self.dimension >= 1 and len(self.vertices) == self.dimension + 1

    def chart(self, lengths: np.ndarray) -> np.ndarray:
        return (np.asarray(lengths) - self.interior) @ self.basis

    @property
    def volume(self) -> float:
        """Lebesgue volume in the orthonormal chart (1 for a point)."""
        d = self.dimension
        if d == 0:
            return 1.0
        pts = self.chart(self.vertices)
        if d == 1:
            return float(pts.max() - pts.min())
        return float(ConvexHull(pts).volume)


def _vertices(A: np.ndarray, target: np.ndarray, tol: float) -> np.ndarray:
    """Basic feasible solutions of ``A l = target, l >= 0``."""
    E = A.shape[1]
    r = np.linalg.matrix_rank(A)
    found = []
    for support in itertools.combinations(range(E), r):
        sub = A[:, support]
        if np.linalg.matrix_rank(sub) < r:
            continue
        sol, *_ = np.linalg.lstsq(sub, target, rcond=None)
        if np.any(sol < -tol) or np.abs(sub @ sol - target).max() > tol:
            continue
        v = np.zeros(E)
        v[list(support)] = np.clip(sol, 0, None)
        if not any(np.abs(v - w).max() <= tol for w in found):
            found.append(v)
    return np.array(found)


def cell_polytope(cell: CellDescriptor, L, mode: str = "standard", labels=None) -> CellPolytope:
    """Edge lengths of ``cell`` realizing boundary lengths ``L``.

    Face ``f`` of the representative gets boundary length ``L[labels[f]]``
    (identity labeling by default).
    """
    A = _constraint_matrix(cell, mode)
    target = _targets(L, A.shape[0])
    if labels is not None and mode == "standard":
        if sorted(labels) != list(range(A.shape[0])):
            raise ValueError(f"labels {labels} is not a permutation of the faces")
        target = target[list(labels)]
    E = A.shape[1]
    scale = float(target.max())
    # maximize the smallest edge length t subject to A l = target, l >= t
    c = np.zeros(E + 1)
    c[-1] = -1.0
    A_ub = np.hstack([-np.eye(E), np.ones((E, 1))])
    res = linprog(c, A_ub=A_ub, b_ub=np.zeros(E), A_eq=np.hstack([A, np.zeros((A.shape[0], 1))]),
                  b_eq=target, bounds=[(0, None)] * E + [(None, scale)], method="highs")
    tol = 1e-9 * scale
    if res.status != 0 or -res.fun <= tol:
        raise EmptyCell(f"no positive edge lengths realize boundary lengths {target.tolist()}")
    interior = res.x[:E]
    basis = null_space(A.astype(float))
    return CellPolytope(cell, A, target, mode, interior, basis, _vertices(A.astype(float), target, tol))


# ---------------------------------------------------------------------------
# uniform sampling


def _hit_and_run(p: CellPolytope, rng: np.random.Generator, size: int) -> np.ndarray:
    Q, x = p.basis, p.interior.copy()
    out = np.empty((size, len(x)))
    total = BURN_IN + size * THINNING
    dirs = rng.standard_normal((total, p.dimension))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    u01 = rng.random(total)
    k = 0
    for step in range(total):
        v = Q @ dirs[step]
        # keep x + s v > 0
        with np.errstate(divide="ignore"):
            ratios = -x / v
        s_max = ratios[v < 0].min()
        s_min = ratios[v > 0].max()
        x = x + (s_min + u01[step] * (s_max - s_min)) * v
        if step >= BURN_IN and (step - BURN_IN) % THINNING == THINNING - 1:
            out[k] = x
            k += 1
    return out


def _rejection(p: CellPolytope, rng: np.random.Generator, size: int) -> np.ndarray:
    """Uniform samples by rejection from the chart bounding box (testing aid)."""
    pts = p.chart(p.vertices)
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    out = []
    while sum(len(o) for o in out) < size:
        t = rng.uniform(lo, hi, size=(4 * size, p.dimension))
        l = p.interior + t @ p.basis.T
        out.append(l[np.all(l > 0, axis=1)])
    return np.concatenate(out)[:size]


def sample_lengths(p: CellPolytope, rng: np.random.Generator, size: int) -> np.ndarray:
    """``size`` edge-length vectors uniform on the cell, shape ``(size, E)``.

    Simplices are sampled exactly by Dirichlet barycentric weights; other
    polytopes by hit-and-run.
    """
    if p.dimension == 0:
        raise ZeroDimensional("cell is a single point")
    if p.is_simplex:
        w = rng.dirichlet(np.ones(len(p.vertices)), size=size)
        return w @ p.vertices
    return _hit_and_run(p, rng, size)


def sample_cell(p: CellPolytope, rng: np.random.Generator) -> MetricRibbonGraph:
    lengths = sample_lengths(p, rng, 1)[0]
    return MetricRibbonGraph(p.cell.representative, tuple(float(x) for x in lengths))


# ---------------------------------------------------------------------------
# cell constants


def derived_length_matrix(cell: CellDescriptor) -> np.ndarray:
    """Row ``e``: edge traversal counts of the derived multi-geodesic of ``e``,
    so its length is ``row @ lengths``."""
    g = cell.representative
    mg = MetricRibbonGraph(g, (1,) * g.n_edges)
    return np.array([sum(traversal_counts(g, c) for c in derived_geodesic(mg, e))
                     for e in range(g.n_edges)])


@lru_cache(maxsize=128)
def _constant_data(cell: CellDescriptor, mode: str):
    g = cell.representative
    S = derived_s_matrix(MetricRibbonGraph(g, (1,) * g.n_edges)).matrix.astype(float)
    N = derived_length_matrix(cell).astype(float)
    Q = null_space(_constraint_matrix(cell, mode).astype(float))
    return S, N, Q


def full_rank_selections(cell: CellDescriptor, mode: str = "standard"):
    """Index sets ``I`` of derived geodesics whose S-submatrix and length
    Jacobian are both invertible, in lexicographic order."""
    S, N, Q = _constant_data(cell, mode)
    d = Q.shape[1]
    for sel in itertools.combinations(range(S.shape[0]), d):
        idx = list(sel)
        s_det = np.linalg.det(S[np.ix_(idx, idx)])
        j_det = np.linalg.det(N[idx] @ Q)
        if abs(s_det) > 0.5 and abs(j_det) > 1e-9:
            yield sel


def cell_constant(cell: CellDescriptor, L=None, mode: str = "standard", selection=None) -> float:
    """Density of the Kontsevich form against chart Lebesgue measure:
    ``|det(dk_I / dt)| / sqrt(det S_II)`` for a full-rank selection ``I``.

    ``L`` is accepted for symmetry with :func:`cell_polytope`; the constant
    depends only on the combinatorics.
    """
    S, N, Q = _constant_data(cell, mode)
    d = Q.shape[1]
    if d == 0:
        return 1.0
    if selection is None:
        selection = next(full_rank_selections(cell, mode), None)
        if selection is None:
            raise RankDeficient("no full-rank selection of derived geodesics")
    idx = list(selection)
    s_det = np.linalg.det(S[np.ix_(idx, idx)])
    if abs(s_det) < 0.5:
        raise RankDeficient(f"selection {tuple(idx)} has a singular S-submatrix")
    return float(abs(np.linalg.det(N[idx] @ Q)) / np.sqrt(abs(s_det)))


# ---------------------------------------------------------------------------
# whole-space sampling


@dataclass(frozen=True)
class SamplePoint:
    graph: MetricRibbonGraph
    cell_id: int
    weight: float


@dataclass(frozen=True)
class LabeledCell:
    """A trivalent type with boundary labels on its faces; ``stabilizer``
    counts the automorphisms preserving the labels."""

    cell: CellDescriptor
    labels: tuple[int, ...]
    stabilizer: int


@dataclass(frozen=True, eq=False)
class SpaceSample:
    cells: tuple[LabeledCell, ...]
    cell_weights: np.ndarray  # normalized selection probabilities
    cell_ids: np.ndarray      # (N,)
    lengths: np.ndarray       # (N, E)

    def __len__(self):
        return len(self.cell_ids)

    def points(self) -> list[SamplePoint]:
        w = 1.0 / len(self)
        return [SamplePoint(MetricRibbonGraph(self.cells[c].cell.representative, tuple(map(float, l))), int(c), w)
                for c, l in zip(self.cell_ids, self.lengths)]

    def by_cell(self):
        """``(cell_id, row indices)`` for each cell present."""
        for c in np.unique(self.cell_ids):
            yield int(c), np.nonzero(self.cell_ids == c)[0]


def labeled_cells(g: int, n: int, mode: str = "standard") -> tuple[LabeledCell, ...]:
    out = []
    for cell in enumerate_trivalent_types(g, n):
        if mode == "paper-11":
            _constraint_matrix(cell, mode)
            out.append(LabeledCell(cell, (0,), cell.automorphism_count))
            continue
        for labels, stab in face_labelings(cell.representative):
            out.append(LabeledCell(cell, labels, stab))
    return tuple(out)


def cell_weights(g: int, n: int, L, mode: str = "standard", *, aut_weight: bool = True):
    """Face-labeled cells with their polytopes and unnormalized Kontsevich
    masses (volume times constant, over the labeled automorphism count)."""
    cells = labeled_cells(g, n, mode)
    polys, masses = [], []
    for lc in cells:
        try:
            p = cell_polytope(lc.cell, L, mode, lc.labels)
        except EmptyCell:
            polys.append(None)
            masses.append(0.0)
            continue
        mass = p.volume * cell_constant(lc.cell, L, mode)
        if aut_weight:
            mass /= lc.stabilizer
        polys.append(p)
        masses.append(mass)
    masses = np.array(masses)
    if not masses.sum() > 0:
        raise EmptyCell(f"no cell of type ({g},{n}) realizes boundary lengths {L}")
    return cells, polys, masses


def worker_count() -> int:
    env = os.environ.get("RIBBONZETA_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def stream_rng(seed: int, stream: int) -> np.random.Generator:
    return np.random.default_rng(int(seed) ^ stream)


def sample_space(g: int, n: int, L, N: int, seed: int = 0, mode: str = "standard", *,
                 aut_weight: bool = True, threads: int | None = None) -> SpaceSample:
    """``N`` draws from the normalized Kontsevich measure of type ``(g, n)``.

    Draws are produced in fixed chunks; chunk ``i`` uses the generator
    seeded with ``seed ^ i``, so output does not depend on the thread count.
    """
    if N < 1:
        raise ValueError("N must be at least 1")
    cells, polys, masses = cell_weights(g, n, L, mode, aut_weight=aut_weight)
    probs = masses / masses.sum()
    E = cells[0].cell.n_edges

    def run(stream: int):
        rng = stream_rng(seed, stream)
        size = min(STREAM_CHUNK, N - stream * STREAM_CHUNK)
        ids = rng.choice(len(cells), size=size, p=probs)
        lengths = np.empty((size, E))
        for c in range(len(cells)):
            rows = np.nonzero(ids == c)[0]
            if not len(rows):
                continue
            p = polys[c]
            if p.dimension == 0:
                lengths[rows] = p.interior
            else:
                lengths[rows] = sample_lengths(p, rng, len(rows))
        return ids, lengths

    n_streams = -(-N // STREAM_CHUNK)
    workers = min(threads or worker_count(), n_streams)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, range(n_streams)))
    else:
        parts = [run(i) for i in range(n_streams)]
    return SpaceSample(tuple(cells), probs,
                       np.concatenate([p[0] for p in parts]),
                       np.concatenate([p[1] for p in parts]))


def sample_systoles(sample: SpaceSample) -> np.ndarray:
    out = np.empty(len(sample))
    for c, rows in sample.by_cell():
        out[rows] = systole_batch(sample.cells[c].cell.representative, sample.lengths[rows])
    return out


@dataclass(frozen=True)
class Estimate:
    value: float
    stderr: float
    n: int


def short_geodesic_probability(g: int, n: int, L, eps: float, N: int, seed: int = 0,
                               mode: str = "standard", *, aut_weight: bool = True) -> Estimate:
    """Monte-Carlo ``P(systole <= eps)`` with its binomial standard error."""
    if N < 1000:
        raise ValueError("N must be at least 1000")
    if not eps > 0:
        raise ValueError("eps must be positive")
    sys = sample_systoles(sample_space(g, n, L, N, seed, mode, aut_weight=aut_weight))
    p = float(np.mean(sys <= eps))
    return Estimate(p, float(np.sqrt(p * (1 - p) / N)), N)
