"""Critical exponents from the directed-edge (Hashimoto) matrix.

With ``A(s)[i, j] = exp(-s * l(i))`` on the non-backtracking support, the
critical exponent is the unique ``s > 0`` where the Perron root of ``A(s)``
equals one.  Under ``z = exp(-s)`` this is the zero of
``p(z) = det(M(z) - I)`` of smallest modulus; ``p`` always vanishes somewhere
on the unit circle too, so "smallest modulus" is the operative reading.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache, reduce

import numpy as np
from scipy import optimize
from scipy.sparse.csgraph import connected_components

from .errors import DegreeOverflow, InsufficientData, NoConvergence, NotIrreducible, NotRational
from .geodesics import counting_function
from .ribbon import MetricRibbonGraph, RibbonGraph, contract_edge

DEGREE_CAP = 10**4
MIN_ORACLE_COUNT = 200
MODULUS_TOL = 1e-10  # smallest root modulus vs positive real zero (relative)


@dataclass(frozen=True)
class CriticalExponent:
    delta: float
    method: str
    residual: float


@lru_cache(maxsize=256)
def nb_support(g: RibbonGraph) -> np.ndarray:
    """Boolean ``2E x 2E`` non-backtracking adjacency."""
    H = g.n_half_edges
    B = np.zeros((H, H), dtype=bool)
    for h in range(H):
        B[h, list(g.successors(h))] = True
    B.setflags(write=False)
    return B


@dataclass(frozen=True)
class EdgeMatrix:
    support: np.ndarray
    lengths: np.ndarray  # per half-edge (row)

    @property
    def dimension(self) -> int:
        return self.support.shape[0]

    def __call__(self, z: complex) -> np.ndarray:
        """``M(z)`` with principal-branch powers ``z**l``."""
        z = complex(z)
        if z == 0:
            return np.zeros(self.support.shape, dtype=complex)
        return self.support * np.exp(self.lengths * np.log(z))[:, None]

    def at_s(self, s: float) -> np.ndarray:
        return self.support * np.exp(-s * self.lengths)[:, None]


def edge_matrix(mg: MetricRibbonGraph) -> EdgeMatrix:
    return EdgeMatrix(nb_support(mg.graph), mg.halfedge_lengths)


def p_gamma(mg: MetricRibbonGraph, z: complex) -> complex:
    M = edge_matrix(mg)(z)
    return complex(np.linalg.det(M - np.eye(M.shape[0])))


def spectral_radius(A: np.ndarray) -> float | np.ndarray:
    """Largest eigenvalue modulus; batched over leading axes."""
    return np.abs(np.linalg.eigvals(A)).max(axis=-1)


def _check_irreducible(g: RibbonGraph) -> None:
    n, _ = connected_components(nb_support(g), directed=True, connection="strong")
    if n != 1:
        raise NotIrreducible("non-backtracking edge graph is not strongly connected")


def delta_spectral(mg: MetricRibbonGraph, tol: float = 1e-12, *, max_iter: int = 400) -> CriticalExponent:
    """Bisection on ``s -> rho(A(s))``, which is strictly decreasing.

    Lengths are normalized by their maximum first so that rescaling a graph
    changes only the final division.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    g = mg.graph
    _check_irreducible(g)
    c = float(mg.length_array.max())
    em = EdgeMatrix(nb_support(g), mg.halfedge_lengths / c)
    lo, hi = 1e-6, upper_bound_delta(mg) * c + 1.0
    if not spectral_radius(em.at_s(lo)) > 1 or not spectral_radius(em.at_s(hi)) < 1:
        raise NoConvergence("bisection bracket does not straddle rho = 1")
    target = tol * c
    for _ in range(max_iter):
        if hi - lo <= target:
            break
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if spectral_radius(em.at_s(mid)) > 1:
            lo = mid
        else:
            hi = mid
    else:
        raise NoConvergence(f"no convergence after {max_iter} bisection steps")
    u = 0.5 * (lo + hi)
    residual = abs(float(spectral_radius(em.at_s(u))) - 1.0)
    return CriticalExponent(u / c, "spectral", residual)


def delta_batch(g: RibbonGraph, lengths: np.ndarray, tol: float = 1e-12, *,
                chunk: int = 20_000) -> np.ndarray:
    """Critical exponents of many metrics on one combinatorial graph.

    ``lengths`` has shape ``(N, E)``.  Works on lengths normalized by their
    maximum, where the root of ``log rho(A(u))`` lies in
    ``[log rho(B), log rho(B) / min l]``, and runs bracketed regula falsi
    (Illinois variant) on that convex decreasing function.
    """
    _check_irreducible(g)
    lengths = np.atleast_2d(np.asarray(lengths, dtype=float))
    B = nb_support(g).astype(float)
    log_rho_b = math.log(float(spectral_radius(B)))
    idx = list(g.edge_of)
    out = np.empty(len(lengths))

    def f(u, lam):
        A = B[None] * np.exp(-u[:, None] * lam)[:, :, None]
        return np.log(np.maximum(spectral_radius(A), 1e-300))

    for start in range(0, len(lengths), chunk):
        L = lengths[start:start + chunk]
        c = L.max(axis=1)
        lam = (L / c[:, None])[:, idx]
        lo = np.full(len(L), log_rho_b) * (1 - 1e-12)
        hi = log_rho_b / lam.min(axis=1) * (1 + 1e-12)
        f_lo, f_hi = f(lo, lam), f(hi, lam)
        side = np.zeros(len(L), dtype=int)
        for _ in range(200):
            live = (hi - lo) > tol * c
            if not live.any():
                break
            denom = f_lo - f_hi
            x = np.where(denom > 0, lo + f_lo * (hi - lo) / np.where(denom > 0, denom, 1), 0.5 * (lo + hi))
            x = np.clip(x, lo, hi)
            # keep progress when the secant point sits on an endpoint
            stuck = (x <= lo) | (x >= hi)
            x = np.where(stuck, 0.5 * (lo + hi), x)
            fx = f(x, lam)
            left = fx > 0
            lo = np.where(live & left, x, lo)
            f_lo = np.where(live & left, fx, f_lo)
            hi = np.where(live & ~left, x, hi)
            f_hi = np.where(live & ~left, fx, f_hi)
            # Illinois: halve the stale endpoint value after repeats
            f_hi = np.where(live & left & (side == 1), 0.5 * f_hi, f_hi)
            f_lo = np.where(live & ~left & (side == -1), 0.5 * f_lo, f_lo)
            side = np.where(live, np.where(left, 1, -1), side)
            exact = fx == 0
            lo = np.where(live & exact, x, lo)
            hi = np.where(live & exact, x, hi)
        else:
            raise NoConvergence("batch root finding did not converge")
        out[start:start + chunk] = 0.5 * (lo + hi) / c
    return out


def _exact_units(mg: MetricRibbonGraph):
    if not mg.is_rational:
        raise NotRational("polynomial route needs rational edge lengths")
    fr = mg.exact_lengths()
    D = reduce(math.lcm, (x.denominator for x in fr), 1)
    nums = [int(x * D) for x in fr]
    common = reduce(math.gcd, nums)
    per_half = np.array([nums[e] // common for e in mg.graph.edge_of], dtype=np.int64)
    return Fraction(common, D), per_half


def _det_in_w(B: np.ndarray, powers: np.ndarray, w) -> complex:
    w = np.asarray(w, dtype=complex)
    diag = w[..., None] ** powers
    M = B * diag[..., :, None]
    return np.linalg.det(M - np.eye(B.shape[0]))


def zeta_polynomial(mg: MetricRibbonGraph, degree_cap: int = DEGREE_CAP):
    """Integer coefficients (lowest degree first) of ``p`` in ``w`` where
    ``z = w**(1/unit)``, together with ``unit``.

    Coefficients come from evaluating the determinant at roots of unity and
    inverting the discrete Fourier transform; they are integers, so rounding
    is exact while the interpolation error stays below one half.
    """
    unit, powers = _exact_units(mg)
    B = nb_support(mg.graph).astype(float)
    bound = int(powers.sum())
    if bound > degree_cap:
        raise DegreeOverflow(f"polynomial degree bound {bound} exceeds cap {degree_cap}")
    K = bound + 1
    w = np.exp(2j * np.pi * np.arange(K) / K)
    vals = _det_in_w(B, powers, w)
    coef = np.fft.fft(vals) / K
    rounded = np.rint(coef.real)
    err = max(np.abs(coef.real - rounded).max(), np.abs(coef.imag).max())
    if err > 0.25:
        raise DegreeOverflow(f"coefficient interpolation too inaccurate ({err:.3g})")
    coeffs = [int(x) for x in rounded]
    while len(coeffs) > 1 and coeffs[-1] == 0:
        coeffs.pop()
    return coeffs, unit


def delta_polynomial(mg: MetricRibbonGraph, tol: float = 1e-12, *,
                     degree_cap: int = DEGREE_CAP) -> CriticalExponent:
    """All roots of ``p`` in ``w``; the smallest modulus gives delta.

    The positive real root at that modulus is refined by root-bracketing on
    the determinant itself, and the residual reports how far the smallest
    complex modulus sits from it (relative).
    """
    _check_irreducible(mg.graph)
    coeffs, unit = zeta_polynomial(mg, degree_cap)
    roots = np.roots(coeffs[::-1])
    roots = roots[np.abs(roots) > 0]
    r_min = float(np.abs(roots).min())
    _, powers = _exact_units(mg)
    B = nb_support(mg.graph).astype(float)

    def f(w):
        return float(np.real(_det_in_w(B, powers, w)))

    a, b = r_min * (1 - 1e-6), min(r_min * (1 + 1e-6), 1.0)
    if f(a) * f(b) > 0:
        # fall back to a wider search along the positive axis
        grid = np.linspace(r_min * 0.5, min(r_min * 1.5, 1.0), 2001)
        vals = np.array([f(x) for x in grid])
        sign = np.nonzero(np.sign(vals[:-1]) != np.sign(vals[1:]))[0]
        if not len(sign):
            raise NoConvergence("no positive real zero near the smallest-modulus root")
        k = sign[np.argmin(np.abs(grid[sign] - r_min))]
        a, b = grid[k], grid[k + 1]
    w_star = optimize.brentq(f, a, b, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
    delta = -math.log(w_star) / float(unit)
    residual = abs(r_min - w_star) / w_star
    if residual > max(tol, MODULUS_TOL):
        raise NoConvergence(f"smallest root modulus {r_min} is not on the positive axis ({w_star})")
    return CriticalExponent(delta, "polynomial", residual)


def delta_oracle(mg: MetricRibbonGraph, x_max: float, *, window: float = 0.5,
                 points: int = 2000) -> CriticalExponent:
    """Slope of ``log(x L(x))`` over ``[(1 - window) x_max, x_max]``.

    Uses geodesic counts only; no matrix machinery.
    """
    cf = counting_function(mg, x_max)
    if len(cf.cumulative) == 0 or cf.cumulative[-1] < MIN_ORACLE_COUNT:
        have = 0 if len(cf.cumulative) == 0 else int(cf.cumulative[-1])
        raise InsufficientData(f"only {have} geodesics up to {x_max}; need {MIN_ORACLE_COUNT}")
    # Regress at the last jump below each grid point so a lattice spectrum's
    # staircase does not bias the slope.
    grid = np.linspace((1 - window) * x_max, x_max, points)
    pos = np.searchsorted(cf.jumps, grid, side="right") - 1
    keep = pos >= 0
    if keep.sum() < 2 or len(np.unique(pos[keep])) < 2:
        raise InsufficientData("too few spectrum points in the regression window")
    x = cf.jumps[pos[keep]]
    y = np.log(x * cf.cumulative[pos[keep]])
    slope, intercept = np.polyfit(x, y, 1)
    resid = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))
    return CriticalExponent(float(slope), "oracle", resid)


# ---------------------------------------------------------------------------
# systole


@lru_cache(maxsize=256)
def nb_cycle_usage(g: RibbonGraph) -> np.ndarray:
    """Edge-usage counts (cycles x edges) of every simple cycle of the
    non-backtracking edge graph.

    A shortest closed geodesic never repeats a directed edge (cutting at a
    repeat leaves a shorter closed geodesic), so these cycles contain a
    systole.
    """
    H = g.n_half_edges
    succ = [g.successors(h) for h in range(H)]
    rows = []
    for s in range(H):
        on_path = [False] * H
        path = [s]
        on_path[s] = True
        iters = [iter(succ[s])]
        while iters:
            nxt = next(iters[-1], None)
            if nxt is None:
                iters.pop()
                on_path[path.pop()] = False
                continue
            if nxt == s:
                row = np.zeros(g.n_edges, dtype=np.int64)
                for h in path:
                    row[g.edge_of[h]] += 1
                rows.append(row)
            elif nxt > s and not on_path[nxt]:
                path.append(nxt)
                on_path[nxt] = True
                iters.append(iter(succ[nxt]))
    usage = np.unique(np.array(rows), axis=0)
    usage.setflags(write=False)
    return usage


def systole(mg: MetricRibbonGraph) -> float:
    return float((nb_cycle_usage(mg.graph) @ mg.length_array).min())


def systole_batch(g: RibbonGraph, lengths: np.ndarray) -> np.ndarray:
    return (np.atleast_2d(lengths) @ nb_cycle_usage(g).T).min(axis=1)


# ---------------------------------------------------------------------------
# contraction bound


def reduce_to_rose(mg: MetricRibbonGraph) -> MetricRibbonGraph:
    """Contract shortest non-loop edges until one vertex remains."""
    while mg.graph.n_vertices > 1:
        g = mg.graph
        candidates = [e for e in range(g.n_edges) if not g.is_loop(e)]
        e = min(candidates, key=lambda i: (float(mg.lengths[i]), i))
        mg = contract_edge(mg, e)
    return mg


def upper_bound_delta(mg: MetricRibbonGraph) -> float:
    """``log(2k - 1) / eps`` for the rose with ``k`` loops reached by
    contraction, with every loop shortened to the shortest one ``eps``.
    Contraction and shortening can only raise the exponent."""
    rose = reduce_to_rose(mg)
    k = rose.graph.n_edges
    return math.log(2 * k - 1) / float(rose.length_array.min())


def contraction_constant(genus: int, n_faces: int) -> float:
    """``K`` with ``upper_bound_delta <= K / systole`` for graphs of the
    given type (``V`` vertices, ``k`` independent cycles).

    Contracting shortest non-loop edges builds a minimum spanning tree, so
    every tree edge on the fundamental cycle of the shortest surviving loop
    ``e`` is no longer than ``e``.  That cycle is a closed geodesic of length
    at most ``V * l(e)``, hence ``l(e) >= systole / V``.
    """
    k = 2 * genus - 1 + n_faces
    V = 4 * genus - 4 + 2 * n_faces
    return V * math.log(2 * k - 1)
