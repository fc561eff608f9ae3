"""Empirical distributions of critical exponents and Wasserstein-1 distance."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational

import numpy as np

from .errors import Empty, LipschitzViolation, NonPositiveWeight
from .ribbon import theta_graph
from .zeta import delta_batch


@dataclass(frozen=True, eq=False)
class EmpiricalDistribution:
    """Sorted distinct atoms with normalized weights.

    Exact (rational) inputs stay exact: atoms and weights are then object
    arrays of ``Fraction``.
    """

    values: np.ndarray
    weights: np.ndarray

    @property
    def exact(self) -> bool:
        return self.values.dtype == object

    def __len__(self):
        return len(self.values)

    def cdf(self, x):
        cum = np.cumsum(self.weights)
        idx = np.searchsorted(self.values, x, side="right")
        return np.where(idx > 0, cum[np.maximum(idx - 1, 0)], 0)

    def mean(self):
        return _sum(self.values * self.weights, self.exact)

    def pushforward(self, fn) -> "EmpiricalDistribution":
        return empirical([fn(v) for v in self.values], self.weights)


def _sum(arr, exact: bool):
    return sum(arr) if exact else math.fsum(arr)


def empirical(values, weights=None) -> EmpiricalDistribution:
    values = list(values)
    if not values:
        raise Empty("no samples")
    if weights is None:
        weights = [1] * len(values)
    weights = list(weights)
    if len(weights) != len(values):
        raise ValueError("values and weights differ in length")
    if any(not w > 0 for w in weights):
        raise NonPositiveWeight("weights must be positive")
    exact = all(isinstance(x, Rational) for x in values + weights)
    if exact:
        merged: dict = {}
        for v, w in zip(values, weights):
            merged[Fraction(v)] = merged.get(Fraction(v), 0) + Fraction(w)
        total = sum(merged.values())
        atoms = sorted(merged)
        return EmpiricalDistribution(np.array(atoms, dtype=object),
                                     np.array([merged[a] / total for a in atoms], dtype=object))
    v = np.asarray(values, dtype=float)
    w = np.asarray(weights, dtype=float)
    atoms, inverse = np.unique(v, return_inverse=True)
    mass = np.bincount(inverse, weights=w)
    return EmpiricalDistribution(atoms, mass / mass.sum())


def wasserstein1(mu: EmpiricalDistribution, nu: EmpiricalDistribution):
    """``integral |F_mu - F_nu|`` over the merged breakpoints (exact for
    step CDFs)."""
    exact = mu.exact and nu.exact
    if exact:
        support = np.array(sorted(set(mu.values) | set(nu.values)), dtype=object)
    else:
        support = np.union1d(mu.values.astype(float), nu.values.astype(float))
    if len(support) < 2:
        return Fraction(0) if exact else 0.0
    gap = np.abs(mu.cdf(support[:-1]) - nu.cdf(support[:-1]))
    return _sum(gap * np.diff(support), exact)


def _validate_test_function(xs, ys, tol=1e-12):
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.ndim != 1 or xs.shape != ys.shape or len(xs) < 1:
        raise ValueError("breakpoints must be matching 1-d sequences")
    if np.any(np.diff(xs) <= 0):
        raise ValueError("breakpoint abscissae must be strictly increasing")
    slopes = np.diff(ys) / np.diff(xs)
    if np.any(np.abs(slopes) > 1 + tol):
        raise LipschitzViolation(f"slope {np.abs(slopes).max():.6g} exceeds 1")
    return xs, ys


def kantorovich_bound(mu: EmpiricalDistribution, nu: EmpiricalDistribution, xs, ys) -> float:
    """``integral f d(mu - nu)`` for the piecewise-linear ``f`` through the
    breakpoints ``(xs, ys)``, extended flat beyond them.  It never exceeds
    the Wasserstein-1 distance when ``f`` is 1-Lipschitz."""
    xs, ys = _validate_test_function(xs, ys)

    def integral(d):
        vals = np.interp(d.values.astype(float), xs, ys)
        return math.fsum(vals * d.weights.astype(float))

    return integral(mu) - integral(nu)


@dataclass(frozen=True)
class DeltaGrid:
    x: np.ndarray
    y: np.ndarray
    delta: np.ndarray

    def at(self, x: float, y: float) -> float:
        hit = np.nonzero(np.isclose(self.x, x) & np.isclose(self.y, y))[0]
        if not len(hit):
            raise KeyError((x, y))
        return float(self.delta[hit[0]])


def grid_delta(resolution: int, tol: float = 1e-12) -> DeltaGrid:
    """Critical exponent of the one-face theta graph with edge lengths
    ``(x, y, 1 - x - y)`` at the grid points ``(i/R, j/R)`` strictly inside
    the triangle."""
    if resolution < 8:
        raise ValueError("resolution must be at least 8")
    R = resolution
    ij = np.array([(i, j) for i in range(1, R) for j in range(1, R - i)])
    x, y = ij[:, 0] / R, ij[:, 1] / R
    z = (R - ij[:, 0] - ij[:, 1]) / R
    d = delta_batch(theta_graph(True), np.column_stack([x, y, z]), tol)
    return DeltaGrid(x, y, d)


@dataclass(frozen=True)
class Histogram:
    edges: np.ndarray
    masses: np.ndarray

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[1:] + self.edges[:-1])


def histogram(dist: EmpiricalDistribution, bins: int | None = None, edges=None,
              kde_bandwidth: float | None = None) -> Histogram:
    """Bin masses over ``bins`` equal bins spanning the support, or over
    given ``edges``.  ``kde_bandwidth`` replaces raw masses by a Gaussian
    kernel estimate integrated per bin (presentation only)."""
    values = dist.values.astype(float)
    weights = dist.weights.astype(float)
    if edges is None:
        if bins is None or bins < 2:
            raise ValueError("need at least 2 bins")
        lo, hi = values.min(), values.max()
        if hi == lo:
            hi = lo + 1.0
        edges = np.linspace(lo, hi, bins + 1)
    edges = np.asarray(edges, dtype=float)
    if kde_bandwidth:
        from scipy.stats import norm

        cdf = norm.cdf((edges[:, None] - values[None, :]) / kde_bandwidth) @ weights
        masses = np.diff(cdf)
    else:
        masses, _ = np.histogram(values, bins=edges, weights=weights)
    return Histogram(edges, masses)
