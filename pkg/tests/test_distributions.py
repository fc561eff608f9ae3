import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import lp_wasserstein
from ribbonzeta.errors import Empty, LipschitzViolation, NonPositiveWeight
from ribbonzeta.distributions import empirical, grid_delta, histogram, kantorovich_bound, wasserstein1


def test_point_masses_exact():
    d = wasserstein1(empirical([1]), empirical([Fraction(99, 100)]))
    assert d == Fraction(1, 100)
    assert wasserstein1(empirical([1.0]), empirical([0.99])) == pytest.approx(0.01, abs=1e-15)


def test_empirical_merges_atoms():
    d = empirical([1, 2, 1], [1, 1, 2])
    assert list(d.values) == [1, 2]
    assert list(d.weights) == [Fraction(3, 4), Fraction(1, 4)]
    assert d.mean() == Fraction(5, 4)


def test_empirical_errors():
    with pytest.raises(Empty):
        empirical([])
    with pytest.raises(NonPositiveWeight):
        empirical([1, 2], [1, 0])
    with pytest.raises(ValueError):
        empirical([1, 2], [1])


def _random_pair(rng, max_atoms=20):
    m, n = rng.integers(1, max_atoms + 1, 2)
    xs, ys = rng.normal(size=m), rng.normal(size=n)
    p, q = rng.random(m) + 0.01, rng.random(n) + 0.01
    return xs, p / p.sum(), ys, q / q.sum()


def test_cdf_formula_matches_lp_coupling():
    rng = np.random.default_rng(0)
    for _ in range(60):
        xs, p, ys, q = _random_pair(rng)
        assert wasserstein1(empirical(xs, p), empirical(ys, q)) == pytest.approx(lp_wasserstein(xs, p, ys, q), abs=1e-10)


def test_metric_axioms_and_kantorovich():
    rng = np.random.default_rng(1)
    for _ in range(500):
        xs, p, ys, q = _random_pair(rng)
        zs = rng.normal(size=rng.integers(1, 10))
        mu, nu, rho = empirical(xs, p), empirical(ys, q), empirical(zs)
        d = wasserstein1(mu, nu)
        assert d >= 0 and wasserstein1(mu, mu) == 0
        assert d == pytest.approx(wasserstein1(nu, mu), abs=1e-12)
        assert d <= wasserstein1(mu, rho) + wasserstein1(rho, nu) + 1e-12
        # random 1-Lipschitz piecewise-linear test function
        bx = np.sort(rng.uniform(-3, 3, 6))
        bx = bx[np.concatenate([[True], np.diff(bx) > 1e-9])]
        by = np.concatenate([[0.0], np.cumsum(np.diff(bx) * rng.uniform(-1, 1, len(bx) - 1))])
        assert kantorovich_bound(mu, nu, bx, by) <= d + 1e-12


def test_kantorovich_attained_by_identity_shift():
    # f(x) = x gives the mean difference, which equals W1 for a pure shift
    mu = empirical([0.0, 1.0, 3.0])
    nu = mu.pushforward(lambda v: v + 0.5)
    assert kantorovich_bound(nu, mu, [-10, 10], [-10, 10]) == pytest.approx(wasserstein1(mu, nu))


def test_lipschitz_violation():
    mu = empirical([0.0])
    with pytest.raises(LipschitzViolation):
        kantorovich_bound(mu, mu, [0, 1], [0, 2])
    with pytest.raises(ValueError):
        kantorovich_bound(mu, mu, [1, 0], [0, 0])


@settings(max_examples=40)
@given(st.lists(st.fractions(min_value=-5, max_value=5, max_denominator=20), min_size=1, max_size=8),
       st.lists(st.fractions(min_value=-5, max_value=5, max_denominator=20), min_size=1, max_size=8))
def test_exact_matches_float(a, b):
    exact = wasserstein1(empirical(a), empirical(b))
    assert isinstance(exact, Fraction)
    approx = wasserstein1(empirical([float(x) for x in a]), empirical([float(x) for x in b]))
    assert float(exact) == pytest.approx(approx, abs=1e-12)


def test_grid_symmetry_and_minimum():
    grid = grid_delta(12)
    # permuting the three edge lengths of the theta graph leaves delta fixed
    for x, y in zip(grid.x, grid.y):
        z = 1 - x - y
        assert grid.at(x, y) == pytest.approx(grid.at(y, x), rel=1e-10)
        if z > 1e-9:
            assert grid.at(x, y) == pytest.approx(grid.at(z, y), rel=1e-10)
    assert grid.delta.min() == pytest.approx(3 * math.log(2), rel=1e-10)
    assert grid.at(1 / 3, 1 / 3) == grid.delta.min()
    with pytest.raises(KeyError):
        grid.at(0.5, 0.5)
    with pytest.raises(ValueError):
        grid_delta(4)


def test_histogram_masses():
    d = empirical(np.linspace(0, 1, 101))
    h = histogram(d, bins=10)
    assert len(h.masses) == 10 and h.masses.sum() == pytest.approx(1)
    k = histogram(d, edges=np.linspace(-1, 2, 31), kde_bandwidth=0.05)
    assert k.masses.sum() == pytest.approx(1, abs=1e-6)
    assert np.allclose(h.centers, np.linspace(0.05, 0.95, 10))
    with pytest.raises(ValueError):
        histogram(d)


def _theta_deltas(L, N, seed):
    from ribbonzeta.kontsevich import sample_space
    from ribbonzeta.ribbon import theta_graph
    from ribbonzeta.zeta import delta_batch

    s = sample_space(1, 1, L, N, seed=seed, mode="paper-11")
    return delta_batch(theta_graph(True), s.lengths)


def test_histogram_starts_at_lower_bound():
    d = empirical(_theta_deltas(1.0, 3000, 1))
    h = histogram(d, bins=20)
    width = h.edges[1] - h.edges[0]
    assert h.edges[0] >= 3 * math.log(2) - width
    assert h.masses.sum() == pytest.approx(1)


def test_bin_error_shrinks_like_root_n():
    edges = np.array([2.0, 2.15, 2.3, 1e9])
    spread = {}
    for N in (1000, 4000):
        masses = [histogram(empirical(_theta_deltas(1.0, N, 100 + r)), edges=edges).masses[0] for r in range(12)]
        spread[N] = np.std(masses, ddof=1)
    # quadrupling N should halve the spread; allow sampling noise of the estimate itself
    assert 0.25 < spread[4000] / spread[1000] < 1.0


def test_pushforward_distance_shrinks():
    alpha = 2.0
    dists = []
    for N in (500, 20_000):
        at_l = _theta_deltas(1.0, N, 7)
        at_al = _theta_deltas(alpha, N, 8)
        dists.append(wasserstein1(empirical(at_l / alpha), empirical(at_al)))
    assert dists[1] < dists[0]
    assert dists[1] < 0.01
