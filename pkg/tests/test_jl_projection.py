import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from curious_trader.divergence import GaussianSummary, bc_normal_mv
from curious_trader.errors import (AttemptsExhausted, DimensionMismatch, InvalidEpsilon,
                                   TooFewPoints)
from curious_trader.jl_projection import (JlCertificate, align_dimensions, compare_projected,
                                          compare_summaries, find_map, full_image,
                                          jl_min_dimension, make_map, max_distortion, pair_map,
                                          pair_seeds, preserves_distances, project,
                                          project_summary)


def bound_holds(k, eps, n):
    """k >= 4 ln n / (eps^2/2 - eps^3/3), with the polynomial side in exact rationals."""
    e = Fraction(eps)
    return Fraction(k) * (e * e / 2 - e**3 / 3) >= 4 * Fraction(math.log(n))


def test_min_dimension_known_values():
    # 48 ln 100 = 221.048..., 48 ln 2 = 33.27...
    assert jl_min_dimension(0.5, 100) == 222
    assert jl_min_dimension(0.5, 2) == 34


@settings(max_examples=200, deadline=None)
@given(st.floats(0.01, 0.99), st.integers(2, 10**6))
def test_min_dimension_is_tight(eps, n):
    k = jl_min_dimension(eps, n)
    assert bound_holds(k, eps, n)
    assert not bound_holds(k - 1, eps, n)


@pytest.mark.parametrize("n", [2, 10, 100, 5000])
def test_min_dimension_decreases_in_epsilon(n):
    assert jl_min_dimension(0.3, n) > jl_min_dimension(0.5, n)


@pytest.mark.parametrize("eps, n, exc", [(0.0, 10, InvalidEpsilon), (1.0, 10, InvalidEpsilon),
                                         (0.5, 1, TooFewPoints)])
def test_min_dimension_rejects(eps, n, exc):
    with pytest.raises(exc):
        jl_min_dimension(eps, n)


def test_certificate_rejects_small_k():
    with pytest.raises(ValueError):
        JlCertificate(0.5, 100, 221, 10)


def test_map_determinism_and_entries():
    cert = JlCertificate(0.5, 2, 200, 200)
    a, b = make_map(200, cert, 9), make_map(200, cert, 9)
    np.testing.assert_array_equal(a.matrix, b.matrix)
    assert abs(a.matrix.mean()) < 0.05
    assert not np.array_equal(a.matrix, make_map(200, cert, 10).matrix)


def test_project_zero_and_linearity():
    pmap = make_map(12, JlCertificate.for_points(0.5, 10, 12), 4)
    np.testing.assert_array_equal(project(pmap, np.zeros(12)), np.zeros(pmap.k))
    rng = np.random.default_rng(0)
    for _ in range(50):
        x, y = rng.normal(size=12), rng.normal(size=12)
        alpha, beta = rng.normal(size=2)
        lhs = project(pmap, alpha * x + beta * y)
        rhs = alpha * project(pmap, x) + beta * project(pmap, y)
        assert np.max(np.abs(lhs - rhs)) <= 1e-10
    with pytest.raises(DimensionMismatch):
        project(pmap, np.zeros(5))


def test_squared_norm_preserved_in_expectation():
    u = np.random.default_rng(1).normal(size=8)
    cert = JlCertificate.for_points(0.5, 2, 8)
    ratios = [np.sum(project(make_map(8, cert, s), u) ** 2) / np.sum(u**2) for s in range(2000)]
    assert abs(np.mean(ratios) - 1.0) < 0.05


def brute_force_ok(pmap, points, eps):
    pts = np.asarray(points)
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            orig = float(np.sum((pts[i] - pts[j]) ** 2))
            new = float(np.sum((project(pmap, pts[i]) - project(pmap, pts[j])) ** 2))
            if not (1 - eps) * orig - 1e-9 * orig <= new <= (1 + eps) * orig + 1e-9 * orig:
                return False
    return True


def test_find_map_two_points():
    pts = np.array([[0.0, 1.0, 2.0], [3.0, -1.0, 0.5]])
    pmap = find_map(pts, 0.5, seed=0)
    assert pmap.k == 34 and pmap.attempts >= 1
    assert preserves_distances(pmap, pts, 0.5)
    assert brute_force_ok(pmap, pts, 0.5)


def test_find_map_allows_duplicates():
    pts = np.array([[1.0, 2.0], [1.0, 2.0], [0.0, 0.0]])
    pmap = find_map(pts, 0.5, seed=3)
    assert preserves_distances(pmap, pts, 0.5)


def test_find_map_determinism():
    pts = np.random.default_rng(5).normal(size=(10, 20))
    a, b = find_map(pts, 0.5, 17), find_map(pts, 0.5, 17)
    assert a.seed == b.seed and a.attempts == b.attempts
    np.testing.assert_array_equal(a.matrix, b.matrix)


def test_find_map_exhaustion(monkeypatch):
    import curious_trader.jl_projection as jl

    tried = []
    monkeypatch.setattr(jl, "_within", lambda pmap, diffs, eps: tried.append(pmap.seed) or
                        np.zeros(len(diffs), dtype=bool))
    with pytest.raises(AttemptsExhausted):
        find_map(np.eye(3), 0.5, seed=10, max_attempts=4)
    assert tried == [10, 11, 12, 13]


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 15), st.integers(1, 30), st.integers(0, 2**31))
def test_find_map_always_verified(n, d, seed):
    pts = np.random.default_rng(seed).normal(size=(n, d))
    pmap = find_map(pts, 0.5, seed)
    assert brute_force_ok(pmap, pts, 0.5)
    assert max_distortion(pmap, pts) <= 0.5


def test_align_dimensions_pads_and_preserves():
    a, b = np.array([1.0, 2.0]), np.array([0.5, -1.0, 3.0, 2.0])
    fa, fb = align_dimensions(a, b, 0.5, seed=2)
    assert fa.shape == fb.shape == (34,)
    orig = np.sum((np.array([1.0, 2.0, 0.0, 0.0]) - b) ** 2)
    assert 0.5 * orig <= np.sum((fa - fb) ** 2) <= 1.5 * orig
    same_a, same_b = align_dimensions(a, a, 0.5, seed=2)
    np.testing.assert_array_equal(same_a, same_b)


def test_align_dimensions_projects_even_at_k():
    a, b = np.ones(34), np.arange(34.0)
    fa, _ = align_dimensions(a, b, 0.5, seed=0)
    assert not np.array_equal(fa, a)


def test_pair_seeds_match_pair_map():
    rng = np.random.default_rng(8)
    anchor = rng.normal(size=3)
    others = [rng.normal(size=rng.integers(1, 6)) for _ in range(40)]
    d, seeds = pair_seeds(anchor, others, 0.5, seed=100)
    assert d == 5
    for other, s in zip(others, seeds):
        assert pair_map(anchor, np.pad(other, (0, d - other.size)), 0.5, 100).seed == s


def test_projected_summaries_match_full_image():
    rng = np.random.default_rng(12)
    summaries = []
    for dim in (3, 3, 2):
        x = rng.normal(size=(40, dim)) * rng.uniform(0.5, 2.0, size=dim)
        a = x - x.mean(0)
        summaries.append(GaussianSummary(x.mean(0), a.T @ a / 39 + 1e-3 * np.eye(dim)))
    pmap = make_map(3, JlCertificate.for_points(0.5, 2, 3), 21)
    proj = [project_summary(s, pmap) for s in summaries]
    fast = compare_projected(proj[0], proj[1:])
    for j, other in enumerate(proj[1:], start=1):
        ridge = max(proj[0].ridge, other.ridge)
        slow = bc_normal_mv(full_image(proj[0], ridge, pmap, summaries[0]),
                            full_image(other, ridge, pmap, summaries[j]))
        assert fast[j - 1] == pytest.approx(slow.distance, rel=1e-7, abs=1e-9)


def test_compare_summaries_identity_and_symmetry():
    s1 = GaussianSummary([0.1, 0.2], [[1.0, 0.2], [0.2, 0.5]])
    s2 = GaussianSummary([-0.3, 0.4], [[0.7, 0.0], [0.0, 1.1]])
    same, _ = compare_summaries(s1, s1, 0.5, 0)
    assert same.distance == pytest.approx(0.0, abs=1e-12)
    d12, m12 = compare_summaries(s1, s2, 0.5, 0)
    d21, m21 = compare_summaries(s2, s1, 0.5, 0)
    assert m12.seed == m21.seed
    assert d12.distance == pytest.approx(d21.distance, rel=1e-12)
    assert d12.distance > 0
