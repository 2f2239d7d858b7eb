import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from twocenter3d.surface_map import (EmptyRegion, NoIntersection, SigmaL, build_map, build_sigma,
                                     gamma_curve, grand_tour, seb_prune, short_arc_census)

R = 1.0


def _sphere_samples(q, r, k, rng):
    d = rng.normal(size=(k, 3))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    return q + r * d


def _random_left(rng, n=5):
    P = rng.normal(scale=0.35, size=(n, 3))
    return P, float(P[:, 0].max() + rng.uniform(0.1, 0.8))


def test_single_point_cap():
    q = np.zeros(3)
    sigma = build_sigma(q[None], R, 0.5)
    assert isinstance(sigma, SigmaL) and len(sigma.faces) == 1
    rng = np.random.default_rng(0)
    for c in _sphere_samples(q, R, 2000, rng):
        # right cap of the sphere, left of the clip plane
        assert sigma.contains(c) == (c[0] >= 1e-7 and c[0] <= 0.5 - 1e-7) or abs(c[0]) < 1e-6 or abs(c[0] - 0.5) < 1e-6


def test_far_pair_is_empty():
    P = np.array([[0.0, 0, 0], [2.5, 0, 0]])
    assert isinstance(build_sigma(P, R, 3.0), EmptyRegion)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 8), st.integers(0, 10 ** 6))
def test_sigma_membership_sampling(n, seed):
    rng = np.random.default_rng(seed)
    P, lam = _random_left(rng, n)
    sigma = build_sigma(P, R, lam)
    if isinstance(sigma, EmptyRegion):
        return
    for q in P:
        for c in _sphere_samples(q, R, 200, rng):
            if not sigma.contains(c):
                continue
            assert np.linalg.norm(P - c, axis=1).max() <= R + 1e-6
            assert c[0] <= lam + 1e-6
            # outward normal of the ball of q at c points right
            assert c[0] - q[0] >= -1e-6


def test_gamma_tangent_point():
    q = np.zeros(3)
    p = np.array([2.0, 0, 0])
    sigma = build_sigma(q[None], R, 1.5)
    g = gamma_curve(p, sigma)
    assert len(g.pieces) == 1
    _, arc = g.pieces[0]
    assert arc.span == pytest.approx(0.0, abs=1e-9)
    assert np.allclose(arc.midpoint(), [1, 0, 0], atol=1e-6)


def test_gamma_far_point_empty():
    sigma = build_sigma(np.zeros((1, 3)), R, 1.5)
    assert gamma_curve(np.array([2.5, 0, 0]), sigma).pieces == []


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 6), st.integers(0, 10 ** 6))
def test_gamma_residuals(n, seed):
    rng = np.random.default_rng(seed)
    P, lam = _random_left(rng, n)
    sigma = build_sigma(P, R, lam)
    if isinstance(sigma, EmptyRegion):
        return
    for p in lam + np.abs(rng.normal(scale=0.5, size=(4, 3))) * [1, 0, 0] + rng.normal(scale=0.4, size=(4, 3)) * [0, 1, 1]:
        for fi, arc in gamma_curve(p, sigma).pieces:
            for c in arc.sample(9):
                assert abs(np.linalg.norm(c - p) - R) <= 1e-7
                assert sigma.contains(c)


def test_map_without_curves():
    sigma = build_sigma(np.zeros((1, 3)), R, 0.5)
    M = build_map(sigma, np.zeros((0, 3)))
    assert M.cells == [frozenset()]


def test_map_one_curve_splits_face():
    sigma = build_sigma(np.zeros((1, 3)), R, 0.9)
    M = build_map(sigma, np.array([[1.2, 0, 0]]))
    assert sorted(M.cells, key=len) == [frozenset(), frozenset({0})]


def _instance(seed, n_left=6, n_right=8):
    rng = np.random.default_rng(seed)
    P_L, lam = _random_left(rng, n_left)
    P_R = np.column_stack([lam + rng.uniform(0.05, 1.2, n_right), rng.normal(scale=0.4, size=(n_right, 2))])
    return P_L, P_R, lam


@pytest.mark.parametrize("seed", range(8))
def test_cells_and_pair_bound(seed):
    P_L, P_R, lam = _instance(seed)
    sigma = build_sigma(P_L, R, lam)
    if isinstance(sigma, EmptyRegion):
        pytest.skip("empty region")
    M = build_map(sigma, P_R, check_bound=True)
    assert M.max_pair_hits <= 3
    for sig, c in zip(M.cells, M.cell_points):
        assert sigma.contains(c)
        covered = frozenset(np.flatnonzero(np.linalg.norm(P_R - c, axis=1) <= R + 1e-8).tolist())
        assert covered == sig


@pytest.mark.parametrize("seed", range(8))
def test_grand_tour_signatures(seed):
    P_L, P_R, lam = _instance(seed)
    sigma = build_sigma(P_L, R, lam)
    if isinstance(sigma, EmptyRegion):
        pytest.skip("empty region")
    M = build_map(sigma, P_R)
    tour = grand_tour(M)
    assert {v for v in tour.visits if v >= 0} == set(range(len(M.cells)))
    cur = set(tour.sets[0])
    for k in range(1, len(tour)):
        cur ^= {tour.toggles[k]}
        assert frozenset(cur) == tour.sets[k]
        if tour.visits[k] >= 0:
            assert tour.sets[k] == M.cells[tour.visits[k]]


def test_grand_tour_single_cell():
    sigma = build_sigma(np.zeros((1, 3)), R, 0.5)
    tour = grand_tour(build_map(sigma, np.zeros((0, 3))))
    assert len(tour) == 1 and tour.sets == (frozenset(),)


def test_census_symmetric_tangency():
    a = np.array([1.0, 0.5, 0])
    b = np.array([1.0, -0.5, 0])
    # q on the bisector plane of ab with |aq| = |bq| = 2r: C_ab touches or sits inside B_r(q)
    q = np.array([1.0 - math.sqrt(4 - 0.25), 0, 0])
    try:
        rec = short_arc_census(a, b, q, R, 0.5)
    except NoIntersection:
        return
    assert rec.omega_span == pytest.approx(0.0, abs=1e-6) or not rec.short


def test_census_far_pair():
    with pytest.raises(NoIntersection):
        short_arc_census(np.array([1.0, 0, 0]), np.array([4.0, 0, 0]), np.zeros(3), R, 0.5)


def test_census_no_violations():
    rng = np.random.default_rng(77)
    short = 0
    for _ in range(2000):
        lam = 0.0
        q = np.array([-rng.uniform(0, 0.9), *rng.normal(scale=0.4, size=2)])
        a = np.array([rng.uniform(0, 1.0), *rng.normal(scale=0.5, size=2)])
        b = np.array([rng.uniform(0, 1.0), *rng.normal(scale=0.5, size=2)])
        try:
            rec = short_arc_census(a, b, q, R, lam)
        except NoIntersection:
            continue
        short += rec.short
        assert not rec.violates
    assert short > 0


def test_seb_prune():
    P_L = np.array([[0.0, 0, 0], [0.5, 0, 0]])
    assert not seb_prune(P_L, np.array([[1.0, 0, 0]]), R)
    assert seb_prune(np.array([[0.0, 0, 0], [3.0, 0, 0]]), np.zeros((0, 3)), R)
    # the two right points are both forced and cannot share a ball
    P_R = np.array([[3.0, 3, 0], [3.0, -3, 0]])
    assert seb_prune(P_L, P_R, R)


def test_four_spheres_through_one_point_count_once():
    # c = origin is at distance 1 from both left points and both right points, and lies
    # on the edge shared by the two faces of sigma_L
    s = math.sqrt(0.5)
    P_L = np.array([[-s, s, 0.0], [-s, -s, 0.0]])
    P_R = np.array([[s, 0.0, s], [s, 0.0, -s]])
    sigma = build_sigma(P_L, R, 0.3)
    M = build_map(sigma, P_R, check_bound=True)
    at_origin = [v for v, _, _ in M.vertices if np.linalg.norm(v) < 1e-7]
    assert len(at_origin) >= 1
    assert M.pair_hits[(0, 1)] == 1
