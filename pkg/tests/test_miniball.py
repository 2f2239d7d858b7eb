import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from twocenter3d.miniball import (EmptyInput, balls_intersection_status, candidate_radii,
                                  classify_radius, exhaustive_seb, seb_radius,
                                  smallest_enclosing_ball)


def test_single_point():
    eb = smallest_enclosing_ball([[1.0, 2, 3]])
    assert eb.radius == 0 and np.allclose(eb.center, [1, 2, 3])


def test_two_points():
    eb = smallest_enclosing_ball([[0.0, 0, 0], [2, 0, 0]])
    assert math.isclose(eb.radius, 1.0) and np.allclose(eb.center, [1, 0, 0])


def test_tetrahedron_circumradius(tetra):
    eb = smallest_enclosing_ball(tetra)
    assert abs(eb.radius - math.sqrt(3 / 8)) <= 1e-12
    assert len(eb.support) == 4


def test_obtuse_triangle_uses_longest_edge():
    eb = smallest_enclosing_ball([[0.0, 0, 0], [4, 0, 0], [2, 0.5, 0]])
    assert math.isclose(eb.radius, 2.0)


def test_empty_input():
    with pytest.raises(EmptyInput):
        smallest_enclosing_ball(np.zeros((0, 3)))
    assert seb_radius(np.zeros((0, 3))) == -1.0


def test_classify_radius():
    assert classify_radius(1.0, 1.0) == "degenerate"
    assert classify_radius(0.5, 1.0) == "fulldim"
    assert classify_radius(1.5, 1.0) == "empty"
    assert classify_radius(-1.0, 1.0) == "fulldim"


def test_ball_intersection_status_kinds():
    assert balls_intersection_status([[0.0, 0, 0], [2, 0, 0]], 1.0).kind == "degenerate"
    assert balls_intersection_status([[0.0, 0, 0], [2, 0, 0]], 2.0).kind == "fulldim"
    assert balls_intersection_status([[0.0, 0, 0], [3, 0, 0]], 1.0).kind == "empty"
    assert balls_intersection_status(np.zeros((0, 3)), 1.0).kind == "fulldim"


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 12), st.integers(0, 10 ** 6))
def test_matches_exhaustive_support_search(n, seed):
    P = np.random.default_rng(seed).normal(size=(n, 3))
    eb = smallest_enclosing_ball(P)
    _, r = exhaustive_seb(P)
    assert abs(eb.radius - r) <= 1e-9 * max(1.0, r)
    assert np.all(np.linalg.norm(P - eb.center, axis=1) <= eb.radius * (1 + 1e-9) + 1e-12)


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 20), st.integers(0, 10 ** 6), st.integers(0, 5))
def test_order_independent(n, seed, s2):
    P = np.random.default_rng(seed).normal(size=(n, 3))
    assert abs(smallest_enclosing_ball(P, seed=0).radius - smallest_enclosing_ball(P, seed=s2).radius) <= 1e-12


def test_candidate_radii_contains_optimum(tetra):
    c = candidate_radii(tetra)
    assert np.any(np.abs(c - 0.5) <= 1e-12)
    assert c[0] == 0.0 and np.all(np.diff(c) > 0)
