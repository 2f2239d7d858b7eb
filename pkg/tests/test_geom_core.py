import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from twocenter3d.geom_core import (DIRECTION_SET_CONSTANT, Ball, Circle3, ConcentricEqual, Disjoint,
                                   InvalidBeta, Nested, Plane, TangentPoint, Tolerance, VerticalPlane,
                                   canonical_directions, direction_alpha, dual_planes_array,
                                   dualize_plane, dualize_point, is_above, rotation_to_x,
                                   side_of_plane, sphere_sphere_intersect)

coord = st.floats(-50, 50, allow_nan=False)
point = st.tuples(coord, coord, coord).map(np.array)


def test_tolerance_hybrid():
    tol = Tolerance(1e-9, 1e-9)
    assert tol.close(1.0, 1.0 + 1e-10)
    assert not tol.close(1.0, 1.0 + 1e-8)
    assert tol.close(1e6, 1e6 + 1e-4)
    assert tol.less(1.0, 1.1) and not tol.less(1.0, 1.0 + 1e-12)
    with pytest.raises(ValueError):
        Tolerance(-1.0, 0.0)


def test_plane_normalized_and_sides():
    h = Plane(np.array([0.0, 0, 2]), 2.0)
    assert np.allclose(h.normal, [0, 0, 1]) and h.offset == 1.0
    assert side_of_plane([0, 0, 3], h) == 1
    assert side_of_plane([0, 0, -3], h) == -1
    assert side_of_plane([5, 5, 1], h) == 0


def test_duality_examples():
    h = dualize_point([1.0, 2.0, 3.0])
    # w = u + 2v - 3 passes through (0, 0, -3) and (1, 1, 0)
    assert abs(h.value([0, 0, -3])) < 1e-12
    assert abs(h.value([1, 1, 0])) < 1e-12
    with pytest.raises(VerticalPlane):
        dualize_plane(Plane(np.array([1.0, 0, 0]), 0.0))


@given(point)
def test_duality_round_trip(p):
    h = dualize_point(p)
    assert np.allclose(dualize_plane(h), p, atol=1e-9 * (1 + np.abs(p).max()))


@given(point, point)
def test_dual_sign_is_side_of_primal_plane(p, x):
    # a dual point (a, b, c) stands for the primal plane z = a x + b y - c
    N, d = dual_planes_array(p[None, :])
    s = float(N[0] @ x - d[0])
    a, b, c = x
    above = p[2] - (a * p[0] + b * p[1] - c)
    assert math.isclose(s, above, rel_tol=1e-9, abs_tol=1e-6)


def test_is_above():
    h = Plane(np.array([0.0, 0, 1]), 0.0)
    assert is_above([0, 0, 1], h) and not is_above([0, 0, -1], h)


def test_sphere_sphere_cases():
    a = Ball([0, 0, 0], 1.0)
    c = sphere_sphere_intersect(a, Ball([1, 0, 0], 1.0))
    assert isinstance(c, Circle3)
    assert np.allclose(c.center, [0.5, 0, 0]) and math.isclose(c.radius, math.sqrt(3) / 2)
    t = sphere_sphere_intersect(a, Ball([2, 0, 0], 1.0))
    assert isinstance(t, TangentPoint) and np.allclose(t.point, [1, 0, 0])
    assert isinstance(sphere_sphere_intersect(a, Ball([3, 0, 0], 1.0)), Disjoint)
    assert isinstance(sphere_sphere_intersect(a, Ball([0.1, 0, 0], 2.0)), Nested)
    with pytest.raises(ConcentricEqual):
        sphere_sphere_intersect(a, Ball([0, 0, 0], 1.0))


@settings(max_examples=50)
@given(point, st.floats(0.5, 3), point, st.floats(0.5, 3))
def test_circle_points_on_both_spheres(c1, r1, c2, r2):
    try:
        res = sphere_sphere_intersect(Ball(c1, r1), Ball(c2, r2))
    except ConcentricEqual:
        return
    if isinstance(res, Circle3):
        pts = res.point_at(np.linspace(0, 2 * np.pi, 7))
        assert np.allclose(np.linalg.norm(pts - c1, axis=1), r1, atol=1e-7)
        assert np.allclose(np.linalg.norm(pts - c2, axis=1), r2, atol=1e-7)


def test_direction_alpha_values():
    assert math.isclose(direction_alpha(2.0), math.pi / 4)
    assert math.isclose(direction_alpha(1.0), math.acos(0.25) - math.acos(0.5))
    with pytest.raises(InvalidBeta):
        direction_alpha(0.0)
    with pytest.raises(InvalidBeta):
        direction_alpha(2.5)


@pytest.mark.parametrize("beta", [2.0, 1.0, 0.5, 0.25])
def test_direction_set_covers_sphere(beta):
    D = canonical_directions(beta)
    alpha = direction_alpha(beta)
    assert len(D) <= DIRECTION_SET_CONSTANT / alpha ** 2
    rng = np.random.default_rng(0)
    U = rng.normal(size=(2000, 3))
    U /= np.linalg.norm(U, axis=1, keepdims=True)
    worst = np.arccos(np.clip((U @ D.T).max(axis=1), -1, 1)).max()
    assert worst <= alpha + 1e-12


def test_direction_count_frozen():
    assert len(canonical_directions(2.0)) == 53


@given(point)
def test_rotation_to_x(v):
    if np.linalg.norm(v) < 1e-6:
        return
    R = rotation_to_x(v)
    assert np.allclose(R @ R.T, np.eye(3), atol=1e-12)
    assert np.allclose(R @ (v / np.linalg.norm(v)), [1, 0, 0], atol=1e-12)
