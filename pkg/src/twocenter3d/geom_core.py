"""Geometric primitives, tolerance policy, point-plane duality and orientation sets."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Union

import numpy as np


class GeometryError(ValueError):
    """Base class for geometric precondition failures."""


class VerticalPlane(GeometryError):
    pass


class ConcentricEqual(GeometryError):
    pass


class InvalidBeta(GeometryError):
    pass


Point3 = np.ndarray


def as_point(p) -> np.ndarray:
    a = np.asarray(p, dtype=float).reshape(3)
    if not np.all(np.isfinite(a)):
        raise GeometryError(f"non-finite point {p!r}")
    return a


def as_points(P) -> np.ndarray:
    a = np.asarray(P, dtype=float)
    if a.ndim == 1 and a.size == 3:
        a = a.reshape(1, 3)
    if a.ndim != 2 or a.shape[1] != 3:
        raise GeometryError(f"expected an (n, 3) array, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise GeometryError("non-finite coordinates")
    return np.ascontiguousarray(a)


@dataclass(frozen=True)
class Tolerance:
    """Hybrid comparison: |a - b| <= eps_abs + eps_rel * max(|a|, |b|)."""

    eps_abs: float = 1e-9
    eps_rel: float = 1e-9

    def __post_init__(self):
        if self.eps_abs < 0 or self.eps_rel < 0:
            raise ValueError("tolerances must be nonnegative")

    def margin(self, a: float, b: float = 0.0) -> float:
        return self.eps_abs + self.eps_rel * max(abs(a), abs(b))

    def close(self, a: float, b: float) -> bool:
        return abs(a - b) <= self.margin(a, b)

    def less(self, a: float, b: float) -> bool:
        """a < b by more than the margin."""
        return a < b - self.margin(a, b)

    def leq(self, a: float, b: float) -> bool:
        return a <= b + self.margin(a, b)


_default_tol = Tolerance()


def default_tolerance() -> Tolerance:
    return _default_tol


def set_default_tolerance(tol: Tolerance) -> None:
    global _default_tol
    _default_tol = tol


def _unit(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    n = float(np.linalg.norm(v))
    if n == 0.0 or not math.isfinite(n):
        raise GeometryError("cannot normalize a zero vector")
    return v / n


@dataclass(frozen=True)
class Plane:
    """{p : normal . p = offset} with a unit normal."""

    normal: np.ndarray
    offset: float

    def __post_init__(self):
        n = np.asarray(self.normal, dtype=float)
        norm = float(np.linalg.norm(n))
        if norm == 0.0:
            raise GeometryError("plane normal must be nonzero")
        object.__setattr__(self, "normal", n / norm)
        object.__setattr__(self, "offset", float(self.offset) / norm)

    def value(self, p) -> float:
        return float(np.dot(self.normal, p) - self.offset)

    def flipped(self) -> "Plane":
        return Plane(-self.normal, -self.offset)

    @classmethod
    def through(cls, normal, point) -> "Plane":
        n = _unit(normal)
        return cls(n, float(np.dot(n, point)))


@dataclass(frozen=True)
class Ball:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", as_point(self.center))
        if not self.radius >= 0:
            raise GeometryError("ball radius must be nonnegative")
        object.__setattr__(self, "radius", float(self.radius))

    def contains(self, p, tol: Tolerance | None = None) -> bool:
        tol = tol or _default_tol
        return tol.leq(float(np.linalg.norm(np.asarray(p) - self.center)), self.radius)


def arc_frame(normal) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic in-plane axes: pivot on the smallest normal component."""
    n = _unit(normal)
    k = int(np.argmin(np.abs(n)))
    u = -n[k] * n
    u[k] += 1.0
    u /= math.sqrt(float(u @ u))
    w = np.array([n[1] * u[2] - n[2] * u[1], n[2] * u[0] - n[0] * u[2], n[0] * u[1] - n[1] * u[0]])
    return u, w


@dataclass(frozen=True)
class Circle3:
    center: np.ndarray
    radius: float
    normal: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "center", as_point(self.center))
        object.__setattr__(self, "normal", _unit(self.normal))
        object.__setattr__(self, "radius", float(self.radius))

    @cached_property
    def frame(self):
        return arc_frame(self.normal)

    def point_at(self, theta):
        u, w = self.frame
        theta = np.asarray(theta, dtype=float)
        pts = (self.center + self.radius * (np.cos(theta)[..., None] * u + np.sin(theta)[..., None] * w))
        return pts

    def angle_of(self, p) -> float:
        u, w = self.frame
        d = np.asarray(p, dtype=float) - self.center
        return float(math.atan2(np.dot(d, w), np.dot(d, u)) % (2 * math.pi))

    def plane(self) -> Plane:
        return Plane.through(self.normal, self.center)


@dataclass(frozen=True)
class Arc3:
    """Arc of a circle over the angular interval [theta0, theta1) in the circle's frame."""

    circle: Circle3
    theta0: float
    theta1: float

    def __post_init__(self):
        if not (0.0 <= self.theta1 - self.theta0 <= 2 * math.pi + 1e-12):
            raise GeometryError("arc span must lie in [0, 2pi]")

    @property
    def span(self) -> float:
        return self.theta1 - self.theta0

    def midpoint(self):
        return self.circle.point_at(0.5 * (self.theta0 + self.theta1))

    def endpoints(self):
        return self.circle.point_at(self.theta0), self.circle.point_at(self.theta1)

    def sample(self, k: int = 16):
        return self.circle.point_at(np.linspace(self.theta0, self.theta1, k))


@dataclass(frozen=True)
class TangentPoint:
    point: np.ndarray


@dataclass(frozen=True)
class Disjoint:
    pass


@dataclass(frozen=True)
class Nested:
    pass


SphereIntersection = Union[Circle3, TangentPoint, Disjoint, Nested]


def side_of_plane(p, h: Plane, tol: Tolerance | None = None) -> int:
    tol = tol or _default_tol
    a = float(np.dot(h.normal, p))
    v = a - h.offset
    if abs(v) <= tol.margin(a, h.offset):
        return 0
    return 1 if v > 0 else -1


# Duality (x, y, z) <-> plane w = x*u + y*v - z in (u, v, w)-space.

def dualize_point(p) -> Plane:
    x, y, z = as_point(p)
    return Plane(np.array([-x, -y, 1.0]), -z)


def dualize_plane(h: Plane, tol: Tolerance | None = None) -> np.ndarray:
    tol = tol or _default_tol
    nu, nv, nw = h.normal
    if abs(nw) <= tol.eps_abs:
        raise VerticalPlane("plane has no graph form w = a*u + b*v + c")
    a = -nu / nw
    b = -nv / nw
    c = h.offset / nw
    return np.array([a, b, -c])


def is_above(p, h: Plane) -> bool:
    """Point strictly above a non-vertical plane (larger last coordinate)."""
    if h.normal[2] == 0:
        raise VerticalPlane("above/below undefined for a vertical plane")
    return (np.dot(h.normal, p) - h.offset) * math.copysign(1.0, h.normal[2]) > 0


def dual_planes_array(P) -> tuple[np.ndarray, np.ndarray]:
    """Unnormalized dual planes of many points: rows (-x, -y, 1) and offsets -z."""
    P = as_points(P)
    N = np.column_stack([-P[:, 0], -P[:, 1], np.ones(len(P))])
    return N, -P[:, 2].copy()


def sphere_sphere_intersect(a: Ball, b: Ball, tol: Tolerance | None = None) -> SphereIntersection:
    tol = tol or _default_tol
    if a.radius <= 0 or b.radius <= 0:
        raise GeometryError("sphere intersection needs positive radii")
    d_vec = b.center - a.center
    d = float(np.linalg.norm(d_vec))
    scale = max(a.radius, b.radius)
    if d <= tol.margin(scale):
        if tol.close(a.radius, b.radius):
            raise ConcentricEqual("identical spheres")
        return Nested()
    ra, rb = a.radius, b.radius
    if tol.close(d, ra + rb):
        return TangentPoint(a.center + d_vec * (ra / d))
    if d > ra + rb:
        return Disjoint()
    if tol.close(d, abs(ra - rb)):
        sign = 1.0 if ra >= rb else -1.0
        return TangentPoint(a.center + sign * d_vec * (ra / d))
    if d < abs(ra - rb):
        return Nested()
    n = d_vec / d
    x = (d * d + ra * ra - rb * rb) / (2 * d)
    rad = math.sqrt(max(ra * ra - x * x, 0.0))
    return Circle3(a.center + x * n, rad, n)


def direction_alpha(beta: float) -> float:
    if not (0 < beta <= 2):
        raise InvalidBeta(f"beta must lie in (0, 2], got {beta}")
    return min(math.acos(beta / 4) - math.acos(beta / 2), math.pi / 4)


# |D| <= DIRECTION_SET_CONSTANT / alpha^2 for every alpha <= pi/4 (checked in tests)
DIRECTION_SET_CONSTANT = 60.0


def canonical_directions(beta: float) -> np.ndarray:
    """Unit vectors covering the sphere at angular resolution alpha(beta).

    Latitude/longitude grid with spacing alpha/sqrt(2); returns an (m, 3) array.
    """
    alpha = direction_alpha(beta)
    s = alpha / math.sqrt(2)
    bands = max(1, math.ceil(math.pi / s))
    dphi = math.pi / bands
    dirs = []
    for k in range(bands + 1):
        phi = -math.pi / 2 + k * dphi
        # widest parallel within half a band of this ring
        near_eq = max(abs(phi) - dphi / 2, 0.0)
        m = max(1, math.ceil(2 * math.pi * math.cos(near_eq) / s))
        if abs(abs(phi) - math.pi / 2) < 1e-12:
            m = 1
        cp = math.cos(phi)
        for j in range(m):
            th = 2 * math.pi * j / m
            dirs.append((cp * math.cos(th), cp * math.sin(th), math.sin(phi)))
    D = np.array(dirs)
    return D / np.linalg.norm(D, axis=1, keepdims=True)


def rotation_to_x(v) -> np.ndarray:
    """Orthonormal matrix R with R @ v = e_x (rows: v, then two frame axes)."""
    v = _unit(v)
    u, w = arc_frame(v)
    return np.vstack([v, u, w])
