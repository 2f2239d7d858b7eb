"""Smallest enclosing ball (1-center) and the derived congruent-ball feasibility oracle."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _accel
from .geom_core import Tolerance, as_points, default_tolerance


class EmptyInput(ValueError):
    pass


@dataclass(frozen=True)
class EnclosingBall:
    center: np.ndarray
    radius: float
    support: tuple[int, ...]

    def contains_all(self, points, tol: Tolerance | None = None) -> bool:
        tol = tol or default_tolerance()
        d = np.linalg.norm(as_points(points) - self.center, axis=1)
        return bool(np.all(d <= self.radius + tol.margin(self.radius)))


# Outcomes of a ball-family intersection test.

@dataclass(frozen=True)
class Empty:
    kind = "empty"


@dataclass(frozen=True)
class Degenerate:
    point: np.ndarray
    kind = "degenerate"


@dataclass(frozen=True)
class FullDim:
    point: np.ndarray
    kind = "fulldim"


@dataclass(frozen=True)
class Unconstrained:
    """Intersection over an empty family: all of space (nonempty, non-degenerate)."""

    kind = "fulldim"
    point = None


def _order(n: int, seed) -> np.ndarray:
    if seed is None:
        return np.arange(n, dtype=np.int64)
    return np.random.default_rng(seed).permutation(n).astype(np.int64)


def _minimal_support(P: np.ndarray, support: list[int], radius: float) -> tuple[int, ...]:
    """Drop support points whose removal leaves the SEB radius unchanged."""
    sup = list(support)
    changed = True
    while changed and len(sup) > 1:
        changed = False
        for s in list(sup):
            rest = np.array([t for t in sup if t != s], dtype=np.int64)
            r2 = _accel.seb_radius_subset(P, rest)
            if r2 >= radius - 1e-12 * (1.0 + radius):
                sup.remove(s)
                changed = True
                break
    return tuple(sorted(sup))


def smallest_enclosing_ball(points, seed: int | None = 0) -> EnclosingBall:
    """Minimum ball containing ``points`` (randomized incremental, seeded order)."""
    P = as_points(points)
    if len(P) == 0:
        raise EmptyInput("smallest_enclosing_ball needs at least one point")
    c, r, sup, k = _accel.seb_ordered(P, _order(len(P), seed))
    support = _minimal_support(P, [int(s) for s in sup[:k]], float(r))
    return EnclosingBall(np.asarray(c, dtype=float), float(r), support)


def seb_radius(points, seed: int | None = None) -> float:
    """Radius only; -1.0 for an empty set."""
    P = np.ascontiguousarray(np.asarray(points, dtype=float).reshape(-1, 3))
    if len(P) == 0:
        return -1.0
    return float(_accel.seb_radius_subset(P, _order(len(P), seed)))


def classify_radius(seb_r: float, r: float, tol: Tolerance | None = None) -> str:
    """'empty' | 'degenerate' | 'fulldim' for a family whose centers have SEB radius seb_r."""
    tol = tol or default_tolerance()
    if seb_r < 0:
        return "fulldim"
    if tol.close(seb_r, r):
        return "degenerate"
    return "fulldim" if seb_r < r else "empty"


def balls_intersection_status(centers, r: float, tol: Tolerance | None = None):
    """Emptiness / degeneracy of the intersection of balls B_r(c), via SEB(centers) vs r."""
    tol = tol or default_tolerance()
    C = as_points(centers)
    if len(C) == 0:
        return Unconstrained()
    eb = smallest_enclosing_ball(C)
    kind = classify_radius(eb.radius, r, tol)
    if kind == "empty":
        return Empty()
    if kind == "degenerate":
        return Degenerate(eb.center)
    return FullDim(eb.center)


def candidate_radii(points) -> np.ndarray:
    """Sorted, deduplicated SEB radii of all subsets of size 1..4."""
    P = as_points(points)
    if len(P) == 0:
        raise EmptyInput("candidate_radii needs at least one point")
    radii = np.sort(_accel.small_subset_radii(P))
    keep = np.ones(len(radii), dtype=bool)
    keep[1:] = np.diff(radii) > 1e-12 * (1.0 + radii[1:])
    return radii[keep]


def exhaustive_seb(points) -> tuple[np.ndarray, float]:
    """Brute-force 1-center: best <=4-subset SEB containing every point. O(n^5)."""
    P = as_points(points)
    c, r = _accel.exhaustive_subset_seb(P)
    return np.asarray(c), float(r)
