"""Seeded instance generators."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class Instance:
    points: np.ndarray
    meta: dict = field(default_factory=dict)


def _in_ball(rng, k: int, radius: float) -> np.ndarray:
    d = rng.normal(size=(k, 3))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    return d * radius * rng.random(k)[:, None] ** (1 / 3)


def uniform(n: int, seed: int = 0, side: float = 1.0) -> Instance:
    rng = np.random.default_rng(seed)
    return Instance(rng.uniform(-side, side, size=(n, 3)), {"generator": "uniform", "seed": seed})


def clustered(n: int, seed: int = 0, clusters: int = 3, spread: float = 0.2) -> Instance:
    rng = np.random.default_rng(seed)
    centers = rng.uniform(-1, 1, size=(clusters, 3))
    lab = rng.integers(clusters, size=n)
    P = centers[lab] + rng.normal(scale=spread, size=(n, 3))
    return Instance(P, {"generator": "clustered", "seed": seed, "clusters": clusters})


def planted(n: int, seed: int = 0, radius: float = 1.0, distance: float = 4.0) -> Instance:
    """Two balls of the given radius at the given center distance, points scattered inside.

    ``meta["planted_r"]`` is an upper bound on the optimum and ``meta["labels"]`` the
    planted side of every point.
    """
    rng = np.random.default_rng(seed)
    v = rng.normal(size=3)
    v /= np.linalg.norm(v)
    c1 = rng.normal(size=3)
    c2 = c1 + distance * v
    k = max(1, n // 2)
    A = c1 + _in_ball(rng, k, radius)
    B = c2 + _in_ball(rng, n - k, radius)
    labels = np.array([0] * k + [1] * (n - k))
    return Instance(np.vstack([A, B]), {"generator": "planted", "seed": seed, "planted_r": radius,
                                         "distance": distance, "labels": labels.tolist()})


def planted_beta(P: np.ndarray, labels, r: float) -> float:
    """Separation factor valid for planted clusters at radius r, or 0 if none is implied.

    When every cross-cluster pair is farther apart than 2r, each ball of a covering pair at
    radius r holds one cluster only, so the centers are at least (max cross distance - 2r) apart.
    """
    labels = np.asarray(labels)
    A, B = P[labels == 0], P[labels == 1]
    if len(A) == 0 or len(B) == 0:
        return 0.0
    D = np.linalg.norm(A[:, None, :] - B[None, :, :], axis=2)
    if D.min() <= 2 * r:
        return 0.0
    return (D.max() - 2 * r) / r


GENERATORS = {"uniform": uniform, "clustered": clustered, "planted": planted}
