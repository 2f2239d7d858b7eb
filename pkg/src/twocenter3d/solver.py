"""Decision procedures, exponential search, randomized optimization and reference oracles."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from . import _accel
from .arrangement import build_cutting, build_tour, classify_planes, enumerate_cells
from .ball_intersection import Empty as EmptyIntersection
from .ball_intersection import pi2_emptiness, polytope_from_centers
from .geom_core import (Tolerance, as_points, canonical_directions, default_tolerance,
                        dual_planes_array, rotation_to_x)
from .lifespan_tree import build as build_span_tree
from .lifespan_tree import compute_spans, evaluate_leaves
from .miniball import EnclosingBall, candidate_radii, classify_radius, smallest_enclosing_ball
from .surface_map import EmptyRegion, build_map, build_sigma, grand_tour, seb_prune

STRICT = "StrictlyCoverable"
CRITICAL = "ExactlyCritical"
NOT_COVERABLE = "NotCoverable"


class InvalidRadius(ValueError):
    pass


@dataclass
class DecisionOutcome:
    variant: str
    witness: tuple | None = None  # (c1, c2)
    partition: tuple | None = None  # (indices of side 1, indices of side 2)
    stats: dict = field(default_factory=dict)

    def __bool__(self):
        return self.variant != NOT_COVERABLE


@dataclass
class TwoCenterSolution:
    c1: np.ndarray
    c2: np.ndarray
    radius: float
    partition: tuple
    meta: dict = field(default_factory=dict)


@dataclass(frozen=True)
class ApproximateBySEB:
    ball: EnclosingBall
    r_reached: float
    approximate: bool = True


@dataclass
class SolverConfig:
    algorithm: str = "auto"  # cubic | improved | bruteforce | auto
    epsilon: float = 0.0
    rho: int = 2
    seed: int = 0
    tolerance: Tolerance = field(default_factory=default_tolerance)
    engine: str = "miniball"  # leaf predicate of the cubic decision: miniball | polytope
    beta_floor: float = 0.05
    check_bound: bool = False

    def __post_init__(self):
        if self.algorithm not in ("cubic", "improved", "bruteforce", "auto"):
            raise ValueError(f"unknown algorithm {self.algorithm!r}")
        if not (0 <= self.epsilon < 1):
            raise ValueError("epsilon must lie in [0, 1)")
        if self.rho < 2:
            raise ValueError("rho must be at least 2")
        if self.engine not in ("miniball", "polytope"):
            raise ValueError(f"unknown engine {self.engine!r}")


def _kind(s: float, r: float, tol: Tolerance) -> str:
    return classify_radius(s, r, tol)


def classify_pair(s1: float, s2: float, r: float, tol: Tolerance | None = None) -> str:
    """Variant of one bipartition whose sides have SEB radii s1, s2 (-1 = empty side)."""
    tol = tol or default_tolerance()
    k1, k2 = _kind(s1, r, tol), _kind(s2, r, tol)
    if k1 == "empty" or k2 == "empty":
        return NOT_COVERABLE
    if k1 == "fulldim" and k2 == "fulldim":
        return STRICT
    return CRITICAL


def _classify_batch(R: np.ndarray, r: float, tol: Tolerance) -> np.ndarray:
    """Vectorized classify_pair over rows (s1, s2); returns ranks 0/1/2."""
    m = tol.eps_abs + tol.eps_rel * np.maximum(np.abs(R), abs(r))
    empty_side = R < 0
    close = (np.abs(R - r) <= m) & ~empty_side
    full = empty_side | ((R < r) & ~close)
    ok = full | close
    rank = np.where(ok.all(axis=1), 1, 0)
    rank[full.all(axis=1)] = 2
    return rank


def _outcome_from_sides(P, side1, side2, variant, stats=None) -> DecisionOutcome:
    if variant == NOT_COVERABLE:
        return DecisionOutcome(variant, None, None, stats or {})
    side1 = tuple(sorted(int(i) for i in side1))
    side2 = tuple(sorted(int(i) for i in side2))
    c1 = smallest_enclosing_ball(P[list(side1)]).center if side1 else None
    c2 = smallest_enclosing_ball(P[list(side2)]).center if side2 else None
    if c1 is None:
        c1 = c2
    if c2 is None:
        c2 = c1
    return DecisionOutcome(variant, (c1, c2), (side1, side2), stats or {})


def _order(n: int) -> np.ndarray:
    return np.random.default_rng(12345).permutation(n).astype(np.int64)


# ---------------------------------------------------------------------------
# brute force


def _affine_coords(P: np.ndarray) -> np.ndarray:
    """Coordinates of P in its own affine hull (0 to 3 columns)."""
    X = P - P[0]
    if len(P) == 1:
        return np.zeros((1, 0))
    _, S, Vt = np.linalg.svd(X, full_matrices=False)
    scale = max(1.0, float(np.abs(P).max()))
    k = int(np.sum(S > 1e-9 * scale * max(1, len(P))))
    return X @ Vt[:k].T


def plane_partition_masks(P: np.ndarray, tol: float = 1e-9, max_on_plane: int = 14) -> np.ndarray:
    """Every bipartition of P induced by a hyperplane of its affine hull (as boolean masks).

    Candidate hyperplanes pass through affinely independent point tuples; points lying on
    the hyperplane are assigned to both sides in every combination.
    """
    P = as_points(P)
    n = len(P)
    X = _affine_coords(P)
    k = X.shape[1]
    masks = [np.ones(n, dtype=bool)]
    if k == 0 or n == 1:
        return np.array(masks)
    scale = max(1.0, float(np.abs(X).max()))
    for tup in itertools.combinations(range(n), k):
        base = X[tup[0]]
        if k == 1:
            normal = np.ones(1)
        else:
            D = X[list(tup[1:])] - base
            _, S, Vt = np.linalg.svd(D)
            if S[-1] <= 1e-9 * scale:
                continue
            normal = Vt[-1]
        v = (X - base) @ normal
        on = np.abs(v) <= tol * scale
        if on.sum() > max_on_plane:
            raise ValueError("too many points on one candidate plane")
        pos = v > 0
        idx = np.nonzero(on)[0]
        for bits in range(1 << len(idx)):
            m = pos.copy()
            for t, i in enumerate(idx):
                if (bits >> t) & 1:
                    m[i] = True
            masks.append(m)
    M = np.array(masks)
    # a bipartition and its complement are the same split
    flip = ~M[:, 0]
    M[flip] = ~M[flip]
    return np.unique(M, axis=0)


def brute_force_decide(P, r: float, tol: Tolerance | None = None) -> DecisionOutcome:
    """Exact three-way decision by testing every relevant bipartition with the miniball."""
    tol = tol or default_tolerance()
    P = as_points(P)
    n = len(P)
    order = _order(n)
    if n <= 15:
        R = _accel.all_bipartition_radii(P, order)
        ranks = _classify_batch(R, r, tol)
        best = int(np.argmax(ranks))
        variant = (NOT_COVERABLE, CRITICAL, STRICT)[ranks[best]]
        mask = np.array([True] + [((best >> (t - 1)) & 1) == 1 for t in range(1, n)])
    else:
        M = plane_partition_masks(P)
        R = _accel.mask_batch_radii(P, M, order)
        ranks = _classify_batch(R, r, tol)
        best = int(np.argmax(ranks))
        variant = (NOT_COVERABLE, CRITICAL, STRICT)[ranks[best]]
        mask = M[best]
    return _outcome_from_sides(P, np.nonzero(mask)[0], np.nonzero(~mask)[0], variant,
                               {"partitions": len(R)})


# ---------------------------------------------------------------------------
# cubic decision over the dual arrangement


def _side_radius(P, ids) -> float:
    if len(ids) == 0:
        return -1.0
    idx = np.asarray(ids, dtype=np.int64)
    return float(_accel.seb_radius_subset(P, idx))


def decide_cubic(P, r: float, tol: Tolerance | None = None, fixed=None, free=None,
                 engine: str = "miniball", seed: int = 0) -> DecisionOutcome:
    """Decision over all cells of the dual arrangement of the free points.

    ``fixed`` = (A, B) are index sets forced onto side 1 / side 2; ``free`` restricts the
    arrangement to those indices (default: all points not fixed).
    """
    tol = tol or default_tolerance()
    P = as_points(P)
    n = len(P)
    A, B = (tuple(fixed[0]), tuple(fixed[1])) if fixed else ((), ())
    U = list(range(n)) if free is None else list(free)
    if fixed and free is None:
        taken = set(A) | set(B)
        U = [i for i in range(n) if i not in taken]
    stats = {"cells": 0}
    if not U:
        s1, s2 = _side_radius(P, A), _side_radius(P, B)
        return _outcome_from_sides(P, A, B, classify_pair(s1, s2, r, tol), stats)
    N, d = dual_planes_array(P[U])
    cells = enumerate_cells((N, d), seed=seed)
    tour = build_tour(cells)
    stats["cells"] = len(cells)
    L = len(tour)
    initial = [k for k, s in enumerate(cells[tour.cells[0]].signs) if s > 0]
    plus, minus = compute_spans(tour, initial, len(U))
    results = []
    for spans, fixed_side in ((plus, A), (minus, B)):
        if engine == "polytope":
            def tree_payload(ids):
                return polytope_from_centers(P[[U[i] for i in ids]], r, tol)
        else:
            tree_payload = None
        tree = build_span_tree(spans, L, payload=tree_payload)
        if engine == "polytope":
            base = [polytope_from_centers(P[list(fixed_side)], r, tol)] if fixed_side else []

            def pred(pays, base=base):
                polys = base + pays
                if not polys:
                    return "fulldim"
                res = pi2_emptiness(polys, tol)
                if isinstance(res, EmptyIntersection):
                    return "empty"
                return "degenerate" if res.degenerate else "fulldim"
            results.append(evaluate_leaves(tree, pred, use_payloads=True))
        else:
            def pred(ids, fixed_side=fixed_side):
                return _kind(_side_radius(P, list(fixed_side) + [U[i] for i in ids]), r, tol)
            results.append(evaluate_leaves(tree, pred))
    best, best_leaf = 0, -1
    for leaf in range(L):
        k1, k2 = results[0][leaf], results[1][leaf]
        if k1 == "empty" or k2 == "empty":
            continue
        rank = 2 if (k1 == "fulldim" and k2 == "fulldim") else 1
        if rank > best:
            best, best_leaf = rank, leaf
            if rank == 2:
                break
    variant = (NOT_COVERABLE, CRITICAL, STRICT)[best]
    if best_leaf < 0:
        return DecisionOutcome(variant, stats=stats)
    signs = cells[tour.cells[best_leaf]].signs
    side1 = list(A) + [U[i] for i, s in enumerate(signs) if s > 0]
    side2 = list(B) + [U[i] for i, s in enumerate(signs) if s <= 0]
    return _outcome_from_sides(P, side1, side2, variant, stats)


# ---------------------------------------------------------------------------
# reference optimum


def optimize_reference(P, tol: Tolerance | None = None) -> TwoCenterSolution:
    """Smallest candidate radius accepted by the brute-force decision."""
    tol = tol or default_tolerance()
    P = as_points(P)
    cands = np.unique(candidate_radii(P))
    lo, hi = 0, len(cands) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if brute_force_decide(P, float(cands[mid]), tol):
            hi = mid
        else:
            lo = mid + 1
    r = float(cands[lo])
    out = brute_force_decide(P, r, tol)
    c1, c2 = out.witness
    return TwoCenterSolution(c1, c2, r, out.partition, {"algorithm": "reference", "candidates": len(cands)})


# ---------------------------------------------------------------------------
# improved decision


def beta_lower_bound(r: float, r0: float, floor: float = 0.0) -> float:
    """Separation factor every covering pair at radius r must respect: 2(r0/r - 1) in (0, 2]."""
    if r <= 0:
        raise InvalidRadius("radius must be positive")
    if r > r0:
        raise InvalidRadius(f"r = {r} exceeds the enclosing radius {r0}; the answer is trivial")
    return min(max(2.0 * (r0 / r - 1.0), floor), 2.0)


class _PartitionCache:
    """Rank of bipartitions (by side-1 mask) at radius r, computed in batches."""

    def __init__(self, P, r, tol):
        self.P, self.r, self.tol = P, r, tol
        self.order = _order(len(P))
        self.ranks: dict[bytes, int] = {}
        self.best = (0, None)

    def rank(self, mask: np.ndarray) -> int:
        key = np.packbits(mask).tobytes()
        got = self.ranks.get(key)
        if got is None:
            R = _accel.mask_batch_radii(self.P, mask[None, :], self.order)
            got = int(_classify_batch(R, self.r, self.tol)[0])
            self.ranks[key] = got
            if got > self.best[0]:
                self.best = (got, mask.copy())
        return got


def _separating_offsets(xs: np.ndarray, step: float) -> list[tuple[float, int]]:
    """Plane positions x = xs[0] + k * step, one per distinct left prefix (rightmost kept)."""
    out: dict[int, float] = {}
    k = 1
    while True:
        lam = xs[0] + k * step
        m = int(np.searchsorted(xs, lam, side="left"))
        if m >= len(xs):
            break
        if m > 0:
            out[m] = lam
        k += 1
    return sorted((lam, m) for m, lam in out.items())


def _cover_search(P, rho: float, beta: float, cache: _PartitionCache, tol: Tolerance,
                  stats: dict, check_bound: bool = False, stop_rank: int = 2) -> None:
    """Feed every partition read off the maps M of all guesses at radius rho into ``cache``."""
    n = len(P)
    step = beta * rho / 4.0
    for v in canonical_directions(beta):
        R = rotation_to_x(v)
        Q = P @ R.T
        order = np.argsort(Q[:, 0], kind="stable")
        xs = Q[order, 0]
        for lam, m in _separating_offsets(xs, step):
            stats["guesses"] += 1
            left, right = order[:m], order[m:]
            QL, QR = Q[left], Q[right]
            if seb_prune(QL, QR, rho, tol):
                continue
            sigma = build_sigma(QL, rho, lam, tol=tol, arcs=False)
            if isinstance(sigma, EmptyRegion):
                continue
            M = build_map(sigma, QR, tol, check_bound=check_bound)
            if not M.cells:
                continue
            stats["surviving"] += 1
            stats["M_vertices"] += len(M.vertices)
            stats["cells"] += len(M.cells)
            stats["max_pair_hits"] = max(stats["max_pair_hits"], M.max_pair_hits)
            tour = grand_tour(M)
            nR = len(right)
            initial = [i for i in range(nR) if i not in tour.sets[0]]
            plus, _ = compute_spans(tour, initial, nR)
            tree = build_span_tree(plus, len(tour))

            def pred(uncovered, left=left, right=right):
                mask = np.ones(n, dtype=bool)
                mask[right[list(uncovered)]] = False
                return cache.rank(mask)

            evaluate_leaves(tree, pred)
            if cache.best[0] >= stop_rank:
                return


def decide_improved(P, r: float, beta: float, tol: Tolerance | None = None,
                    check_bound: bool = False) -> DecisionOutcome:
    """Decision by guessing an orientation and a separating plane, valid when every covering
    pair of balls of radius r has center distance at least beta * r."""
    tol = tol or default_tolerance()
    P = as_points(P)
    if not (0 < beta <= 2):
        raise InvalidRadius(f"beta must lie in (0, 2], got {beta}")
    stats = {"guesses": 0, "surviving": 0, "M_vertices": 0, "cells": 0, "max_pair_hits": 0}
    cache = _PartitionCache(P, r, tol)
    cache.rank(np.ones(len(P), dtype=bool))
    if len(P) >= 2 and cache.best[0] < 2:
        # covers found slightly above r decide coverability, covers just below decide strictness
        _cover_search(P, r + tol.margin(r), beta, cache, tol, stats, check_bound, stop_rank=1)
        if cache.best[0] == 1:
            _cover_search(P, r - tol.margin(r), beta, cache, tol, stats, check_bound)
    rank, mask = cache.best
    variant = (NOT_COVERABLE, CRITICAL, STRICT)[rank]
    if mask is None:
        return DecisionOutcome(variant, stats=stats)
    return _outcome_from_sides(P, np.nonzero(mask)[0], np.nonzero(~mask)[0], variant, stats)


# ---------------------------------------------------------------------------
# optimization


def _partition_value(P, side1, side2) -> float:
    return max(_side_radius(P, list(side1)), _side_radius(P, list(side2)), 0.0)


def _solution(P, side1, side2, meta) -> TwoCenterSolution:
    out = _outcome_from_sides(P, side1, side2, STRICT)
    c1, c2 = out.witness
    return TwoCenterSolution(c1, c2, _partition_value(P, side1, side2), out.partition, meta)


def _make_decider(P, r0: float, config: SolverConfig, stats: dict):
    """decide(r) for the configured algorithm; the improved path derives beta from r0."""
    tol = config.tolerance
    algo = config.algorithm

    def decide(r: float) -> DecisionOutcome:
        stats["decisions"] = stats.get("decisions", 0) + 1
        if algo == "bruteforce":
            return brute_force_decide(P, r, tol)
        if algo in ("improved", "auto") and 0 < r < r0:
            beta = beta_lower_bound(r, r0)
            stats["beta"] = beta
            if beta >= config.beta_floor:
                return decide_improved(P, r, beta, tol, config.check_bound)
        return decide_cubic(P, r, tol, engine=config.engine, seed=config.seed)

    return decide


def exponential_search(P, decide=None, r0: float | None = None, max_steps: int = 60):
    """First r_i = r0 (1 - 2^-i), i = 1, 2, ..., that the decision accepts; returns (r_i, i).

    After ``max_steps`` rejections r0 itself is returned with i = max_steps + 1.
    """
    P = as_points(P)
    if r0 is None:
        r0 = smallest_enclosing_ball(P).radius
    if decide is None:
        def decide(r):
            return brute_force_decide(P, r)
    for i in range(1, max_steps + 1):
        r = r0 * (1.0 - 0.5 ** i)
        if decide(r).variant != NOT_COVERABLE:
            return r, i
    return r0, max_steps + 1


def optimize_chan(P, r_upper: float, config: SolverConfig | None = None,
                  witness: DecisionOutcome | None = None) -> TwoCenterSolution:
    """Exact optimum by randomized subproblem elimination over a cutting of the dual planes.

    ``r_upper`` must be accepted by the decision (some cover exists).  Subproblems fix the
    points whose dual planes miss a cutting piece and keep the crossing ones free; each is
    compared against the best radius so far and only strict improvements are recursed into.
    """
    config = config or SolverConfig()
    tol = config.tolerance
    P = as_points(P)
    n = len(P)
    rng = np.random.default_rng(config.seed)
    stats = {"subproblems": 0, "recursions": 0, "decisions": 0, "base_cases": 0}
    if witness is None or witness.partition is None:
        witness = decide_cubic(P, r_upper, tol, seed=config.seed)
        if witness.partition is None:
            raise InvalidRadius(f"no cover of radius {r_upper}")
    best = {"value": _partition_value(P, *witness.partition), "sides": witness.partition}

    def offer(side1, side2):
        v = _partition_value(P, side1, side2)
        if v < best["value"]:
            best["value"], best["sides"] = v, (tuple(side1), tuple(side2))

    def base(A, B, U):
        stats["base_cases"] += 1
        for bits in range(1 << len(U)):
            s1 = list(A) + [U[t] for t in range(len(U)) if (bits >> t) & 1]
            s2 = list(B) + [U[t] for t in range(len(U)) if not (bits >> t) & 1]
            offer(s1, s2)

    def recurse(A, B, U, depth):
        stats["recursions"] += 1
        if len(U) < config.rho or len(U) <= 1:
            base(A, B, U)
            return
        N, d = dual_planes_array(P[U])
        cut = build_cutting((N, d), config.rho, seed=int(rng.integers(1 << 31)))
        subs = {}
        for piece in cut.pieces:
            above, below, crossing = classify_planes(piece, (N, d))
            key = (frozenset(below), frozenset(above))
            subs[key] = sorted(crossing)
        if len(subs) == 1 and len(next(iter(subs.values()))) == len(U):
            base(A, B, U)
            return
        keys = list(subs)
        rng.shuffle(keys)
        for plus, minus in keys:
            stats["subproblems"] += 1
            A2 = tuple(A) + tuple(U[i] for i in sorted(plus))
            B2 = tuple(B) + tuple(U[i] for i in sorted(minus))
            U2 = [U[i] for i in subs[(plus, minus)]]
            stats["decisions"] += 1
            out = decide_cubic(P, best["value"], tol, fixed=(A2, B2), free=U2, seed=config.seed)
            if out.variant == STRICT:
                offer(*out.partition)
                recurse(A2, B2, U2, depth + 1)

    recurse((), (), list(range(n)), 0)
    sol = _solution(P, *best["sides"], {"algorithm": "chan", "seed": config.seed, "rho": config.rho, **stats})
    return sol


def optimize_cubic(P, r_upper: float, config: SolverConfig | None = None) -> TwoCenterSolution:
    """Binary search with the cubic decision over the candidate radii not above r_upper."""
    config = config or SolverConfig()
    tol = config.tolerance
    P = as_points(P)
    cands = np.unique(candidate_radii(P))
    cands = cands[cands <= r_upper + tol.margin(r_upper)]
    lo, hi = 0, len(cands) - 1
    decisions = 0
    while lo < hi:
        mid = (lo + hi) // 2
        decisions += 1
        if decide_cubic(P, float(cands[mid]), tol, engine=config.engine, seed=config.seed):
            hi = mid
        else:
            lo = mid + 1
    out = decide_cubic(P, float(cands[lo]), tol, engine=config.engine, seed=config.seed)
    return _solution(P, *out.partition, {"algorithm": "cubic", "decisions": decisions + 1})


def _trivial(P) -> TwoCenterSolution | None:
    uniq = np.unique(P, axis=0)
    if len(uniq) > 2:
        return None
    c1, c2 = uniq[0], uniq[-1]
    s1 = tuple(i for i in range(len(P)) if np.array_equal(P[i], c1))
    s2 = tuple(i for i in range(len(P)) if i not in s1)
    return TwoCenterSolution(c1, c2, 0.0, (s1, s2), {"algorithm": "trivial"})


def solve(P, config: SolverConfig | None = None):
    """Exact two-center solution, or the enclosing ball flagged approximate when the
    exponential search reaches 1 - r/r0 <= epsilon before finding a cover."""
    config = config or SolverConfig()
    P = as_points(P)
    triv = _trivial(P)
    if triv is not None:
        return triv
    if config.algorithm == "bruteforce":
        return optimize_reference(P, config.tolerance)
    seb = smallest_enclosing_ball(P)
    r0 = seb.radius
    stats: dict = {}
    decide = _make_decider(P, r0, config, stats)
    i, found = 0, None
    r = r0
    while found is None:
        i += 1
        r = r0 * (1.0 - 0.5 ** i)
        if 0.5 ** i <= config.epsilon:
            return ApproximateBySEB(seb, r)
        if i > 60:
            r = r0
            found = decide_cubic(P, r0, config.tolerance, seed=config.seed)
            break
        out = decide(r)
        if out.variant != NOT_COVERABLE:
            found = out
    beta = beta_lower_bound(r, r0) if r < r0 else 0.0
    meta = {"steps": i, "r_search": r, "beta": beta, **stats}
    use_chan = config.algorithm == "improved" or (config.algorithm == "auto" and beta >= config.beta_floor)
    if use_chan:
        sol = optimize_chan(P, r, config, witness=found)
    else:
        sol = optimize_cubic(P, r, config)
    sol.meta.update(meta)
    return sol
