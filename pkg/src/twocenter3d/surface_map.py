"""The searched surface for the left center: sigma_L on the right part of the boundary of
K(P_L), the curves gamma_p cut by the right-side spheres, the map M they induce, the
short-arc census and the grand tour over the cells of M.

All inputs are in a rotated frame where the guessed orientation is the +x axis and the
separating plane is {x = lam}.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .ball_intersection import EmptyPolytope, polytope_from_centers
from .geom_core import Arc3, Circle3, Plane, Tolerance, arc_frame, as_points, default_tolerance
from .miniball import seb_radius

TWO_PI = 2.0 * math.pi


class IntersectionBoundViolated(AssertionError):
    pass


class NoIntersection(ValueError):
    pass


@dataclass
class SigmaFace:
    """The part of sphere(q, r) that belongs to sigma_L: inside all constraint halfspaces."""

    q_index: int  # index into P_L
    q: np.ndarray
    normals: np.ndarray  # (m, 3) unit normals, constraint n . c <= h
    offsets: np.ndarray
    kinds: list[str]  # "ball", "right", "clip" or "extra" per constraint
    arcs: list[tuple[int, float, float]] = field(default_factory=list)  # boundary arcs (constraint, t0, t1)


@dataclass
class SigmaL:
    points_L: np.ndarray
    r: float
    lam: float
    faces: list[SigmaFace]

    def contains(self, c, tol: Tolerance | None = None) -> bool:
        tol = tol or default_tolerance()
        for f in self.faces:
            if abs(np.linalg.norm(c - f.q) - self.r) <= 1e-7 * max(1.0, self.r) and _in_region(f, c, tol, self.r):
                return True
        return False


@dataclass(frozen=True)
class EmptyRegion:
    reason: str


@dataclass
class GammaCurve:
    p: np.ndarray
    pieces: list[tuple[int, Arc3]]  # (face index, arc); a zero-span arc is a tangency point


@dataclass
class MapM:
    vertices: list[tuple[np.ndarray, int, tuple[int, ...]]]  # (point, face, incident planes)
    arc_count: int
    cells: list[frozenset]  # distinct covered-set signatures (indices into P_R)
    cell_points: list[np.ndarray]
    pair_hits: dict = field(default_factory=dict)  # (a, b) -> number of gamma_a / gamma_b crossings
    max_pair_hits: int = 0


@dataclass(frozen=True)
class GrandTour:
    """Walk over cell signatures; ``toggles[k]`` is the P_R index inserted/removed at step k.

    ``visits[k]`` is the cell index reached at step k, or -1 on a transit step.
    """

    sets: tuple[frozenset, ...]
    toggles: tuple[int | None, ...]
    visits: tuple[int, ...]

    def __len__(self):
        return len(self.sets)


def _lam_value(lam) -> float:
    if isinstance(lam, Plane):
        if abs(abs(lam.normal[0]) - 1.0) > 1e-12:
            raise ValueError("the separating plane must be yz-parallel")
        return float(lam.offset / lam.normal[0])
    return float(lam)


def _ball_halfspace(q, p):
    """On sphere(q, r): |c - p| <= r  <=>  n . c <= h (unit n)."""
    d = p - q
    nd = float(np.linalg.norm(d))
    n = -d / nd
    h = -(float(np.dot(p, p)) - float(np.dot(q, q))) / (2 * nd)
    return n, h


def _in_region(face: SigmaFace, c, tol: Tolerance, r: float, skip: int = -1) -> bool:
    v = face.normals @ c - face.offsets
    if skip >= 0:
        v = v.copy()
        v[skip] = -1.0
    return bool(np.all(v <= 1e-9 * max(1.0, r) + tol.eps_abs))


def _in_region_many(face: SigmaFace, C, tol: Tolerance, r: float, skip: int = -1) -> np.ndarray:
    V = C @ face.normals.T - face.offsets
    if skip >= 0:
        V[:, skip] = -1.0
    return np.all(V <= 1e-9 * max(1.0, r) + tol.eps_abs, axis=1)


def build_sigma(P_L, r: float, lam, extra=None, tol: Tolerance | None = None, arcs: bool = True):
    """sigma_L (or its restriction by extra balls, given as centers of radius-r balls).

    With ``arcs=False`` the boundary arcs of each face are not traced; faces are kept
    whenever K(P_L) has a face on that sphere left of the plane.
    """
    tol = tol or default_tolerance()
    P_L = as_points(P_L)
    lam = _lam_value(lam)
    if len(P_L) == 0:
        return EmptyRegion("P_L is empty")
    K = polytope_from_centers(P_L, r, tol, with_maps=False)
    if isinstance(K, EmptyPolytope):
        return EmptyRegion("K(P_L) is empty")
    extra = np.zeros((0, 3)) if extra is None else as_points(extra)
    face_q = sorted({K.source[f.ball] for f in K.faces})
    faces = []
    for qi in face_q:
        q = P_L[qi]
        if q[0] > lam + tol.margin(lam):
            continue
        N, H, kinds = [], [], []
        for j, p in enumerate(P_L):
            if j == qi or np.linalg.norm(p - q) <= 1e-12 * max(1.0, r):
                continue
            n, h = _ball_halfspace(q, p)
            N.append(n), H.append(h), kinds.append("ball")
        N.append(np.array([-1.0, 0.0, 0.0])), H.append(-q[0]), kinds.append("right")
        N.append(np.array([1.0, 0.0, 0.0])), H.append(lam), kinds.append("clip")
        for p in extra:
            if np.linalg.norm(p - q) <= 1e-12 * max(1.0, r):
                continue
            n, h = _ball_halfspace(q, p)
            N.append(n), H.append(h), kinds.append("extra")
        face = SigmaFace(qi, q, np.array(N), np.array(H), kinds)
        if not arcs:
            faces.append(face)
            continue
        for k in range(len(N)):
            for t0, t1 in _clip_circle(face, r, N[k], H[k], tol, skip=k):
                face.arcs.append((k, t0, t1))
        # the "right" constraint cuts the sphere through q, so a nonempty face has arcs
        if face.arcs:
            faces.append(face)
    if not faces:
        return EmptyRegion("no part of the right boundary lies left of the plane")
    return SigmaL(P_L, r, lam, faces)


def plane_circle(q, r: float, n, h) -> Circle3 | None:
    """Circle where the plane n . c = h (unit n) meets sphere(q, r); None if it misses.

    A tangent plane yields a zero-radius circle.
    """
    t = h - float(np.dot(n, q))
    if abs(t) > r * (1 + 1e-12):
        return None
    rad = math.sqrt(max(r * r - t * t, 0.0))
    return Circle3(q + t * n, rad, n)


def _circle_crossings(circ: Circle3, N, H) -> np.ndarray:
    """Angles where the circle meets each plane N[j] . c = H[j] (flattened, finite only)."""
    u, w = circ.frame
    A = circ.radius * (N @ u)
    B = circ.radius * (N @ w)
    D = H - N @ circ.center
    M = np.hypot(A, B)
    ok = (M > 1e-15) & (np.abs(D) <= M)
    phi = np.arctan2(B[ok], A[ok])
    a = np.arccos(np.clip(D[ok] / M[ok], -1.0, 1.0))
    return np.concatenate([phi + a, phi - a]) % TWO_PI


def _clip_circle(face: SigmaFace, r: float, n, h, tol: Tolerance, skip: int = -1,
                 extra_N=None, extra_H=None, merge: bool = True) -> list[tuple[float, float]]:
    """Angular intervals of the circle {n . c = h} on the face's sphere inside the region."""
    circ = plane_circle(face.q, r, n, h)
    if circ is None:
        return []
    if circ.radius <= 1e-12 * max(1.0, r):
        return [(0.0, 0.0)] if _in_region(face, circ.center, tol, r, skip) else []
    mask = np.ones(len(face.normals), dtype=bool)
    if skip >= 0:
        mask[skip] = False
    angs = _circle_crossings(circ, face.normals[mask], face.offsets[mask])
    if extra_N is not None and len(extra_N):
        angs = np.concatenate([angs, _circle_crossings(circ, extra_N, extra_H)])
    angs = np.unique(np.round(angs, 14))
    if len(angs) == 0:
        if _in_region(face, circ.point_at(0.0), tol, r, skip):
            return [(0.0, TWO_PI)]
        return []
    nxt = np.append(angs[1:], angs[0] + TWO_PI)
    keep = nxt - angs > 1e-13
    a0s, a1s = angs[keep], nxt[keep]
    mids = circ.point_at(0.5 * (a0s + a1s))
    ok = _in_region_many(face, mids, tol, r, skip)
    out = [(float(a0), float(a1)) for a0, a1, g in zip(a0s, a1s, ok) if g]
    if not merge:
        return out
    # merge intervals split only by crossings of planes that do not bound the region here
    merged = []
    for a0, a1 in out:
        if merged and abs(merged[-1][1] - a0) <= 1e-13:
            merged[-1] = (merged[-1][0], a1)
        else:
            merged.append((a0, a1))
    if len(merged) > 1 and abs(merged[-1][1] - (merged[0][0] + TWO_PI)) <= 1e-13:
        merged[0] = (merged[-1][0], merged[0][1] + TWO_PI)
        merged.pop()
    # isolated touching points of the region
    touch = _in_region_many(face, circ.point_at(angs), tol, r, skip)
    for a in angs[touch]:
        if not any(_angle_in(a, a0, a1) for a0, a1 in merged):
            merged.append((float(a), float(a)))
    return merged


def _angle_in(a, a0, a1) -> bool:
    a = a % TWO_PI
    while a < a0 - 1e-13:
        a += TWO_PI
    return a <= a1 + 1e-13


def gamma_curve(p, sigma: SigmaL, tol: Tolerance | None = None) -> GammaCurve:
    """Arcs of sphere(p, r) on sigma_L, one list entry per (face, arc)."""
    tol = tol or default_tolerance()
    p = np.asarray(p, dtype=float)
    pieces = []
    if isinstance(sigma, EmptyRegion):
        return GammaCurve(p, pieces)
    for fi, f in enumerate(sigma.faces):
        d = float(np.linalg.norm(p - f.q))
        if d > 2 * sigma.r * (1 + 1e-12) or d <= 1e-12:
            continue
        n, h = _ball_halfspace(f.q, p)
        circ = plane_circle(f.q, sigma.r, n, h)
        if circ is None:
            continue
        for a0, a1 in _clip_circle(f, sigma.r, n, h, tol):
            pieces.append((fi, Arc3(circ, a0, a1)))
    return GammaCurve(p, pieces)


def _covered_rows(P_R, C, r, tol) -> np.ndarray:
    """Boolean (len(C), len(P_R)) matrix: point j of P_R within r of C[i]."""
    D2 = (C * C).sum(1)[:, None] - 2 * C @ P_R.T + (P_R * P_R).sum(1)[None, :]
    lim = r + tol.margin(r)
    return D2 <= lim * lim


def _raw_circle(q, r, n, h):
    t = h - float(n @ q)
    if abs(t) > r * (1 + 1e-12):
        return None
    u, w = arc_frame(n)
    return q + t * n, math.sqrt(max(r * r - t * t, 0.0)), u, w


def _circle_points(circ, thetas) -> np.ndarray:
    C, R, u, w = circ
    th = np.asarray(thetas, dtype=float)
    return C + R * (np.cos(th)[:, None] * u + np.sin(th)[:, None] * w)


def build_map(sigma: SigmaL, P_R, tol: Tolerance | None = None, check_bound: bool = False) -> MapM:
    """Cells of the arrangement of gamma curves on sigma_L, with one signature per cell.

    Cells of every dimension are reported: vertices, arcs (midpoints) and 2-dimensional
    cells (reached by stepping off every arc to both sides).
    """
    tol = tol or default_tolerance()
    P_R = np.asarray(P_R, dtype=float).reshape(-1, 3)
    r = sigma.r
    sig_rows: list[np.ndarray] = []
    sig_pts: list[np.ndarray] = []
    vertices = []
    face_pts: dict[int, list] = {}
    pair_pts: dict[tuple[int, int], list] = {}
    arc_count = 0
    inc_tol = 1e-7 * max(1.0, r)
    slack = 1e-9 * max(1.0, r) + tol.eps_abs
    for fi, f in enumerate(sigma.faces):
        dq = np.linalg.norm(P_R - f.q, axis=1) if len(P_R) else np.zeros(0)
        gam_idx = np.nonzero((dq <= 2 * r * (1 + 1e-12)) & (dq > 1e-12))[0]
        G = P_R[gam_idx] - f.q
        gd = np.linalg.norm(G, axis=1)
        gN = -G / gd[:, None] if len(G) else np.zeros((0, 3))
        gH = -((P_R[gam_idx] ** 2).sum(1) - float(f.q @ f.q)) / (2 * gd) if len(G) else np.zeros(0)
        nc = len(f.normals)
        allN = np.vstack([f.normals, gN])
        allH = np.concatenate([f.offsets, gH])
        for k in range(len(allN)):
            n, h = allN[k], allH[k]
            circ = _raw_circle(f.q, r, n, h)
            if circ is None:
                continue
            C, R, u, w = circ
            others = np.ones(len(allN), dtype=bool)
            others[k] = False
            dup = (np.abs(allN @ n - 1.0) <= 1e-12) & (np.abs(allH - h) <= 1e-12 * max(1.0, r))
            others &= ~dup
            if R <= 1e-12 * max(1.0, r):
                pts = C[None, :]
                ok = np.all(pts @ f.normals[others[:nc]].T - f.offsets[others[:nc]] <= slack, axis=1)
                if ok[0]:
                    arc_count += 1
                    _add_vertex(C, fi, allN, allH, nc, gam_idx, inc_tol, face_pts, vertices, pair_pts)
                    sig_rows.append(_covered_rows(P_R, pts, r, tol)[0]), sig_pts.append(C)
                continue
            ON, OH = allN[others], allH[others]
            A = R * (ON @ u)
            B = R * (ON @ w)
            D = OH - ON @ C
            M = np.hypot(A, B)
            hit = (M > 1e-15) & (np.abs(D) <= M)
            phi = np.arctan2(B[hit], A[hit])
            off = np.arccos(np.clip(D[hit] / M[hit], -1.0, 1.0))
            angs = np.unique(np.round(np.concatenate([phi + off, phi - off]) % TWO_PI, 14))
            regN = f.normals[others[:nc]]
            regH = f.offsets[others[:nc]]
            if len(angs) == 0:
                a0s, a1s = np.zeros(1), np.full(1, TWO_PI)
            else:
                nxt = np.append(angs[1:], angs[0] + TWO_PI)
                keep = nxt - angs > 1e-13
                a0s, a1s = angs[keep], nxt[keep]
            mids = _circle_points(circ, 0.5 * (a0s + a1s))
            ok = np.all(mids @ regN.T - regH <= slack, axis=1)
            a0s, a1s, mids = a0s[ok], a1s[ok], mids[ok]
            if len(mids) == 0:
                continue
            arc_count += len(mids)
            if len(angs):
                ends = np.unique(np.concatenate([a0s, a1s % TWO_PI]))
                for v in _circle_points(circ, ends):
                    _add_vertex(v, fi, allN, allH, nc, gam_idx, inc_tol, face_pts, vertices, pair_pts)
                    sig_rows.append(_covered_rows(P_R, v[None, :], r, tol)[0]), sig_pts.append(v)
            rows = _covered_rows(P_R, mids, r, tol)
            sig_rows.extend(rows), sig_pts.extend(mids)
            # step off every arc to both sides
            res = np.abs(mids @ ON.T - OH)
            room = res.min(axis=1) if res.shape[1] else np.full(len(mids), np.inf)
            delta = np.minimum(0.5 * room, 1e-3 * r)
            E = (mids - f.q) / r
            d = n - (E @ n)[:, None] * E
            d /= np.linalg.norm(d, axis=1)[:, None]
            for s in (1.0, -1.0):
                dd = delta.copy()
                todo = np.arange(len(mids))
                for _ in range(40):
                    ang = dd[todo] / r
                    Cs = f.q + r * (np.cos(ang)[:, None] * E[todo] + s * np.sin(ang)[:, None] * d[todo])
                    good = s * (Cs @ n - h) > 0
                    if np.any(good):
                        Cg = Cs[good]
                        inside = np.all(Cg @ f.normals.T - f.offsets <= slack, axis=1)
                        Cg = Cg[inside]
                        if len(Cg):
                            sig_rows.extend(_covered_rows(P_R, Cg, r, tol)), sig_pts.extend(Cg)
                    todo = todo[~good]
                    if len(todo) == 0:
                        break
                    dd[todo] *= 0.5
    pair_hits = {k: len(v) for k, v in pair_pts.items()}
    mx = max(pair_hits.values(), default=0)
    if check_bound and mx > 3:
        raise IntersectionBoundViolated(f"a pair of curves crosses {mx} times on sigma_L")
    cells, points = [], []
    seen = set()
    for row, pt in zip(sig_rows, sig_pts):
        key = np.packbits(row).tobytes()
        if key not in seen:
            seen.add(key)
            cells.append(frozenset(np.nonzero(row)[0].tolist()))
            points.append(pt)
    return MapM(vertices, arc_count, cells, points, pair_hits, mx)


def _add_vertex(v, fi, allN, allH, nc, gam_idx, inc_tol, face_pts, vertices, pair_pts):
    """Record a vertex of face fi unless a copy within inc_tol exists; crossings of gamma
    pairs are collected as points so that copies on neighbouring faces count once."""
    seen = face_pts.setdefault(fi, [])
    if seen and np.min(np.linalg.norm(np.asarray(seen) - v, axis=1)) <= inc_tol:
        return
    seen.append(v)
    inc = tuple(np.nonzero(np.abs(allN @ v - allH) <= inc_tol)[0].tolist())
    vertices.append((v, fi, inc))
    gi = [int(gam_idx[i - nc]) for i in inc if i >= nc]
    for x in range(len(gi)):
        for y in range(x + 1, len(gi)):
            pts = pair_pts.setdefault((gi[x], gi[y]), [])
            if not pts or np.min(np.linalg.norm(np.asarray(pts) - v, axis=1)) > inc_tol:
                pts.append(v)


def grand_tour(M: MapM, start: frozenset | None = None) -> GrandTour:
    """Single-toggle walk through all cell signatures (greedy nearest next cell)."""
    cells = list(M.cells)
    if not cells:
        return GrandTour((), (), ())
    remaining = set(range(len(cells)))
    cur_i = 0 if start is None else min(remaining, key=lambda i: len(cells[i] ^ start))
    cur = cells[cur_i]
    sets, toggles, visits = [cur], [None], [cur_i]
    remaining.discard(cur_i)
    while remaining:
        nxt = min(remaining, key=lambda i: (len(cells[i] ^ cur), i))
        target = cells[nxt]
        diff = sorted(cur ^ target)
        for t, x in enumerate(diff):
            cur = cur ^ {x}
            sets.append(cur)
            toggles.append(x)
            visits.append(nxt if t == len(diff) - 1 else -1)
        remaining.discard(nxt)
    return GrandTour(tuple(sets), tuple(toggles), tuple(visits))


@dataclass(frozen=True)
class CensusRecord:
    exists: bool
    omega_span: float  # angular length of C_ab outside B_r(q)
    short: bool  # smaller than a semicircle
    endpoints_right: int  # how many endpoints of omega lie right of lam
    endpoints: tuple = ()

    @property
    def violates(self) -> bool:
        return self.exists and self.short and self.omega_span > 0 and self.endpoints_right == 0


def short_arc_census(a, b, q, r: float, lam) -> CensusRecord:
    """The arc of C_ab outside B_r(q), its length and which of its endpoints lie right of lam."""
    a, b, q = (np.asarray(x, dtype=float) for x in (a, b, q))
    lam = _lam_value(lam)
    d = float(np.linalg.norm(b - a))
    if d == 0 or d >= 2 * r:
        raise NoIntersection("spheres of a and b do not meet in a circle")
    circ = Circle3(0.5 * (a + b), math.sqrt(r * r - d * d / 4), (b - a) / d)
    angs = _sphere_crossings_on_circle(circ, q, r)
    if len(angs) < 2:
        raise NoIntersection("C_ab misses the sphere of q")
    t0, t1 = sorted(angs)
    mid_in = np.linalg.norm(circ.point_at(0.5 * (t0 + t1)) - q) <= r
    if mid_in:
        # outside part is the complementary arc
        lo, hi = t1, t0 + TWO_PI
    else:
        lo, hi = t0, t1
    span = hi - lo
    ends = (circ.point_at(lo), circ.point_at(hi))
    right = sum(1 for e in ends if e[0] > lam)
    return CensusRecord(True, span, span < math.pi - 1e-12, right, ends)


def _sphere_crossings_on_circle(circ: Circle3, q, r) -> list[float]:
    # |c(t) - q|^2 = r^2 with c(t) = C + R(cos t u + sin t w)
    u, w = circ.frame
    dC = circ.center - q
    R = circ.radius
    A = 2 * R * float(np.dot(dC, u))
    B = 2 * R * float(np.dot(dC, w))
    D = r * r - float(np.dot(dC, dC)) - R * R
    M = math.hypot(A, B)
    if M <= 1e-15 or abs(D) > M:
        return []
    phi = math.atan2(B, A)
    off = math.acos(max(-1.0, min(1.0, D / M)))
    return [(phi + off) % TWO_PI, (phi - off) % TWO_PI]


def sigma_vertex_count(sigma: SigmaL, P_R, tol: Tolerance | None = None) -> int:
    return len(build_map(sigma, P_R, tol).vertices)


def seb_prune(P_L, P_R, r: float, tol: Tolerance | None = None) -> bool:
    """True when a guess can be discarded: P_L does not fit, or the points forced to the
    right ball (farther than 2r from some point of P_L) do not fit."""
    tol = tol or default_tolerance()
    s = seb_radius(P_L)
    if s > r and not tol.close(s, r):
        return True
    if len(P_R) == 0 or len(P_L) == 0:
        return False
    D = np.linalg.norm(P_R[:, None, :] - P_L[None, :, :], axis=2)
    forced = P_R[np.any(D > 2 * r + tol.margin(r), axis=1)]
    if len(forced):
        s = seb_radius(forced)
        if s > r and not tol.close(s, r):
            return True
    return False
