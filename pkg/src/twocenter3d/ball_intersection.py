"""Intersections of congruent balls: boundary structure, projected planar maps and the
point / line / plane emptiness queries with witness balls."""
from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field

import numpy as np

from .geom_core import Arc3, Ball, Circle3, Tolerance, as_points, default_tolerance
from .miniball import smallest_enclosing_ball

OUTSIDE = -1
TWO_PI = 2.0 * math.pi


class MixedRadii(ValueError):
    pass


class NotMember(ValueError):
    pass


@dataclass(frozen=True)
class PolyVertex:
    point: np.ndarray
    balls: tuple[int, ...]


@dataclass(frozen=True)
class PolyEdge:
    arc: Arc3
    balls: tuple[int, int]
    full_circle: bool = False


@dataclass(frozen=True)
class PolyFace:
    ball: int
    edges: tuple[int, ...]
    degenerate: bool = False


@dataclass
class MapArc:
    """A projected boundary piece, x-monotone after splitting."""

    arc: Arc3
    balls: tuple[int, ...]
    xmin: float
    xmax: float

    def y_at(self, x: float) -> float:
        c = self.arc.circle
        u, w = c.frame
        A, B = c.radius * u[0], c.radius * w[0]
        M = math.hypot(A, B)
        t0, t1 = self.arc.theta0, self.arc.theta1
        if M <= 1e-300:
            th = 0.5 * (t0 + t1)
        else:
            phi = math.atan2(B, A)
            ratio = min(1.0, max(-1.0, (x - c.center[0]) / M))
            a = math.acos(ratio)
            th = None
            best = math.inf
            for cand in (phi + a, phi - a):
                k = math.floor((t0 - cand) / TWO_PI)
                for shift in (k, k + 1, k + 2):
                    t = cand + shift * TWO_PI
                    dist = max(t0 - t, t - t1, 0.0)
                    if dist < best:
                        best, th = dist, t
            th = min(max(th, t0), t1)
        p = c.point_at(th)
        return float(p[1])


@dataclass
class PlanarMap:
    bounds: list[float]
    slab_arcs: list[list[int]]  # arc ids per slab, y-sorted
    slab_labels: list[list[int]]  # len(arcs) + 1 labels per slab
    arcs: list[MapArc]

    def slab_of(self, x: float) -> int:
        """Slab index containing x, or -1 outside the x-range."""
        if len(self.bounds) < 2:
            return -1
        eps = 1e-9 * max(1.0, abs(self.bounds[0]), abs(self.bounds[-1]))
        if x < self.bounds[0] - eps or x > self.bounds[-1] + eps:
            return -1
        k = bisect.bisect_right(self.bounds, x) - 1
        return min(max(k, 0), len(self.bounds) - 2)

    def locate(self, q) -> int:
        x, y = float(q[0]), float(q[1])
        s = self.slab_of(x)
        if s < 0 or s >= len(self.slab_arcs):
            return OUTSIDE
        ids = self.slab_arcs[s]
        lo, hi = 0, len(ids)
        while lo < hi:
            mid = (lo + hi) // 2
            if self.arcs[ids[mid]].y_at(x) < y:
                lo = mid + 1
            else:
                hi = mid
        return self.slab_labels[s][lo]


@dataclass
class SphericalPolytope:
    centers: np.ndarray  # unique centers actually used
    radius: float
    source: tuple[int, ...]  # input index of each unique center
    vertices: list[PolyVertex]
    edges: list[PolyEdge]
    faces: list[PolyFace]
    degenerate: bool = False
    upper: PlanarMap | None = None
    lower: PlanarMap | None = None
    slab_balls: list[frozenset] = field(default_factory=list)
    xmin: float = 0.0
    xmax: float = 0.0
    left_witness: tuple[int, ...] = ()
    right_witness: tuple[int, ...] = ()

    @property
    def balls(self) -> list[Ball]:
        return [Ball(c, self.radius) for c in self.centers]

    def euler_characteristic(self) -> int:
        """V - E + F, where a vertex-free closed edge or a lone edgeless face carries one vertex."""
        implicit = sum(1 for e in self.edges if e.full_circle)
        if not self.edges and not self.vertices:
            implicit = 1
        return len(self.vertices) + implicit - len(self.edges) + len(self.faces)

    def balls_for_x(self, x: float, eps: float = 1e-12) -> frozenset:
        """Local indices of balls whose faces meet the vertical plane at x."""
        if self.degenerate:
            return frozenset(range(len(self.centers)))
        b = self.upper.bounds
        k = self.upper.slab_of(x)
        if k < 0:
            return frozenset()
        out = set(self.slab_balls[k])
        scale = eps * max(1.0, abs(x), self.radius)
        if k > 0 and abs(x - b[k]) <= scale:
            out |= self.slab_balls[k - 1]
        if k + 1 < len(self.slab_balls) and abs(x - b[k + 1]) <= scale:
            out |= self.slab_balls[k + 1]
        return frozenset(out)


@dataclass
class EmptyPolytope:
    centers: np.ndarray
    radius: float
    source: tuple[int, ...]
    witness: tuple[int, ...]  # local indices whose balls have empty intersection


# Query outcomes.

@dataclass(frozen=True)
class Inside:
    point: np.ndarray


@dataclass(frozen=True)
class Boundary:
    point: np.ndarray


@dataclass(frozen=True)
class Hit:
    point: np.ndarray


@dataclass(frozen=True)
class Witness:
    point: np.ndarray
    degenerate: bool


@dataclass(frozen=True)
class Empty:
    """Certified emptiness; ``witness`` holds (polytope index, input ball index) refs."""

    witness: tuple[tuple[int, int], ...]
    side: int = 0  # for line queries: +1 / -1 is the x-side where the intersection may lie
    self_empty: bool = False  # the witness balls alone have an empty intersection


def _inc_tol(r: float) -> float:
    return 1e-8 * max(1.0, r)


def _dedupe_centers(C: np.ndarray, r: float):
    keep, src = [], []
    for i, c in enumerate(C):
        if any(np.linalg.norm(c - C[j]) <= 1e-12 * max(1.0, r) for j in keep):
            continue
        keep.append(i)
        src.append(i)
    return C[keep], tuple(src)


def _triple_points(C: np.ndarray, r: float) -> np.ndarray:
    k = len(C)
    if k < 3:
        return np.zeros((0, 3))
    idx = np.array([(i, j, l) for i in range(k) for j in range(i + 1, k) for l in range(j + 1, k)])
    ci, cj, cl = C[idx[:, 0]], C[idx[:, 1]], C[idx[:, 2]]
    a, b = cj - ci, cl - ci
    n = np.cross(a, b)
    nn = np.einsum("ij,ij->i", n, n)
    ok = nn > 1e-24 * max(1.0, r) ** 4
    a, b, n, nn, ci = a[ok], b[ok], n[ok], nn[ok], ci[ok]
    aa = np.einsum("ij,ij->i", a, a)
    bb = np.einsum("ij,ij->i", b, b)
    O = ci + (aa[:, None] * np.cross(b, n) + bb[:, None] * np.cross(n, a)) / (2 * nn[:, None])
    R2 = np.einsum("ij,ij->i", O - ci, O - ci)
    t2 = r * r - R2
    good = t2 >= -_inc_tol(r) * r
    t = np.sqrt(np.maximum(t2[good], 0.0))
    nu = n[good] / np.sqrt(nn[good])[:, None]
    Og = O[good]
    return np.vstack([Og + t[:, None] * nu, Og - t[:, None] * nu])


def _inside_all(C, r, P, tol: Tolerance) -> np.ndarray:
    D = np.linalg.norm(P[:, None, :] - C[None, :, :], axis=2)
    return np.all(D <= r + tol.margin(r) + _inc_tol(r) * 0.1, axis=1)


def _angles_in(theta0: float, theta1: float, cands) -> list[float]:
    out = []
    for t in cands:
        t = t % TWO_PI
        while t < theta0:
            t += TWO_PI
        if theta0 + 1e-12 < t < theta1 - 1e-12:
            out.append(t)
    return sorted(out)


def _x_extreme_angles(circle: Circle3) -> list[float]:
    u, w = circle.frame
    if abs(u[0]) <= 1e-15 and abs(w[0]) <= 1e-15:
        return []
    phi = math.atan2(w[0], u[0])
    return [phi, phi + math.pi]


def _level_angles(circle: Circle3, level: float) -> list[float]:
    """Angles where the circle's z-coordinate equals ``level``."""
    u, w = circle.frame
    A, B = circle.radius * u[2], circle.radius * w[2]
    M = math.hypot(A, B)
    if M <= 1e-15:
        return []
    ratio = (level - circle.center[2]) / M
    if abs(ratio) > 1:
        return []
    phi = math.atan2(B, A)
    a = math.acos(ratio)
    return [phi + a, phi - a]


def _pair_circle(C, r, i, j) -> Circle3 | None:
    d = float(np.linalg.norm(C[j] - C[i]))
    if d <= 0 or d >= 2 * r:
        return None
    rad = math.sqrt(max(r * r - d * d / 4, 0.0))
    return Circle3(0.5 * (C[i] + C[j]), rad, (C[j] - C[i]) / d)


def build_polytope(balls, tol: Tolerance | None = None, with_maps: bool = True):
    """Boundary structure of the intersection of congruent balls (list of Ball)."""
    tol = tol or default_tolerance()
    balls = list(balls)
    if not balls:
        raise ValueError("build_polytope needs at least one ball")
    r = balls[0].radius
    if any(not tol.close(b.radius, r) for b in balls):
        raise MixedRadii("all balls must share one radius")
    return polytope_from_centers(np.array([b.center for b in balls]), r, tol, with_maps)


def polytope_from_centers(centers, r: float, tol: Tolerance | None = None, with_maps: bool = True):
    tol = tol or default_tolerance()
    C0 = as_points(centers)
    C, src = _dedupe_centers(C0, r)
    eb = smallest_enclosing_ball(C)
    if eb.radius > r and not tol.close(eb.radius, r):
        return EmptyPolytope(C, r, src, eb.support)
    if tol.close(eb.radius, r):
        # the intersection is a single point
        sup = tuple(range(len(C)))
        on = [i for i in sup if abs(np.linalg.norm(C[i] - eb.center) - r) <= _inc_tol(r)]
        faces = [PolyFace(i, (), True) for i in on]
        P = SphericalPolytope(C, r, src, [PolyVertex(eb.center, tuple(on))], [], faces, True)
        P.xmin = P.xmax = float(eb.center[0])
        P.left_witness = P.right_witness = tuple(on)
        return P
    k = len(C)
    inc = _inc_tol(r)
    # vertices
    pts = _triple_points(C, r)
    verts: list[PolyVertex] = []
    if len(pts):
        pts = pts[_inside_all(C, r, pts, tol)]
        seen = set()
        for p in pts:
            on = tuple(int(i) for i in np.nonzero(np.abs(np.linalg.norm(C - p, axis=1) - r) <= inc)[0])
            key = tuple(np.round(p / (1e-9 * max(1.0, r))).astype(np.int64))
            if len(on) < 3 or key in seen:
                continue
            seen.add(key)
            verts.append(PolyVertex(p, on))
    # edges
    edges: list[PolyEdge] = []
    for i in range(k):
        for j in range(i + 1, k):
            circ = _pair_circle(C, r, i, j)
            if circ is None:
                continue
            angs = sorted(circ.angle_of(v.point) for v in verts if i in v.balls and j in v.balls)
            if not angs:
                p = circ.point_at(0.0)
                if _inside_all(C, r, p[None, :], tol)[0] and _strict_others(C, r, p, (i, j)):
                    edges.append(PolyEdge(Arc3(circ, 0.0, TWO_PI), (i, j), True))
                continue
            angs = _merge_close(angs)
            m = len(angs)
            for t in range(m):
                a0 = angs[t]
                a1 = angs[t + 1] if t + 1 < m else angs[0] + TWO_PI
                if a1 - a0 <= 1e-12:
                    continue
                mid = circ.point_at(0.5 * (a0 + a1))
                if _inside_all(C, r, mid[None, :], tol)[0] and _strict_others(C, r, mid, (i, j)):
                    edges.append(PolyEdge(Arc3(circ, a0, a1), (i, j)))
    faces = []
    for i in range(k):
        es = tuple(t for t, e in enumerate(edges) if i in e.balls)
        if es:
            faces.append(PolyFace(i, es))
    if not faces:
        faces = [PolyFace(0, ())]
    P = SphericalPolytope(C, r, src, verts, edges, faces)
    if with_maps:
        project_maps(P)
    return P


def _merge_close(angs: list[float]) -> list[float]:
    out = []
    for a in angs:
        if not out or a - out[-1] > 1e-10:
            out.append(a)
    if len(out) > 1 and out[0] + TWO_PI - out[-1] <= 1e-10:
        out.pop()
    return out


def _strict_others(C, r, p, own) -> bool:
    """p lies strictly inside every ball not listed in ``own`` (else it is a vertex region)."""
    d = np.linalg.norm(C - p, axis=1)
    mask = np.ones(len(C), dtype=bool)
    mask[list(own)] = False
    return bool(np.all(d[mask] < r - _inc_tol(r) * 0.1)) if mask.any() else True


def _split_arc(arc: Arc3, extra: list[float]) -> list[Arc3]:
    cuts = _angles_in(arc.theta0, arc.theta1, extra)
    bounds = [arc.theta0] + cuts + [arc.theta1]
    return [Arc3(arc.circle, a, b) for a, b in zip(bounds[:-1], bounds[1:]) if b - a > 1e-12]


def _map_arc(arc: Arc3, balls) -> MapArc:
    p0, p1 = arc.endpoints()
    return MapArc(arc, tuple(balls), float(min(p0[0], p1[0])), float(max(p0[0], p1[0])))


def _top_bottom(C, r, x, y):
    h2 = r * r - (x - C[:, 0]) ** 2 - (y - C[:, 1]) ** 2
    h = np.sqrt(np.maximum(h2, 0.0))
    top = C[:, 2] + h
    bot = C[:, 2] - h
    return h2, top, bot


def project_maps(P: SphericalPolytope) -> tuple[PlanarMap, PlanarMap]:
    """Vertical projections of the upper and lower boundary, on shared x-slabs."""
    C, r = P.centers, P.radius
    upper_arcs: list[MapArc] = []
    lower_arcs: list[MapArc] = []
    shared: list[MapArc] = []
    for e in P.edges:
        i, j = e.balls
        circ = e.arc.circle
        cuts = _x_extreme_angles(circ) + _level_angles(circ, C[i][2]) + _level_angles(circ, C[j][2])
        for sub in _split_arc(e.arc, cuts):
            mid = sub.midpoint()
            zi, zj = mid[2] - C[i][2], mid[2] - C[j][2]
            ma = _map_arc(sub, (i, j))
            if zi > 0 and zj > 0:
                upper_arcs.append(ma)
            elif zi < 0 and zj < 0:
                lower_arcs.append(ma)
            else:
                shared.append(ma)
    # horizontal equators of contributing balls
    for f in P.faces:
        i = f.ball
        eq = Circle3(C[i], r, np.array([0.0, 0.0, 1.0]))
        cuts = _x_extreme_angles(eq)
        for j in range(len(C)):
            if j == i:
                continue
            cuts += _equator_crossings(eq, C[j], r)
        cuts = sorted(t % TWO_PI for t in cuts)
        base = cuts[0] if cuts else 0.0
        for sub in _split_arc(Arc3(eq, base, base + TWO_PI), cuts):
            mid = sub.midpoint()
            if _inside_all(C, r, mid[None, :], default_tolerance())[0]:
                shared.append(_map_arc(sub, (i,)))
    xs = sorted({a.xmin for a in shared + upper_arcs + lower_arcs}
                | {a.xmax for a in shared + upper_arcs + lower_arcs})
    bounds = _merge_sorted(xs, 1e-12 * max(1.0, r))
    upper = _build_map(C, r, bounds, upper_arcs + shared, top=True)
    lower = _build_map(C, r, bounds, lower_arcs + shared, top=False)
    P.upper, P.lower = upper, lower
    slab_balls = []
    for s in range(len(bounds) - 1):
        b = set(x for x in upper.slab_labels[s] + lower.slab_labels[s] if x != OUTSIDE)
        for a in upper.slab_arcs[s]:
            b.update(upper.arcs[a].balls)
        for a in lower.slab_arcs[s]:
            b.update(lower.arcs[a].balls)
        slab_balls.append(frozenset(b))
    P.slab_balls = slab_balls
    _set_extremes(P, shared + upper_arcs + lower_arcs)
    return upper, lower


def _equator_crossings(eq: Circle3, cj, r) -> list[float]:
    dz = cj[2] - eq.center[2]
    rj2 = r * r - dz * dz
    if rj2 <= 0:
        return []
    rj = math.sqrt(rj2)
    d = math.hypot(cj[0] - eq.center[0], cj[1] - eq.center[1])
    if d <= 0 or d > r + rj or d < abs(r - rj):
        return []
    a = (d * d + r * r - rj * rj) / (2 * d)
    base = math.atan2(cj[1] - eq.center[1], cj[0] - eq.center[0])
    off = math.acos(max(-1.0, min(1.0, a / r)))
    return [base + off, base - off]


def _merge_sorted(xs, eps):
    out = []
    for x in xs:
        if not out or x - out[-1] > eps:
            out.append(x)
    return out


def _build_map(C, r, bounds, arcs: list[MapArc], top: bool) -> PlanarMap:
    slab_arcs, slab_labels = [], []
    for s in range(len(bounds) - 1):
        xa, xb = bounds[s], bounds[s + 1]
        xm = 0.5 * (xa + xb)
        eps = 1e-12 * max(1.0, r)
        act = [t for t, a in enumerate(arcs)
               if a.xmax - a.xmin > eps and a.xmin <= xa + eps and a.xmax >= xb - eps]
        ys = [arcs[t].y_at(xm) for t in act]
        order = sorted(range(len(act)), key=lambda u: ys[u])
        act = [act[u] for u in order]
        ys = [ys[u] for u in order]
        labels = [OUTSIDE]
        for t in range(len(act) - 1):
            ym = 0.5 * (ys[t] + ys[t + 1])
            h2, tp, bt = _top_bottom(C, r, xm, ym)
            if np.any(h2 < 0) or bt.max() > tp.min():
                labels.append(OUTSIDE)
            else:
                labels.append(int(np.argmin(tp)) if top else int(np.argmax(bt)))
        if act:
            labels.append(OUTSIDE)
        slab_arcs.append(act)
        slab_labels.append(labels)
    return PlanarMap(list(bounds), slab_arcs, slab_labels, arcs)


def _set_extremes(P: SphericalPolytope, arcs: list[MapArc]):
    C, r = P.centers, P.radius
    cand = [v.point for v in P.vertices]
    for a in arcs:
        cand.extend(a.arc.endpoints())
    for i in range(len(C)):
        for s in (-1.0, 1.0):
            p = C[i] + np.array([s * r, 0.0, 0.0])
            if _inside_all(C, r, p[None, :], default_tolerance())[0]:
                cand.append(p)
    cand = np.array(cand)
    lo, hi = cand[int(np.argmin(cand[:, 0]))], cand[int(np.argmax(cand[:, 0]))]
    P.xmin, P.xmax = float(lo[0]), float(hi[0])
    for p, attr in ((lo, "left_witness"), (hi, "right_witness")):
        on = np.nonzero(np.abs(np.linalg.norm(C - p, axis=1) - r) <= 1e-7 * max(1.0, r))[0]
        setattr(P, attr, tuple(int(i) for i in on))


# Queries.

def _ref(polys, k, local) -> tuple[int, int]:
    return (k, int(polys[k].source[local]))


def _ref_center(polys, ref):
    k, src = ref
    P = polys[k]
    local = P.source.index(src)
    return P.centers[local]


def witness_centers(polys, witness) -> np.ndarray:
    return np.array([_ref_center(polys, w) for w in witness]).reshape(-1, 3)


def _radius(polys) -> float:
    return polys[0].radius


def _vertical_witness(polys, k, local_balls, q):
    """At most two balls of polytope k whose vertical chords at q are disjoint or absent."""
    P = polys[k]
    C = P.centers[list(local_balls)]
    h2, tp, bt = _top_bottom(C, P.radius, q[0], q[1])
    ids = list(local_balls)
    if np.any(h2 < 0):
        return ((_ref(polys, k, ids[int(np.argmin(h2))])),)
    return (_ref(polys, k, ids[int(np.argmax(bt))]), _ref(polys, k, ids[int(np.argmin(tp))]))


def _extreme_witness(polys, k, x) -> tuple:
    P = polys[k]
    loc = P.left_witness if x < P.xmin else P.right_witness
    return tuple(_ref(polys, k, i) for i in loc)


def pi0_point_query(polys, q, tol: Tolerance | None = None):
    """Is the vertical line over 2D point q met by the intersection of all polytopes?"""
    tol = tol or default_tolerance()
    q = (float(q[0]), float(q[1]))
    los, his = [], []
    for k, P in enumerate(polys):
        if isinstance(P, EmptyPolytope):
            return Empty(tuple(_ref(polys, k, i) for i in P.witness), 0, True)
        r = P.radius
        if P.degenerate:
            v = P.vertices[0].point
            if math.hypot(q[0] - v[0], q[1] - v[1]) > tol.margin(r):
                return Empty(tuple(_ref(polys, k, i) for i in P.vertices[0].balls), 0, True)
            los.append((v[2], (k, P.vertices[0].balls[0])))
            his.append((v[2], (k, P.vertices[0].balls[0])))
            continue
        if q[0] < P.xmin - tol.margin(r) or q[0] > P.xmax + tol.margin(r):
            return Empty(_extreme_witness(polys, k, q[0]))
        a = P.upper.locate(q)
        b = P.lower.locate(q)
        if a == OUTSIDE or b == OUTSIDE:
            h2, tp, bt = _top_bottom(P.centers, r, q[0], q[1])
            if np.all(h2 >= -tol.margin(r) * r) and bt.max() <= tp.min() + tol.margin(r):
                a, b = int(np.argmin(tp)), int(np.argmax(bt))
            else:
                return Empty(_vertical_witness(polys, k, P.balls_for_x(q[0]) or range(len(P.centers)), q))
        h2, tp, _ = _top_bottom(P.centers[[a]], r, q[0], q[1])
        h2b, _, bt = _top_bottom(P.centers[[b]], r, q[0], q[1])
        his.append((float(tp[0]), (k, a)))
        los.append((float(bt[0]), (k, b)))
    lo, wlo = max(los)
    hi, whi = min(his)
    if tol.close(lo, hi):
        return Boundary(np.array([q[0], q[1], 0.5 * (lo + hi)]))
    if lo < hi:
        return Inside(np.array([q[0], q[1], 0.5 * (lo + hi)]))
    return Empty((_ref(polys, *wlo), _ref(polys, *whi)))


def _line_feasibility(C, r, x0, tol: Tolerance):
    """min over the line {x = x0} of (max bottom - min top) for balls C; returns (value, y)."""
    w2 = r * r - (x0 - C[:, 0]) ** 2
    if np.any(w2 < -tol.margin(r) * r):
        return math.inf, None
    w = np.sqrt(np.maximum(w2, 0.0))
    ylo = float(np.max(C[:, 1] - w))
    yhi = float(np.min(C[:, 1] + w))
    if ylo > yhi:
        if ylo - yhi > tol.margin(r):
            return math.inf, None
        ylo = yhi = 0.5 * (ylo + yhi)

    def g(y):
        h = np.sqrt(np.maximum(w * w - (y - C[:, 1]) ** 2, 0.0))
        return float(np.max(C[:, 2] - h) - np.min(C[:, 2] + h))

    a, b = ylo, yhi
    invphi = (math.sqrt(5) - 1) / 2
    c, d = b - invphi * (b - a), a + invphi * (b - a)
    gc, gd = g(c), g(d)
    for _ in range(120):
        if b - a <= 1e-15 * max(1.0, abs(a), abs(b)):
            break
        if gc <= gd:
            b, d, gd = d, c, gc
            c = b - invphi * (b - a)
            gc = g(c)
        else:
            a, c, gc = c, d, gd
            d = a + invphi * (b - a)
            gd = g(d)
    best = min(((g(y), y) for y in (a, b, 0.5 * (a + b), ylo, yhi)), key=lambda t: t[0])
    return best


def _side_of(polys, witness, x0) -> tuple[int, bool]:
    C = witness_centers(polys, witness)
    eb = smallest_enclosing_ball(C)
    r = _radius(polys)
    if eb.radius > r and not default_tolerance().close(eb.radius, r):
        return 1, True
    return (1 if eb.center[0] > x0 else -1), False


def pi1_line_query(polys, x0: float, tol: Tolerance | None = None):
    """Does the intersection meet the vertical plane {x = x0} (a y-parallel line after projection)?"""
    tol = tol or default_tolerance()
    x0 = float(x0)
    refs = []
    misses = {}
    for k, P in enumerate(polys):
        if isinstance(P, EmptyPolytope):
            return Empty(tuple(_ref(polys, k, i) for i in P.witness), 1, True)
        r = P.radius
        if x0 < P.xmin - tol.margin(r) or x0 > P.xmax + tol.margin(r):
            misses.setdefault(1 if x0 < P.xmin else -1, k)
            continue
        refs.extend(_ref(polys, k, i) for i in sorted(P.balls_for_x(x0)))
    if misses:
        # polytopes missing the plane on both sides certify an empty intersection
        W = ()
        for k in misses.values():
            W += _extreme_witness(polys, k, x0)
        if len(misses) == 2:
            return Empty(W, next(iter(misses)), True)
        side, self_empty = _side_of(polys, W, x0)
        return Empty(W, side, self_empty)
    refs = tuple(dict.fromkeys(refs))
    C = witness_centers(polys, refs)
    r = _radius(polys)
    val, y = _line_feasibility(C, r, x0, tol)
    if val <= tol.margin(r):
        h2, tp, bt = _top_bottom(C, r, x0, y)
        return Hit(np.array([x0, y, 0.5 * (bt.max() + tp.min())]))
    side, self_empty = _side_of(polys, refs, x0)
    return Empty(refs, side, self_empty)


def is_degenerate(polys, w, tol: Tolerance | None = None) -> bool:
    """True iff the balls whose spheres pass through w meet only at w."""
    tol = tol or default_tolerance()
    w = np.asarray(w, dtype=float)
    on = []
    for P in polys:
        C = P.centers
        d = np.linalg.norm(C - w, axis=1)
        r = P.radius
        if np.any(d > r + 1e-6 * max(1.0, r)):
            raise NotMember("point lies outside some ball")
        on.extend(C[np.abs(d - r) <= 1e-7 * max(1.0, r)])
    if not on:
        return False
    eb = smallest_enclosing_ball(np.array(on))
    return tol.close(eb.radius, polys[0].radius)


def pi2_emptiness(polys, tol: Tolerance | None = None):
    """Nonemptiness of the intersection of all polytopes, with a point or a witness set."""
    tol = tol or default_tolerance()
    polys = list(polys)
    r = _radius(polys)
    for k, P in enumerate(polys):
        if isinstance(P, EmptyPolytope):
            return Empty(tuple(_ref(polys, k, i) for i in P.witness), 0, True)
    klo = max(range(len(polys)), key=lambda k: polys[k].xmin)
    khi = min(range(len(polys)), key=lambda k: polys[k].xmax)
    X_lo, X_hi = polys[klo].xmin, polys[khi].xmax
    if X_lo > X_hi + tol.margin(r):
        W = tuple(_ref(polys, klo, i) for i in polys[klo].left_witness)
        W += tuple(_ref(polys, khi, i) for i in polys[khi].right_witness)
        return Empty(W, 0, True)
    X_hi = max(X_hi, X_lo)
    xs = {X_lo, X_hi}
    for P in polys:
        if not P.degenerate:
            xs.update(x for x in P.upper.bounds if X_lo < x < X_hi)
    xs = sorted(xs)

    def probe(x):
        res = pi1_line_query(polys, x, tol)
        if isinstance(res, Hit):
            return res, None
        return None, res

    hit, e_lo = probe(xs[0])
    if hit is not None:
        return _witness(polys, hit.point, tol)
    if e_lo.self_empty:
        return Empty(e_lo.witness, 0, True)
    if e_lo.side < 0:
        W = e_lo.witness + tuple(_ref(polys, klo, i) for i in polys[klo].left_witness)
        return Empty(W, 0, True)
    if len(xs) == 1:
        return Empty(e_lo.witness, 0, True)
    hit, e_hi = probe(xs[-1])
    if hit is not None:
        return _witness(polys, hit.point, tol)
    if e_hi.self_empty:
        return Empty(e_hi.witness, 0, True)
    if e_hi.side > 0:
        W = e_hi.witness + tuple(_ref(polys, khi, i) for i in polys[khi].right_witness)
        return Empty(W, 0, True)
    lo, hi = 0, len(xs) - 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        hit, e = probe(xs[mid])
        if hit is not None:
            return _witness(polys, hit.point, tol)
        if e.self_empty:
            return Empty(e.witness, 0, True)
        if e.side > 0:
            lo, e_lo = mid, e
        else:
            hi, e_hi = mid, e
    xm = 0.5 * (xs[lo] + xs[hi])
    refs = list(e_lo.witness) + list(e_hi.witness)
    for k, P in enumerate(polys):
        refs.extend(_ref(polys, k, i) for i in sorted(P.balls_for_x(xm)))
    refs = tuple(dict.fromkeys(refs))
    eb = smallest_enclosing_ball(witness_centers(polys, refs))
    if eb.radius > r and not tol.close(eb.radius, r):
        return Empty(refs, 0, True)
    return _witness(polys, eb.center, tol)


def _witness(polys, w, tol) -> Witness:
    return Witness(np.asarray(w, dtype=float), is_degenerate(polys, w, tol))


def witness_is_empty(polys, witness, tol: Tolerance | None = None) -> bool:
    """Independent check that the referenced balls have an empty common intersection."""
    tol = tol or default_tolerance()
    eb = smallest_enclosing_ball(witness_centers(polys, witness))
    r = _radius(polys)
    return eb.radius > r and not tol.close(eb.radius, r)
