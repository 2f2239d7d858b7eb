"""Plane arrangements: full-dimensional cell enumeration, single-toggle tours,
plane classification against convex pieces, and (1/rho)-cuttings."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np


class DegenerateArrangement(RuntimeError):
    pass


class DisconnectedAdjacency(RuntimeError):
    pass


class CuttingFailure(RuntimeError):
    pass


@dataclass(frozen=True)
class Cell:
    signs: tuple[int, ...]
    point: np.ndarray


@dataclass(frozen=True)
class CellTour:
    """Positions of a walk over cells; ``toggles[k]`` is the plane flipped to reach step k."""

    cells: tuple[int, ...]
    toggles: tuple[int | None, ...]

    def __len__(self):
        return len(self.cells)


def planes_to_arrays(planes) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(planes, tuple) and len(planes) == 2 and isinstance(planes[0], np.ndarray):
        N, d = planes
        return np.asarray(N, dtype=float).reshape(-1, 3), np.asarray(d, dtype=float).reshape(-1)
    planes = list(planes)
    if not planes:
        return np.zeros((0, 3)), np.zeros(0)
    return np.array([h.normal for h in planes]), np.array([h.offset for h in planes])


def _signs_at(N, d, x, eps):
    v = N @ x - d
    s = np.sign(v).astype(np.int8)
    s[np.abs(v) <= eps] = 0
    return s


def _enumerate(N: np.ndarray, d: np.ndarray, rng) -> list[tuple[np.ndarray, np.ndarray]]:
    """Sign vectors and interior points of all full-dimensional cells of {N x = d}."""
    n, dim = N.shape
    if n == 0:
        return [(np.zeros(0, dtype=np.int8), np.zeros(dim))]
    scale = max(1.0, float(np.abs(d).max()), float(np.abs(N).max()))
    _, S, Vt = np.linalg.svd(N)
    rank = int(np.sum(S > 1e-10 * S[0])) if S.size else 0
    if rank == 0:
        raise DegenerateArrangement("all hyperplane normals vanish")
    if rank < dim:
        B = Vt[:rank]
        out = _enumerate(N @ B.T, d, rng)
        return [(s, B.T @ y) for s, y in out]
    eps = 1e-9 * scale
    if dim == 1:
        t = d / N[:, 0]
        ts = np.unique(np.round(t, 12))
        reps = [ts[0] - 1.0]
        reps += [0.5 * (a + b) for a, b in zip(ts[:-1], ts[1:])]
        reps.append(ts[-1] + 1.0)
        out = []
        for x in reps:
            p = np.array([x])
            out.append((_signs_at(N, d, p, 0.0), p))
        return out

    found: dict[bytes, np.ndarray] = {}
    seen_vertices: set[tuple] = set()
    for comb in itertools.combinations(range(n), dim):
        A = N[list(comb)]
        if abs(np.linalg.det(A)) <= 1e-10 * np.prod(np.linalg.norm(A, axis=1)):
            continue
        v = np.linalg.solve(A, d[list(comb)])
        res = N @ v - d
        inc = np.abs(res) <= eps * (1.0 + np.abs(N @ v))
        key = tuple(np.nonzero(inc)[0])
        if key in seen_vertices:
            continue
        seen_vertices.add(key)
        inc_idx = np.nonzero(inc)[0]
        if len(inc_idx) == dim:
            dirs = []
            Ainv = np.linalg.inv(A)
            for s in itertools.product((-1.0, 1.0), repeat=dim):
                dirs.append(Ainv @ np.array(s))
        else:
            dirs = _central_directions(N[inc_idx], rng)
        far = np.nonzero(~inc)[0]
        for z in dirs:
            z = z / np.linalg.norm(z)
            if far.size:
                rate = np.abs(N[far] @ z)
                slack = np.abs(res[far])
                with np.errstate(divide="ignore"):
                    lim = np.where(rate > 0, slack / np.maximum(rate, 1e-300), np.inf)
                step = min(0.5 * float(lim.min()), scale)
            else:
                step = scale
            p = v + step * z
            s = _signs_at(N, d, p, 0.0)
            if np.any(N @ p - d == 0):
                continue
            found.setdefault(s.tobytes(), p)
    return [(np.frombuffer(k, dtype=np.int8).copy(), p) for k, p in found.items()]


def _central_directions(A: np.ndarray, rng) -> list[np.ndarray]:
    """One direction inside each open cone of the central arrangement {A z = 0}."""
    m, dim = A.shape
    a = rng.normal(size=dim)
    a /= np.linalg.norm(a)
    # orthonormal basis of a-perp
    Q, _ = np.linalg.qr(np.column_stack([a, np.eye(dim)]))
    C = Q[:, 1:dim]
    dirs = []
    for sgn in (1.0, -1.0):
        z0 = sgn * a
        sub = _enumerate(A @ C, -(A @ z0), rng)
        for _, w in sub:
            dirs.append(z0 + C @ w)
    return dirs


def enumerate_cells(planes, seed: int = 0) -> list[Cell]:
    """All full-dimensional cells of an arrangement of planes (list of Plane or (N, d))."""
    N, d = planes_to_arrays(planes)
    rng = np.random.default_rng(seed)
    out = _enumerate(N, d, rng)
    cells = []
    for s, p in out:
        if np.any(s == 0):
            raise DegenerateArrangement("cell representative lies on a plane")
        cells.append(Cell(tuple(int(v) for v in s), np.asarray(p, dtype=float)))
    cells.sort(key=lambda c: c.signs)
    return cells


def generic_cell_count(n: int, dim: int = 3) -> int:
    return sum(math.comb(n, i) for i in range(dim + 1))


def build_tour(cells: list[Cell]) -> CellTour:
    """DFS walk over a spanning tree of the Hamming-1 adjacency graph (no trailing returns)."""
    if not cells:
        return CellTour((), ())
    index = {c.signs: i for i, c in enumerate(cells)}
    m = len(cells[0].signs)
    visited = [False] * len(cells)
    order: list[int] = [0]
    toggles: list[int | None] = [None]
    visited[0] = True
    count = 1
    stack = [(0, 0)]  # (cell, next plane to try)
    while stack:
        if count == len(cells):
            break
        cur, k = stack[-1]
        moved = False
        while k < m:
            s = list(cells[cur].signs)
            s[k] = -s[k]
            j = index.get(tuple(s))
            k += 1
            if j is not None and not visited[j]:
                stack[-1] = (cur, k)
                visited[j] = True
                count += 1
                order.append(j)
                toggles.append(k - 1)
                stack.append((j, 0))
                moved = True
                break
        if moved:
            continue
        stack.pop()
        if stack:
            parent = stack[-1][0]
            diff = [t for t in range(m) if cells[parent].signs[t] != cells[cur].signs[t]]
            order.append(parent)
            toggles.append(diff[0])
    if count != len(cells):
        raise DisconnectedAdjacency(f"reached {count} of {len(cells)} cells")
    return CellTour(tuple(order), tuple(toggles))


def validate_tour(tour: CellTour, cells: list[Cell]) -> bool:
    for k in range(1, len(tour)):
        a = cells[tour.cells[k - 1]].signs
        b = cells[tour.cells[k]].signs
        diff = [t for t in range(len(a)) if a[t] != b[t]]
        if diff != [tour.toggles[k]]:
            return False
    return set(tour.cells) == set(range(len(cells)))


# Convex pieces (possibly unbounded), stored as vertex + ray frames.

@dataclass
class Piece:
    constraints: list[tuple[int, int]]  # (plane index, required sign)
    vertices: np.ndarray
    rays: np.ndarray
    crossing: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))

    def value_range(self, normal, offset) -> tuple[float, float]:
        """(inf, sup) of normal . x - offset over the piece."""
        vals = self.vertices @ normal - offset if len(self.vertices) else np.array([0.0])
        lo, hi = float(vals.min()), float(vals.max())
        if len(self.rays):
            rr = self.rays @ normal
            scale = 1e-12 * max(1.0, float(np.abs(normal).max()))
            if np.any(rr > scale):
                hi = math.inf
            if np.any(rr < -scale):
                lo = -math.inf
        return lo, hi

    def interior_point(self) -> np.ndarray:
        p = self.vertices.mean(axis=0) if len(self.vertices) else np.zeros(3)
        if len(self.rays):
            p = p + self.rays.sum(axis=0) / max(1, len(self.rays))
        return p


def _piece_frame(N, d, constraints) -> tuple[np.ndarray, np.ndarray, list[tuple[int, int]]]:
    if constraints:
        idx = np.array([c[0] for c in constraints])
        sg = np.array([c[1] for c in constraints], dtype=float)
        A = N[idx] * sg[:, None]
        b = d[idx] * sg
    else:
        A = np.zeros((0, 3))
        b = np.zeros(0)
    scale = max(1.0, float(np.abs(b).max()) if b.size else 1.0)
    # recession cone {r : A r >= 0}: candidate generators
    E = np.eye(3)
    cand = [E, -E]
    m = len(A)
    if m:
        cand += [A, -A]
        cr = np.cross(A[:, None, :], A[None, :, :]).reshape(-1, 3)
        cr = np.vstack([cr, np.cross(E[:, None, :], A[None, :, :]).reshape(-1, 3)])
        cand += [cr, -cr]
        if m <= 12:
            cr2 = np.cross(cr[:, None, :], A[None, :, :]).reshape(-1, 3)
            cand += [cr2, -cr2]
    R = np.vstack(cand)
    nr = np.linalg.norm(R, axis=1)
    R = R[nr > 1e-12] / nr[nr > 1e-12, None]
    if m:
        ok = np.all(A @ R.T >= -1e-10 * np.linalg.norm(A, axis=1)[:, None], axis=0)
        R = R[ok]
    R = _dedupe_rows(R, 1e-9)
    # lineality basis supplies artificial planes so that vertices exist
    if m:
        _, S, Vt = np.linalg.svd(A)
        rank = int(np.sum(S > 1e-10 * S[0]))
    else:
        rank, Vt = 0, E
    H, hb = A, b
    if rank < 3:
        null = Vt[rank:] if m else E
        H = np.vstack([H, null])
        hb = np.concatenate([hb, np.zeros(len(null))])
    tri = np.array(list(itertools.combinations(range(len(H)), 3)), dtype=np.int64).reshape(-1, 3)
    M = H[tri]
    det = np.linalg.det(M) if len(tri) else np.zeros(0)
    good = np.abs(det) > 1e-12 * np.maximum(1e-300, np.prod(np.linalg.norm(M, axis=2), axis=1))
    X = np.linalg.solve(M[good], hb[tri[good]][..., None])[..., 0] if good.any() else np.zeros((0, 3))
    if m and len(X):
        AX = X @ A.T
        X = X[np.all(AX - b >= -1e-9 * scale * (1 + np.abs(AX)), axis=1)]
    V = _dedupe_rows(X, 1e-9 * scale)
    kept = list(constraints)
    if m and len(V):
        keep = (np.abs(A @ V.T - b[:, None]) <= 1e-8 * scale).any(axis=1)
        kept = [c for c, k in zip(constraints, keep) if k]
    return V, R, kept


def _dedupe_rows(X, tol):
    if len(X) <= 1:
        return X
    key = np.round(X / tol).astype(np.int64) if tol > 0 else X
    _, first = np.unique(key, axis=0, return_index=True)
    return X[np.sort(first)]


def make_piece(N, d, constraints) -> Piece:
    V, R, kept = _piece_frame(N, d, constraints)
    return Piece(kept, V, R)


def classify_planes(piece: Piece, planes, tol: float = 1e-9):
    """Split plane indices into (above, below, crossing) relative to a convex piece.

    "above": the plane passes above every point of the piece (piece on its negative
    side along a positive last normal component); "below" symmetric.
    """
    N, d = planes_to_arrays(planes)
    above, below, crossing = [], [], []
    for i in range(len(N)):
        lo, hi = piece.value_range(N[i], d[i])
        scale = tol * max(1.0, abs(d[i]))
        if hi <= scale:
            neg = True
        elif lo >= -scale:
            neg = False
        else:
            crossing.append(i)
            continue
        # orient by the w-component so that "above" means larger last coordinate
        up = N[i][2] >= 0
        if neg == up:
            above.append(i)
        else:
            below.append(i)
    return set(above), set(below), set(crossing)


@dataclass
class Cutting:
    pieces: list[Piece]
    n_planes: int
    rho: int

    @property
    def size(self) -> int:
        return len(self.pieces)

    def max_crossing(self) -> int:
        return max((len(p.crossing) for p in self.pieces), default=0)

    def verify(self) -> bool:
        bound = self.n_planes / self.rho
        return all(len(p.crossing) <= bound for p in self.pieces)


def _crossing(piece: Piece, N, d, cand) -> np.ndarray:
    out = []
    for i in cand:
        lo, hi = piece.value_range(N[i], d[i])
        s = 1e-9 * max(1.0, abs(d[i]))
        if lo < -s and hi > s:
            out.append(i)
    return np.array(out, dtype=np.int64)


def _sample_pieces(N, d, sample: np.ndarray, seed: int) -> list[Piece] | None:
    """Cells of the arrangement of the sampled planes as vertex/ray frames.

    Returns None when the sample normals do not span space (cells without vertices).
    """
    S, sd = N[sample], d[sample]
    if np.linalg.matrix_rank(S) < 3:
        return None
    cells = enumerate_cells((S, sd), seed=seed)
    index = {c.signs: k for k, c in enumerate(cells)}
    verts: list[list[np.ndarray]] = [[] for _ in cells]
    rays: list[list[np.ndarray]] = [[] for _ in cells]
    scale = max(1.0, float(np.abs(sd).max()))

    def attach(sig, zero, item, bucket):
        free = np.nonzero(zero)[0]
        if len(free) > 10:
            return
        for combo in itertools.product((-1, 1), repeat=len(free)):
            s = sig.copy()
            s[free] = combo
            k = index.get(tuple(int(v) for v in s))
            if k is not None:
                bucket[k].append(item)

    s = len(sample)
    tri = np.array(list(itertools.combinations(range(s), 3)), dtype=np.int64)
    M = S[tri]
    det = np.linalg.det(M)
    good = np.abs(det) > 1e-12 * np.prod(np.linalg.norm(M, axis=2), axis=1)
    X = np.linalg.solve(M[good], sd[tri[good]][..., None])[..., 0]
    vals = X @ S.T - sd
    zero = np.abs(vals) <= 1e-9 * scale * (1.0 + np.abs(X @ S.T))
    seen = set()
    for x, v, z in zip(X, vals, zero):
        key = tuple(np.nonzero(z)[0])
        if key in seen:
            continue
        seen.add(key)
        sig = np.sign(v).astype(np.int64)
        attach(sig, z, x, verts)
    pairs = np.array(list(itertools.combinations(range(s), 2)), dtype=np.int64)
    C = np.cross(S[pairs[:, 0]], S[pairs[:, 1]])
    nc = np.linalg.norm(C, axis=1)
    C = C[nc > 1e-12] / nc[nc > 1e-12, None]
    for r in np.vstack([C, -C]):
        dots = S @ r
        z = np.abs(dots) <= 1e-10 * np.linalg.norm(S, axis=1)
        attach(np.sign(dots).astype(np.int64), z, r, rays)
    pieces = []
    for k, c in enumerate(cells):
        V = _dedupe_rows(np.array(verts[k]).reshape(-1, 3), 1e-9 * scale)
        R = _dedupe_rows(np.array(rays[k]).reshape(-1, 3), 1e-9)
        cons = [(int(sample[i]), c.signs[i]) for i in range(s)]
        pieces.append(Piece(cons, V, R))
    return pieces


def _crossing_all(piece: Piece, N, d) -> np.ndarray:
    vals = piece.vertices @ N.T - d
    lo, hi = vals.min(axis=0), vals.max(axis=0)
    if len(piece.rays):
        rr = piece.rays @ N.T
        sc = 1e-12 * np.maximum(1.0, np.abs(N).max(axis=1))
        hi = np.where((rr > sc).any(axis=0), np.inf, hi)
        lo = np.where((rr < -sc).any(axis=0), -np.inf, lo)
    s = 1e-9 * np.maximum(1.0, np.abs(d))
    return np.nonzero((lo < -s) & (hi > s))[0].astype(np.int64)


def build_cutting(planes, rho: int, seed: int = 0, max_retries: int = 50) -> Cutting:
    """(1/rho)-cutting from the arrangement of a random sample, verified exactly.

    Pieces are the (possibly unbounded) convex cells of the sampled arrangement; every
    piece is crossed by at most n/rho planes.  A failed verification resamples with a
    larger sample.
    """
    if rho < 1:
        raise ValueError("rho must be >= 1")
    N, d = planes_to_arrays(planes)
    n = len(N)
    bound = n / rho
    root = make_piece(N, d, [])
    root.crossing = np.arange(n, dtype=np.int64)
    if n <= bound:
        return Cutting([root], n, rho)
    size = min(n, max(3, math.ceil(rho * math.log(rho + 1))))
    for attempt in range(max_retries):
        rng = np.random.default_rng(seed + attempt)
        sample = np.sort(rng.choice(n, size=size, replace=False))
        pieces = _sample_pieces(N, d, sample, seed + attempt)
        if pieces is None:
            pieces = _refine(N, d, root, bound, rng)
        refined = []
        for p in pieces:
            p.crossing = _crossing_all(p, N, d)
            if len(p.crossing) > bound:
                p.constraints = _tight_constraints(N, d, p)
                refined.extend(_refine(N, d, p, bound, rng))
            else:
                refined.append(p)
        pieces = refined
        cut = Cutting(pieces, n, rho)
        if cut.verify():
            return cut
        size = min(n, math.ceil(size * 1.25))
    raise CuttingFailure(f"no verified cutting after {max_retries} attempts")


def _tight_constraints(N, d, piece: Piece) -> list[tuple[int, int]]:
    if not len(piece.vertices):
        return piece.constraints
    idx = np.array([c[0] for c in piece.constraints])
    vals = piece.vertices @ N[idx].T - d[idx]
    tight = (np.abs(vals) <= 1e-8 * np.maximum(1.0, np.abs(d[idx]))).any(axis=0)
    return [c for c, t in zip(piece.constraints, tight) if t]


def _refine(N, d, root: Piece, bound: float, rng) -> list[Piece]:
    """Fallback for degenerate normal sets: split heavy pieces by random crossing planes."""
    done, todo = [], [root]
    while todo:
        piece = todo.pop()
        if len(piece.crossing) <= bound:
            done.append(piece)
            continue
        j = int(rng.choice(piece.crossing))
        for sg in (1, -1):
            child = make_piece(N, d, piece.constraints + [(j, sg)])
            child.crossing = _crossing(child, N, d, piece.crossing)
            todo.append(child)
    return done
