"""Hot numeric kernels.

Every kernel is written in the scalar subset of numpy that numba can compile.
When numba is missing, or ``TWOCENTER3D_DISABLE_NUMBA=1`` is set before import,
the same functions run as plain Python over numpy arrays.
"""
import os

import numpy as np

_DISABLED = os.environ.get("TWOCENTER3D_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes")

try:
    if _DISABLED:
        raise ImportError("numba disabled by environment")
    from numba import njit

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]

        def _wrap(f):
            return f

        return _wrap


BACKEND = "numba" if HAVE_NUMBA else "numpy"

# relative slack used when deciding "point outside current ball" inside Welzl
_IN_EPS = 1e-12


@njit(cache=True)
def _dist2(a0, a1, a2, b0, b1, b2):
    d0 = a0 - b0
    d1 = a1 - b1
    d2 = a2 - b2
    return d0 * d0 + d1 * d1 + d2 * d2


@njit(cache=True)
def _ball2(P, i, j, out):
    out[0] = 0.5 * (P[i, 0] + P[j, 0])
    out[1] = 0.5 * (P[i, 1] + P[j, 1])
    out[2] = 0.5 * (P[i, 2] + P[j, 2])
    out[3] = 0.25 * _dist2(P[i, 0], P[i, 1], P[i, 2], P[j, 0], P[j, 1], P[j, 2])


@njit(cache=True)
def _ball3(P, i, j, k, out):
    """Circumball of three points (center in their plane). Returns False if collinear."""
    ax = P[j, 0] - P[i, 0]
    ay = P[j, 1] - P[i, 1]
    az = P[j, 2] - P[i, 2]
    bx = P[k, 0] - P[i, 0]
    by = P[k, 1] - P[i, 1]
    bz = P[k, 2] - P[i, 2]
    cx = ay * bz - az * by
    cy = az * bx - ax * bz
    cz = ax * by - ay * bx
    c2 = cx * cx + cy * cy + cz * cz
    a2 = ax * ax + ay * ay + az * az
    b2 = bx * bx + by * by + bz * bz
    if c2 <= 1e-24 * a2 * b2 or c2 == 0.0:
        return False
    # (|a|^2 b - |b|^2 a) x (a x b) / (2 |a x b|^2)
    ux = a2 * bx - b2 * ax
    uy = a2 * by - b2 * ay
    uz = a2 * bz - b2 * az
    ox = (uy * cz - uz * cy) / (2.0 * c2)
    oy = (uz * cx - ux * cz) / (2.0 * c2)
    oz = (ux * cy - uy * cx) / (2.0 * c2)
    out[0] = P[i, 0] + ox
    out[1] = P[i, 1] + oy
    out[2] = P[i, 2] + oz
    out[3] = ox * ox + oy * oy + oz * oz
    return True


@njit(cache=True)
def _ball4(P, i, j, k, l, out):
    """Circumsphere of four points. Returns False if (nearly) coplanar."""
    ax = P[j, 0] - P[i, 0]
    ay = P[j, 1] - P[i, 1]
    az = P[j, 2] - P[i, 2]
    bx = P[k, 0] - P[i, 0]
    by = P[k, 1] - P[i, 1]
    bz = P[k, 2] - P[i, 2]
    cx = P[l, 0] - P[i, 0]
    cy = P[l, 1] - P[i, 1]
    cz = P[l, 2] - P[i, 2]
    a2 = ax * ax + ay * ay + az * az
    b2 = bx * bx + by * by + bz * bz
    c2 = cx * cx + cy * cy + cz * cz
    # cofactors of [a; b; c]
    bxc0 = by * cz - bz * cy
    bxc1 = bz * cx - bx * cz
    bxc2 = bx * cy - by * cx
    cxa0 = cy * az - cz * ay
    cxa1 = cz * ax - cx * az
    cxa2 = cx * ay - cy * ax
    axb0 = ay * bz - az * by
    axb1 = az * bx - ax * bz
    axb2 = ax * by - ay * bx
    det = ax * bxc0 + ay * bxc1 + az * bxc2
    scale = np.sqrt(a2 * b2 * c2)
    if abs(det) <= 1e-12 * scale or det == 0.0:
        return False
    ox = (a2 * bxc0 + b2 * cxa0 + c2 * axb0) / (2.0 * det)
    oy = (a2 * bxc1 + b2 * cxa1 + c2 * axb1) / (2.0 * det)
    oz = (a2 * bxc2 + b2 * cxa2 + c2 * axb2) / (2.0 * det)
    out[0] = P[i, 0] + ox
    out[1] = P[i, 1] + oy
    out[2] = P[i, 2] + oz
    out[3] = ox * ox + oy * oy + oz * oz
    return True


@njit(cache=True)
def _outside(P, m, ball, slack):
    d2 = _dist2(P[m, 0], P[m, 1], P[m, 2], ball[0], ball[1], ball[2])
    return d2 > ball[3] + slack * (1.0 + ball[3])


@njit(cache=True)
def _small_seb(P, idx, k, out, sup):
    """Exact SEB of at most four points by trying every support subset.

    Writes the ball into ``out`` and the support into ``sup``; returns support size.
    """
    best = np.inf
    nsup = 0
    tmp = np.empty(4)
    # single point
    if k == 1:
        out[0] = P[idx[0], 0]
        out[1] = P[idx[0], 1]
        out[2] = P[idx[0], 2]
        out[3] = 0.0
        sup[0] = idx[0]
        return 1
    for mask in range(1, 1 << k):
        cnt = 0
        ids = np.empty(4, dtype=np.int64)
        for t in range(k):
            if mask & (1 << t):
                ids[cnt] = idx[t]
                cnt += 1
        if cnt == 1:
            continue
        ok = True
        if cnt == 2:
            _ball2(P, ids[0], ids[1], tmp)
        elif cnt == 3:
            ok = _ball3(P, ids[0], ids[1], ids[2], tmp)
        else:
            ok = _ball4(P, ids[0], ids[1], ids[2], ids[3], tmp)
        if not ok:
            continue
        if tmp[3] >= best:
            continue
        good = True
        for t in range(k):
            if _outside(P, idx[t], tmp, 1e-10):
                good = False
                break
        if good:
            best = tmp[3]
            out[0] = tmp[0]
            out[1] = tmp[1]
            out[2] = tmp[2]
            out[3] = tmp[3]
            nsup = cnt
            for t in range(cnt):
                sup[t] = ids[t]
    return nsup


@njit(cache=True)
def _boundary_ball(P, fixed, nfixed, out, sup):
    """Smallest ball with all ``fixed`` points on its boundary (center in their hull)."""
    ok = True
    if nfixed == 1:
        out[0] = P[fixed[0], 0]
        out[1] = P[fixed[0], 1]
        out[2] = P[fixed[0], 2]
        out[3] = 0.0
    elif nfixed == 2:
        _ball2(P, fixed[0], fixed[1], out)
    elif nfixed == 3:
        ok = _ball3(P, fixed[0], fixed[1], fixed[2], out)
    else:
        ok = _ball4(P, fixed[0], fixed[1], fixed[2], fixed[3], out)
    if ok:
        for t in range(nfixed):
            sup[t] = fixed[t]
        return nfixed
    # degenerate support (collinear / coplanar): fall back to the SEB of the fixed points
    return _small_seb(P, fixed, nfixed, out, sup)


@njit(cache=True)
def seb_ordered(P, order):
    """Welzl's algorithm in its iterative move-free form over ``P[order]``.

    Returns (center[3], radius, support[4], nsupport). Support indices refer to rows of P.
    """
    ball = np.zeros(4)
    sup = np.full(4, -1, dtype=np.int64)
    n = order.shape[0]
    if n == 0:
        return ball[:3].copy(), -1.0, sup, 0
    fixed = np.empty(4, dtype=np.int64)
    b1 = np.empty(4)
    b2 = np.empty(4)
    b3 = np.empty(4)
    s1 = np.empty(4, dtype=np.int64)
    s2 = np.empty(4, dtype=np.int64)
    s3 = np.empty(4, dtype=np.int64)
    scale = 0.0
    for t in range(n):
        for c in range(3):
            v = abs(P[order[t], c])
            if v > scale:
                scale = v
    slack = _IN_EPS * (1.0 + scale * scale)
    p0 = order[0]
    ball[0] = P[p0, 0]
    ball[1] = P[p0, 1]
    ball[2] = P[p0, 2]
    ball[3] = 0.0
    sup[0] = p0
    nsup = 1
    for a in range(1, n):
        i = order[a]
        if not _outside(P, i, ball, slack):
            continue
        # i on boundary
        fixed[0] = i
        n1 = _boundary_ball(P, fixed, 1, b1, s1)
        for b in range(a):
            j = order[b]
            if not _outside(P, j, b1, slack):
                continue
            fixed[0] = i
            fixed[1] = j
            n1 = _boundary_ball(P, fixed, 2, b1, s1)
            for c in range(b):
                k = order[c]
                if not _outside(P, k, b1, slack):
                    continue
                fixed[0] = i
                fixed[1] = j
                fixed[2] = k
                n2 = _boundary_ball(P, fixed, 3, b2, s2)
                for d in range(c):
                    m = order[d]
                    if not _outside(P, m, b2, slack):
                        continue
                    fixed[0] = i
                    fixed[1] = j
                    fixed[2] = k
                    fixed[3] = m
                    n3 = _boundary_ball(P, fixed, 4, b3, s3)
                    for t in range(4):
                        b2[t] = b3[t]
                        s2[t] = s3[t]
                    n2 = n3
                for t in range(4):
                    b1[t] = b2[t]
                    s1[t] = s2[t]
                n1 = n2
        for t in range(4):
            ball[t] = b1[t]
            sup[t] = s1[t]
        nsup = n1
    for t in range(nsup, 4):
        sup[t] = -1
    return ball[:3].copy(), np.sqrt(ball[3]), sup, nsup


@njit(cache=True)
def seb_radius_subset(P, idx):
    """SEB radius of the rows ``idx`` of P (-1.0 for an empty subset)."""
    if idx.shape[0] == 0:
        return -1.0
    c, r, s, k = seb_ordered(P, idx)
    return r


@njit(cache=True)
def seb_radius_mask(P, mask, order):
    """SEB radius of the points selected by a boolean mask, visited in ``order``."""
    cnt = 0
    for t in range(order.shape[0]):
        if mask[order[t]]:
            cnt += 1
    idx = np.empty(cnt, dtype=np.int64)
    cnt = 0
    for t in range(order.shape[0]):
        if mask[order[t]]:
            idx[cnt] = order[t]
            cnt += 1
    if cnt == 0:
        return -1.0
    c, r, s, k = seb_ordered(P, idx)
    return r


@njit(cache=True)
def all_bipartition_radii(P, order):
    """For every bipartition {A, P\\A} with point 0 in A: (radius A, radius complement).

    Returns an array of shape (2^(n-1), 2); -1 marks an empty side.
    """
    n = P.shape[0]
    total = 1 << (n - 1)
    out = np.empty((total, 2))
    mask = np.zeros(n, dtype=np.bool_)
    comp = np.zeros(n, dtype=np.bool_)
    for bits in range(total):
        mask[0] = True
        comp[0] = False
        for t in range(1, n):
            on = (bits >> (t - 1)) & 1
            mask[t] = on == 1
            comp[t] = on == 0
        out[bits, 0] = seb_radius_mask(P, mask, order)
        out[bits, 1] = seb_radius_mask(P, comp, order)
    return out


@njit(cache=True)
def mask_batch_radii(P, masks, order):
    """(radius of selected, radius of complement) for each row of a boolean mask batch."""
    k = masks.shape[0]
    n = P.shape[0]
    out = np.empty((k, 2))
    comp = np.zeros(n, dtype=np.bool_)
    for t in range(k):
        for i in range(n):
            comp[i] = not masks[t, i]
        out[t, 0] = seb_radius_mask(P, masks[t], order)
        out[t, 1] = seb_radius_mask(P, comp, order)
    return out


@njit(cache=True)
def small_subset_radii(P):
    """SEB radii of every subset of size 1..4 (exhaustive support enumeration)."""
    n = P.shape[0]
    m = n
    m += n * (n - 1) // 2
    m += n * (n - 1) * (n - 2) // 6
    m += n * (n - 1) * (n - 2) * (n - 3) // 24
    out = np.empty(m)
    ball = np.empty(4)
    sup = np.empty(4, dtype=np.int64)
    idx = np.empty(4, dtype=np.int64)
    t = 0
    for i in range(n):
        out[t] = 0.0
        t += 1
    for i in range(n):
        for j in range(i + 1, n):
            out[t] = 0.5 * np.sqrt(_dist2(P[i, 0], P[i, 1], P[i, 2], P[j, 0], P[j, 1], P[j, 2]))
            t += 1
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(j + 1, n):
                idx[0] = i
                idx[1] = j
                idx[2] = k
                _small_seb(P, idx, 3, ball, sup)
                out[t] = np.sqrt(ball[3])
                t += 1
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(j + 1, n):
                for l in range(k + 1, n):
                    idx[0] = i
                    idx[1] = j
                    idx[2] = k
                    idx[3] = l
                    _small_seb(P, idx, 4, ball, sup)
                    out[t] = np.sqrt(ball[3])
                    t += 1
    return out


@njit(cache=True)
def exhaustive_subset_seb(P):
    """Minimum over <=4-subset SEBs that contain every point (brute-force 1-center oracle)."""
    n = P.shape[0]
    best = np.inf
    bc = np.zeros(3)
    ball = np.empty(4)
    sup = np.empty(4, dtype=np.int64)
    idx = np.empty(4, dtype=np.int64)
    for k in range(1, 5):
        if k > n:
            break
        comb = np.arange(k)
        while True:
            for t in range(k):
                idx[t] = comb[t]
            _small_seb(P, idx, k, ball, sup)
            if ball[3] < best:
                ok = True
                for m in range(n):
                    if _outside(P, m, ball, 1e-10):
                        ok = False
                        break
                if ok:
                    best = ball[3]
                    bc[0] = ball[0]
                    bc[1] = ball[1]
                    bc[2] = ball[2]
            # next combination
            pos = k - 1
            while pos >= 0 and comb[pos] == n - k + pos:
                pos -= 1
            if pos < 0:
                break
            comb[pos] += 1
            for t in range(pos + 1, k):
                comb[t] = comb[t - 1] + 1
    return bc, np.sqrt(best)


@njit(cache=True)
def side_signs(P, normal, offset, eps):
    """sign(n . p - d) with a dead zone of width ``eps`` around zero."""
    n = P.shape[0]
    out = np.empty(n, dtype=np.int8)
    for t in range(n):
        v = normal[0] * P[t, 0] + normal[1] * P[t, 1] + normal[2] * P[t, 2] - offset
        if v > eps:
            out[t] = 1
        elif v < -eps:
            out[t] = -1
        else:
            out[t] = 0
    return out


@njit(cache=True)
def max_dist(P, c):
    best = 0.0
    for t in range(P.shape[0]):
        d = _dist2(P[t, 0], P[t, 1], P[t, 2], c[0], c[1], c[2])
        if d > best:
            best = d
    return np.sqrt(best)


def warmup():
    """Trigger compilation of every kernel on a tiny input."""
    P = np.array([[0.0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1], [1, 1, 1]])
    order = np.arange(5, dtype=np.int64)
    seb_ordered(P, order)
    seb_radius_subset(P, order)
    seb_radius_mask(P, np.ones(5, dtype=np.bool_), order)
    all_bipartition_radii(P[:3], order[:3])
    mask_batch_radii(P, np.ones((2, 5), dtype=np.bool_), order)
    small_subset_radii(P)
    exhaustive_subset_seb(P)
    side_signs(P, np.array([0.0, 0, 1]), 0.0, 1e-9)
    max_dist(P, np.zeros(3))
