"""Pure-numpy fallback kernels.

Signature-compatible with :mod:`mpteleop.njit_kernels`. Tree construction
and single-point queries keep the same array-based KD-tree; the bulk
clearance scans fall back to vectorized exact brute force over the map
union, which is the natural numpy formulation.
"""

import numpy as np

_EPS = 1e-9


def kd_build(points, leaf_size):
    n = points.shape[0]
    perm = np.arange(n)
    if n == 0:
        e_i = np.empty(0, dtype=np.int64)
        return (points.copy(), perm, e_i.copy(), np.empty(0), e_i.copy(),
                e_i.copy(), e_i.copy(), e_i.copy())

    sdim, sval, left, right, start, end = [], [], [], [], [], []

    def alloc():
        sdim.append(-1)
        sval.append(0.0)
        left.append(0)
        right.append(0)
        start.append(0)
        end.append(0)
        return len(sdim) - 1

    def build(lo, hi):
        nid = alloc()
        if hi - lo <= leaf_size:
            start[nid] = lo
            end[nid] = hi
            return nid
        sub = perm[lo:hi]
        coords = points[sub]
        dim = int(np.argmax(np.ptp(coords, axis=0)))
        k = (hi - lo) // 2
        order = np.argpartition(coords[:, dim], k)
        perm[lo:hi] = sub[order]
        mid = lo + k
        sdim[nid] = dim
        sval[nid] = points[perm[mid], dim]
        left[nid] = build(lo, mid)
        right[nid] = build(mid, hi)
        return nid

    build(0, n)
    return (points[perm], perm,
            np.asarray(sdim, dtype=np.int64), np.asarray(sval, dtype=np.float64),
            np.asarray(left, dtype=np.int64), np.asarray(right, dtype=np.int64),
            np.asarray(start, dtype=np.int64), np.asarray(end, dtype=np.int64))


def _query_one(pts_perm, sdim, sval, left, right, start, end, q, best_d2, best_row):
    if sdim.shape[0] == 0 or pts_perm.shape[0] == 0:
        return best_d2, best_row
    stack = [(0, 0.0)]
    while stack:
        node, bound = stack.pop()
        if bound >= best_d2:
            continue
        while sdim[node] >= 0:
            diff = q[sdim[node]] - sval[node]
            if diff < 0.0:
                near, far = left[node], right[node]
            else:
                near, far = right[node], left[node]
            fd2 = diff * diff
            if fd2 < best_d2:
                stack.append((far, fd2))
            node = near
        lo, hi = start[node], end[node]
        d2 = np.square(pts_perm[lo:hi] - q).sum(axis=1)
        i = int(np.argmin(d2)) if hi > lo else -1
        if i >= 0 and d2[i] < best_d2:
            best_d2 = float(d2[i])
            best_row = lo + i
    return best_d2, best_row


def kd_query_many(pts_perm, perm, sdim, sval, left, right, start, end, queries):
    m = queries.shape[0]
    d2 = np.full(m, np.inf)
    idx = np.full(m, -1, dtype=np.int64)
    for i in range(m):
        bd2, row = _query_one(pts_perm, sdim, sval, left, right, start, end,
                              queries[i], np.inf, -1)
        d2[i] = bd2
        if row >= 0:
            idx[i] = perm[row]
    return d2, idx


def _union_points(pts1, pts2, buf):
    parts = [p for p in (pts1, pts2, buf) if p.shape[0] > 0]
    if not parts:
        return None
    return np.concatenate(parts, axis=0)


def _brute_sqdist(queries, pts):
    # |q - p|^2 via the dot expansion; exact enough for clearance thresholds
    d2 = (np.square(queries).sum(axis=1)[:, None]
          + np.square(pts).sum(axis=1)[None, :]
          - 2.0 * queries @ pts.T)
    return np.maximum(d2, 0.0).min(axis=1)


def map_nn_sqdist(queries,
                  pts1, sdim1, sval1, left1, right1, start1, end1,
                  pts2, sdim2, sval2, left2, right2, start2, end2,
                  buf):
    pts = _union_points(pts1, pts2, buf)
    if pts is None:
        return np.full(queries.shape[0], np.inf)
    return _brute_sqdist(queries, pts)


def collision_scan(wc, taus,
                   pts1, sdim1, sval1, left1, right1, start1, end1,
                   pts2, sdim2, sval2, left2, right2, start2, end2,
                   buf, thresh, full_scan):
    pos = np.empty((taus.shape[0], 3))
    for a in range(3):
        acc = np.full_like(taus, wc[a, 8])
        for i in range(7, -1, -1):
            acc = acc * taus + wc[a, i]
        pos[:, a] = acc
    pts = _union_points(pts1, pts2, buf)
    if pts is None:
        return True, np.inf
    d2 = _brute_sqdist(pos, pts)
    free = bool(np.all(d2 >= thresh * thresh))
    return free, float(d2.min())


def prune_scan_batch(wcs, durations, dt,
                     pts1, sdim1, sval1, left1, right1, start1, end1,
                     pts2, sdim2, sval2, left2, right2, start2, end2,
                     buf, thresh):
    pts = _union_points(pts1, pts2, buf)
    if pts is None:
        if wcs.shape[0] == 0:
            return -1, 0, np.inf
        return 0, 1, np.inf
    thresh2 = thresh * thresh
    for c in range(wcs.shape[0]):
        t_end = durations[c]
        n = int(np.floor(t_end / dt + 1e-12))
        taus = dt * np.arange(n + 1)
        if t_end - taus[-1] > 1e-12:
            taus = np.append(taus, t_end)
        pos = np.empty((taus.shape[0], 3))
        for a in range(3):
            acc = np.full_like(taus, wcs[c, a, 8])
            for i in range(7, -1, -1):
                acc = acc * taus + wcs[c, a, i]
            pos[:, a] = acc
        d2 = _brute_sqdist(pos, pts)
        if np.all(d2 >= thresh2):
            return c, c + 1, float(d2.min())
    return -1, wcs.shape[0], np.inf


def raycast(ox, oy, oz, dirs, max_range, cyl, box, wall):
    m = dirs.shape[0]
    dx, dy, dz = dirs[:, 0], dirs[:, 1], dirs[:, 2]
    best = np.full(m, np.inf)

    for c in range(cyl.shape[0]):
        cx, cy, rad, z0, z1 = cyl[c]
        rx, ry = ox - cx, oy - cy
        a = dx * dx + dy * dy
        b = 2.0 * (rx * dx + ry * dy)
        cc = rx * rx + ry * ry - rad * rad
        disc = b * b - 4.0 * a * cc
        with np.errstate(divide="ignore", invalid="ignore"):
            sq = np.sqrt(np.maximum(disc, 0.0))
            for sgn in (-1.0, 1.0):
                t = (-b + sgn * sq) / (2.0 * a)
                zhit = oz + t * dz
                ok = (disc >= 0.0) & (a > 1e-12) & (t >= _EPS) \
                    & (zhit >= z0) & (zhit <= z1) & (t < best)
                best = np.where(ok, t, best)
            for zc in (z0, z1):
                t = np.where(np.abs(dz) > 1e-12, (zc - oz) / dz, np.inf)
                px = ox + t * dx - cx
                py = oy + t * dy - cy
                ok = (t >= _EPS) & (px * px + py * py <= rad * rad) & (t < best)
                best = np.where(ok, t, best)

    for bx in range(box.shape[0]):
        tmin = np.full(m, -np.inf)
        tmax = np.full(m, np.inf)
        ok = np.ones(m, dtype=bool)
        for k, (o, d) in enumerate(((ox, dx), (oy, dy), (oz, dz))):
            lo, hi = box[bx, k], box[bx, k + 3]
            near_axis = np.abs(d) < 1e-12
            with np.errstate(divide="ignore", invalid="ignore"):
                t1 = (lo - o) / d
                t2 = (hi - o) / d
            swap = t1 > t2
            t1s = np.where(swap, t2, t1)
            t2s = np.where(swap, t1, t2)
            ok &= np.where(near_axis, (o >= lo) & (o <= hi), True)
            tmin = np.where(near_axis, tmin, np.maximum(tmin, t1s))
            tmax = np.where(near_axis, tmax, np.minimum(tmax, t2s))
        hit = ok & (tmax >= tmin) & (tmax >= _EPS)
        t = np.where(tmin >= _EPS, tmin, tmax)
        upd = hit & (t < best)
        best = np.where(upd, t, best)

    for w in range(wall.shape[0]):
        x1, y1, x2, y2 = wall[w]
        ex, ey = x2 - x1, y2 - y1
        nx, ny = -ey, ex
        denom = dx * nx + dy * ny
        with np.errstate(divide="ignore", invalid="ignore"):
            t = ((x1 - ox) * nx + (y1 - oy) * ny) / denom
            hx = ox + t * dx - x1
            hy = oy + t * dy - y1
            ss = (hx * ex + hy * ey) / (ex * ex + ey * ey)
        ok = (np.abs(denom) > 1e-12) & (t >= _EPS) & (ss >= 0.0) & (ss <= 1.0) & (t < best)
        best = np.where(ok, t, best)

    return np.where(best <= max_range, best, np.inf)
