"""Numba-compiled hot kernels.

Same signatures as :mod:`mpteleop.numpy_kernels`; selected via
:mod:`mpteleop.backend`. Everything here operates on plain float64/int64
ndarrays so the two lanes stay interchangeable.

KD-tree layout (produced by :func:`kd_build`):
  pts_perm  (n, 3)  points permuted leaf-contiguously
  perm      (n,)    pts_perm[i] == original_points[perm[i]]
  sdim      (k,)    split dimension per node, -1 for leaves
  sval      (k,)    split coordinate per node
  left/right (k,)   child node ids (internal nodes)
  start/end (k,)    pts_perm slice per leaf
Node 0 is the root; an empty tree has k == 0.
"""

import numpy as np
from numba import njit

_EPS = 1e-9


@njit(cache=True)
def _nth_element(points, idx, dim, lo, hi, k):
    """Partial sort of idx[lo:hi) by points[idx, dim] so idx[k] is in place."""
    while hi - lo > 2:
        a = points[idx[lo], dim]
        b = points[idx[(lo + hi) // 2], dim]
        c = points[idx[hi - 1], dim]
        piv = max(min(a, b), min(max(a, b), c))
        i = lo
        j = hi - 1
        while i <= j:
            while points[idx[i], dim] < piv:
                i += 1
            while points[idx[j], dim] > piv:
                j -= 1
            if i <= j:
                tmp = idx[i]
                idx[i] = idx[j]
                idx[j] = tmp
                i += 1
                j -= 1
        if k <= j:
            hi = j + 1
        elif k >= i:
            lo = i
        else:
            return
    if hi - lo == 2 and points[idx[lo], dim] > points[idx[lo + 1], dim]:
        tmp = idx[lo]
        idx[lo] = idx[lo + 1]
        idx[lo + 1] = tmp


@njit(cache=True)
def kd_build(points, leaf_size):
    n = points.shape[0]
    perm = np.arange(n)
    if n == 0:
        empty_i = np.empty(0, dtype=np.int64)
        empty_f = np.empty(0, dtype=np.float64)
        return (points.copy(), perm, empty_i.copy(), empty_f,
                empty_i.copy(), empty_i.copy(), empty_i.copy(), empty_i.copy())

    cap = 2 * (n // max(1, leaf_size // 2) + 2) + 3
    sdim = np.full(cap, -1, dtype=np.int64)
    sval = np.zeros(cap, dtype=np.float64)
    left = np.zeros(cap, dtype=np.int64)
    right = np.zeros(cap, dtype=np.int64)
    start = np.zeros(cap, dtype=np.int64)
    end = np.zeros(cap, dtype=np.int64)

    node_stack = np.empty(cap, dtype=np.int64)
    lo_stack = np.empty(cap, dtype=np.int64)
    hi_stack = np.empty(cap, dtype=np.int64)
    node_stack[0] = 0
    lo_stack[0] = 0
    hi_stack[0] = n
    sp = 1
    next_id = 1

    while sp > 0:
        sp -= 1
        node = node_stack[sp]
        lo = lo_stack[sp]
        hi = hi_stack[sp]
        if hi - lo <= leaf_size:
            sdim[node] = -1
            start[node] = lo
            end[node] = hi
            continue
        best_dim = 0
        best_ext = -1.0
        for d in range(3):
            mn = points[perm[lo], d]
            mx = mn
            for i in range(lo + 1, hi):
                v = points[perm[i], d]
                if v < mn:
                    mn = v
                elif v > mx:
                    mx = v
            ext = mx - mn
            if ext > best_ext:
                best_ext = ext
                best_dim = d
        mid = (lo + hi) // 2
        _nth_element(points, perm, best_dim, lo, hi, mid)
        sdim[node] = best_dim
        sval[node] = points[perm[mid], best_dim]
        left[node] = next_id
        right[node] = next_id + 1
        node_stack[sp] = next_id
        lo_stack[sp] = lo
        hi_stack[sp] = mid
        sp += 1
        node_stack[sp] = next_id + 1
        lo_stack[sp] = mid
        hi_stack[sp] = hi
        sp += 1
        next_id += 2

    pts_perm = points[perm]
    return (pts_perm, perm, sdim[:next_id].copy(), sval[:next_id].copy(),
            left[:next_id].copy(), right[:next_id].copy(),
            start[:next_id].copy(), end[:next_id].copy())


@njit(cache=True)
def _query_one(pts_perm, sdim, sval, left, right, start, end,
               qx, qy, qz, best_d2, best_row):
    """Branch-and-bound NN; returns (best_d2, best_row) improving the inputs."""
    if sdim.shape[0] == 0 or pts_perm.shape[0] == 0:
        return best_d2, best_row
    nstack = np.empty(80, dtype=np.int64)
    dstack = np.empty(80, dtype=np.float64)
    sp = 0
    node = 0
    while True:
        while sdim[node] >= 0:
            dim = sdim[node]
            if dim == 0:
                diff = qx - sval[node]
            elif dim == 1:
                diff = qy - sval[node]
            else:
                diff = qz - sval[node]
            if diff < 0.0:
                near = left[node]
                far = right[node]
            else:
                near = right[node]
                far = left[node]
            fd2 = diff * diff
            if fd2 < best_d2:
                nstack[sp] = far
                dstack[sp] = fd2
                sp += 1
            node = near
        for i in range(start[node], end[node]):
            dx = pts_perm[i, 0] - qx
            dy = pts_perm[i, 1] - qy
            dz = pts_perm[i, 2] - qz
            d2 = dx * dx + dy * dy + dz * dz
            if d2 < best_d2:
                best_d2 = d2
                best_row = i
        advanced = False
        while sp > 0:
            sp -= 1
            if dstack[sp] < best_d2:
                node = nstack[sp]
                advanced = True
                break
        if not advanced:
            break
    return best_d2, best_row


@njit(cache=True)
def kd_query_many(pts_perm, perm, sdim, sval, left, right, start, end, queries):
    m = queries.shape[0]
    d2 = np.full(m, np.inf)
    idx = np.full(m, -1, dtype=np.int64)
    for i in range(m):
        bd2, row = _query_one(pts_perm, sdim, sval, left, right, start, end,
                              queries[i, 0], queries[i, 1], queries[i, 2],
                              np.inf, -1)
        d2[i] = bd2
        if row >= 0:
            idx[i] = perm[row]
    return d2, idx


@njit(cache=True)
def map_nn_sqdist(queries,
                  pts1, sdim1, sval1, left1, right1, start1, end1,
                  pts2, sdim2, sval2, left2, right2, start2, end2,
                  buf):
    """Exact NN squared distance over the union of two trees and a buffer."""
    m = queries.shape[0]
    out = np.empty(m)
    for i in range(m):
        qx = queries[i, 0]
        qy = queries[i, 1]
        qz = queries[i, 2]
        d2 = np.inf
        for b in range(buf.shape[0]):
            dx = buf[b, 0] - qx
            dy = buf[b, 1] - qy
            dz = buf[b, 2] - qz
            v = dx * dx + dy * dy + dz * dz
            if v < d2:
                d2 = v
        d2, _ = _query_one(pts1, sdim1, sval1, left1, right1, start1, end1,
                           qx, qy, qz, d2, -1)
        d2, _ = _query_one(pts2, sdim2, sval2, left2, right2, start2, end2,
                           qx, qy, qz, d2, -1)
        out[i] = d2
    return out


@njit(cache=True)
def collision_scan(wc, taus,
                   pts1, sdim1, sval1, left1, right1, start1, end1,
                   pts2, sdim2, sval2, left2, right2, start2, end2,
                   buf, thresh, full_scan):
    """Clearance scan of one primitive against the local map.

    wc is the (3, 9) world-frame position coefficient block. Returns
    (free, min_d2); with full_scan=False the scan stops at the first
    violating sample, so min_d2 is then only valid for free primitives.
    """
    thresh2 = thresh * thresh
    min_d2 = np.inf
    free = True
    for s in range(taus.shape[0]):
        tau = taus[s]
        x = wc[0, 8]
        y = wc[1, 8]
        z = wc[2, 8]
        for i in range(7, -1, -1):
            x = x * tau + wc[0, i]
            y = y * tau + wc[1, i]
            z = z * tau + wc[2, i]
        d2 = np.inf
        for b in range(buf.shape[0]):
            dx = buf[b, 0] - x
            dy = buf[b, 1] - y
            dz = buf[b, 2] - z
            v = dx * dx + dy * dy + dz * dz
            if v < d2:
                d2 = v
        d2, _ = _query_one(pts1, sdim1, sval1, left1, right1, start1, end1,
                           x, y, z, d2, -1)
        d2, _ = _query_one(pts2, sdim2, sval2, left2, right2, start2, end2,
                           x, y, z, d2, -1)
        if d2 < min_d2:
            min_d2 = d2
        if d2 < thresh2:
            free = False
            if not full_scan:
                break
    return free, min_d2


@njit(cache=True)
def prune_scan_batch(wcs, durations, dt,
                     pts1, sdim1, sval1, left1, right1, start1, end1,
                     pts2, sdim2, sval2, left2, right2, start2, end2,
                     buf, thresh):
    """Scan candidates in order; returns (first_free_index, checked, min_d2).

    wcs is (K, 3, 9) world-frame position coefficients in queue order.
    Rejected candidates stop at their first violating sample; the returned
    min_d2 covers every sample of the chosen (free) candidate. first_free
    is -1 when the whole batch is blocked.
    """
    thresh2 = thresh * thresh
    k = wcs.shape[0]
    for c in range(k):
        t_end = durations[c]
        n = int(np.floor(t_end / dt + 1e-12))
        min_d2 = np.inf
        free = True
        s = 0
        while True:
            if s <= n:
                tau = dt * s
            elif dt * n < t_end - 1e-12 and s == n + 1:
                tau = t_end
            else:
                break
            s += 1
            x = wcs[c, 0, 8]
            y = wcs[c, 1, 8]
            z = wcs[c, 2, 8]
            for i in range(7, -1, -1):
                x = x * tau + wcs[c, 0, i]
                y = y * tau + wcs[c, 1, i]
                z = z * tau + wcs[c, 2, i]
            d2 = np.inf
            for b in range(buf.shape[0]):
                dx = buf[b, 0] - x
                dy = buf[b, 1] - y
                dz = buf[b, 2] - z
                v = dx * dx + dy * dy + dz * dz
                if v < d2:
                    d2 = v
            d2, _ = _query_one(pts1, sdim1, sval1, left1, right1, start1, end1,
                               x, y, z, d2, -1)
            d2, _ = _query_one(pts2, sdim2, sval2, left2, right2, start2, end2,
                               x, y, z, d2, -1)
            if d2 < min_d2:
                min_d2 = d2
            if d2 < thresh2:
                free = False
                break
        if free:
            return c, c + 1, min_d2
    return -1, k, np.inf


@njit(cache=True)
def raycast(ox, oy, oz, dirs, max_range, cyl, box, wall):
    """First-hit distances for a bundle of unit rays from one origin.

    cyl (nc, 5): cx, cy, radius, z0, z1 (side surface plus end caps)
    box (nb, 6): xmin, ymin, zmin, xmax, ymax, zmax
    wall (nw, 4): x1, y1, x2, y2 (zero-thickness, infinite in z)
    Misses (or hits beyond max_range) yield inf.
    """
    m = dirs.shape[0]
    out = np.full(m, np.inf)
    for r in range(m):
        dx = dirs[r, 0]
        dy = dirs[r, 1]
        dz = dirs[r, 2]
        best = np.inf

        for c in range(cyl.shape[0]):
            cx = cyl[c, 0]
            cy = cyl[c, 1]
            rad = cyl[c, 2]
            z0 = cyl[c, 3]
            z1 = cyl[c, 4]
            rx = ox - cx
            ry = oy - cy
            a = dx * dx + dy * dy
            if a > 1e-12:
                b = 2.0 * (rx * dx + ry * dy)
                cc = rx * rx + ry * ry - rad * rad
                disc = b * b - 4.0 * a * cc
                if disc >= 0.0:
                    sq = np.sqrt(disc)
                    for sgn in range(2):
                        t = (-b - sq) / (2.0 * a) if sgn == 0 else (-b + sq) / (2.0 * a)
                        if _EPS <= t < best:
                            zhit = oz + t * dz
                            if z0 <= zhit <= z1:
                                best = t
            if abs(dz) > 1e-12:
                for e in range(2):
                    zc = z0 if e == 0 else z1
                    t = (zc - oz) / dz
                    if _EPS <= t < best:
                        px = ox + t * dx - cx
                        py = oy + t * dy - cy
                        if px * px + py * py <= rad * rad:
                            best = t

        for bx in range(box.shape[0]):
            tmin = -np.inf
            tmax = np.inf
            ok = True
            for k in range(3):
                if k == 0:
                    o = ox
                    d = dx
                elif k == 1:
                    o = oy
                    d = dy
                else:
                    o = oz
                    d = dz
                lo = box[bx, k]
                hi = box[bx, k + 3]
                if abs(d) < 1e-12:
                    if o < lo or o > hi:
                        ok = False
                        break
                else:
                    t1 = (lo - o) / d
                    t2 = (hi - o) / d
                    if t1 > t2:
                        t1, t2 = t2, t1
                    if t1 > tmin:
                        tmin = t1
                    if t2 < tmax:
                        tmax = t2
            if ok and tmax >= tmin and tmax >= _EPS:
                t = tmin if tmin >= _EPS else tmax
                if t < best:
                    best = t

        for w in range(wall.shape[0]):
            x1 = wall[w, 0]
            y1 = wall[w, 1]
            ex = wall[w, 2] - x1
            ey = wall[w, 3] - y1
            nx = -ey
            ny = ex
            denom = dx * nx + dy * ny
            if abs(denom) > 1e-12:
                t = ((x1 - ox) * nx + (y1 - oy) * ny) / denom
                if _EPS <= t < best:
                    hx = ox + t * dx - x1
                    hy = oy + t * dy - y1
                    ss = (hx * ex + hy * ey) / (ex * ex + ey * ey)
                    if 0.0 <= ss <= 1.0:
                        best = t

        if best <= max_range:
            out[r] = best
    return out
