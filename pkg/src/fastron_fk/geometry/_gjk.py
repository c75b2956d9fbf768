"""Compiled GJK intersection test on inflated convex cores.

Every shape is a convex core (point, segment, box or vertex hull) grown by a
radius. Two shapes intersect iff the distance between their cores is at most
the sum of the radii; GJK bounds that distance from above (|v|) and below
(v.w / |v|) and stops as soon as either bound decides the answer.

Core data layout (length 15):
  point    [0:3] position
  segment  [0:3] p0, [3:6] p1
  box      [0:3] center, [3:12] rotation (row-major), [12:15] half extents
  hull     [0:3] centroid; vertices passed separately
"""

import numba as nb
import numpy as np

from fastron_fk._jit import chain_poses

POINT, SEGMENT, BOX, HULL = 0, 1, 2, 3
DATA_LEN = 15
MAX_ITER = 64
GAP_TOL = 1e-10
TANGENT_TOL = 1e-9

MISS, HIT, CAPPED = 0, 1, 2

_opts = dict(cache=True)


@nb.njit(**_opts)
def _support(kind, data, verts, dx, dy, dz, out):
    if kind == POINT:
        out[0] = data[0]
        out[1] = data[1]
        out[2] = data[2]
    elif kind == SEGMENT:
        s0 = data[0] * dx + data[1] * dy + data[2] * dz
        s1 = data[3] * dx + data[4] * dy + data[5] * dz
        o = 3 if s1 > s0 else 0
        out[0] = data[o]
        out[1] = data[o + 1]
        out[2] = data[o + 2]
    elif kind == BOX:
        # direction in box frame is R^T d
        lx = data[3] * dx + data[6] * dy + data[9] * dz
        ly = data[4] * dx + data[7] * dy + data[10] * dz
        lz = data[5] * dx + data[8] * dy + data[11] * dz
        sx = data[12] if lx >= 0.0 else -data[12]
        sy = data[13] if ly >= 0.0 else -data[13]
        sz = data[14] if lz >= 0.0 else -data[14]
        out[0] = data[0] + data[3] * sx + data[4] * sy + data[5] * sz
        out[1] = data[1] + data[6] * sx + data[7] * sy + data[8] * sz
        out[2] = data[2] + data[9] * sx + data[10] * sy + data[11] * sz
    else:
        best = -np.inf
        bi = 0
        for i in range(verts.shape[0]):
            s = verts[i, 0] * dx + verts[i, 1] * dy + verts[i, 2] * dz
            if s > best:
                best = s
                bi = i
        out[0] = verts[bi, 0]
        out[1] = verts[bi, 1]
        out[2] = verts[bi, 2]


@nb.njit(**_opts)
def _center(kind, data, out):
    if kind == SEGMENT:
        for k in range(3):
            out[k] = 0.5 * (data[k] + data[3 + k])
    else:
        for k in range(3):
            out[k] = data[k]


@nb.njit(**_opts)
def _dot(a, b):
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


# scratch rows in the (10, 3) work array
_V, _SA, _SB, _TMP, _CA, _CB = 4, 5, 6, 7, 8, 9


@nb.njit(**_opts)
def _closest_segment(W, i0, i1, v, keep):
    """Closest point to the origin on segment W[i0]-W[i1]; marks kept vertices."""
    ax, ay, az = W[i0, 0], W[i0, 1], W[i0, 2]
    abx, aby, abz = W[i1, 0] - ax, W[i1, 1] - ay, W[i1, 2] - az
    den = abx * abx + aby * aby + abz * abz
    t = 0.0
    if den > 0.0:
        t = -(ax * abx + ay * aby + az * abz) / den
    if t <= 0.0:
        v[0], v[1], v[2] = ax, ay, az
        keep[i0] = True
    elif t >= 1.0:
        v[0], v[1], v[2] = W[i1, 0], W[i1, 1], W[i1, 2]
        keep[i1] = True
    else:
        v[0], v[1], v[2] = ax + t * abx, ay + t * aby, az + t * abz
        keep[i0] = True
        keep[i1] = True


@nb.njit(**_opts)
def _closest_triangle(W, ia, ib, ic, v, keep, scratch_keep):
    """Closest point to the origin on triangle (a, b, c) by Voronoi regions."""
    ax, ay, az = W[ia, 0], W[ia, 1], W[ia, 2]
    bx, by, bz = W[ib, 0], W[ib, 1], W[ib, 2]
    cx, cy, cz = W[ic, 0], W[ic, 1], W[ic, 2]
    abx, aby, abz = bx - ax, by - ay, bz - az
    acx, acy, acz = cx - ax, cy - ay, cz - az
    d1 = -(abx * ax + aby * ay + abz * az)
    d2 = -(acx * ax + acy * ay + acz * az)
    if d1 <= 0.0 and d2 <= 0.0:
        v[0], v[1], v[2] = ax, ay, az
        keep[ia] = True
        return
    d3 = -(abx * bx + aby * by + abz * bz)
    d4 = -(acx * bx + acy * by + acz * bz)
    if d3 >= 0.0 and d4 <= d3:
        v[0], v[1], v[2] = bx, by, bz
        keep[ib] = True
        return
    vc = d1 * d4 - d3 * d2
    if vc <= 0.0 and d1 >= 0.0 and d3 <= 0.0:
        t = d1 / (d1 - d3)
        v[0], v[1], v[2] = ax + t * abx, ay + t * aby, az + t * abz
        keep[ia] = True
        keep[ib] = True
        return
    d5 = -(abx * cx + aby * cy + abz * cz)
    d6 = -(acx * cx + acy * cy + acz * cz)
    if d6 >= 0.0 and d5 <= d6:
        v[0], v[1], v[2] = cx, cy, cz
        keep[ic] = True
        return
    vb = d5 * d2 - d1 * d6
    if vb <= 0.0 and d2 >= 0.0 and d6 <= 0.0:
        t = d2 / (d2 - d6)
        v[0], v[1], v[2] = ax + t * acx, ay + t * acy, az + t * acz
        keep[ia] = True
        keep[ic] = True
        return
    va = d3 * d6 - d5 * d4
    if va <= 0.0 and (d4 - d3) >= 0.0 and (d5 - d6) >= 0.0:
        t = (d4 - d3) / ((d4 - d3) + (d5 - d6))
        v[0], v[1], v[2] = bx + t * (cx - bx), by + t * (cy - by), bz + t * (cz - bz)
        keep[ib] = True
        keep[ic] = True
        return
    den = va + vb + vc
    if den <= 0.0:
        # degenerate triangle: nearest of its edges
        best = np.inf
        best_pair = 0
        for p in range(3):
            i0 = ia if p < 2 else ib
            i1 = ib if p == 0 else ic
            for i in range(4):
                scratch_keep[i] = False
            _closest_segment(W, i0, i1, v, scratch_keep)
            dd = v[0] * v[0] + v[1] * v[1] + v[2] * v[2]
            if dd < best:
                best = dd
                best_pair = p
        i0 = ia if best_pair < 2 else ib
        i1 = ib if best_pair == 0 else ic
        for i in range(4):
            scratch_keep[i] = False
        _closest_segment(W, i0, i1, v, scratch_keep)
        for i in range(4):
            if scratch_keep[i]:
                keep[i] = True
        return
    s = vb / den
    t = vc / den
    v[0] = ax + s * abx + t * acx
    v[1] = ay + s * aby + t * acy
    v[2] = az + s * abz + t * acz
    keep[ia] = True
    keep[ib] = True
    keep[ic] = True


@nb.njit(**_opts)
def _outside(W, ia, ib, ic, id_):
    """True when the origin is not strictly on the same side of plane abc as d."""
    ax, ay, az = W[ia, 0], W[ia, 1], W[ia, 2]
    ux, uy, uz = W[ib, 0] - ax, W[ib, 1] - ay, W[ib, 2] - az
    wx, wy, wz = W[ic, 0] - ax, W[ic, 1] - ay, W[ic, 2] - az
    nx = uy * wz - uz * wy
    ny = uz * wx - ux * wz
    nz = ux * wy - uy * wx
    sp = -(nx * ax + ny * ay + nz * az)
    sd = nx * (W[id_, 0] - ax) + ny * (W[id_, 1] - ay) + nz * (W[id_, 2] - az)
    return sp * sd <= 0.0


_FACES = np.array([[0, 1, 2, 3], [0, 1, 3, 2], [0, 2, 3, 1], [1, 2, 3, 0]], dtype=np.int64)


@nb.njit(**_opts)
def _closest_simplex(W, n, v, tmp, flags):
    """Reduce simplex W[:n] to the face nearest the origin, writing the nearest
    point to ``v``. Returns the new vertex count, or 4 when the origin is
    enclosed by the tetrahedron. ``flags`` is a boolean scratch of length 12."""
    keep = flags[0:4]
    k = flags[4:8]
    sk = flags[8:12]
    for i in range(4):
        keep[i] = False
    if n == 1:
        v[0], v[1], v[2] = W[0, 0], W[0, 1], W[0, 2]
        return 1
    if n == 2:
        _closest_segment(W, 0, 1, v, keep)
    elif n == 3:
        _closest_triangle(W, 0, 1, 2, v, keep, sk)
    else:
        best = np.inf
        any_out = False
        for f in range(4):
            if _outside(W, _FACES[f, 0], _FACES[f, 1], _FACES[f, 2], _FACES[f, 3]):
                any_out = True
                for i in range(4):
                    k[i] = False
                _closest_triangle(W, _FACES[f, 0], _FACES[f, 1], _FACES[f, 2], tmp, k, sk)
                dd = tmp[0] * tmp[0] + tmp[1] * tmp[1] + tmp[2] * tmp[2]
                if dd < best:
                    best = dd
                    v[0], v[1], v[2] = tmp[0], tmp[1], tmp[2]
                    for i in range(4):
                        keep[i] = k[i]
        if not any_out:
            v[0], v[1], v[2] = 0.0, 0.0, 0.0
            return 4
    m = 0
    for i in range(n):
        if keep[i]:
            if m != i:
                W[m, 0], W[m, 1], W[m, 2] = W[i, 0], W[i, 1], W[i, 2]
            m += 1
    return m


@nb.njit(**_opts)
def _segment_segment_dist2(p1x, p1y, p1z, q1x, q1y, q1z, p2x, p2y, p2z, q2x, q2y, q2z):
    """Squared distance between segments p1-q1 and p2-q2."""
    d1x, d1y, d1z = q1x - p1x, q1y - p1y, q1z - p1z
    d2x, d2y, d2z = q2x - p2x, q2y - p2y, q2z - p2z
    rx, ry, rz = p1x - p2x, p1y - p2y, p1z - p2z
    a = d1x * d1x + d1y * d1y + d1z * d1z
    e = d2x * d2x + d2y * d2y + d2z * d2z
    f = d2x * rx + d2y * ry + d2z * rz
    eps = 1e-300
    s = 0.0
    t = 0.0
    if a <= eps and e <= eps:
        return rx * rx + ry * ry + rz * rz
    if a <= eps:
        t = min(max(f / e, 0.0), 1.0)
    else:
        c = d1x * rx + d1y * ry + d1z * rz
        if e <= eps:
            s = min(max(-c / a, 0.0), 1.0)
        else:
            b = d1x * d2x + d1y * d2y + d1z * d2z
            den = a * e - b * b
            if den > 0.0:
                s = min(max((b * f - c * e) / den, 0.0), 1.0)
            t = (b * s + f) / e
            if t < 0.0:
                t = 0.0
                s = min(max(-c / a, 0.0), 1.0)
            elif t > 1.0:
                t = 1.0
                s = min(max((b - c) / a, 0.0), 1.0)
    wx = rx + d1x * s - d2x * t
    wy = ry + d1y * s - d2y * t
    wz = rz + d1z * s - d2z * t
    return wx * wx + wy * wy + wz * wz


@nb.njit(**_opts)
def _gjk(ka, da, va, kb, db, vb, rsum, work, flags, counter):
    W = work[0:4]
    v = work[_V]
    sa = work[_SA]
    sb = work[_SB]
    _center(ka, da, work[_CA])
    _center(kb, db, work[_CB])
    d0 = work[_CA, 0] - work[_CB, 0]
    d1 = work[_CA, 1] - work[_CB, 1]
    d2 = work[_CA, 2] - work[_CB, 2]
    _support(ka, da, va, -d0, -d1, -d2, sa)
    _support(kb, db, vb, d0, d1, d2, sb)
    v[0], v[1], v[2] = sa[0] - sb[0], sa[1] - sb[1], sa[2] - sb[2]
    r2 = rsum * rsum
    n = 0
    for _ in range(MAX_ITER):
        vv = v[0] * v[0] + v[1] * v[1] + v[2] * v[2]
        if vv <= r2:
            return HIT
        _support(ka, da, va, -v[0], -v[1], -v[2], sa)
        _support(kb, db, vb, v[0], v[1], v[2], sb)
        wx, wy, wz = sa[0] - sb[0], sa[1] - sb[1], sa[2] - sb[2]
        vw = v[0] * wx + v[1] * wy + v[2] * wz
        if vw > 0.0 and vw * vw > vv * r2:
            return MISS
        if vv - vw <= GAP_TOL * vv:
            # distance pinned within the gap tolerance just above rsum
            return HIT
        W[n, 0], W[n, 1], W[n, 2] = wx, wy, wz
        n = _closest_simplex(W, n + 1, v, work[_TMP], flags)
        if n == 4:
            return HIT
    counter[0] += 1
    return CAPPED


@nb.njit(**_opts)
def core_hit(ka, da, va, ra, kb, db, vb, rb, work, flags, counter):
    """MISS/HIT for two inflated cores; CAPPED (counted as a hit) when GJK runs
    out of iterations. ``work`` is (10, 3) float scratch, ``flags`` 12 bools."""
    rsum = ra + rb + TANGENT_TOL
    if ka <= SEGMENT and kb <= SEGMENT:
        oa = 3 if ka == SEGMENT else 0
        ob = 3 if kb == SEGMENT else 0
        d2 = _segment_segment_dist2(
            da[0], da[1], da[2], da[oa], da[oa + 1], da[oa + 2],
            db[0], db[1], db[2], db[ob], db[ob + 1], db[ob + 2],
        )
        return HIT if d2 <= rsum * rsum else MISS
    return _gjk(ka, da, va, kb, db, vb, rsum, work, flags, counter)


@nb.njit(**_opts)
def shapes_hit(ka, da, va, ra, kb, db, vb, rb, counter):
    work = np.zeros((10, 3))
    flags = np.zeros(12, dtype=np.bool_)
    return core_hit(ka, da, va, ra, kb, db, vb, rb, work, flags, counter) != MISS


@nb.njit(**_opts)
def capsule_world(base, dh, prismatic, cap_link, cap_local, q, poses, out):
    """World endpoints of all link capsules into ``out`` (C, 2, 3)."""
    chain_poses(base, dh, prismatic, q, poses)
    for c in range(cap_link.shape[0]):
        P = poses[cap_link[c]]
        for e in range(2):
            for r in range(3):
                out[c, e, r] = (
                    P[r, 0] * cap_local[c, e, 0]
                    + P[r, 1] * cap_local[c, e, 1]
                    + P[r, 2] * cap_local[c, e, 2]
                    + P[r, 3]
                )


@nb.njit(**_opts)
def _config_hit(
    base, dh, prismatic, cap_link, cap_local, cap_radius,
    obs_kind, obs_data, obs_radius, obs_vstart, obs_vcount, verts,
    q, poses, caps, seg, work, flags, counter,
):
    capsule_world(base, dh, prismatic, cap_link, cap_local, q, poses, caps)
    for c in range(cap_link.shape[0]):
        for r in range(3):
            seg[r] = caps[c, 0, r]
            seg[3 + r] = caps[c, 1, r]
        for k in range(obs_kind.shape[0]):
            s = obs_vstart[k]
            hv = verts[s:s + obs_vcount[k]]
            if core_hit(SEGMENT, seg, hv, cap_radius[c], obs_kind[k], obs_data[k], hv, obs_radius[k], work, flags, counter) != MISS:
                return True
    return False


@nb.njit(**_opts)
def config_in_collision(
    base, dh, prismatic, cap_link, cap_local, cap_radius,
    obs_kind, obs_data, obs_radius, obs_vstart, obs_vcount, verts, q, counter,
):
    poses = np.empty((dh.shape[0], 4, 4))
    caps = np.empty((cap_link.shape[0], 2, 3))
    seg = np.zeros(DATA_LEN)
    work = np.zeros((10, 3))
    flags = np.zeros(12, dtype=np.bool_)
    return _config_hit(
        base, dh, prismatic, cap_link, cap_local, cap_radius,
        obs_kind, obs_data, obs_radius, obs_vstart, obs_vcount, verts,
        q, poses, caps, seg, work, flags, counter,
    )


@nb.njit(**_opts)
def batch_in_collision(
    base, dh, prismatic, cap_link, cap_local, cap_radius,
    obs_kind, obs_data, obs_radius, obs_vstart, obs_vcount, verts, Q, counter,
):
    N = Q.shape[0]
    out = np.empty(N, dtype=np.bool_)
    poses = np.empty((dh.shape[0], 4, 4))
    caps = np.empty((cap_link.shape[0], 2, 3))
    seg = np.zeros(DATA_LEN)
    work = np.zeros((10, 3))
    flags = np.zeros(12, dtype=np.bool_)
    for n in range(N):
        out[n] = _config_hit(
            base, dh, prismatic, cap_link, cap_local, cap_radius,
            obs_kind, obs_data, obs_radius, obs_vstart, obs_vcount, verts,
            Q[n], poses, caps, seg, work, flags, counter,
        )
    return out
