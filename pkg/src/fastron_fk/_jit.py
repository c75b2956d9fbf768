"""Compiled inner loops for forward kinematics and Fastron scoring.

These mirror the reference numpy code in ``kinematics`` and ``kernels`` and are
cross-checked against it in the tests.
"""

import numba as nb
import numpy as np

_opts = dict(cache=True)


@nb.njit(**_opts)
def _dh_into(out, theta_off, d, a, alpha, prismatic, q):
    theta = theta_off
    if prismatic:
        d = d + q
    else:
        theta = theta + q
    ct, st = np.cos(theta), np.sin(theta)
    ca, sa = np.cos(alpha), np.sin(alpha)
    out[0, 0] = ct
    out[0, 1] = -ca * st
    out[0, 2] = sa * st
    out[0, 3] = a * ct
    out[1, 0] = st
    out[1, 1] = ca * ct
    out[1, 2] = -sa * ct
    out[1, 3] = a * st
    out[2, 0] = 0.0
    out[2, 1] = sa
    out[2, 2] = ca
    out[2, 3] = d
    out[3, 0] = 0.0
    out[3, 1] = 0.0
    out[3, 2] = 0.0
    out[3, 3] = 1.0


@nb.njit(**_opts)
def chain_poses(base, dh, prismatic, q, out):
    """Fill ``out`` (D, 4, 4) with the world pose of every joint."""
    D = dh.shape[0]
    A = np.empty((4, 4))
    prev = base
    for i in range(D):
        _dh_into(A, dh[i, 0], dh[i, 1], dh[i, 2], dh[i, 3], prismatic[i], q[i])
        for r in range(4):
            for c in range(4):
                s = 0.0
                for k in range(4):
                    s += prev[r, k] * A[k, c]
                out[i, r, c] = s
        prev = out[i]


@nb.njit(**_opts)
def fk_points(base, dh, prismatic, cp_joint, cp_tf, q, poses, out):
    """Control-point positions for one configuration into ``out`` (M, 3)."""
    chain_poses(base, dh, prismatic, q, poses)
    for m in range(cp_joint.shape[0]):
        P = poses[cp_joint[m]]
        T = cp_tf[m]
        for r in range(3):
            out[m, r] = P[r, 0] * T[0, 3] + P[r, 1] * T[1, 3] + P[r, 2] * T[2, 3] + P[r, 3]


@nb.njit(**_opts)
def fk_points_batch(base, dh, prismatic, cp_joint, cp_tf, Q):
    N = Q.shape[0]
    M = cp_joint.shape[0]
    out = np.empty((N, M, 3))
    poses = np.empty((dh.shape[0], 4, 4))
    for n in range(N):
        fk_points(base, dh, prismatic, cp_joint, cp_tf, Q[n], poses, out[n])
    return out


# Scoring loops run over the support set innermost, on structure-of-arrays
# layouts ((M, 3, S) control points, (D, S) joint features), so the reduction
# vectorizes; fastmath only licenses reassociating that sum.
_score_opts = dict(cache=True, fastmath=True)


@nb.njit(**_score_opts)
def score_fk(support_points, alpha, gamma, points):
    """f(x) for the FK kernel, given control points of the query (M, 3)."""
    M = support_points.shape[0]
    S = support_points.shape[2]
    half_g = 0.5 * gamma
    total = 0.0
    for m in range(M):
        px, py, pz = points[m, 0], points[m, 1], points[m, 2]
        X = support_points[m, 0]
        Y = support_points[m, 1]
        Z = support_points[m, 2]
        for s in range(S):
            dx = X[s] - px
            dy = Y[s] - py
            dz = Z[s] - pz
            t = 1.0 + half_g * (dx * dx + dy * dy + dz * dz)
            total += alpha[s] / (t * t)
    return total / M


@nb.njit(**_score_opts)
def score_rq(support_features, alpha, gamma, x, d2):
    """f(x) for the joint-space RQ kernel on pre-normalized features; ``d2``
    is scratch of length S."""
    D = support_features.shape[0]
    S = support_features.shape[1]
    half_g = 0.5 * gamma
    for s in range(S):
        d2[s] = 0.0
    for j in range(D):
        F = support_features[j]
        xj = x[j]
        for s in range(S):
            diff = F[s] - xj
            d2[s] += diff * diff
    total = 0.0
    for s in range(S):
        t = 1.0 + half_g * d2[s]
        total += alpha[s] / (t * t)
    return total


@nb.njit(**_opts)
def score_fk_config(base, dh, prismatic, cp_joint, cp_tf, support_points, alpha, gamma, q):
    poses = np.empty((dh.shape[0], 4, 4))
    pts = np.empty((cp_joint.shape[0], 3))
    fk_points(base, dh, prismatic, cp_joint, cp_tf, q, poses, pts)
    return score_fk(support_points, alpha, gamma, pts)


@nb.njit(**_opts)
def score_rq_config(lower, inv_range, support_features, alpha, gamma, q):
    D = q.shape[0]
    x = np.empty(D)
    for j in range(D):
        x[j] = (q[j] - lower[j]) * inv_range[j]
    d2 = np.empty(support_features.shape[1])
    return score_rq(support_features, alpha, gamma, x, d2)


@nb.njit(**_opts)
def score_fk_batch(base, dh, prismatic, cp_joint, cp_tf, support_points, alpha, gamma, Q):
    N = Q.shape[0]
    out = np.empty(N)
    poses = np.empty((dh.shape[0], 4, 4))
    pts = np.empty((cp_joint.shape[0], 3))
    for n in range(N):
        fk_points(base, dh, prismatic, cp_joint, cp_tf, Q[n], poses, pts)
        out[n] = score_fk(support_points, alpha, gamma, pts)
    return out


@nb.njit(**_opts)
def score_rq_batch(lower, inv_range, support_features, alpha, gamma, Q):
    N, D = Q.shape
    out = np.empty(N)
    x = np.empty(D)
    d2 = np.empty(support_features.shape[1])
    for n in range(N):
        for j in range(D):
            x[j] = (Q[n, j] - lower[j]) * inv_range[j]
        out[n] = score_rq(support_features, alpha, gamma, x, d2)
    return out


@nb.njit(**_opts)
def rq_column(features, i, gamma):
    """Column i of the joint-space RQ Gram matrix over (N, D) features."""
    N, D = features.shape
    out = np.empty(N)
    half_g = 0.5 * gamma
    for n in range(N):
        d2 = 0.0
        for j in range(D):
            diff = features[n, j] - features[i, j]
            d2 += diff * diff
        t = 1.0 + half_g * d2
        out[n] = 1.0 / (t * t)
    return out


@nb.njit(**_opts)
def fk_column(points, i, gamma):
    """Column i of the FK Gram matrix over (N, M, 3) control points."""
    N, M, _ = points.shape
    out = np.empty(N)
    half_g = 0.5 * gamma
    for n in range(N):
        k = 0.0
        for m in range(M):
            dx = points[n, m, 0] - points[i, m, 0]
            dy = points[n, m, 1] - points[i, m, 1]
            dz = points[n, m, 2] - points[i, m, 2]
            t = 1.0 + half_g * (dx * dx + dy * dy + dz * dz)
            k += 1.0 / (t * t)
        out[n] = k / M
    return out
