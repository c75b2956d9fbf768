"""Independent reference computations used by the tests.

None of these call into the package's kinematics, kernels or collision code.
"""

import math

import numpy as np


def rot_z(t):
    c, s = math.cos(t), math.sin(t)
    return np.array([[c, -s, 0, 0], [s, c, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1.0]])


def rot_x(t):
    c, s = math.cos(t), math.sin(t)
    return np.array([[1, 0, 0, 0], [0, c, -s, 0], [0, s, c, 0], [0, 0, 0, 1.0]])


def trans(x, y, z):
    T = np.eye(4)
    T[:3, 3] = (x, y, z)
    return T


def link_matrix(theta, d, a, alpha):
    """D-H link transform built as Rz(theta) Tz(d) Tx(a) Rx(alpha), one
    elementary matrix at a time."""
    return rot_z(theta) @ trans(0, 0, d) @ trans(a, 0, 0) @ rot_x(alpha)


def chain(robot, q):
    """World pose of every joint by step-by-step elementary products."""
    T = np.array(robot.base_transform, dtype=float)
    out = []
    for p, v in zip(robot.links, q):
        theta, d = p.theta_offset, p.d
        if p.joint_kind == "prismatic":
            d += v
        else:
            theta += v
        T = T @ link_matrix(theta, d, p.a, p.alpha)
        out.append(T)
    return out


def control_points(robot, q):
    poses = chain(robot, q)
    return np.array([(poses[cp.joint_index] @ cp.transform)[:3, 3] for cp in robot.control_points])


def rq(x, xp, gamma):
    d2 = sum((float(a) - float(b)) ** 2 for a, b in zip(x, xp))
    return 1.0 / (1.0 + gamma / 2.0 * d2) ** 2


def fk(robot, q, qp, gamma):
    a, b = control_points(robot, q), control_points(robot, qp)
    return sum(rq(u, v, gamma) for u, v in zip(a, b)) / len(a)


def dense_gram(robot, Q, kind, gamma):
    N = len(Q)
    K = np.empty((N, N))
    if kind == "fk":
        P = [control_points(robot, q) for q in Q]
        for i in range(N):
            for j in range(N):
                K[i, j] = sum(rq(u, v, gamma) for u, v in zip(P[i], P[j])) / len(P[i])
    else:
        X = (np.asarray(Q) - robot.lower) / robot.joint_range
        for i in range(N):
            for j in range(N):
                K[i, j] = rq(X[i], X[j], gamma)
    return K


def point_box_distance(p, center, half, rotation=None):
    R = np.eye(3) if rotation is None else rotation
    local = R.T @ (np.asarray(p) - center)
    excess = np.maximum(np.abs(local) - half, 0.0)
    return float(np.linalg.norm(excess))


def segment_box_distance(p0, p1, center, half, rotation=None, samples=21):
    """Distance from a segment to a solid box: sampling along the
    segment, then golden-section refinement (the distance is convex in the
    segment parameter)."""
    p0, p1 = np.asarray(p0, float), np.asarray(p1, float)
    f = lambda t: point_box_distance(p0 + t * (p1 - p0), center, half, rotation)
    ts = np.linspace(0.0, 1.0, samples)
    vals = [f(t) for t in ts]
    k = int(np.argmin(vals))
    lo, hi = ts[max(k - 1, 0)], ts[min(k + 1, samples - 1)]
    g = (math.sqrt(5) - 1) / 2
    for _ in range(70):
        a, b = hi - g * (hi - lo), lo + g * (hi - lo)
        if f(a) < f(b):
            hi = b
        else:
            lo = a
    return min(min(vals), f(0.5 * (lo + hi)))


def segment_point_distance(p0, p1, c):
    p0, p1, c = (np.asarray(v, float) for v in (p0, p1, c))
    d = p1 - p0
    t = 0.0 if not d.any() else min(1.0, max(0.0, float((c - p0) @ d / (d @ d))))
    return float(np.linalg.norm(p0 + t * d - c))


def tally(pred, truth):
    tp = fp = tn = fn = 0
    for p, t in zip(pred, truth):
        if p == 1 and t == 1:
            tp += 1
        elif p == 1:
            fp += 1
        elif t == 1:
            fn += 1
        else:
            tn += 1
    return tp, fp, tn, fn
