"""Independent reference computations used to check the library.

Nothing here imports from ``contactplan``; each oracle takes the slow,
obvious route (enumeration, brute-force grids, fine-step integration).
"""

from __future__ import annotations

import itertools
from math import comb

import numpy as np


def shoelace(poly) -> float:
    p = np.asarray(poly, dtype=float)[:, :2]
    x, y = p[:, 0], p[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def convex_by_cross(poly, tol=1e-12) -> bool:
    """All consecutive-edge cross products share a sign."""
    p = np.asarray(poly, dtype=float)[:, :2]
    e = np.roll(p, -1, axis=0) - p
    f = np.roll(e, -1, axis=0)
    c = e[:, 0] * f[:, 1] - e[:, 1] * f[:, 0]
    scale = max(float(np.abs(p).max()), 1.0) ** 2
    return bool(np.all(c >= -tol * scale) or np.all(c <= tol * scale))


def qp_by_active_sets(H, g, A_eq=None, b_eq=None, A_in=None, b_in=None, tol=1e-9):
    """Minimum of a strictly convex QP by solving the KKT system of every active subset.

    Every candidate returned is primal feasible, and the true optimum is the
    equality-constrained minimiser of its own active set, so the smallest
    feasible candidate is the optimum.
    """
    H = np.asarray(H, float)
    g = np.asarray(g, float)
    n = len(g)
    A_eq = np.zeros((0, n)) if A_eq is None else np.atleast_2d(np.asarray(A_eq, float))
    b_eq = np.zeros(0) if b_eq is None else np.asarray(b_eq, float).reshape(-1)
    A_in = np.zeros((0, n)) if A_in is None else np.atleast_2d(np.asarray(A_in, float))
    b_in = np.zeros(0) if b_in is None else np.asarray(b_in, float).reshape(-1)
    best = None
    m = len(b_in)
    for r in range(0, min(m, n - len(b_eq)) + 1):
        for act in itertools.combinations(range(m), r):
            A = np.vstack([A_eq, A_in[list(act)]])
            b = np.concatenate([b_eq, b_in[list(act)]])
            k = len(b)
            K = np.block([[H, A.T], [A, np.zeros((k, k))]])
            try:
                sol = np.linalg.solve(K, np.concatenate([-g, b]))
            except np.linalg.LinAlgError:
                continue
            x = sol[:n]
            if np.any(A_in @ x - b_in > tol) or np.any(np.abs(A_eq @ x - b_eq) > tol):
                continue
            f = 0.5 * x @ H @ x + g @ x
            if best is None or f < best[0]:
                best = (f, x)
    return best


def greedy_vw(points, n_max: int, rel_tie: float = 1e-12) -> list[int]:
    """Indices kept by repeated smallest-triangle removal on a closed contour."""
    idx = list(range(len(points)))
    pts = np.asarray(points, float)
    while len(idx) > n_max:
        areas = []
        for j in range(len(idx)):
            a, b, c = pts[idx[j - 1]], pts[idx[j]], pts[idx[(j + 1) % len(idx)]]
            areas.append(0.5 * abs((a[0] - b[0]) * (c[1] - b[1]) - (a[1] - b[1]) * (c[0] - b[0])))
        lo, hi = min(areas), max(areas)
        for j, a in enumerate(areas):
            if a <= lo + rel_tie * hi:
                del idx[j]
                break
    return idx


def grid_projection(target, poly, lo, hi, step=1e-3):
    """Closest grid point to ``target`` inside ``poly`` and the box ``[lo, hi]`` (xy only)."""
    p = np.asarray(poly, float)
    x0, y0 = np.maximum(p.min(axis=0), lo)
    x1, y1 = np.minimum(p.max(axis=0), hi)
    xs = np.arange(x0, x1 + step / 2, step)
    ys = np.arange(y0, y1 + step / 2, step)
    X, Y = np.meshgrid(xs, ys)
    Q = np.column_stack([X.ravel(), Y.ravel()])
    inside = np.all((Q >= np.asarray(lo) - 1e-12) & (Q <= np.asarray(hi) + 1e-12), axis=1)
    e = np.roll(p, -1, axis=0) - p
    for a, d in zip(p, e):
        inside &= d[0] * (Q[:, 1] - a[1]) - d[1] * (Q[:, 0] - a[0]) >= -1e-12
    Q = Q[inside]
    if len(Q) == 0:
        return None
    d2 = np.sum((Q - np.asarray(target, float)[:2]) ** 2, axis=1)
    k = int(np.argmin(d2))
    return Q[k], float(d2[k])


def integrate_twist(v_body, yaw0, yaw_rate, t_end, dt=1e-4):
    """RK4 integration of a unicycle driven by a constant body-frame twist."""
    v = np.asarray(v_body, float)

    def f(yaw):
        c, s = np.cos(yaw), np.sin(yaw)
        return np.array([c * v[0] - s * v[1], s * v[0] + c * v[1]])

    n = int(round(t_end / dt))
    h = t_end / n
    xy = np.zeros(2)
    for i in range(n):
        t = i * h
        y0 = yaw0 + yaw_rate * t
        k1 = f(y0)
        k2 = f(y0 + 0.5 * h * yaw_rate)
        k4 = f(y0 + h * yaw_rate)
        xy += h * (k1 + 4 * k2 + k4) / 6
    return xy


def support_distance(A, B, n_dirs: int = 7200) -> float:
    """Distance between two convex point sets from their support functions.

    d(A, B) = max over unit u of  min_a u.a - max_b u.b  (clamped at 0).
    """
    A = np.asarray(A, float)[:, :2]
    B = np.asarray(B, float)[:, :2]
    th = np.linspace(0.0, 2 * np.pi, n_dirs, endpoint=False)
    U = np.column_stack([np.cos(th), np.sin(th)])
    gap = (A @ U.T).min(axis=0) - (B @ U.T).max(axis=0)
    return max(float(gap.max()), 0.0)


def bernstein_sum(P, s):
    P = np.asarray(P, float)
    d = len(P) - 1
    return sum(comb(d, i) * s ** i * (1 - s) ** (d - i) * P[i] for i in range(d + 1))


def sampled_sinusoid_mean(amplitude, n_samples, phase):
    """Window mean of ``A sin(2 pi k / N + phase)`` for k = 0..N-1, in closed form (zero for N > 1)."""
    if n_samples == 1:
        return amplitude * np.sin(phase)
    return 0.0


def raibert(hip, T_s, v, omega, h, g=9.81):
    hip = np.asarray(hip, float)
    v3 = np.array([v[0], v[1], 0.0])
    w3 = np.array([0.0, 0.0, omega])
    return hip[:2] + 0.5 * T_s * np.asarray(v, float) + np.sqrt(h / g) * np.cross(v3, w3)[:2]
