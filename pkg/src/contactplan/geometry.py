"""Planar polygon helpers shared across the package.

Polygons are ``(n, 2)`` float arrays, counter-clockwise unless stated
otherwise, without a repeated closing vertex.
"""

from __future__ import annotations

import numpy as np

EPS = 1e-12


def as_polygon(points) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] < 2:
        raise ValueError(f"expected (n, 2) points, got shape {pts.shape}")
    pts = pts[:, :2]
    if len(pts) > 1 and np.allclose(pts[0], pts[-1]):
        pts = pts[:-1]
    return pts


def signed_area(poly: np.ndarray) -> float:
    x, y = poly[:, 0], poly[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def area(poly: np.ndarray) -> float:
    return abs(signed_area(poly))


def ensure_ccw(poly: np.ndarray) -> np.ndarray:
    return poly[::-1].copy() if signed_area(poly) < 0 else poly


def centroid(poly: np.ndarray) -> np.ndarray:
    x, y = poly[:, 0], poly[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    cross = x * yn - xn * y
    a = cross.sum() / 2.0
    if abs(a) < EPS:
        return poly.mean(axis=0)
    return np.array([((x + xn) * cross).sum(), ((y + yn) * cross).sum()]) / (6.0 * a)


def cross2(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def triangle_area(a, b, c) -> float:
    return 0.5 * abs(cross2(a, b, c))


def is_convex(poly: np.ndarray, tol: float = 1e-12) -> bool:
    """True when every turn has the same sign (collinear turns allowed)."""
    n = len(poly)
    if n < 3:
        return False
    sign = 0
    for i in range(n):
        c = cross2(poly[i - 1], poly[i], poly[(i + 1) % n])
        if abs(c) <= tol:
            continue
        s = 1 if c > 0 else -1
        if sign == 0:
            sign = s
        elif s != sign:
            return False
    return sign != 0


def remove_collinear(poly: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Drop duplicate points and vertices whose turn is numerically zero."""
    pts = [p for i, p in enumerate(poly) if np.linalg.norm(p - poly[i - 1]) > 1e-12]
    changed = True
    while changed and len(pts) > 3:
        changed = False
        for i in range(len(pts)):
            a, b, c = pts[i - 1], pts[i], pts[(i + 1) % len(pts)]
            scale = max(np.linalg.norm(a - b) * np.linalg.norm(c - b), EPS)
            if abs(cross2(a, b, c)) <= tol * max(scale, 1.0):
                del pts[i]
                changed = True
                break
    return np.array(pts, dtype=float)


def convex_hull(points: np.ndarray) -> np.ndarray:
    """Andrew's monotone chain, CCW, collinear points removed."""
    pts = sorted(map(tuple, np.asarray(points, dtype=float)[:, :2]))
    if len(pts) <= 2:
        return np.array(pts, dtype=float)
    lower: list = []
    for p in pts:
        while len(lower) >= 2 and cross2(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list = []
    for p in reversed(pts):
        while len(upper) >= 2 and cross2(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return np.array(lower[:-1] + upper[:-1], dtype=float)


def edge_halfplanes(poly: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Unit outward normals ``N`` and offsets ``d`` so that ``N p <= d`` inside a CCW convex polygon."""
    nxt = np.roll(poly, -1, axis=0)
    e = nxt - poly
    normals = np.column_stack([e[:, 1], -e[:, 0]])
    lengths = np.linalg.norm(normals, axis=1)
    keep = lengths > EPS
    normals = normals[keep] / lengths[keep, None]
    offsets = np.einsum("ij,ij->i", normals, poly[keep])
    return normals, offsets


def clip_halfplane(poly: np.ndarray, normal: np.ndarray, offset: float) -> np.ndarray:
    """Sutherland-Hodgman clip of a convex polygon against ``normal . p <= offset``."""
    if len(poly) == 0:
        return poly
    out = []
    vals = poly @ normal - offset
    n = len(poly)
    for i in range(n):
        j = (i + 1) % n
        pi, pj, vi, vj = poly[i], poly[j], vals[i], vals[j]
        if vi <= 0:
            out.append(pi)
        if (vi < 0 < vj) or (vj < 0 < vi):
            t = vi / (vi - vj)
            out.append(pi + t * (pj - pi))
    if len(out) < 3:
        return np.empty((0, 2))
    return np.array(out)


def halfplane_intersection(normals: np.ndarray, offsets: np.ndarray, bound: float = 1e4) -> np.ndarray:
    """Convex polygon ``{p : normals p <= offsets}``; empty array when degenerate."""
    poly = np.array([[-bound, -bound], [bound, -bound], [bound, bound], [-bound, bound]], dtype=float)
    for nrm, off in zip(normals, offsets):
        poly = clip_halfplane(poly, nrm, off)
        if len(poly) == 0:
            return poly
    poly = remove_collinear(poly)
    if len(poly) < 3 or area(poly) < 1e-14:
        return np.empty((0, 2))
    return poly


def point_in_polygon(points: np.ndarray, poly: np.ndarray) -> np.ndarray:
    """Vectorised even-odd test; boundary points count as inside up to round-off."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    x, y = pts[:, 0][:, None], pts[:, 1][:, None]
    xa, ya = poly[:, 0][None, :], poly[:, 1][None, :]
    xb, yb = np.roll(poly[:, 0], -1)[None, :], np.roll(poly[:, 1], -1)[None, :]
    crosses = (ya > y) != (yb > y)
    with np.errstate(divide="ignore", invalid="ignore"):
        xint = xa + (y - ya) * (xb - xa) / (yb - ya)
    inside = np.logical_and(crosses, x < xint).sum(axis=1) % 2 == 1
    # boundary tolerance
    d = segment_distances(pts, poly)
    return inside | (d <= 1e-12)


def segment_distances(points: np.ndarray, poly: np.ndarray) -> np.ndarray:
    """Distance from each point to the polygon boundary."""
    pts = np.atleast_2d(points)
    a = poly[None, :, :]
    b = np.roll(poly, -1, axis=0)[None, :, :]
    p = pts[:, None, :]
    ab = b - a
    denom = np.einsum("ijk,ijk->ij", ab, ab)
    denom = np.where(denom < EPS, 1.0, denom)
    t = np.clip(np.einsum("ijk,ijk->ij", p - a, ab) / denom, 0.0, 1.0)
    proj = a + t[..., None] * ab
    return np.linalg.norm(p - proj, axis=2).min(axis=1)


def convex_distance(P: np.ndarray, Q: np.ndarray) -> float:
    """Euclidean distance between two convex polygons; 0 when they touch or overlap.

    Separating-axis test over both edge sets, then the closest vertex/edge pair.
    """
    for A, B in ((P, Q), (Q, P)):
        normals, offsets = edge_halfplanes(ensure_ccw(A))
        for nrm, off in zip(normals, offsets):
            if np.min(B @ nrm) > off + 1e-12:
                return float(min(segment_distances(P, Q).min(), segment_distances(Q, P).min()))
    return 0.0


def polygon_is_simple(poly: np.ndarray) -> bool:
    """No two non-adjacent edges intersect (O(n^2); polygons here are tiny)."""
    n = len(poly)
    if n < 3:
        return False

    def seg_intersect(p1, p2, p3, p4) -> bool:
        d1 = cross2(p3, p4, p1)
        d2 = cross2(p3, p4, p2)
        d3 = cross2(p1, p2, p3)
        d4 = cross2(p1, p2, p4)
        if ((d1 > 0 > d2) or (d1 < 0 < d2)) and ((d3 > 0 > d4) or (d3 < 0 < d4)):
            return True

        def on_seg(p, q, r):
            return min(p[0], q[0]) - 1e-12 <= r[0] <= max(p[0], q[0]) + 1e-12 and \
                min(p[1], q[1]) - 1e-12 <= r[1] <= max(p[1], q[1]) + 1e-12

        if abs(d1) < 1e-14 and on_seg(p3, p4, p1):
            return True
        if abs(d2) < 1e-14 and on_seg(p3, p4, p2):
            return True
        if abs(d3) < 1e-14 and on_seg(p1, p2, p3):
            return True
        if abs(d4) < 1e-14 and on_seg(p1, p2, p4):
            return True
        return False

    for i in range(n):
        for j in range(i + 1, n):
            if j == i + 1 or (i == 0 and j == n - 1):
                continue
            if seg_intersect(poly[i], poly[(i + 1) % n], poly[j], poly[(j + 1) % n]):
                return False
    return True
