"""Swing-foot trajectories: polynomial references and collision-aware degree-7 Bezier fits."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from math import comb
from typing import Sequence

import numpy as np
from numpy.polynomial import Polynomial

from .errors import Infeasible, OutOfDomain
from .solvers import QpProblem, solve_qp

log = logging.getLogger(__name__)

DEGREE = 7
N_SAMPLES = 11          # n_c + 1
INSIDE_TOL = 1e-6       # points this close to a face count as outside the volume
TOP_TOL = 0.02          # a neighbour sample this close below the top plane still "crosses" it
DENSE_FACTOR = 10       # post-check density relative to the sample spacing
DENSE_TOL = 0.005       # tolerated excursion into an obstacle between samples
REFINE_TOL = 0.001      # dense-grid depth that triggers refinement, kept below DENSE_TOL for off-grid times


@dataclass(frozen=True)
class ReferenceTrajectory:
    """Per-axis power-series coefficients in normalised time ``s = t / T`` (lowest order first)."""

    coeffs: np.ndarray        # (3, 7); x and y use the first 6
    T: float
    apex: float = 0.15

    def __post_init__(self):
        if self.T <= 0:
            raise ValueError("duration must be positive")

    def __call__(self, t, order: int = 0) -> np.ndarray:
        s = np.asarray(t, dtype=float) / self.T
        out = []
        for c in self.coeffs:
            p = Polynomial(c).deriv(order) if order else Polynomial(c)
            out.append(p(s) / self.T ** order)
        return np.stack(out, axis=-1)

    def restrict(self, t0: float) -> "ReferenceTrajectory":
        """The same curve re-expressed on ``[t0, T]``, with time restarting at zero."""
        if not 0.0 <= t0 < self.T:
            raise OutOfDomain(f"t0={t0} outside [0, {self.T})")
        beta = (self.T - t0) / self.T
        s_of_u = Polynomial([t0 / self.T, beta])
        coeffs = np.zeros_like(self.coeffs)
        for i, c in enumerate(self.coeffs):
            comp = Polynomial(c)(s_of_u).coef
            coeffs[i, :len(comp)] = comp
        return ReferenceTrajectory(coeffs, self.T - t0, self.apex)

    def to_bezier(self) -> "BezierCurve":
        """Exact degree-7 Bernstein form of the reference."""
        return BezierCurve(power_to_bernstein(self.coeffs.T, DEGREE), self.T)


def power_to_bernstein(coeffs: np.ndarray, degree: int) -> np.ndarray:
    """Control points of ``sum_k a_k s^k`` (rows of ``coeffs``) in the degree-``degree`` Bernstein basis."""
    a = np.zeros((degree + 1,) + coeffs.shape[1:])
    a[:len(coeffs)] = coeffs
    out = np.zeros_like(a)
    for i in range(degree + 1):
        for k in range(i + 1):
            out[i] += comb(i, k) / comb(degree, k) * a[k]
    return out


def reference_trajectory(start, goal, T: float, apex: float = 0.15) -> ReferenceTrajectory:
    """Quintic x/y and sextic z with rest at touchdown and ``z(T/2) = max(z0, zT) + apex``.

    ``start`` is a position or a ``(position, velocity, acceleration)`` triple.
    """
    if T <= 0:
        raise ValueError("duration must be positive")
    p0, v0, a0 = _state(start)
    goal = np.asarray(goal, dtype=float)
    coeffs = np.zeros((3, 7))
    for ax in range(3):
        deg = 6 if ax == 2 else 5
        rows, rhs = _boundary_rows(deg, p0[ax], v0[ax] * T, a0[ax] * T ** 2, goal[ax])
        if ax == 2:
            rows.append([0.5 ** k for k in range(deg + 1)])
            rhs.append(max(p0[2], goal[2]) + apex)
        coeffs[ax, :deg + 1] = np.linalg.solve(np.array(rows), np.array(rhs))
    return ReferenceTrajectory(coeffs, float(T), apex)


def _state(start):
    arr = np.asarray(start, dtype=float)
    if arr.shape == (3,):
        return arr, np.zeros(3), np.zeros(3)
    arr = arr.reshape(3, 3)
    return arr[0], arr[1], arr[2]


def _boundary_rows(deg: int, p0: float, d0: float, dd0: float, pT: float):
    k = np.arange(deg + 1)
    rows = [
        (k == 0).astype(float),
        (k == 1).astype(float),
        2.0 * (k == 2),
        np.ones(deg + 1),
        k.astype(float),
        (k * (k - 1)).astype(float),
    ]
    return [list(r) for r in rows], [p0, d0, dd0, pT, 0.0, 0.0]


@dataclass(frozen=True)
class BezierCurve:
    control_points: np.ndarray     # (8, 3)
    T: float

    def __post_init__(self):
        cp = np.asarray(self.control_points, dtype=float)
        if cp.ndim != 2 or cp.shape[1] != 3:
            raise ValueError("control points must be (d+1, 3)")
        if self.T <= 0:
            raise ValueError("duration must be positive")
        object.__setattr__(self, "control_points", cp)

    @property
    def degree(self) -> int:
        return len(self.control_points) - 1

    def __call__(self, t, order: int = 0) -> np.ndarray:
        return eval_bezier(self, t, order)

    def to_dict(self) -> dict:
        return {"T": self.T, "control_points": self.control_points.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "BezierCurve":
        return cls(np.asarray(d["control_points"], dtype=float), float(d["T"]))


def _de_casteljau(points: np.ndarray, s: float) -> np.ndarray:
    b = points.copy()
    for r in range(1, len(b)):
        b[:len(b) - r] = (1.0 - s) * b[:len(b) - r] + s * b[1:len(b) - r + 1]
    return b[0]


def eval_bezier(curve: BezierCurve, t, order: int = 0) -> np.ndarray:
    """Position (``order=0``) or time derivative of order 1 or 2 at ``t``."""
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(ts < -1e-12) or np.any(ts > curve.T + 1e-12):
        raise OutOfDomain(f"t outside [0, {curve.T}]")
    if order not in (0, 1, 2):
        raise ValueError("order must be 0, 1 or 2")
    pts = curve.control_points
    d = curve.degree
    scale = 1.0
    for r in range(order):
        pts = np.diff(pts, axis=0)
        scale *= (d - r) / curve.T
    if len(pts) == 0:
        out = np.zeros((len(ts), 3))
    else:
        out = np.array([_de_casteljau(pts, min(max(x / curve.T, 0.0), 1.0)) for x in ts]) * scale
    return out[0] if np.ndim(t) == 0 else out


def bernstein_row(s: float, degree: int = DEGREE) -> np.ndarray:
    i = np.arange(degree + 1)
    return np.array([comb(degree, k) for k in i]) * s ** i * (1.0 - s) ** (degree - i)


def sample_times(T: float, n_samples: int = N_SAMPLES) -> np.ndarray:
    return np.linspace(0.0, T, n_samples)


@dataclass(frozen=True)
class CollisionConstraintSet:
    """Sampled half-space constraints ``normal . p(t_k) >= offset``."""

    times: np.ndarray
    T: float
    rows: tuple[tuple[int, int, np.ndarray, float], ...] = ()    # (sample k, obstacle id, normal, offset)

    @property
    def sample_matrix(self) -> np.ndarray:
        """Bernstein rows ``A_k`` for every sample time."""
        return np.array([bernstein_row(t / self.T) for t in self.times])

    def __len__(self) -> int:
        return len(self.rows)

    def inequalities(self) -> tuple[np.ndarray, np.ndarray]:
        """``G P <= h`` over the flattened (8 x 3, row-major) control points."""
        A = self.sample_matrix
        G = np.zeros((len(self.rows), 3 * (DEGREE + 1)))
        h = np.zeros(len(self.rows))
        for r, (k, _, normal, offset) in enumerate(self.rows):
            G[r] = -np.kron(A[k], normal)
            h[r] = -offset
        return G, h

    def slack(self, curve: BezierCurve) -> np.ndarray:
        return np.array([normal @ curve(self.times[k]) - off for k, _, normal, off in self.rows])


def _crossings(R: np.ndarray, r: np.ndarray, pa: np.ndarray, pb: np.ndarray, ta: float, tb: float):
    """Faces whose sign flips between two samples, with their interpolated crossing times."""
    va, vb = R @ pa - r, R @ pb - r
    out = []
    for m in np.flatnonzero((va > 0) != (vb > 0)):
        frac = va[m] / (va[m] - vb[m])
        out.append((ta + frac * (tb - ta), int(m)))
    return sorted(out)


def active_halfspaces(reference: ReferenceTrajectory, obstacles: Sequence, n_samples: int = N_SAMPLES,
                      ignore_depth: float = 0.0) -> CollisionConstraintSet:
    """Half-spaces that keep the interior samples out of the obstacle volumes the reference enters.

    For every run of consecutive interior samples inside one obstacle the top
    face is used when a neighbouring sample lies on or above the top plane;
    otherwise the first face crossed in time next to the run. Samples less
    than ``ignore_depth`` inside a volume (a deliberate landing offset) are
    treated as outside.
    """
    times = sample_times(reference.T, n_samples)
    pts = reference(times)
    rows = []
    for obs in obstacles:
        R, r = obs.halfspaces()
        inside = np.all(pts @ R.T - r < -max(INSIDE_TOL, ignore_depth), axis=1)
        inside[0] = inside[-1] = False
        k = 1
        while k < n_samples - 1:
            if not inside[k]:
                k += 1
                continue
            k1 = k
            while k1 + 1 < n_samples - 1 and inside[k1 + 1]:
                k1 += 1
            face = _choose_face(R, r, pts, times, k, k1)
            for kk in range(k, k1 + 1):
                rows.append((kk, obs.id, R[face].copy(), float(r[face])))
            k = k1 + 1
    rows.sort(key=lambda row: (row[0], row[1]))
    return CollisionConstraintSet(times, reference.T, tuple(rows))


def _choose_face(R, r, pts, times, k0: int, k1: int) -> int:
    top = len(R) - 1
    neighbours = [k for k in (k0 - 1, k1 + 1) if 0 <= k < len(pts)]
    if any(R[top] @ pts[k] - r[top] >= -TOP_TOL for k in neighbours):
        return top
    crossed = []
    if k0 - 1 >= 0:
        crossed += _crossings(R, r, pts[k0 - 1], pts[k0], times[k0 - 1], times[k0])
    if k1 + 1 < len(pts):
        crossed += _crossings(R, r, pts[k1], pts[k1 + 1], times[k1], times[k1 + 1])
    if crossed:
        return min(crossed)[1]
    return top


def _equality_rows(p0, v0, a0, goal, T: float) -> tuple[np.ndarray, np.ndarray]:
    """Boundary rows on flattened control points: the state up to acceleration at both ends."""
    d = DEGREE
    n = 3 * (d + 1)
    rows, rhs = [], []

    def add(weights: dict[int, float], value):
        for ax in range(3):
            row = np.zeros(n)
            for i, w in weights.items():
                row[3 * i + ax] = w
            rows.append(row)
            rhs.append(value[ax])

    add({0: 1.0}, p0)
    add({0: -d / T, 1: d / T}, v0)
    add({0: d * (d - 1) / T ** 2, 1: -2 * d * (d - 1) / T ** 2, 2: d * (d - 1) / T ** 2}, a0)
    add({d: 1.0}, goal)
    add({d - 1: -d / T, d: d / T}, np.zeros(3))
    add({d - 2: 1.0, d - 1: -2.0, d: 1.0}, np.zeros(3))
    return np.array(rows), np.array(rhs)


def fit_bezier(reference: ReferenceTrajectory, constraints: CollisionConstraintSet | None = None,
               *, start=None, n_samples: int = N_SAMPLES) -> BezierCurve:
    """Degree-7 curve tracking ``reference`` at the sample times under exact boundary rows.

    ``start`` overrides the initial ``(position, velocity, acceleration)``;
    by default they are read off the reference.
    """
    T = reference.T
    times = constraints.times if constraints is not None else sample_times(T, n_samples)
    A = np.array([bernstein_row(t / T) for t in times])
    ref = reference(times)
    H = 2.0 * np.kron(A.T @ A, np.eye(3))
    g = -2.0 * np.kron(A.T, np.eye(3)) @ ref.reshape(-1)
    if start is None:
        p0, v0, a0 = reference(0.0), reference(0.0, 1), reference(0.0, 2)
    else:
        p0, v0, a0 = _state(start)
    E, e = _equality_rows(p0, v0, a0, reference(T), T)
    G, h = constraints.inequalities() if constraints is not None and len(constraints) else (None, None)
    sol = solve_qp(QpProblem(H, g, E, e, G, h))
    return BezierCurve(sol.x.reshape(DEGREE + 1, 3), T)


@dataclass(frozen=True)
class SwingPlan:
    curve: BezierCurve
    reference: ReferenceTrajectory
    constraints: CollisionConstraintSet
    apex: float
    retried: bool = False
    stats: dict = field(default_factory=dict)


def plan_swing(start, goal, T: float, obstacles: Sequence = (), *, apex: float = 0.15,
               n_samples: int = N_SAMPLES, retry_apex: float = 0.1, reference: ReferenceTrajectory | None = None,
               ignore_depth: float = 0.0) -> SwingPlan:
    """Fit a swing from ``start`` to ``goal`` clear of ``obstacles``; on infeasibility the apex is raised once."""
    p0, v0, a0 = _state(start)
    for attempt, h in enumerate((apex, apex + retry_apex)):
        ref = reference if (reference is not None and attempt == 0) else reference_trajectory((p0, v0, a0), goal, T, h)
        cons = active_halfspaces(ref, obstacles, n_samples, ignore_depth)
        try:
            curve = fit_bezier(ref, cons, start=(p0, v0, a0))
        except Infeasible:
            if attempt == 0:
                log.info("swing fit infeasible at apex %.2f m, retrying at %.2f m", h, h + retry_apex)
                continue
            raise
        stats = {"n_samples": len(cons.times), "refined": False}
        n_dense = DENSE_FACTOR * (n_samples - 1) + 1
        depth = dense_penetration(curve, obstacles, n_dense, ignore_depth)
        if depth > REFINE_TOL:
            # the gap between samples let the curve cut a corner; constrain the dense grid instead
            dense = active_halfspaces(ref, obstacles, n_dense, ignore_depth)
            try:
                refined = fit_bezier(ref, dense, start=(p0, v0, a0))
                d2 = dense_penetration(refined, obstacles, n_dense, ignore_depth)
                if d2 < depth:
                    curve, cons, depth = refined, dense, d2
                    stats.update(n_samples=n_dense, refined=True)
            except Infeasible:
                pass
            if depth > DENSE_TOL:
                log.warning("swing curve enters an obstacle by %.3f m between samples", depth)
        stats["penetration"] = depth
        return SwingPlan(curve, ref, cons, h, attempt > 0, stats)
    raise AssertionError("unreachable")


def dense_penetration(curve: BezierCurve, obstacles: Sequence, n: int, ignore_depth: float = 0.0) -> float:
    """Depth of the deepest curve point inside any obstacle volume over ``n`` uniform times.

    Depths up to ``ignore_depth`` are forgiven, so the result is measured beyond it (0 if none).
    """
    pts = curve(np.linspace(0.0, curve.T, n))
    worst = 0.0
    for obs in obstacles:
        R, r = obs.halfspaces()
        margin = r[None, :] - pts @ R.T
        inside = np.all(margin > 0, axis=1)
        if inside.any():
            worst = max(worst, float(margin[inside].min(axis=1).max()) - ignore_depth)
    return max(worst, 0.0)


__all__ = [
    "ReferenceTrajectory", "BezierCurve", "CollisionConstraintSet", "SwingPlan", "reference_trajectory",
    "power_to_bernstein", "eval_bezier", "bernstein_row", "sample_times", "active_halfspaces", "fit_bezier",
    "plan_swing", "dense_penetration", "DEGREE", "N_SAMPLES",
]
