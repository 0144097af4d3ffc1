"""Feed-forward footstep target and its projection onto the selected surface."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .solvers import QpProblem, solve_qp
from .terrain import Surface

GRAVITY = 9.81


@dataclass(frozen=True)
class RaibertParams:
    T_s: float
    h: float = 0.48
    g: float = GRAVITY
    v_ref: tuple[float, float] = (0.0, 0.0)
    omega_ref: float = 0.0

    def __post_init__(self):
        if self.T_s <= 0 or self.h <= 0 or self.g <= 0:
            raise ValueError("stance time, height and gravity must be positive")


def raibert_target(hip, params: RaibertParams) -> np.ndarray:
    """``hip + T_s/2 v + sqrt(h/g) (v x w)`` restricted to the ground plane.

    ``v`` is the commanded world-frame velocity lifted to 3D, ``w = (0, 0, omega_ref)``.
    """
    hip = np.asarray(hip, dtype=float)[:2]
    v = np.array([params.v_ref[0], params.v_ref[1], 0.0])
    w = np.array([0.0, 0.0, params.omega_ref])
    return hip + 0.5 * params.T_s * v[:2] + np.sqrt(params.h / params.g) * np.cross(v, w)[:2]


def optimize_footstep(target, surface: Surface, kin: tuple[np.ndarray, np.ndarray] | None = None,
                      *, plane_weight: float = 1e-6) -> np.ndarray:
    """Point of ``surface`` closest in xy to ``target``, optionally inside ``K p <= k``.

    A tiny penalty on the distance to the surface plane pins ``z`` to the
    plane and keeps the Hessian positive definite.  Raises ``Infeasible``
    when the surface and the box do not meet.
    """
    tx, ty = np.asarray(target, dtype=float)[:2]
    n = np.array([-surface.plane.a, -surface.plane.b, 1.0])   # z - plane(x, y) = n.p - c
    H = 2.0 * np.diag([1.0, 1.0, 0.0]) + 2.0 * plane_weight * np.outer(n, n)
    g = np.array([-2.0 * tx, -2.0 * ty, 0.0]) - 2.0 * plane_weight * surface.plane.c * n
    A, b = surface.S, surface.s
    if kin is not None:
        A, b = np.vstack([A, kin[0]]), np.concatenate([b, kin[1]])
    sol = solve_qp(QpProblem(H, g, A_in=A, b_in=b))
    return sol.x


__all__ = ["RaibertParams", "raibert_target", "optimize_footstep", "GRAVITY"]
