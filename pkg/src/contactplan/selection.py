"""Surface selection over the contact horizon.

The base is extrapolated along the commanded twist, candidate surfaces are
filtered by the reachable area of each moving foot, and a Big-M mixed-integer
QP picks one surface per new contact.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import geometry as geo
from .errors import DegenerateFit, NoReachableSurface
from .footstep import RaibertParams, raibert_target
from .robot import FEET, HIP_OFFSETS, GaitPattern, KinematicBox, RobotState, rotation
from .solvers import MipSolution, MiqpProblem, QpProblem, solve_miqp
from .terrain import Surface, Terrain

log = logging.getLogger(__name__)

MAX_TILT = np.deg2rad(60.0)


@dataclass(frozen=True)
class ExtrapolatedConfig:
    t: float
    pose: np.ndarray      # x, y, z, roll, pitch, yaw

    @property
    def R(self) -> np.ndarray:
        return rotation(*self.pose[3:6])

    def hips(self, hip_offsets: np.ndarray = HIP_OFFSETS) -> np.ndarray:
        return self.pose[:3] + hip_offsets @ self.R.T


@dataclass(frozen=True)
class SelectionCosts:
    w_raibert: float = 1.0
    w_hip: float = 0.5


@dataclass(frozen=True)
class PlannedContact:
    phase: int            # relative to the phase the plan was made at
    foot: int
    surface_id: int
    position: np.ndarray
    candidates: tuple[int, ...]

    def to_dict(self) -> dict:
        return {"phase": self.phase, "foot": FEET[self.foot], "surface_id": self.surface_id,
                "position": [float(v) for v in self.position], "candidates": list(self.candidates)}


@dataclass(frozen=True)
class SurfacePlan:
    contacts: tuple[PlannedContact, ...]
    configs: tuple[ExtrapolatedConfig, ...]
    objective: float
    status: str
    stats: dict = field(default_factory=dict)
    first_phase: int = 0

    def surface_for(self, phase: int, foot: int) -> int:
        for c in self.contacts:
            if c.phase == phase and c.foot == foot:
                return c.surface_id
        raise KeyError((phase, foot))

    def to_dict(self) -> dict:
        return {"first_phase": self.first_phase, "status": self.status, "objective": self.objective,
                "contacts": [c.to_dict() for c in self.contacts], "stats": dict(self.stats)}


def twist_displacement(v_body, yaw0: float, yaw_rate: float, t):
    """World xy displacement after ``t`` seconds of constant body twist, in closed form.

    ``int_0^t R(yaw0 + w s) v ds = t sinc(w t / 2) R(yaw0 + w t / 2) v``.
    """
    t = np.asarray(t, dtype=float)
    half = 0.5 * yaw_rate * t
    if abs(yaw_rate) < 1e-6:
        sinc = 1.0 - half ** 2 / 6.0
    else:
        sinc = np.sin(half) / np.where(half == 0, 1.0, half)
        sinc = np.where(half == 0, 1.0, sinc)
    th = yaw0 + half
    vx, vy = float(v_body[0]), float(v_body[1])
    dx = t * sinc * (np.cos(th) * vx - np.sin(th) * vy)
    dy = t * sinc * (np.sin(th) * vx + np.cos(th) * vy)
    return np.stack([dx, dy], axis=-1)


def _as_terrain(terrain) -> Terrain:
    if isinstance(terrain, Terrain):
        return terrain
    return Terrain(list(terrain))


def config_at(xy, yaw: float, t: float, terrain: Terrain, h_ref: float,
              window=(1.0, 0.6), default: float | None = None) -> ExtrapolatedConfig:
    """Base pose at ``xy`` riding ``h_ref`` above the local average terrain plane."""
    x, y = float(xy[0]), float(xy[1])
    try:
        plane = terrain.fit_plane((x, y), window, (10, 10), default)
        # slopes along and across the heading
        c, s = np.cos(yaw), np.sin(yaw)
        a = plane.a * c + plane.b * s
        b = -plane.a * s + plane.b * c
        z = plane.height(x, y) + h_ref
        roll, pitch = float(np.arctan(b)), float(-np.arctan(a))
    except DegenerateFit:
        z = float(terrain.elevation(x, y, default)) + h_ref
        roll = pitch = 0.0
    return ExtrapolatedConfig(t, np.array([x, y, z, roll, pitch, yaw]))


def extrapolate_configs(state: RobotState, v_ref, yaw_rate_ref: float, gait: GaitPattern, terrain,
                        *, window=(1.0, 0.6), n_phases: int | None = None) -> list[ExtrapolatedConfig]:
    """Base configurations at the end of each phase of the horizon (``t_j = (j + 1) * step``)."""
    if gait.horizon < 1:
        raise ValueError("gait horizon must be positive")
    terrain = _as_terrain(terrain)
    n = gait.n_phases if n_phases is None else n_phases
    ts = gait.step_duration * np.arange(1, n + 1)
    xy = state.pose[:2] + twist_displacement(v_ref, state.yaw, yaw_rate_ref, ts)
    default = float(state.feet[:, 2].mean())
    out = []
    for t, p in zip(ts, xy):
        cfg = config_at(p, state.yaw + yaw_rate_ref * t, float(t), terrain, state.h_ref, window, default)
        if abs(cfg.pose[3]) >= MAX_TILT or abs(cfg.pose[4]) >= MAX_TILT:
            cfg = ExtrapolatedConfig(cfg.t, np.r_[cfg.pose[:3], 0.0, 0.0, cfg.pose[5]])
        out.append(cfg)
    return out


def stance_phases(gait: GaitPattern, first_phase: int, phase: int, foot: int, n_phases: int) -> range:
    """Relative phases during which a foot landing at the end of ``phase`` stays down (clipped to the horizon)."""
    k = phase + 1
    while k < n_phases and foot not in gait.swing_feet(first_phase + k):
        k += 1
    return range(phase, k)


def rom_footprint(config: ExtrapolatedConfig, foot: int, rom: KinematicBox,
                  hip_offsets: np.ndarray = HIP_OFFSETS) -> np.ndarray:
    """xy convex hull of the reachable box of ``foot`` at ``config``."""
    return geo.convex_hull(rom.corners(config.hips(hip_offsets)[foot], config.R)[:, :2])


def preselect_surfaces(configs: Sequence[ExtrapolatedConfig], gait: GaitPattern, rom: KinematicBox,
                       surfaces: Sequence[Surface], *, first_phase: int = 0,
                       hip_offsets: np.ndarray = HIP_OFFSETS) -> list[tuple[int, int, list[Surface]]]:
    """``(phase, foot, candidates)`` for every contact of the horizon."""
    if not surfaces:
        raise ValueError("no surfaces to select from")
    out = []
    for j, foot in gait.contacts(first_phase):
        box = rom_footprint(configs[j], foot, rom, hip_offsets)
        cands = [s for s in surfaces if geo.convex_distance(s.polygon, box) <= 0.0]
        if not cands:
            raise NoReachableSurface(j, foot)
        out.append((j, foot, cands))
    return out


def build_selection_problem(state: RobotState, v_ref, yaw_rate_ref: float, gait: GaitPattern,
                            configs: Sequence[ExtrapolatedConfig], candidates, rom: KinematicBox,
                            costs: SelectionCosts = SelectionCosts(), *, first_phase: int = 0,
                            hip_offsets: np.ndarray = HIP_OFFSETS, big_m: float = 100.0,
                            g: float = 9.81) -> tuple[MiqpProblem, float]:
    """Big-M problem over the new contact positions; returns it with the cost's constant term."""
    nc = len(candidates)
    nv = 3 * nc
    H = np.zeros((nv, nv))
    gv = np.zeros(nv)
    const = 0.0
    K_rows, k_rows = [], []
    groups, ind_A, ind_b, ind_bin = [], [], [], []
    nb = 0
    n_phases = len(configs)
    w1, w2 = costs.w_raibert, costs.w_hip
    for c, (j, foot, cands) in enumerate(candidates):
        sl = slice(3 * c, 3 * c + 3)
        cfg = configs[j]
        hip = cfg.hips(hip_offsets)[foot]
        v_world = rotation(0.0, 0.0, cfg.pose[5])[:2, :2] @ np.asarray(v_ref, dtype=float)[:2]
        params = RaibertParams(gait.stance_time(foot), state.h_ref, g, tuple(v_world), yaw_rate_ref)
        target = raibert_target(hip, params)
        # w1 |p - p*|^2_xy + w2 |p - hip|^2
        wdiag = np.array([w1 + w2, w1 + w2, w2])
        H[sl, sl] = 2.0 * np.diag(wdiag)
        gv[sl] = -2.0 * (w1 * np.r_[target, 0.0] + w2 * hip)
        const += w1 * float(target @ target) + w2 * float(hip @ hip)
        for k in stance_phases(gait, first_phase, j, foot, n_phases):
            ck = configs[k]
            K, kk = rom.rows(ck.hips(hip_offsets)[foot], ck.R)
            rows = np.zeros((len(K), nv))
            rows[:, sl] = K
            K_rows.append(rows)
            k_rows.append(kk)
        grp = []
        for surf in cands:
            b = nb
            nb += 1
            grp.append(b)
            rows = np.zeros((len(surf.S), nv))
            rows[:, sl] = surf.S
            ind_A.append(rows)
            ind_b.append(surf.s)
            ind_bin.extend([b] * len(surf.S))
        groups.append(tuple(grp))
    base = QpProblem(H, gv, A_in=np.vstack(K_rows) if K_rows else None,
                     b_in=np.concatenate(k_rows) if k_rows else None)
    prob = MiqpProblem(base, tuple(groups), np.vstack(ind_A), np.concatenate(ind_b),
                       np.asarray(ind_bin), big_m)
    return prob, const


def plan_surfaces(state: RobotState, v_ref, yaw_rate_ref: float, gait: GaitPattern, terrain,
                  rom: KinematicBox = KinematicBox(), costs: SelectionCosts = SelectionCosts(), *,
                  first_phase: int = 0, hip_offsets: np.ndarray = HIP_OFFSETS, big_m: float = 100.0,
                  time_limit: float | None = 0.25, window=(1.0, 0.6),
                  configs: Sequence[ExtrapolatedConfig] | None = None, solver=solve_miqp) -> SurfacePlan:
    """Choose a surface for each of the next ``gait.horizon`` contacts."""
    terrain = _as_terrain(terrain)
    if configs is None:
        configs = extrapolate_configs(state, v_ref, yaw_rate_ref, gait, terrain, window=window,
                                      n_phases=gait.n_phases)
    cands = preselect_surfaces(configs, gait, rom, terrain.surfaces, first_phase=first_phase,
                               hip_offsets=hip_offsets)
    prob, const = build_selection_problem(state, v_ref, yaw_rate_ref, gait, configs, cands, rom, costs,
                                          first_phase=first_phase, hip_offsets=hip_offsets, big_m=big_m)
    if solver is solve_miqp:
        sol: MipSolution = solver(prob, time_limit=time_limit)
    else:
        sol = solver(prob)
    contacts = []
    bin_surface = [s.id for _, _, cs in cands for s in cs]
    for c, (j, foot, cs) in enumerate(cands):
        contacts.append(PlannedContact(j, foot, bin_surface[sol.assignment[c]], sol.x[3 * c:3 * c + 3].copy(),
                                       tuple(s.id for s in cs)))
    stats = {"solve_time": sol.solve_time, "nodes": sol.nodes, "qp_solves": sol.qp_solves,
             "n_candidates": [len(cs) for _, _, cs in cands]}
    return SurfacePlan(tuple(contacts), tuple(configs), sol.objective + const, sol.status, stats, first_phase)


__all__ = [
    "ExtrapolatedConfig", "SelectionCosts", "PlannedContact", "SurfacePlan", "twist_displacement",
    "config_at", "extrapolate_configs", "stance_phases", "rom_footprint", "preselect_surfaces",
    "build_selection_problem", "plan_surfaces",
]
