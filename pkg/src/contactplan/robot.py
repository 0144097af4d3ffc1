"""Robot-side data: feet, hip geometry, kinematic boxes, gait patterns and the base state."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

log = logging.getLogger(__name__)

FEET = ("LF", "RF", "LH", "RH")

# body-frame hip positions (m), ANYmal-B scale
HIP_OFFSETS = np.array([
    [0.277, 0.234, 0.0],
    [0.277, -0.234, 0.0],
    [-0.277, 0.234, 0.0],
    [-0.277, -0.234, 0.0],
])


def rotation(roll: float, pitch: float, yaw: float) -> np.ndarray:
    """World-from-body rotation, ``Rz(yaw) Ry(pitch) Rx(roll)``."""
    cr, sr = np.cos(roll), np.sin(roll)
    cp, sp = np.cos(pitch), np.sin(pitch)
    cy, sy = np.cos(yaw), np.sin(yaw)
    return np.array([
        [cy * cp, cy * sp * sr - sy * cr, cy * sp * cr + sy * sr],
        [sy * cp, sy * sp * sr + cy * cr, sy * sp * cr - cy * sr],
        [-sp, cp * sr, cp * cr],
    ])


@dataclass(frozen=True)
class KinematicBox:
    """Axis-aligned bounds of a foot position expressed in its hip frame."""

    lower: tuple[float, float, float] = (-0.25, -0.15, -0.55)
    upper: tuple[float, float, float] = (0.25, 0.15, -0.25)

    def __post_init__(self):
        if any(lo >= hi for lo, hi in zip(self.lower, self.upper)):
            raise ValueError("kinematic box needs lower < upper on every axis")

    @classmethod
    def symmetric_x(cls, half_x: float, **kw) -> "KinematicBox":
        base = cls(**kw)
        return cls((-half_x, base.lower[1], base.lower[2]), (half_x, base.upper[1], base.upper[2]))

    def rows(self, hip: np.ndarray, R: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """``K p <= k`` for ``lower <= R^T (p - hip) <= upper``."""
        Rt = R.T
        K = np.vstack([Rt, -Rt])
        k = np.concatenate([np.asarray(self.upper) + Rt @ hip, -np.asarray(self.lower) - Rt @ hip])
        return K, k

    def corners(self, hip: np.ndarray, R: np.ndarray) -> np.ndarray:
        lo, hi = np.asarray(self.lower), np.asarray(self.upper)
        c = np.array([[x, y, z] for x in (lo[0], hi[0]) for y in (lo[1], hi[1]) for z in (lo[2], hi[2])])
        return hip + c @ R.T


@dataclass(frozen=True)
class GaitPattern:
    """Cyclic contact schedule; each phase lists the feet that swing during it."""

    name: str
    phases: tuple[tuple[int, ...], ...]
    step_duration: float
    horizon: int

    def __post_init__(self):
        if self.step_duration <= 0:
            raise ValueError("step duration must be positive")
        if self.horizon < 1:
            raise ValueError("horizon must be at least one contact")
        if not self.phases or any(not p for p in self.phases):
            raise ValueError("every phase needs at least one swing foot")

    @classmethod
    def walk(cls, horizon: int = 8, step_duration: float = 0.6) -> "GaitPattern":
        return cls("walk", ((2,), (0,), (3,), (1,)), step_duration, horizon)

    @classmethod
    def trot(cls, horizon: int = 6, step_duration: float = 0.3) -> "GaitPattern":
        return cls("trot", ((0, 3), (1, 2)), step_duration, horizon)

    @classmethod
    def named(cls, name: str, **kw) -> "GaitPattern":
        if name == "walk":
            return cls.walk(**kw)
        if name == "trot":
            return cls.trot(**kw)
        raise ValueError(f"unknown gait {name!r}")

    @property
    def period(self) -> float:
        return len(self.phases) * self.step_duration

    def swing_feet(self, phase: int) -> tuple[int, ...]:
        return self.phases[phase % len(self.phases)]

    def stance_time(self, foot: int) -> float:
        swings = sum(foot in p for p in self.phases)
        return self.period - swings * self.step_duration

    def contacts(self, first_phase: int = 0) -> list[tuple[int, int]]:
        """``(relative phase, foot)`` for the next ``horizon`` contact creations."""
        out = []
        j = 0
        while len(out) < self.horizon:
            for foot in self.swing_feet(first_phase + j):
                if len(out) < self.horizon:
                    out.append((j, foot))
            j += 1
        return out

    @property
    def n_phases(self) -> int:
        return self.contacts()[-1][0] + 1


@dataclass
class RobotState:
    """Base pose ``(x, y, z, roll, pitch, yaw)``, base velocity and the four feet."""

    pose: np.ndarray
    feet: np.ndarray
    velocity: np.ndarray = field(default_factory=lambda: np.zeros(3))
    contacts: frozenset = frozenset(range(4))
    h_ref: float = 0.48

    def __post_init__(self):
        self.pose = np.asarray(self.pose, dtype=float).reshape(6)
        self.feet = np.asarray(self.feet, dtype=float).reshape(4, 3)
        self.velocity = np.asarray(self.velocity, dtype=float).reshape(3)
        if self.h_ref <= 0:
            raise ValueError("nominal height must be positive")

    @property
    def position(self) -> np.ndarray:
        return self.pose[:3]

    @property
    def yaw(self) -> float:
        return float(self.pose[5])

    def hips(self, hip_offsets: np.ndarray = HIP_OFFSETS) -> np.ndarray:
        return hip_positions(self.pose, hip_offsets)

    def check_contacts(self, surfaces, tol: float = 0.05) -> list[int]:
        """Feet in contact that are farther than ``tol`` from every surface plane (logged)."""
        bad = []
        for f in sorted(self.contacts):
            p = self.feet[f]
            dists = [abs(p[2] - s.plane.height(p[0], p[1])) for s in surfaces]
            if not dists or min(dists) > tol:
                bad.append(f)
                log.warning("foot %s is %.3f m away from any known surface", FEET[f], min(dists, default=np.inf))
        return bad

    @classmethod
    def standing(cls, x: float, y: float, yaw: float, ground, h_ref: float = 0.48,
                 hip_offsets: np.ndarray = HIP_OFFSETS) -> "RobotState":
        """Feet under the hips on ``ground(x, y)``; base ``h_ref`` above the mean foot height."""
        R = rotation(0.0, 0.0, yaw)
        feet = np.array([[x, y, 0.0]] * 4) + hip_offsets @ R.T
        feet[:, 2] = [ground(f[0], f[1]) for f in feet]
        z = float(feet[:, 2].mean()) + h_ref
        return cls(np.array([x, y, z, 0.0, 0.0, yaw]), feet, h_ref=h_ref)


def hip_positions(pose: np.ndarray, hip_offsets: np.ndarray = HIP_OFFSETS) -> np.ndarray:
    R = rotation(*pose[3:6])
    return pose[:3] + hip_offsets @ R.T
