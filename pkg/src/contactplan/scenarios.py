"""Builders for the bundled scenario files.

Each builder returns the JSON-ready dict that ``pipeline.load_scenario``
accepts; ``write_bundled`` regenerates ``contactplan/data``.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .robot import HIP_OFFSETS

DATA_DIR = Path(__file__).with_name("data")

RISE = 0.17
DEPTH = 0.29


def rect(x0: float, x1: float, y0: float, y1: float, z: float = 0.0) -> list[list[float]]:
    return [[x0, y0, z], [x1, y0, z], [x1, y1, z], [x0, y1, z]]


def _start(x: float = 0.0, y: float = 0.0, yaw: float = 0.0, z: float = 0.0, h_ref: float = 0.48) -> dict:
    c, s = np.cos(yaw), np.sin(yaw)
    feet = [[x + c * hx - s * hy, y + s * hx + c * hy, z] for hx, hy, _ in HIP_OFFSETS]
    return {"pose": [x, y, z + h_ref, 0.0, 0.0, yaw], "feet": feet}


def flat() -> dict:
    return {
        "name": "flat",
        "surfaces": [{"vertices": rect(-2.0, 6.0, -2.0, 2.0)}],
        "start": _start(),
        "commands": [{"t": 0.0, "vx": 0.1, "vy": 0.0, "yaw_rate": 0.0}],
        "gait": "walk",
    }


def staircase(n_treads: int = 7, rise: float = RISE, depth: float = DEPTH, width: float = 1.0,
              x0: float = 0.6, platform: float = 1.2, missing: tuple[int, ...] = (),
              ground_back: float = 1.5) -> list[dict]:
    """Ground plus ``n_treads`` treads; tread ``n_treads`` is a deep landing platform."""
    hw = width / 2
    out = [{"vertices": rect(-ground_back, x0, -hw, hw, 0.0)}]
    for i in range(1, n_treads + 1):
        if i in missing:
            continue
        xa = x0 + (i - 1) * depth
        xb = xa + (platform if i == n_treads else depth)
        out.append({"vertices": rect(xa, xb, -hw, hw, i * rise)})
    return out


def staircase7() -> dict:
    return {
        "name": "staircase7",
        "surfaces": staircase(),
        "start": _start(),
        "commands": [{"t": 0.0, "vx": 0.1, "vy": 0.0, "yaw_rate": 0.0}],
        "gait": "walk",
    }


def staircase_gap() -> dict:
    """Tread 6 removed: one missing step, 0.29 m deep and 0.17 m rise (0.34 m along the slope)."""
    d = staircase7()
    d["name"] = "staircase_gap"
    d["surfaces"] = staircase(missing=(6,))
    return d


def stepping_stones() -> dict:
    """Start and goal platforms joined by two rows of nine stones (20 surfaces)."""
    surfaces = [{"vertices": rect(-1.0, 0.45, -0.6, 0.6, 0.0)}]
    heights = [0.02, 0.05, 0.0, 0.04, 0.01, 0.06, 0.03, 0.0, 0.05]
    for k in range(9):
        xc = 0.65 + 0.36 * k
        for side, dz in ((1, 0.0), (-1, 0.01)):
            yc = side * 0.25
            surfaces.append({"vertices": rect(xc - 0.15, xc + 0.15, yc - 0.15, yc + 0.15, heights[k] + dz)})
    surfaces.append({"vertices": rect(0.65 + 0.36 * 9 - 0.15, 0.65 + 0.36 * 9 + 1.5, -0.6, 0.6, 0.0)})
    return {
        "name": "stepping_stones",
        "surfaces": surfaces,
        "start": _start(),
        "commands": [{"t": 0.0, "vx": 0.1, "vy": 0.0, "yaw_rate": 0.0}],
        "gait": "walk",
    }


def updown() -> dict:
    """Climb the staircase, then turn around on a wide landing to come back down."""
    surfaces = staircase(platform=2.0, width=1.6)
    return {
        "name": "updown",
        "surfaces": surfaces,
        "start": _start(),
        "commands": [
            {"t": 0.0, "vx": 0.1, "vy": 0.0, "yaw_rate": 0.0},
            {"t": 36.0, "vx": 0.0, "vy": 0.0, "yaw_rate": 0.2},
            {"t": 36.0 + np.pi / 0.2, "vx": 0.1, "vy": 0.0, "yaw_rate": 0.0},
        ],
        "gait": "walk",
    }


BUNDLED = {
    "flat": flat,
    "staircase7": staircase7,
    "staircase_gap": staircase_gap,
    "stepping_stones": stepping_stones,
    "updown": updown,
}


def write_bundled(directory: Path = DATA_DIR) -> list[Path]:
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for name, build in BUNDLED.items():
        path = directory / f"{name}.json"
        path.write_text(json.dumps(build(), indent=1) + "\n")
        paths.append(path)
    return paths


def bundled_path(name: str) -> Path:
    return DATA_DIR / f"{name}.json"
