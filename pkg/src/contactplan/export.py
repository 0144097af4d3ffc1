"""Trace and surface export; the trace drawing puts a top view above a side view of the swings."""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import Sequence

import numpy as np

from .robot import FEET
from .swing import BezierCurve

FOOT_COLORS = {"LF": "#d62728", "RF": "#1f77b4", "LH": "#ff7f0e", "RH": "#2ca02c"}

CSV_FIELDS = ["t", "phase", "plan_id", "vx", "vy", "yaw_rate", "x", "y", "z", "roll", "pitch", "yaw",
              "fx", "fy", "fz", "froll", "fpitch", "fyaw", "swing_feet", "t_plan", "t_footstep", "t_swing",
              "t_total"]


def _write(path, text: str):
    Path(path).write_text(text)


def trace_json(trace) -> str:
    return json.dumps(trace.to_dict(), indent=1)


def trace_csv(trace) -> str:
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(CSV_FIELDS)
    for r in trace.ticks:
        tm = r.timings
        w.writerow([r.t, r.phase, r.plan_id, *r.command, *r.pose, *r.filtered_pose,
                    " ".join(sorted(r.targets)), tm.get("plan", 0.0), tm.get("footstep", 0.0),
                    tm.get("swing", 0.0), tm.get("total", 0.0)])
    return buf.getvalue()


class _Canvas:
    """Maps a world box onto a pixel box with y pointing up."""

    def __init__(self, lo, hi, x0, y0, width, height, pad=0.1):
        lo, hi = np.asarray(lo, float), np.asarray(hi, float)
        span = np.maximum(hi - lo, 1e-6)
        lo, hi = lo - pad * span, hi + pad * span
        self.scale = min(width / (hi[0] - lo[0]), height / (hi[1] - lo[1]))
        self.lo, self.x0, self.y0, self.height = lo, x0, y0, height

    def __call__(self, p):
        return (self.x0 + (p[0] - self.lo[0]) * self.scale,
                self.y0 + self.height - (p[1] - self.lo[1]) * self.scale)

    def points(self, pts) -> str:
        return " ".join("{:.2f},{:.2f}".format(*self(p)) for p in pts)


def _surface_bounds(surfaces, extra=()):
    pts = [np.asarray(s["vertices"])[:, :2] for s in surfaces] + [np.atleast_2d(e) for e in extra if len(e)]
    if not pts:
        return np.zeros(2), np.ones(2)
    allp = np.vstack(pts)
    return allp.min(axis=0), allp.max(axis=0)


def surfaces_svg(surfaces: Sequence[dict], obstacles: Sequence[dict] = (), width: int = 800, height: int = 500) -> str:
    lo, hi = _surface_bounds(list(surfaces) + list(obstacles))
    cv = _Canvas(lo, hi, 10, 10, width - 20, height - 20)
    zs = [np.mean(np.asarray(s["vertices"])[:, 2]) for s in surfaces] or [0.0]
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
           '<rect width="100%" height="100%" fill="white"/>']
    for o in obstacles:
        out.append(f'<polygon class="obstacle" points="{cv.points(np.asarray(o["vertices"])[:, :2])}" '
                   'fill="none" stroke="#999" stroke-dasharray="4 3"/>')
    for s, z in zip(surfaces, zs):
        shade = int(200 - 120 * (z - min(zs)) / max(max(zs) - min(zs), 1e-9))
        out.append(f'<polygon class="surface" points="{cv.points(np.asarray(s["vertices"])[:, :2])}" '
                   f'fill="rgb({shade},{shade},{shade + 30})" stroke="#333" stroke-width="0.8"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def trace_svg(trace, width: int = 900, height: int = 700) -> str:
    """Top view (surfaces, footholds, base path) above a side view of the swing profiles."""
    top_h = int(height * 0.62)
    base = np.array([r.pose[:2] for r in trace.ticks]) if trace.ticks else np.zeros((0, 2))
    feet = np.array([c.position[:2] for c in trace.contacts]) if trace.contacts else np.zeros((0, 2))
    lo, hi = _surface_bounds(trace.surfaces, [base, feet])
    top = _Canvas(lo, hi, 10, 10, width - 20, top_h - 20)
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
           '<rect width="100%" height="100%" fill="white"/>',
           f'<text x="12" y="22" font-size="13" font-family="sans-serif">{trace.scenario}: {trace.status}</text>']
    zs = [np.mean(np.asarray(s["vertices"])[:, 2]) for s in trace.surfaces] or [0.0]
    for s, z in zip(trace.surfaces, zs):
        shade = int(215 - 120 * (z - min(zs)) / max(max(zs) - min(zs), 1e-9))
        out.append(f'<polygon class="surface" points="{top.points(np.asarray(s["vertices"])[:, :2])}" '
                   f'fill="rgb({shade},{shade},{shade + 25})" stroke="#444" stroke-width="0.8"/>')
    if len(base):
        out.append(f'<polyline class="base" points="{top.points(base)}" fill="none" stroke="black" stroke-width="1.5"/>')
    for c in trace.contacts:
        x, y = top(c.position)
        out.append(f'<circle class="foothold" cx="{x:.2f}" cy="{y:.2f}" r="3" fill="{FOOT_COLORS[FEET[c.foot]]}"/>')

    # side view: x (or arc length) against z for the final curve of every swing
    curves = _final_curves(trace)
    if curves:
        samples = [(foot, c(np.linspace(0.0, c.T, 40))) for foot, c in curves]
        allp = np.vstack([p[:, [0, 2]] for _, p in samples])
        side = _Canvas(allp.min(axis=0), allp.max(axis=0), 10, top_h + 10, width - 20, height - top_h - 20, pad=0.05)
        for foot, p in samples:
            out.append(f'<polyline class="swing" points="{side.points(p[:, [0, 2]])}" fill="none" '
                       f'stroke="{FOOT_COLORS[foot]}" stroke-width="1"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _final_curves(trace) -> list[tuple[str, BezierCurve]]:
    """Last fitted curve of each swing (the one the foot actually flew along at the end)."""
    last: dict[tuple[int, str], dict] = {}
    for r in trace.ticks:
        for foot, c in r.curves.items():
            last[(r.phase, foot)] = c
    return [(foot, BezierCurve.from_dict(c)) for (_, foot), c in sorted(last.items())]


def export(trace, fmt: str, path) -> None:
    """Write ``trace`` as ``json``, ``csv`` or ``svg``; ``OSError`` on I/O failure."""
    writers = {"json": trace_json, "csv": trace_csv, "svg": trace_svg}
    if fmt not in writers:
        raise ValueError(f"unknown export format {fmt!r}")
    _write(path, writers[fmt](trace))


def curves_svg(curves: Sequence[BezierCurve], obstacles: Sequence = (), width: int = 700, height: int = 400) -> str:
    """Side view (x against z) of a family of swing curves over the obstacles' outer contours."""
    samples = [c(np.linspace(0.0, c.T, 80))[:, [0, 2]] for c in curves]
    boxes = []
    for o in obstacles:
        xs = o.polygon[:, 0]
        z = float(o.plane.height(xs.mean(), o.polygon[:, 1].mean()))
        boxes.append((xs.min(), xs.max(), z))
    pts = np.vstack(samples + [np.array([[b[0], b[2]], [b[1], b[2]]]) for b in boxes]) if samples else np.zeros((1, 2))
    cv = _Canvas(pts.min(axis=0), pts.max(axis=0), 10, 10, width - 20, height - 20, pad=0.05)
    zmin = pts[:, 1].min()
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
           '<rect width="100%" height="100%" fill="white"/>']
    for x0, x1, z in boxes:
        out.append(f'<polygon class="obstacle" points="{cv.points([[x0, zmin], [x1, zmin], [x1, z], [x0, z]])}" '
                   'fill="#ddd" stroke="#666"/>')
    palette = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]
    for i, p in enumerate(samples):
        out.append(f'<polyline class="swing" points="{cv.points(p)}" fill="none" '
                   f'stroke="{palette[i % len(palette)]}" stroke-width="1.5"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


__all__ = ["trace_json", "trace_csv", "trace_svg", "surfaces_svg", "curves_svg", "export", "CSV_FIELDS"]
