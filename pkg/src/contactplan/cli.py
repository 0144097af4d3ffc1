"""Command-line entry points: segment, plan, rollout, bench and swing."""

from __future__ import annotations

import argparse
import json
import logging
import statistics
import sys
import time
from pathlib import Path

import numpy as np

from . import export as ex
from .errors import Infeasible, ParseError, PlanningError, Timeout, ValidationError
from .pipeline import EXIT_CODES, PipelineConfig, load_scenario, parse_scenario, rollout
from .robot import KinematicBox
from .scenarios import BUNDLED
from .selection import plan_surfaces
from .swing import plan_swing
from .terrain import ProcessingConfig, RawSurface, Terrain, process_surfaces_report

log = logging.getLogger("contactplan")


def _vec2(text: str) -> tuple[float, float]:
    parts = [float(v) for v in text.split(",")]
    if len(parts) != 2:
        raise argparse.ArgumentTypeError("expected two comma-separated numbers")
    return parts[0], parts[1]


def _box(args) -> KinematicBox:
    if args.box_x is None:
        return KinematicBox()
    return KinematicBox.symmetric_x(args.box_x)


def _config(args, **kw) -> PipelineConfig:
    return PipelineConfig(gait=args.gait, horizon=getattr(args, "horizon", None), box=_box(args),
                          inner_margin=args.margin, outer_margin=args.outer, min_area=args.min_area, **kw)


def cmd_segment(args) -> int:
    data = json.loads(Path(args.input).read_text())
    scene = parse_scenario(data)
    cfg = ProcessingConfig(args.margin, args.outer, args.min_area)
    report = process_surfaces_report(scene.raw, cfg)
    out = {"surfaces": [s.to_dict() for s in report.surfaces],
           "obstacles": [o.to_dict() for o in report.obstacles],
           "dropped": [{"source": s, "area": a} for s, a in report.dropped]}
    Path(args.out).write_text(json.dumps(out, indent=1) + "\n")
    if args.svg:
        Path(args.svg).write_text(ex.surfaces_svg(out["surfaces"], out["obstacles"]))
    print(f"{len(report.surfaces)} surfaces, {len(report.obstacles)} obstacles -> {args.out}")
    return 0


def cmd_plan(args) -> int:
    scene = load_scenario(args.scenario)
    config = _config(args, time_limit=args.time_limit)
    terrain = scene.terrain(config)
    gait = config.gait_pattern()
    vel = args.vel if args.vel is not None else tuple(scene.command_at(0.0).v)
    yaw_rate = args.yaw_rate if args.yaw_rate is not None else scene.command_at(0.0).yaw_rate
    plan = plan_surfaces(scene.start, vel, yaw_rate, gait, terrain, config.box, config.costs,
                         time_limit=config.time_limit)
    out = {"scenario": scene.name, "gait": gait.name, "horizon": gait.horizon, **plan.to_dict()}
    text = json.dumps(out, indent=1) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_rollout(args) -> int:
    scene = load_scenario(args.scenario)
    config = _config(args, async_planning=args.async_planning)
    trace = rollout(scene, config, args.duration)
    if args.out:
        ex.export(trace, "json", args.out)
    if args.csv:
        ex.export(trace, "csv", args.csv)
    if args.svg:
        ex.export(trace, "svg", args.svg)
    print(f"{scene.name}: {trace.status} after {len(trace.ticks) * config.dt:.2f} s, "
          f"{len(trace.contacts)} contacts {trace.message}".rstrip())
    return trace.exit_code


def _stats(xs: list[float]) -> str:
    if not xs:
        return "      -        -"
    return f"{1e3 * statistics.median(xs):7.2f}  {1e3 * max(xs):7.2f}"


def cmd_bench(args) -> int:
    """Per-stage timings in the style of a planner budget table (median / max, ms)."""
    if args.suite != "table2":
        raise SystemExit(f"unknown suite {args.suite!r}")
    rows = []
    for name, gait in (("staircase7", "walk"), ("stepping_stones", "walk"), ("flat", "trot")):
        scene = parse_scenario(BUNDLED[name]())
        config = PipelineConfig(gait=gait)
        terrain = scene.terrain(config)
        g = config.gait_pattern()
        mip = []
        for _ in range(args.repeat):
            t0 = time.perf_counter()
            plan_surfaces(scene.start, scene.command_at(0).v, 0.0, g, terrain, config.box)
            mip.append(time.perf_counter() - t0)
        trace = rollout(scene, config, args.duration)
        foot = [r.timings["footstep"] for r in trace.ticks if r.timings["footstep"] > 0]
        swing = [r.timings["swing"] for r in trace.ticks if r.timings["swing"] > 0]
        plans = [r.timings["plan"] for r in trace.ticks if r.timings["plan"] > 0]
        rows.append((f"{name} ({gait})", mip, plans, foot, swing, trace.status))
    print(f"{'scenario':28s} {'MIP med/max':>16s} {'replan med/max':>16s} {'footstep':>16s} {'swing':>16s}  status")
    for name, mip, plans, foot, swing, status in rows:
        print(f"{name:28s} {_stats(mip):>16s} {_stats(plans):>16s} {_stats(foot):>16s} {_stats(swing):>16s}  {status}")
    return 0


def cmd_swing(args) -> int:
    if not args.demo:
        raise SystemExit("only --demo is available")
    from .scenarios import staircase
    raw = [RawSurface(np.asarray(s["vertices"], dtype=float)) for s in staircase(n_treads=2)]
    terrain = Terrain.from_raw(raw)
    start, goal = np.array([0.40, 0.2, 0.0]), np.array([0.75, 0.2, 0.17])
    curves = []
    for apex in args.apex:
        sp = plan_swing(start, goal, args.duration, terrain.obstacles, apex=apex)
        curves.append(sp.curve)
        print(f"apex {apex:.2f} m: {len(sp.constraints)} active half-space rows, retried={sp.retried}")
    Path(args.out).write_text(ex.curves_svg(curves, [o for o in terrain.obstacles if o.id == 1]))
    print(f"wrote {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="contactplan", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def terrain_opts(sp):
        sp.add_argument("--margin", type=float, default=0.04, help="inner safety margin (m)")
        sp.add_argument("--outer", type=float, default=0.04, help="outer obstacle margin (m)")
        sp.add_argument("--min-area", type=float, default=0.03, help="smallest kept surface (m^2)")

    def robot_opts(sp):
        sp.add_argument("--scenario", required=True, help="scenario JSON or bundled name")
        sp.add_argument("--gait", default="walk", choices=["walk", "trot"])
        sp.add_argument("--box-x", type=float, default=None, help="half-width of the reachable box along x (m)")
        terrain_opts(sp)

    sp = sub.add_parser("segment", help="raw polygons -> convex contact surfaces")
    sp.add_argument("--in", dest="input", required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--svg")
    terrain_opts(sp)
    sp.set_defaults(func=cmd_segment)

    sp = sub.add_parser("plan", help="one surface-selection solve")
    robot_opts(sp)
    sp.add_argument("--horizon", type=int, default=None)
    sp.add_argument("--vel", type=_vec2, default=None, help="vx,vy in the body frame (m/s)")
    sp.add_argument("--yaw-rate", type=float, default=None)
    sp.add_argument("--time-limit", type=float, default=0.25)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_plan)

    sp = sub.add_parser("rollout", help="kinematic closed-loop run")
    robot_opts(sp)
    sp.add_argument("--duration", type=float, default=30.0)
    sp.add_argument("--out")
    sp.add_argument("--csv")
    sp.add_argument("--svg")
    sp.add_argument("--async", dest="async_planning", action="store_true", help="plan one phase ahead in a thread")
    sp.set_defaults(func=cmd_rollout)

    sp = sub.add_parser("bench", help="stage timings on the bundled scenarios")
    sp.add_argument("--suite", default="table2")
    sp.add_argument("--repeat", type=int, default=50)
    sp.add_argument("--duration", type=float, default=12.0)
    sp.set_defaults(func=cmd_bench)

    sp = sub.add_parser("swing", help="swing-curve demo")
    sp.add_argument("--demo", action="store_true")
    sp.add_argument("--apex", type=float, nargs="+", default=[-0.1, 0.0, 0.05, 0.15, 0.25])
    sp.add_argument("--duration", type=float, default=0.6)
    sp.add_argument("--out", default="swing_demo.svg")
    sp.set_defaults(func=cmd_swing)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ParseError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CODES["io"]
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CODES["io"]
    except Timeout as exc:
        print(f"timeout: {exc}", file=sys.stderr)
        return EXIT_CODES["timeout"]
    except (Infeasible, PlanningError) as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_CODES["infeasible"]


if __name__ == "__main__":
    sys.exit(main())
