"""Discrete-time locomotion loop: gait clock, plan triggering, footstep and swing refresh, kinematic base.

The whole-body controller is replaced by a base that tracks the commanded
twist exactly while riding ``h_ref`` above the locally fitted terrain plane.
"""

from __future__ import annotations

import json
import logging
import time
from concurrent.futures import Future, ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Callable

import numpy as np

from .errors import Infeasible, ParseError, PlanningError, Timeout, ValidationError
from .footstep import RaibertParams, optimize_footstep, raibert_target
from .robot import FEET, HIP_OFFSETS, GaitPattern, KinematicBox, RobotState, rotation
from .selection import SelectionCosts, SurfacePlan, config_at, plan_surfaces, twist_displacement
from .swing import BezierCurve, ReferenceTrajectory, plan_swing, reference_trajectory
from .terrain import HeightmapGrid, ProcessingConfig, RawSurface, Surface, Terrain, support_surfaces

log = logging.getLogger(__name__)

EXIT_CODES = {"completed": 0, "infeasible": 2, "timeout": 3, "io": 4}


@dataclass(frozen=True)
class PipelineConfig:
    control_rate: float = 50.0
    gait: str = "walk"
    horizon: int | None = None
    step_duration: float | None = None
    inner_margin: float = 0.04
    outer_margin: float = 0.04
    min_area: float = 0.03
    n_max: int = 8
    apex: float = 0.15
    big_m: float = 100.0
    box: KinematicBox = KinematicBox()
    hip_offsets: tuple = tuple(map(tuple, HIP_OFFSETS))
    swing_freeze: float = 0.7
    landing_offset: float = -0.01
    filter_window: float | None = None     # seconds; one gait period by default
    time_limit: float | None = 0.25
    n_samples: int = 11
    costs: SelectionCosts = SelectionCosts()
    plane_window: tuple[float, float] = (1.0, 0.6)
    safety_floor: bool = False
    async_planning: bool = False
    stage_budget: float | None = None      # seconds per stage before a warning record

    def __post_init__(self):
        if self.control_rate <= 0:
            raise ValueError("control rate must be positive")
        ticks = self.gait_pattern().step_duration * self.control_rate
        if abs(ticks - round(ticks)) > 1e-9 * max(1.0, ticks):
            raise ValueError("control period must divide the phase duration")
        if not 0.0 < self.swing_freeze <= 1.0:
            raise ValueError("swing freeze fraction must lie in (0, 1]")

    @property
    def dt(self) -> float:
        return 1.0 / self.control_rate

    def gait_pattern(self) -> GaitPattern:
        kw = {}
        if self.horizon is not None:
            kw["horizon"] = self.horizon
        if self.step_duration is not None:
            kw["step_duration"] = self.step_duration
        return GaitPattern.named(self.gait, **kw)

    @property
    def hips(self) -> np.ndarray:
        return np.asarray(self.hip_offsets, dtype=float)

    def processing(self, safety_floor=None) -> ProcessingConfig:
        return ProcessingConfig(self.inner_margin, self.outer_margin, self.min_area, self.n_max,
                                safety_floor=safety_floor)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["box"] = {"lower": list(self.box.lower), "upper": list(self.box.upper)}
        return d


@dataclass(frozen=True)
class Command:
    t: float
    vx: float = 0.0
    vy: float = 0.0
    yaw_rate: float = 0.0

    @property
    def v(self) -> np.ndarray:
        return np.array([self.vx, self.vy])


@dataclass(frozen=True)
class SceneEvent:
    t: float
    remove_surface: int


@dataclass
class Scene:
    raw: list[RawSurface]
    start: RobotState
    commands: list[Command] = field(default_factory=lambda: [Command(0.0)])
    heightmap: HeightmapGrid | None = None
    events: list[SceneEvent] = field(default_factory=list)
    name: str = "scene"
    gait: str | None = None
    presegmented: bool = False
    removed: frozenset = frozenset()

    def command_at(self, t: float) -> Command:
        cmd = self.commands[0]
        for c in self.commands:
            if c.t <= t + 1e-9:
                cmd = c
        return cmd

    def terrain(self, config: PipelineConfig = PipelineConfig(), floor=None) -> Terrain:
        raw = [r for i, r in enumerate(self.raw) if i not in self.removed]
        index = [i for i in range(len(self.raw)) if i not in self.removed]
        if self.presegmented:
            surfaces = [Surface.from_polygon(k, r.vertices[:, :2], r.plane, source=i)
                        for k, (i, r) in enumerate(zip(index, raw))]
            terr = Terrain(surfaces, [], support_surfaces(raw), self.heightmap,
                           float(self.start.feet[:, 2].mean()))
        else:
            terr = Terrain.from_raw(raw, config.processing(floor), self.heightmap,
                                    float(self.start.feet[:, 2].mean()))
        # report sources against the original scene indices
        terr.surfaces = [replace(s, source=index[s.source]) if s.source >= 0 else s for s in terr.surfaces]
        terr.obstacles = [replace(o, id=index[o.id]) for o in terr.obstacles]
        return terr

    def without(self, index: int) -> "Scene":
        return replace(self, removed=self.removed | {index})


def _field(d: dict, key: str, where: str, kind=None):
    if key not in d:
        raise ParseError(f"{where}: missing field {key!r}")
    val = d[key]
    if kind is not None and not isinstance(val, kind):
        raise ParseError(f"{where}: field {key!r} has type {type(val).__name__}")
    return val


def _points(value, where: str, dim: int) -> np.ndarray:
    try:
        arr = np.asarray(value, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"{where}: not a numeric array ({exc})") from None
    if arr.ndim != 2 or arr.shape[1] != dim:
        raise ParseError(f"{where}: expected points with {dim} coordinates, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ParseError(f"{where}: non-finite coordinate")
    return arr


def parse_scenario(data: dict, *, validate: bool = True) -> Scene:
    if not isinstance(data, dict):
        raise ParseError("scenario root must be an object")
    surfaces = _field(data, "surfaces", "scenario", list)
    raw = []
    for i, s in enumerate(surfaces):
        where = f"surfaces[{i}]"
        if not isinstance(s, dict):
            raise ParseError(f"{where}: expected an object")
        verts = _points(_field(s, "vertices", where), f"{where}.vertices", 3)
        if len(verts) < 3:
            raise ValidationError(f"{where}: fewer than 3 vertices")
        surf = RawSurface(verts)
        if validate:
            try:
                surf.validate()
            except ValueError as exc:
                raise ValidationError(f"{where}: {exc}") from None
        raw.append(surf)
    if not raw:
        raise ValidationError("scenario has no surfaces")

    heightmap = None
    if data.get("heightmap") is not None:
        hm = data["heightmap"]
        try:
            heightmap = HeightmapGrid.from_flat(hm["origin"], hm["resolution"], hm["dims"], hm["data"])
        except KeyError as exc:
            raise ParseError(f"heightmap: missing field {exc}") from None
        except ValueError as exc:
            raise ValidationError(f"heightmap: {exc}") from None

    start_d = data.get("start")
    if start_d is None:
        start = RobotState.standing(0.0, 0.0, 0.0, lambda x, y: 0.0)
    else:
        pose = np.asarray(_field(start_d, "pose", "start"), dtype=float)
        if pose.shape != (6,):
            raise ParseError("start.pose: expected 6 numbers (x, y, z, roll, pitch, yaw)")
        feet = _points(_field(start_d, "feet", "start"), "start.feet", 3)
        if len(feet) != 4:
            raise ParseError("start.feet: expected 4 feet")
        start = RobotState(pose, feet, h_ref=float(start_d.get("h_ref", 0.48)))

    commands = []
    for i, c in enumerate(data.get("commands", [{"t": 0.0}])):
        try:
            commands.append(Command(float(c["t"]), float(c.get("vx", 0.0)), float(c.get("vy", 0.0)),
                                    float(c.get("yaw_rate", 0.0))))
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"commands[{i}]: {exc}") from None
    commands.sort(key=lambda c: c.t)
    events = []
    for i, e in enumerate(data.get("events", [])):
        try:
            events.append(SceneEvent(float(e["t"]), int(e["remove_surface"])))
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"events[{i}]: {exc}") from None
    return Scene(raw, start, commands or [Command(0.0)], heightmap, events, str(data.get("name", "scene")),
                 data.get("gait"), bool(data.get("presegmented", False)))


def load_scenario(path) -> Scene:
    """Read a scenario file (or a bundled scenario name) into a validated ``Scene``."""
    from .scenarios import BUNDLED, bundled_path

    if isinstance(path, str) and path in BUNDLED and not Path(path).exists():
        path = bundled_path(path)
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise OSError(f"cannot read scenario {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    return parse_scenario(data)


def _mean_angle(a: np.ndarray) -> float:
    return float(np.arctan2(np.sin(a).mean(), np.cos(a).mean()))


def filter_base(history) -> np.ndarray:
    """Moving average of base poses; yaw uses the circular mean.

    A ramp comes out delayed by half the window, which the footstep
    predictor compensates for.
    """
    h = np.atleast_2d(np.asarray(history, dtype=float))
    if len(h) == 0:
        raise ValueError("empty pose history")
    out = h.mean(axis=0)
    out[5] = _mean_angle(h[:, 5])
    return out


@dataclass
class SwingState:
    foot: int
    surface: Surface
    t_lift: float
    T: float
    lift: np.ndarray                 # (3, 3): position, velocity, acceleration at lift-off
    target: np.ndarray
    curve: BezierCurve | None = None
    t_curve: float = 0.0             # time at which ``curve`` starts
    reference: ReferenceTrajectory | None = None
    frozen: bool = False

    def position(self, t: float, order: int = 0) -> np.ndarray:
        if self.curve is None:
            return self.lift[order] if order else self.lift[0]
        tau = min(max(t - self.t_curve, 0.0), self.curve.T)
        return self.curve(tau, order)


@dataclass
class TickRecord:
    t: float
    phase: int
    command: tuple[float, float, float]
    pose: list[float]
    filtered_pose: list[float]
    plan_id: int
    surfaces: list[int]
    targets: dict
    curves: dict
    feet: list[list[float]]
    timings: dict
    warnings: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class ContactEvent:
    t: float
    phase: int
    foot: int
    surface_id: int
    source: int
    position: list[float]
    violation: float

    def to_dict(self) -> dict:
        d = asdict(self)
        d["foot"] = FEET[self.foot]
        return d


@dataclass
class RolloutTrace:
    scenario: str
    config: dict
    ticks: list[TickRecord] = field(default_factory=list)
    plans: list[dict] = field(default_factory=list)
    contacts: list[ContactEvent] = field(default_factory=list)
    surfaces: list[dict] = field(default_factory=list)
    status: str = "completed"
    message: str = ""

    @property
    def exit_code(self) -> int:
        return EXIT_CODES.get(self.status, 1)

    def to_dict(self, timings: bool = True) -> dict:
        ticks = [t.to_dict() for t in self.ticks]
        plans = [dict(p) for p in self.plans]
        if not timings:
            for t in ticks:
                t.pop("timings")
            for p in plans:
                p.get("stats", {}).pop("solve_time", None)
        return {"scenario": self.scenario, "status": self.status, "message": self.message,
                "config": self.config, "surfaces": self.surfaces, "plans": plans,
                "contacts": [c.to_dict() for c in self.contacts], "ticks": ticks}


BaseMotion = Callable[[np.ndarray, Command, float, Terrain, float], np.ndarray]


def kinematic_base(pose: np.ndarray, cmd: Command, dt: float, terrain: Terrain, h_ref: float,
                   window=(1.0, 0.6)) -> np.ndarray:
    """Follow the commanded twist exactly and ride ``h_ref`` above the local terrain plane."""
    xy = pose[:2] + twist_displacement(cmd.v, pose[5], cmd.yaw_rate, dt)
    yaw = pose[5] + cmd.yaw_rate * dt
    cfg = config_at(xy, yaw, 0.0, terrain, h_ref, window)
    return cfg.pose


class Pipeline:
    """Stateful control loop; ``tick`` advances one control period."""

    def __init__(self, scene: Scene, config: PipelineConfig = PipelineConfig(),
                 base_motion: BaseMotion | None = None):
        gait_name = config.gait if scene.gait is None or config.gait != "walk" else scene.gait
        if gait_name != config.gait:
            config = replace(config, gait=gait_name)
        self.scene = scene
        self.config = config
        self.gait = config.gait_pattern()
        self.base_motion = base_motion or (lambda p, c, dt, terr, h: kinematic_base(p, c, dt, terr, h,
                                                                                   config.plane_window))
        self.dt = config.dt
        self.ticks_per_phase = int(round(self.gait.step_duration / self.dt))
        window = config.filter_window if config.filter_window is not None else self.gait.period
        self.window = max(1, int(round(window / self.dt)))
        self.state = RobotState(scene.start.pose.copy(), scene.start.feet.copy(), h_ref=scene.start.h_ref)
        self.k = 0
        self.phase = 0
        self.history: list[np.ndarray] = [self.state.pose.copy()]
        self.plan: SurfacePlan | None = None
        self.plan_id = -1
        self.swings: dict[int, SwingState] = {}
        self.pending_events = sorted(scene.events, key=lambda e: e.t)
        self.trace = RolloutTrace(scene.name, config.to_dict())
        self._executor = ThreadPoolExecutor(max_workers=1) if config.async_planning else None
        self._future: Future | None = None
        self.done = False
        self._rebuild_terrain()
        self.state.check_contacts(self.terrain.support or self.terrain.surfaces)

    # ---- scene -------------------------------------------------------------------------------
    def _rebuild_terrain(self):
        floor = None
        if self.config.safety_floor:
            x, y = self.state.pose[:2]
            z = float(self.state.feet[:, 2].min())
            floor = (np.array([[x - 0.5, y - 0.4], [x + 0.5, y - 0.4], [x + 0.5, y + 0.4], [x - 0.5, y + 0.4]]), z)
        self.terrain = self.scene.terrain(self.config, floor)
        self.trace.surfaces = [s.to_dict() for s in self.terrain.surfaces]

    def _apply_events(self, t: float):
        changed = False
        while self.pending_events and self.pending_events[0].t <= t + 1e-9:
            ev = self.pending_events.pop(0)
            self.scene = self.scene.without(ev.remove_surface)
            changed = True
            log.info("t=%.2f: surface %d removed from the scene", t, ev.remove_surface)
        if changed:
            self._rebuild_terrain()

    # ---- planning ----------------------------------------------------------------------------
    def _plan(self, state: RobotState, cmd: Command, first_phase: int) -> SurfacePlan:
        c = self.config
        return plan_surfaces(state, cmd.v, cmd.yaw_rate, self.gait, self.terrain, c.box, c.costs,
                             first_phase=first_phase, hip_offsets=c.hips, big_m=c.big_m,
                             time_limit=c.time_limit, window=c.plane_window)

    def _predicted_state(self, cmd: Command) -> RobotState:
        """State at the next phase boundary, assuming the current swings land where planned."""
        pose = self.state.pose.copy()
        for _ in range(self.ticks_per_phase):
            pose = self.base_motion(pose, cmd, self.dt, self.terrain, self.state.h_ref)
        feet = self.state.feet.copy()
        for f, sw in self.swings.items():
            feet[f] = sw.target
        return RobotState(pose, feet, h_ref=self.state.h_ref)

    def _start_phase(self, t: float, cmd: Command, rec_warnings: list) -> float:
        t0 = time.perf_counter()
        if self._executor is not None and self._future is not None:
            plan = self._future.result()
        else:
            plan = self._plan(self.state, cmd, self.phase)
        if plan.status != "optimal":
            rec_warnings.append("surface selection hit its time limit; using the incumbent")
        self.plan = plan
        self.plan_id += 1
        self.trace.plans.append({"id": self.plan_id, "t": t, "phase": self.phase, **plan.to_dict()})
        for foot in self.gait.swing_feet(self.phase):
            sid = plan.surface_for(0, foot)
            contact = next(cc for cc in plan.contacts if cc.phase == 0 and cc.foot == foot)
            surf = self.terrain.surface(sid)
            lift = np.zeros((3, 3))
            lift[0] = self.state.feet[foot]
            self.swings[foot] = SwingState(foot, surf, t, self.gait.step_duration, lift,
                                           contact.position.copy())
            self.state.contacts = self.state.contacts - {foot}
        if self._executor is not None:
            self._future = self._executor.submit(self._plan, self._predicted_state(cmd), cmd, self.phase + 1)
        return time.perf_counter() - t0

    # ---- control-rate updates ----------------------------------------------------------------
    def _hip_at_touchdown(self, sw: SwingState, t: float, cmd: Command):
        hist = self.history[-self.window:]
        filtered = filter_base(hist)
        delay = 0.5 * (len(hist) - 1) * self.dt
        horizon = delay + max(sw.t_lift + sw.T - t, 0.0)
        xy = filtered[:2] + twist_displacement(cmd.v, filtered[5], cmd.yaw_rate, horizon)
        yaw = filtered[5] + cmd.yaw_rate * horizon
        cfg = config_at(xy, yaw, 0.0, self.terrain, self.state.h_ref, self.config.plane_window)
        hips = self.config.hips
        return cfg.pose[:3] + hips[sw.foot] @ cfg.R.T, cfg

    def _update_footstep(self, sw: SwingState, t: float, cmd: Command, warnings: list):
        hip, cfg = self._hip_at_touchdown(sw, t, cmd)
        v_world = rotation(0.0, 0.0, cfg.pose[5])[:2, :2] @ cmd.v
        params = RaibertParams(self.gait.stance_time(sw.foot), self.state.h_ref, 9.81, tuple(v_world), cmd.yaw_rate)
        target = raibert_target(hip, params)
        K, k = self.config.box.rows(hip, cfg.R)
        try:
            sw.target = optimize_footstep(target, sw.surface, (K, k))
        except Infeasible:
            try:
                sw.target = optimize_footstep(target, sw.surface)
                warnings.append(f"{FEET[sw.foot]}: footstep outside the kinematic box, re-plan requested")
            except Infeasible:
                warnings.append(f"{FEET[sw.foot]}: footstep projection failed, keeping previous target")

    def _update_swing(self, sw: SwingState, t: float, warnings: list):
        elapsed = t - sw.t_lift
        remaining = sw.T - elapsed
        if remaining < 0.5 * self.dt:
            return
        goal = sw.target + np.array([0.0, 0.0, self.config.landing_offset])
        full = reference_trajectory(sw.lift, goal, sw.T, self.config.apex)
        if sw.curve is None:
            start = sw.lift
            ref = full
        else:
            start = np.array([sw.position(t, 0), sw.position(t, 1), sw.position(t, 2)])
            ref = full.restrict(elapsed)
        try:
            plan = plan_swing(start, goal, remaining, self.terrain.obstacles, apex=self.config.apex,
                              n_samples=self.config.n_samples, reference=ref,
                              ignore_depth=abs(self.config.landing_offset) + 1e-3)
        except Infeasible:
            warnings.append(f"{FEET[sw.foot]}: swing fit infeasible after retry, keeping previous curve")
            return
        sw.curve, sw.t_curve, sw.reference = plan.curve, t, plan.reference
        if plan.retried:
            warnings.append(f"{FEET[sw.foot]}: swing apex raised to {plan.apex:.2f} m")

    def _land(self, sw: SwingState, t: float):
        end = sw.position(sw.t_lift + sw.T)
        p = np.array([end[0], end[1], float(sw.surface.plane.height(end[0], end[1]))])
        self.state.feet[sw.foot] = p
        self.state.contacts = self.state.contacts | {sw.foot}
        violation = float(max(np.max(sw.surface.S @ p - sw.surface.s), 0.0))
        self.trace.contacts.append(ContactEvent(t, self.phase, sw.foot, sw.surface.id, sw.surface.source,
                                                p.tolist(), violation))

    def tick(self) -> TickRecord:
        """Advance one control period and return its trace record."""
        if self.done:
            raise RuntimeError("rollout already terminated")
        t = self.k * self.dt
        warnings: list[str] = []
        timings = {"plan": 0.0, "footstep": 0.0, "swing": 0.0}
        t_start = time.perf_counter()
        self._apply_events(t)
        # elevation fallback: the last known ground height under the feet
        stance = sorted(self.state.contacts) or list(range(4))
        self.terrain.default_height = float(self.state.feet[stance, 2].mean())
        cmd = self.scene.command_at(t)
        if self.k % self.ticks_per_phase == 0:
            timings["plan"] = self._start_phase(t, cmd, warnings)

        for foot in sorted(self.swings):
            sw = self.swings[foot]
            if (t - sw.t_lift) / sw.T >= self.config.swing_freeze:
                sw.frozen = True
            if sw.frozen:
                continue
            t0 = time.perf_counter()
            self._update_footstep(sw, t, cmd, warnings)
            t1 = time.perf_counter()
            self._update_swing(sw, t, warnings)
            timings["footstep"] += t1 - t0
            timings["swing"] += time.perf_counter() - t1

        rec = TickRecord(
            t=t, phase=self.phase, command=(cmd.vx, cmd.vy, cmd.yaw_rate),
            pose=self.state.pose.tolist(), filtered_pose=filter_base(self.history[-self.window:]).tolist(),
            plan_id=self.plan_id, surfaces=[c.surface_id for c in self.plan.contacts] if self.plan else [],
            targets={FEET[f]: sw.target.tolist() for f, sw in self.swings.items()},
            curves={FEET[f]: sw.curve.to_dict() for f, sw in self.swings.items() if sw.curve is not None},
            feet=self.state.feet.tolist(), timings=timings, warnings=warnings,
        )

        # advance
        t_next = t + self.dt
        self.state.pose = self.base_motion(self.state.pose, cmd, self.dt, self.terrain, self.state.h_ref)
        self.history.append(self.state.pose.copy())
        del self.history[:-self.window]
        self.k += 1
        for foot in sorted(self.swings):
            self.state.feet[foot] = self.swings[foot].position(t_next)
        if self.k % self.ticks_per_phase == 0:
            for foot in sorted(self.swings):
                self._land(self.swings[foot], t_next)
            self.swings.clear()
            self.phase += 1
        timings["total"] = time.perf_counter() - t_start
        budget = self.config.stage_budget
        if budget is not None:
            for stage in ("plan", "footstep", "swing"):
                if timings[stage] > budget:
                    warnings.append(f"stage {stage} over budget: {timings[stage] * 1e3:.1f} ms")
        self.trace.ticks.append(rec)
        return rec

    def close(self):
        if self._executor is not None:
            self._executor.shutdown(wait=True)
            self._executor = None


def rollout(scene: Scene, config: PipelineConfig = PipelineConfig(), duration: float = 10.0,
            base_motion: BaseMotion | None = None) -> RolloutTrace:
    """Run the loop for ``duration`` seconds; planning failures end the trace with their status."""
    if duration <= 0:
        raise ValueError("duration must be positive")
    pipe = Pipeline(scene, config, base_motion)
    n = int(round(duration / pipe.dt))
    try:
        for _ in range(n):
            pipe.tick()
    except Timeout as exc:
        pipe.trace.status, pipe.trace.message = "timeout", str(exc)
    except Infeasible as exc:
        pipe.trace.status, pipe.trace.message = "infeasible", f"phase {pipe.phase}: {exc}"
    except PlanningError as exc:
        pipe.trace.status, pipe.trace.message = "infeasible", f"phase {pipe.phase}: {type(exc).__name__}: {exc}"
    finally:
        pipe.done = pipe.trace.status != "completed"
        pipe.close()
    return pipe.trace


__all__ = [
    "PipelineConfig", "Command", "SceneEvent", "Scene", "parse_scenario", "load_scenario", "filter_base",
    "SwingState", "TickRecord", "ContactEvent", "RolloutTrace", "kinematic_base", "Pipeline", "rollout",
    "EXIT_CODES",
]
