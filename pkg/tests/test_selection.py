import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from contactplan.errors import Infeasible, NoReachableSurface
from contactplan.robot import FEET, GaitPattern, KinematicBox, RobotState
from contactplan.scenarios import staircase
from contactplan.selection import (
    extrapolate_configs,
    plan_surfaces,
    preselect_surfaces,
    rom_footprint,
    stance_phases,
    twist_displacement,
)
from contactplan.solvers import enumerate_miqp
from contactplan.terrain import RawSurface, Terrain

from oracles import integrate_twist, support_distance
from scenes import box, random_stones, start_state, stones_terrain

WALK = GaitPattern.walk()


def _flat(size=6.0, z=0.0):
    return Terrain.from_raw([box(-size / 2, size / 2, -size / 2, size / 2, z)])


def _translate(raw, dx, dy):
    return [RawSurface(r.vertices + [dx, dy, 0.0]) for r in raw]


# ---- gait bookkeeping ---------------------------------------------------------------------


def test_gait_defaults():
    trot = GaitPattern.trot()
    assert (WALK.horizon, WALK.step_duration) == (8, 0.6)
    assert (trot.horizon, trot.step_duration) == (6, 0.3)
    assert all(len(WALK.swing_feet(k)) == 1 for k in range(4))
    assert all(len(trot.swing_feet(k)) == 2 for k in range(2))
    assert WALK.n_phases == 8 and trot.n_phases == 3
    assert WALK.stance_time(0) == pytest.approx(1.8)
    assert trot.stance_time(0) == pytest.approx(0.3)
    with pytest.raises(ValueError):
        GaitPattern.named("gallop")


def test_stance_phases_clipped_to_horizon():
    # walk order LH, LF, RH, RF: LH lands at the end of phase 0 and swings again in phase 4
    assert list(stance_phases(WALK, 0, 0, 2, 8)) == [0, 1, 2, 3]
    assert list(stance_phases(WALK, 0, 6, 3, 8)) == [6, 7]


# ---- extrapolation ------------------------------------------------------------------------


def test_extrapolate_standing_still():
    s = start_state(0.3, -0.2, 0.4, z=0.1)
    cfgs = extrapolate_configs(s, (0.0, 0.0), 0.0, WALK, _flat(z=0.1))
    for c in cfgs:
        assert np.allclose(c.pose, [0.3, -0.2, 0.58, 0.0, 0.0, 0.4], atol=1e-12)


def test_extrapolate_straight_line():
    cfgs = extrapolate_configs(start_state(), (0.1, 0.0), 0.0, WALK, _flat())
    xs = [c.pose[0] for c in cfgs]
    assert np.allclose(xs, 0.06 * np.arange(1, 9), atol=1e-12)
    assert np.allclose([c.t for c in cfgs], 0.6 * np.arange(1, 9))


def test_extrapolate_turning_matches_integration():
    s = start_state()
    cfgs = extrapolate_configs(s, (0.1, 0.0), 0.5, WALK, _flat())
    for c in cfgs:
        ref = integrate_twist((0.1, 0.0), 0.0, 0.5, c.t)
        assert np.allclose(c.pose[:2], ref, atol=1e-6)
        assert c.pose[5] == pytest.approx(0.5 * c.t)
    assert np.allclose(cfgs[-1].pose[:2], [0.13509264, 0.34747874], atol=1e-6)


@settings(max_examples=40, deadline=None)
@given(st.floats(-0.3, 0.3), st.floats(-0.3, 0.3), st.floats(-np.pi, np.pi), st.floats(-1.0, 1.0),
       st.floats(0.1, 3.0))
def test_twist_displacement_matches_integration(vx, vy, yaw0, rate, t):
    ref = integrate_twist((vx, vy), yaw0, rate, t, dt=1e-3)
    assert np.allclose(twist_displacement((vx, vy), yaw0, rate, t), ref, atol=1e-9)


def test_twist_small_rate_series_is_continuous():
    a = twist_displacement((0.1, 0.02), 0.3, 0.99e-6, 2.0)
    b = twist_displacement((0.1, 0.02), 0.3, 1.01e-6, 2.0)
    assert np.allclose(a, b, atol=1e-12)


def test_extrapolate_on_ramp_tilts_along_heading():
    ramp = Terrain.from_raw([RawSurface(np.array([[-3, -3, -0.6], [3, -3, 0.6], [3, 3, 0.6], [-3, 3, -0.6]]))])
    ahead = extrapolate_configs(start_state(), (0.0, 0.0), 0.0, WALK, ramp)[0]
    assert ahead.pose[4] == pytest.approx(-np.arctan(0.2), abs=1e-9)
    assert ahead.pose[3] == pytest.approx(0.0, abs=1e-9)
    sideways = extrapolate_configs(start_state(yaw=np.pi / 2), (0.0, 0.0), 0.0, WALK, ramp)[0]
    # the slope now runs to the robot's right, so it rolls instead of pitching
    assert sideways.pose[3] == pytest.approx(np.arctan(-0.2), abs=1e-9)
    assert sideways.pose[4] == pytest.approx(0.0, abs=1e-9)


# ---- preselection ---------------------------------------------------------------------------


def test_preselect_single_ground():
    terr = _flat()
    cfgs = extrapolate_configs(start_state(), (0.1, 0.0), 0.0, WALK, terr)
    cands = preselect_surfaces(cfgs, WALK, KinematicBox(), terr.surfaces)
    assert len(cands) == 8
    assert all([s.id for s in c] == [terr.surfaces[0].id] for _, _, c in cands)


def test_preselect_excludes_surface_one_cm_beyond_rom():
    s = start_state()
    cfgs = extrapolate_configs(s, (0.0, 0.0), 0.0, WALK, _flat())
    fp = rom_footprint(cfgs[0], 2, KinematicBox())
    x_edge = fp[:, 0].max()
    near = Terrain.from_raw([box(x_edge + 0.01 - 0.04, x_edge + 0.5, -1.0, 1.0)], )
    far = near.surfaces[0]
    assert far.polygon[:, 0].min() == pytest.approx(x_edge + 0.01)
    assert support_distance(far.polygon, fp) == pytest.approx(0.01, abs=1e-6)
    with pytest.raises(NoReachableSurface) as err:
        preselect_surfaces(cfgs[:1], GaitPattern.walk(horizon=1), KinematicBox(), [far])
    assert (err.value.phase, err.value.foot) == (0, 2)


def test_preselect_agrees_with_support_distance():
    rng = np.random.default_rng(8)
    terr = stones_terrain(rng, pitch=0.32, size=(0.26, 0.32))
    s = start_state(0.4)
    cfgs = extrapolate_configs(s, (0.1, 0.0), 0.0, WALK, terr)
    for j, foot, cands in preselect_surfaces(cfgs, WALK, KinematicBox(), terr.surfaces):
        fp = rom_footprint(cfgs[j], foot, KinematicBox())
        ids = {c.id for c in cands}
        for surf in terr.surfaces:
            d = support_distance(surf.polygon, fp)
            if d > 1e-6:
                assert surf.id not in ids
            elif surf.id not in ids:
                assert d < 1e-3   # touching within the oracle's angular resolution


# ---- planning -------------------------------------------------------------------------------


def _check_plan(plan, terr):
    groups = {(c.phase, c.foot) for c in plan.contacts}
    assert len(groups) == len(plan.contacts)      # exactly one surface per contact
    for c in plan.contacts:
        assert c.surface_id in c.candidates
        assert terr.surface(c.surface_id).contains(c.position, tol=1e-8)


def test_plan_flat_forward():
    terr = _flat()
    plan = plan_surfaces(start_state(), (0.1, 0.0), 0.0, WALK, terr)
    _check_plan(plan, terr)
    assert {c.surface_id for c in plan.contacts} == {terr.surfaces[0].id}
    for foot in range(4):
        xs = [c.position[0] for c in plan.contacts if c.foot == foot]
        assert len(xs) == 2
        assert xs[1] - xs[0] == pytest.approx(0.24, abs=1e-6)   # one gait period at 0.1 m/s


def test_plan_stepping_stones_matches_enumeration():
    # the near stone is reachable when LF lands but falls behind its box before LF lifts off again
    raw = [box(-1.0, 0.38, -0.6, 0.6), box(0.40, 0.64, 0.05, 0.45), box(0.66, 0.96, 0.05, 0.45),
           box(0.40, 0.96, -0.45, -0.05), box(0.98, 2.0, -0.6, 0.6)]
    terr = Terrain.from_raw(raw)
    s = start_state()
    plan = plan_surfaces(s, (0.2, 0.0), 0.0, WALK, terr, time_limit=None)
    ref = plan_surfaces(s, (0.2, 0.0), 0.0, WALK, terr, solver=enumerate_miqp)
    assert plan.objective == pytest.approx(ref.objective, abs=1e-6)
    assert [c.surface_id for c in plan.contacts] == [c.surface_id for c in ref.contacts]
    _check_plan(plan, terr)
    lf = next(c for c in plan.contacts if c.foot == 0)
    assert sorted(terr.surface(i).source for i in lf.candidates) == [0, 1, 2]
    assert terr.surface(lf.surface_id).source == 2


def test_plan_staircase_monotone():
    raw = [RawSurface(np.asarray(d["vertices"], dtype=float)) for d in staircase()]
    terr = Terrain.from_raw(raw)
    s = RobotState.standing(0.5, 0.0, 0.0, lambda x, y: 0.0)
    plan = plan_surfaces(s, (0.1, 0.0), 0.0, WALK, terr)
    _check_plan(plan, terr)
    for foot in range(4):
        heights = [terr.surface(c.surface_id).mean_height for c in plan.contacts if c.foot == foot]
        assert heights == sorted(heights), FEET[foot]
    assert max(terr.surface(c.surface_id).mean_height for c in plan.contacts) > 0.0


def test_plan_infeasible_when_box_too_small():
    raw = [box(-1.0, 0.4, -0.6, 0.6), box(1.3, 2.0, -0.6, 0.6)]
    terr = Terrain.from_raw(raw)
    with pytest.raises(Infeasible):
        plan_surfaces(start_state(0.2), (0.1, 0.0), 0.0, WALK, terr)


def test_plan_to_dict_schema():
    plan = plan_surfaces(start_state(), (0.1, 0.0), 0.0, WALK, _flat())
    d = plan.to_dict()
    assert set(d["contacts"][0]) >= {"phase", "foot", "surface_id", "position"}
    assert d["contacts"][0]["foot"] in FEET


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2 ** 31), st.floats(0.2, 1.2))
def test_plan_invariants_random_stones(seed, x0):
    rng = np.random.default_rng(seed)
    terr = stones_terrain(rng, pitch=0.32, size=(0.26, 0.32))
    s = start_state(x0)
    gait = GaitPattern.walk(horizon=5)
    try:
        plan = plan_surfaces(s, (0.1, 0.0), 0.0, gait, terr, time_limit=None)
    except Infeasible:
        with pytest.raises(Infeasible):
            plan_surfaces(s, (0.1, 0.0), 0.0, gait, terr, solver=enumerate_miqp)
        return
    _check_plan(plan, terr)
    ref = plan_surfaces(s, (0.1, 0.0), 0.0, gait, terr, solver=enumerate_miqp)
    assert plan.objective == pytest.approx(ref.objective, abs=1e-6)
    again = plan_surfaces(s, (0.1, 0.0), 0.0, gait, terr, time_limit=None)
    assert [c.surface_id for c in again.contacts] == [c.surface_id for c in plan.contacts]


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2 ** 31), st.floats(-3.0, 3.0), st.floats(-3.0, 3.0))
def test_plan_translation_equivariance(seed, dx, dy):
    rng = np.random.default_rng(seed)
    raw = random_stones(rng, pitch=0.32, size=(0.26, 0.32))
    gait = GaitPattern.walk(horizon=4)
    a_terr = Terrain.from_raw(raw)
    b_terr = Terrain.from_raw(_translate(raw, dx, dy))
    a_state = start_state(0.5)
    b_state = start_state(0.5 + dx, dy)
    try:
        a = plan_surfaces(a_state, (0.1, 0.0), 0.0, gait, a_terr, time_limit=None)
    except Infeasible:
        return
    b = plan_surfaces(b_state, (0.1, 0.0), 0.0, gait, b_terr, time_limit=None)
    assert [c.surface_id for c in a.contacts] == [c.surface_id for c in b.contacts]
    for ca, cb in zip(a.contacts, b.contacts):
        assert np.allclose(cb.position - ca.position, [dx, dy, 0.0], atol=1e-6)
