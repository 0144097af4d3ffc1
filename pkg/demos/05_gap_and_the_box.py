"""How far the legs reach decides whether a missing stair can be crossed.

Tread 6 of the staircase is gone. The same rollout is repeated with the
kinematic box's forward/backward bound swept; small boxes find no
feasible surface assignment once the gap enters the horizon, large ones
step across. On the slope the base pitches, so the rearward reach shrinks
and the threshold sits above the bare gap length.
"""

from contactplan.pipeline import PipelineConfig, load_scenario, rollout
from contactplan.robot import KinematicBox


def main():
    scene = load_scenario("staircase_gap")
    for bound in (0.30, 0.35, 0.40, 0.45, 0.50):
        trace = rollout(scene, PipelineConfig(box=KinematicBox.symmetric_x(bound)), 30.0)
        print(f"x-bound {bound:.2f} m: {trace.status:10s} {trace.message}")


if __name__ == "__main__":
    main()
