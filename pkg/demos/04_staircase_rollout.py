"""Walking up seven stairs at 0.1 m/s.

Surfaces are re-planned at every phase start. Between plans the footstep
target and the swing curve are refreshed at 50 Hz until 70% of each swing
has elapsed, while the base follows the commanded twist kinematically.
The trace is saved in three formats.
"""

import time

from contactplan import export
from contactplan.pipeline import PipelineConfig, load_scenario, rollout
from contactplan.robot import FEET

from _common import out_dir


def main():
    out = out_dir(__doc__.splitlines()[0])
    scene = load_scenario("staircase7")
    t0 = time.perf_counter()
    trace = rollout(scene, PipelineConfig(), 30.0)
    print(f"{trace.status} in {time.perf_counter() - t0:.1f} s wall time, {len(trace.ticks)} ticks, "
          f"{len(trace.plans)} plans, {len(trace.contacts)} footsteps")

    for foot in range(4):
        treads = [c.source for c in trace.contacts if c.foot == foot]
        print(f"  {FEET[foot]} treads: {treads}")
    worst = max(c.violation for c in trace.contacts)
    print(f"largest footstep violation of its surface: {worst:.1e} m")
    plan_ms = sorted(1e3 * r.timings["plan"] for r in trace.ticks if r.timings["plan"] > 0)
    print(f"plan time per phase: median {plan_ms[len(plan_ms) // 2]:.1f} ms, max {plan_ms[-1]:.1f} ms")

    for fmt in ("json", "csv", "svg"):
        export.export(trace, fmt, out / f"staircase7.{fmt}")
    print(f"wrote {out / 'staircase7.svg'}")


if __name__ == "__main__":
    main()
