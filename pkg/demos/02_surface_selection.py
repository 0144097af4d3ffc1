"""Choosing a surface for each of the next footsteps.

The robot stands on a platform in front of two rows of stepping stones.
Each upcoming footstep is narrowed to the surfaces its reachable box can
touch along the extrapolated base path, then a mixed-integer QP picks one
surface per step. Enumerating every assignment gives the same answer,
just slower.
"""

import time

from contactplan.pipeline import load_scenario
from contactplan.robot import FEET, GaitPattern
from contactplan.selection import plan_surfaces
from contactplan.solvers import enumerate_miqp


def main():
    scene = load_scenario("stepping_stones")
    terrain = scene.terrain()
    gait = GaitPattern.walk()
    print(f"{len(terrain.surfaces)} surfaces, walking gait, horizon {gait.horizon}")

    t0 = time.perf_counter()
    plan = plan_surfaces(scene.start, (0.1, 0.0), 0.0, gait, terrain)
    t_bb = time.perf_counter() - t0
    for c in plan.contacts:
        s = terrain.surface(c.surface_id)
        x, y, z = c.position
        print(f"  phase {c.phase}  {FEET[c.foot]}: surface {c.surface_id:2d} (raw {s.source:2d}) of "
              f"{len(c.candidates)} candidates at ({x:.3f}, {y:.3f}, {z:.3f})")
    print(f"branch and bound: objective {plan.objective:.6f} in {1e3 * t_bb:.1f} ms, "
          f"{plan.stats.get('nodes')} nodes")

    t0 = time.perf_counter()
    ref = plan_surfaces(scene.start, (0.1, 0.0), 0.0, gait, terrain, solver=enumerate_miqp)
    print(f"enumeration:      objective {ref.objective:.6f} in {1e3 * (time.perf_counter() - t0):.1f} ms")
    same = [c.surface_id for c in ref.contacts] == [c.surface_id for c in plan.contacts]
    print("same surfaces" if same else "different surfaces at equal cost")


if __name__ == "__main__":
    main()
