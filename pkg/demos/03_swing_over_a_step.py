"""Swing curves that clear a step.

The reference swing is a sextic per axis with a height bump at mid-swing.
With a low apex the reference dips into the step's outer volume; the
sampled points that fall inside are pushed back out through the step's
top face and a degree-7 Bezier curve is fitted under those half-spaces.
"""

import numpy as np

from contactplan import export
from contactplan.scenarios import staircase
from contactplan.swing import dense_penetration, plan_swing, reference_trajectory
from contactplan.terrain import RawSurface, Terrain

from _common import out_dir


def main():
    out = out_dir(__doc__.splitlines()[0])
    raw = [RawSurface(np.asarray(s["vertices"], dtype=float)) for s in staircase(n_treads=2)]
    step = next(o for o in Terrain.from_raw(raw).obstacles if o.id == 1)
    start, goal, T = np.array([0.40, 0.2, 0.0]), np.array([0.75, 0.2, 0.17]), 0.6

    curves = []
    for apex in (-0.1, 0.0, 0.05, 0.15):
        ref = reference_trajectory(start, goal, T, apex)
        sp = plan_swing(start, goal, T, [step], apex=apex)
        dip = dense_penetration(ref.to_bezier(), [step], 201)
        clearance = float(np.min(sp.constraints.slack(sp.curve))) if len(sp.constraints) else float("nan")
        print(f"apex {apex:+.2f} m: reference {100 * dip:4.1f} cm inside the step, "
              f"{len(sp.constraints):3d} half-space rows on {sp.stats['n_samples']} samples, "
              f"min slack {clearance:.1e}, curve depth {1e3 * sp.stats['penetration']:.2f} mm")
        curves.append(sp.curve)

    (out / "swing_over_step.svg").write_text(export.curves_svg(curves, [step]))
    print(f"wrote {out / 'swing_over_step.svg'}")


if __name__ == "__main__":
    main()
