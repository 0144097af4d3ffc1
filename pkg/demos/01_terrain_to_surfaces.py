"""From raw terrain polygons to convex contact surfaces.

Two boxes sit on a patch of ground. Their outer contours (grown by the
outer margin) are cut out of the ground and the remaining ring is split
into convex pieces. Every piece is shrunk by the inner margin, so a foot
placed anywhere inside keeps its distance from the edge.
"""

import json

import numpy as np

from contactplan import export
from contactplan.terrain import ProcessingConfig, RawSurface, process_surfaces_report

from _common import out_dir


def square(x0, y0, side, z=0.0):
    return np.array([[x0, y0, z], [x0 + side, y0, z], [x0 + side, y0 + side, z], [x0, y0 + side, z]])


def main():
    out = out_dir(__doc__.splitlines()[0])
    raw = [RawSurface(square(-1.0, -1.0, 2.0)), RawSurface(square(-0.25, -0.25, 0.5, 0.2)),
           RawSurface(square(0.4, 0.35, 0.45, 0.1))]
    cfg = ProcessingConfig(inner_margin=0.04, outer_margin=0.04, min_area=0.03)
    rep = process_surfaces_report(raw, cfg)

    print(f"{len(raw)} raw polygons -> {len(rep.surfaces)} convex surfaces, {len(rep.obstacles)} obstacles")
    for s in rep.surfaces:
        print(f"  surface {s.id:2d} from raw {s.source}: {len(s.polygon)} vertices, "
              f"area {s.area:.3f} m^2, height {s.mean_height:.2f} m")
    for src, area in rep.dropped:
        print(f"  dropped a {area:.4f} m^2 sliver of raw {src} (below min area)")

    # the ground ring holds exactly the inner contour minus both holes
    ground = sum(s.area for s in rep.surfaces if s.source == 0)
    print(f"ground kept {ground:.4f} m^2 of {1.92 ** 2:.4f} m^2 inner contour")

    surfaces = [s.to_dict() for s in rep.surfaces]
    obstacles = [o.to_dict() for o in rep.obstacles]
    (out / "terrain_surfaces.json").write_text(json.dumps({"surfaces": surfaces, "obstacles": obstacles}, indent=1))
    (out / "terrain_surfaces.svg").write_text(export.surfaces_svg(surfaces, obstacles))
    print(f"wrote {out / 'terrain_surfaces.svg'}")


if __name__ == "__main__":
    main()
