"""Terrain polygons: post-processing into safe convex contact surfaces and elevation queries.

Raw polygons (e.g. from a plane-segmentation front end) are simplified to
at most ``n_max`` vertices, shrunk by an inner safety margin and grown by an
outer obstacle margin.  Processing from the lowest to the highest surface,
every higher outer contour overlapping a lower inner contour is cut out of
it and the remainder is split into convex pieces; pieces below
``min_area`` are dropped.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from shapely.geometry import LineString, Polygon
from shapely.ops import split, unary_union

from . import geometry as geo
from .errors import DegenerateFit, ValidationError

log = logging.getLogger(__name__)

MAX_SLOPE = np.tan(np.deg2rad(60.0))


@dataclass(frozen=True)
class PlaneCoeffs:
    """Plane ``z = a x + b y + c``."""

    a: float
    b: float
    c: float

    def __post_init__(self):
        if not np.all(np.isfinite([self.a, self.b, self.c])):
            raise ValueError("plane coefficients must be finite")

    def height(self, x, y):
        return self.a * np.asarray(x) + self.b * np.asarray(y) + self.c

    @property
    def normal(self) -> np.ndarray:
        n = np.array([-self.a, -self.b, 1.0])
        return n / np.linalg.norm(n)

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.a, self.b, self.c)


def plane_through(points: np.ndarray) -> PlaneCoeffs:
    pts = np.asarray(points, dtype=float)
    A = np.column_stack([pts[:, 0], pts[:, 1], np.ones(len(pts))])
    if np.linalg.matrix_rank(A) < 3:
        raise DegenerateFit("points are collinear")
    coef, *_ = np.linalg.lstsq(A, pts[:, 2], rcond=None)
    return PlaneCoeffs(*map(float, coef))


@dataclass(frozen=True)
class RawSurface:
    vertices: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 3:
            raise ValidationError(f"vertices must be (n, 3), got {v.shape}")
        if len(v) > 1 and np.allclose(v[0], v[-1]):
            v = v[:-1]
        object.__setattr__(self, "vertices", v)

    @property
    def plane(self) -> PlaneCoeffs:
        return plane_through(self.vertices)

    @property
    def mean_height(self) -> float:
        return float(self.vertices[:, 2].mean())

    def validate(self, plane_tol: float = 1e-6) -> None:
        v = self.vertices
        if len(v) < 3:
            raise ValidationError("a surface needs at least 3 vertices")
        try:
            plane = self.plane
        except DegenerateFit as exc:
            raise ValidationError(str(exc)) from exc
        n = np.array([-plane.a, -plane.b, 1.0])
        dist = np.abs(v @ n - plane.c) / np.linalg.norm(n)
        if dist.max() > plane_tol:
            raise ValidationError(f"vertices are {dist.max():.2e} m off their best-fit plane")
        if np.hypot(plane.a, plane.b) >= 1.0:
            raise ValidationError("surface is steeper than 45 degrees")
        if not geo.polygon_is_simple(v[:, :2]):
            raise ValidationError("polygon is self-intersecting")


@dataclass(frozen=True)
class Surface:
    """Convex contact polygon on a plane, with the half-space form ``S p <= s``."""

    id: int
    vertices: np.ndarray
    S: np.ndarray
    s: np.ndarray
    plane: PlaneCoeffs
    source: int = -1

    @classmethod
    def from_polygon(cls, id: int, polygon, plane: PlaneCoeffs, *, plane_tol: float = 1e-3,
                     source: int = -1) -> "Surface":
        poly = geo.ensure_ccw(geo.as_polygon(polygon))
        verts = np.column_stack([poly, plane.height(poly[:, 0], poly[:, 1])])
        normals, offsets = geo.edge_halfplanes(poly)
        S = np.vstack([
            np.column_stack([normals, np.zeros(len(normals))]),
            [-plane.a, -plane.b, 1.0],
            [plane.a, plane.b, -1.0],
        ])
        s = np.concatenate([offsets, [plane.c + plane_tol, -plane.c + plane_tol]])
        return cls(id, verts, S, s, plane, source)

    @property
    def polygon(self) -> np.ndarray:
        return self.vertices[:, :2]

    @property
    def area(self) -> float:
        return geo.area(self.polygon)

    @property
    def mean_height(self) -> float:
        return float(self.vertices[:, 2].mean())

    def contains(self, p, tol: float = 1e-9) -> bool:
        return bool(np.all(self.S @ np.asarray(p, dtype=float) <= self.s + tol))

    def to_dict(self) -> dict:
        return {"id": self.id, "source": self.source, "vertices": self.vertices.tolist(),
                "plane": list(self.plane.as_tuple())}


@dataclass(frozen=True)
class Obstacle:
    """Outer contour of a surface, extruded downwards; used for swing collision checks."""

    id: int
    polygon: np.ndarray
    plane: PlaneCoeffs

    def halfspaces(self) -> tuple[np.ndarray, np.ndarray]:
        """Rows ``R p <= r`` describing the volume under the top face; the last row is the top plane."""
        normals, offsets = geo.edge_halfplanes(self.polygon)
        R = np.vstack([np.column_stack([normals, np.zeros(len(normals))]), [-self.plane.a, -self.plane.b, 1.0]])
        r = np.concatenate([offsets, [self.plane.c]])
        return R, r

    def to_dict(self) -> dict:
        z = self.plane.height(self.polygon[:, 0], self.polygon[:, 1])
        return {"id": self.id, "vertices": np.column_stack([self.polygon, z]).tolist()}


@dataclass(frozen=True)
class HeightmapGrid:
    origin: np.ndarray
    resolution: float
    data: np.ndarray            # shape (Nx, Ny); data[i, j] at origin + (i, j) * resolution

    def __post_init__(self):
        data = np.asarray(self.data, dtype=float)
        if data.ndim != 2 or min(data.shape) < 2:
            raise ValidationError("heightmap needs at least 2x2 samples")
        if self.resolution <= 0:
            raise ValidationError("heightmap resolution must be positive")
        if not np.all(np.isfinite(data)):
            raise ValidationError("heightmap contains non-finite elevations")
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "origin", np.asarray(self.origin, dtype=float).reshape(2))

    @classmethod
    def from_flat(cls, origin, resolution, dims, data) -> "HeightmapGrid":
        nx, ny = dims
        return cls(origin, resolution, np.asarray(data, dtype=float).reshape(nx, ny))

    @property
    def dims(self) -> tuple[int, int]:
        return self.data.shape

    def __call__(self, x, y):
        """Bilinear interpolation, clamped at the grid border."""
        nx, ny = self.data.shape
        fx = np.clip((np.asarray(x, dtype=float) - self.origin[0]) / self.resolution, 0, nx - 1)
        fy = np.clip((np.asarray(y, dtype=float) - self.origin[1]) / self.resolution, 0, ny - 1)
        i0 = np.minimum(np.floor(fx).astype(int), nx - 2)
        j0 = np.minimum(np.floor(fy).astype(int), ny - 2)
        tx, ty = fx - i0, fy - j0
        d = self.data
        return ((1 - tx) * (1 - ty) * d[i0, j0] + tx * (1 - ty) * d[i0 + 1, j0]
                + (1 - tx) * ty * d[i0, j0 + 1] + tx * ty * d[i0 + 1, j0 + 1])


def elevation(surfaces: Sequence[Surface], x, y, heightmap: HeightmapGrid | None = None,
              default: float = 0.0):
    """Terrain height at ``(x, y)``; scalar or array depending on the input.

    The heightmap wins when present; otherwise the highest surface whose
    polygon contains the point, otherwise ``default``.
    """
    scalar = np.ndim(x) == 0 and np.ndim(y) == 0
    xs, ys = np.atleast_1d(np.asarray(x, dtype=float)), np.atleast_1d(np.asarray(y, dtype=float))
    if heightmap is not None:
        z = heightmap(xs, ys)
    else:
        z = np.full(xs.shape, -np.inf)
        pts = np.column_stack([xs.ravel(), ys.ravel()])
        for surf in surfaces:
            lo, hi = surf.polygon.min(axis=0), surf.polygon.max(axis=0)
            box = np.all((pts >= lo - 1e-9) & (pts <= hi + 1e-9), axis=1)
            if not box.any():
                continue
            inside = np.zeros(len(pts), dtype=bool)
            inside[box] = geo.point_in_polygon(pts[box], surf.polygon)
            h = surf.plane.height(pts[:, 0], pts[:, 1]).reshape(xs.shape)
            z = np.where(inside.reshape(xs.shape), np.maximum(z, h), z)
        z = np.where(np.isfinite(z), z, default)
    return float(z[0]) if scalar else z


def fit_plane(source, center, extent=(1.0, 1.0), resolution=(10, 10), *, default: float = 0.0) -> PlaneCoeffs:
    """Least-squares plane through ``resolution`` samples of the terrain around ``center``.

    ``source`` is a heightmap, a sequence of surfaces, or any callable ``f(x, y) -> z``.
    """
    nx, ny = resolution
    if nx < 2 or ny < 2:
        raise DegenerateFit("plane fit needs at least 2x2 samples")
    xs = center[0] + np.linspace(-0.5, 0.5, nx) * extent[0]
    ys = center[1] + np.linspace(-0.5, 0.5, ny) * extent[1]
    X, Y = np.meshgrid(xs, ys)       # row j, column i -> flat index i + j * nx
    X, Y = X.ravel(), Y.ravel()
    if callable(source) and not isinstance(source, (list, tuple)):
        Z = np.asarray(source(X, Y), dtype=float)
    else:
        Z = elevation(source, X, Y, default=default)
    A = np.column_stack([X, Y, np.ones_like(X)])
    if np.linalg.matrix_rank(A) < 3:
        raise DegenerateFit("plane-fit samples are collinear")
    coef, *_ = np.linalg.lstsq(A, Z, rcond=None)
    a, b, c = map(float, coef)
    if abs(a) >= MAX_SLOPE or abs(b) >= MAX_SLOPE:
        raise DegenerateFit("fitted plane is near vertical")
    return PlaneCoeffs(a, b, c)


# ---------------------------------------------------------------------------
# contour operations
# ---------------------------------------------------------------------------


def _triangle_areas(pts: np.ndarray) -> np.ndarray:
    prev, nxt = np.roll(pts, 1, axis=0), np.roll(pts, -1, axis=0)
    u, v = prev - pts, nxt - pts
    if pts.shape[1] == 2:
        return 0.5 * np.abs(u[:, 0] * v[:, 1] - u[:, 1] * v[:, 0])
    return 0.5 * np.linalg.norm(np.cross(u, v), axis=1)


def simplify_contour(polygon, n_max: int = 8) -> np.ndarray:
    """Visvalingam-Whyatt reduction of a closed contour to at most ``n_max`` vertices.

    The contour is treated cyclically; each round removes the vertex whose
    triangle with its two neighbours has the smallest area, the lowest index
    winning ties (areas within 1e-12 relative).
    """
    if n_max < 3:
        raise ValueError("n_max must be at least 3")
    pts = np.asarray(polygon, dtype=float)
    if len(pts) > 1 and np.allclose(pts[0], pts[-1]):
        pts = pts[:-1]
    while len(pts) > n_max:
        areas = _triangle_areas(pts)
        tol = 1e-12 * max(float(areas.max()), 1e-300)
        k = int(np.flatnonzero(areas <= areas.min() + tol)[0])
        pts = np.delete(pts, k, axis=0)
    return pts


def _offset_convex(poly: np.ndarray, margin: float) -> np.ndarray | None:
    normals, offsets = geo.edge_halfplanes(poly)
    out = geo.halfplane_intersection(normals, offsets - margin)
    return None if len(out) == 0 else out


def _offset_miter(poly: np.ndarray, margin: float) -> np.ndarray | None:
    n = len(poly)
    e = np.roll(poly, -1, axis=0) - poly
    inward = np.column_stack([-e[:, 1], e[:, 0]]) / np.linalg.norm(e, axis=1)[:, None]
    base = poly + margin * inward
    out = []
    for i in range(n):
        p1, d1 = base[i - 1], e[i - 1]
        p2, d2 = base[i], e[i]
        den = d1[0] * d2[1] - d1[1] * d2[0]
        if abs(den) < 1e-14:
            return None
        t = ((p2[0] - p1[0]) * d2[1] - (p2[1] - p1[1]) * d2[0]) / den
        out.append(p1 + t * d1)
    out = np.array(out)
    new_e = np.roll(out, -1, axis=0) - out
    if np.any(np.einsum("ij,ij->i", new_e, e) <= 0) or geo.signed_area(out) <= 0:
        return None
    if not geo.polygon_is_simple(out):
        return None
    return out


def offset_contour(polygon, margin: float) -> np.ndarray | None:
    """Move every edge inwards (``margin > 0``) or outwards by ``|margin|``.

    Convex contours are offset exactly as an intersection of shifted
    half-planes.  A non-convex contour keeps its shape unless the mitred
    offset self-intersects, in which case its convex hull is offset instead.
    Returns ``None`` when an inner offset consumes the polygon.
    """
    poly = geo.remove_collinear(geo.ensure_ccw(geo.as_polygon(polygon)))
    if len(poly) < 3:
        return None
    if margin == 0.0:
        return poly
    if geo.is_convex(poly):
        return _offset_convex(poly, margin)
    out = _offset_miter(poly, margin)
    if out is not None:
        return out
    log.debug("mitred offset self-intersects; falling back to the convex hull")
    return _offset_convex(geo.convex_hull(poly), margin)


def _to_shapely(poly) -> Polygon:
    return Polygon(np.asarray(poly)[:, :2])


def _open_holes(geom) -> list[Polygon]:
    """Cut polygons with interiors along vertical lines through each hole until none remain."""
    todo = [g for g in getattr(geom, "geoms", [geom]) if isinstance(g, Polygon) and not g.is_empty]
    done = []
    while todo:
        g = todo.pop()
        if g.area < 1e-14:
            continue
        if not g.interiors:
            done.append(g)
            continue
        x = Polygon(g.interiors[0]).representative_point().x
        _, y0, _, y1 = g.bounds
        parts = split(g, LineString([(x, y0 - 1.0), (x, y1 + 1.0)]))
        todo.extend(p for p in parts.geoms if isinstance(p, Polygon))
    return done


def _from_shapely(g: Polygon) -> np.ndarray:
    pts = np.asarray(g.exterior.coords)[:-1]
    return geo.remove_collinear(geo.ensure_ccw(pts))


def polygon_difference(base, holes: Sequence) -> list[np.ndarray]:
    """``base`` minus the union of ``holes``, as disjoint simple polygons."""
    b = _to_shapely(base)
    if not holes:
        return [geo.ensure_ccw(geo.as_polygon(base))]
    diff = b.difference(unary_union([_to_shapely(h) for h in holes]))
    if diff.is_empty:
        return []
    pieces = [_from_shapely(g) for g in _open_holes(diff)]
    return [p for p in pieces if len(p) >= 3 and geo.area(p) > 1e-14]


def _point_in_triangle(p, a, b, c, eps=1e-14) -> bool:
    return geo.cross2(a, b, p) >= -eps and geo.cross2(b, c, p) >= -eps and geo.cross2(c, a, p) >= -eps


def triangulate(poly: np.ndarray) -> list[list[int]]:
    """Ear clipping of a CCW simple polygon; returns index triples."""
    idx = list(range(len(poly)))
    tris = []
    while len(idx) > 3:
        m = len(idx)
        for k in range(m):
            i0, i1, i2 = idx[k - 1], idx[k], idx[(k + 1) % m]
            a, b, c = poly[i0], poly[i1], poly[i2]
            if geo.cross2(a, b, c) <= 1e-14:
                continue
            if any(_point_in_triangle(poly[j], a, b, c) for j in idx
                   if j not in (i0, i1, i2) and not np.allclose(poly[j], a) and not np.allclose(poly[j], b)
                   and not np.allclose(poly[j], c)):
                continue
            tris.append([i0, i1, i2])
            del idx[k]
            break
        else:
            # only degenerate corners left; drop the flattest one
            turns = [abs(geo.cross2(poly[idx[k - 1]], poly[idx[k]], poly[idx[(k + 1) % m]])) for k in range(m)]
            del idx[int(np.argmin(turns))]
    if len(idx) == 3 and geo.cross2(*(poly[i] for i in idx)) > 1e-14:
        tris.append(idx)
    return tris


def _merge_convex(poly: np.ndarray, pieces: list[list[int]]) -> list[list[int]]:
    """Hertel-Mehlhorn: remove shared diagonals while the union stays convex."""
    merged = True
    while merged:
        merged = False
        for i in range(len(pieces)):
            A = pieces[i]
            edges_a = {(A[k], A[(k + 1) % len(A)]): k for k in range(len(A))}
            for j in range(i + 1, len(pieces)):
                B = pieces[j]
                for k in range(len(B)):
                    u, v = B[k], B[(k + 1) % len(B)]
                    if (v, u) not in edges_a:
                        continue
                    ka = edges_a[(v, u)]
                    a_rot = A[ka + 1:] + A[:ka + 1]          # starts at u, ends at v
                    b_rot = B[k + 1:] + B[:k + 1]            # starts at v, ends at u
                    cand = a_rot + b_rot[1:-1]
                    if geo.is_convex(poly[cand], tol=1e-14):
                        pieces[i] = cand
                        del pieces[j]
                        merged = True
                        break
                if merged:
                    break
            if merged:
                break
    return pieces


def _cap_vertices(piece: np.ndarray, n_max: int) -> list[np.ndarray]:
    piece = geo.remove_collinear(piece)
    if len(piece) <= n_max:
        return [piece]
    first = piece[:n_max]
    rest = np.vstack([piece[:1], piece[n_max - 1:]])
    return [first] + _cap_vertices(rest, n_max)


def convex_pieces(polygon, n_max: int = 8) -> list[np.ndarray]:
    """All convex pieces of a simple polygon (nothing dropped), each with at most ``n_max`` vertices."""
    poly = geo.remove_collinear(geo.ensure_ccw(geo.as_polygon(polygon)))
    if len(poly) < 3:
        return []
    if geo.is_convex(poly):
        parts = [poly]
    else:
        parts = [poly[p] for p in _merge_convex(poly, triangulate(poly))]
    out = []
    for p in parts:
        out.extend(_cap_vertices(p, n_max))
    return [p for p in out if len(p) >= 3 and geo.area(p) > 0.0]


def convex_decompose(polygon, min_area: float = 0.03, n_max: int = 8) -> list[np.ndarray]:
    """Convex decomposition of a simple polygon, dropping pieces smaller than ``min_area``."""
    return [p for p in convex_pieces(polygon, n_max) if geo.area(p) >= min_area]


# ---------------------------------------------------------------------------
# surface processing
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ProcessingConfig:
    inner_margin: float = 0.04
    outer_margin: float = 0.04
    min_area: float = 0.03
    n_max: int = 8
    plane_tol: float = 1e-3
    safety_floor: tuple | None = None   # (xy polygon, height), exempt from being a hole


@dataclass
class ProcessingReport:
    surfaces: list[Surface]
    obstacles: list[Obstacle]
    inner: dict[int, np.ndarray] = field(default_factory=dict)
    holes: dict[int, list[np.ndarray]] = field(default_factory=dict)
    dropped: list[tuple[int, float]] = field(default_factory=list)   # (source, area)


def process_surfaces_report(raw: Sequence[RawSurface], config: ProcessingConfig = ProcessingConfig()) -> ProcessingReport:
    entries = []
    for r, surf in enumerate(raw):
        try:
            plane = surf.plane
        except DegenerateFit:
            log.warning("dropping raw surface %d: degenerate plane", r)
            continue
        poly = geo.remove_collinear(geo.ensure_ccw(surf.vertices[:, :2]))
        if len(poly) < 3:
            log.warning("dropping raw surface %d: fewer than 3 distinct vertices", r)
            continue
        simplified = simplify_contour(poly, config.n_max)
        inner = offset_contour(simplified, config.inner_margin)
        outer = offset_contour(simplified, -config.outer_margin)
        if inner is None:
            log.info("raw surface %d vanishes under the inner margin", r)
        entries.append({"source": r, "plane": plane, "height": surf.mean_height,
                        "inner": inner, "outer": outer})

    entries.sort(key=lambda e: (e["height"], e["source"]))
    report = ProcessingReport([], [Obstacle(e["source"], e["outer"], e["plane"])
                                   for e in sorted(entries, key=lambda e: e["source"]) if e["outer"] is not None])

    def emit(polys, entry):
        for piece in polys:
            for p in convex_pieces(piece, config.n_max):
                a = geo.area(p)
                if a < config.min_area:
                    report.dropped.append((entry["source"], a))
                    continue
                report.surfaces.append(Surface.from_polygon(len(report.surfaces), p, entry["plane"],
                                                            plane_tol=config.plane_tol, source=entry["source"]))

    for k, entry in enumerate(entries):
        inner = entry["inner"]
        if inner is None:
            continue
        shp = _to_shapely(inner)
        holes = [later["outer"] for later in entries[k + 1:]
                 if later["outer"] is not None and shp.intersection(_to_shapely(later["outer"])).area > 1e-12]
        report.inner[entry["source"]] = inner
        report.holes[entry["source"]] = holes
        emit(polygon_difference(inner, holes) if holes else [inner], entry)

    if config.safety_floor is not None:
        poly, height = config.safety_floor
        poly = geo.ensure_ccw(geo.as_polygon(poly))
        entry = {"source": -1, "plane": PlaneCoeffs(0.0, 0.0, float(height))}
        shp = _to_shapely(poly)
        holes = [e["outer"] for e in entries if e["outer"] is not None
                 and shp.intersection(_to_shapely(e["outer"])).area > 1e-12]
        report.inner[-1] = poly
        report.holes[-1] = holes
        emit(polygon_difference(poly, holes), entry)
    return report


def process_surfaces(raw: Sequence[RawSurface], config: ProcessingConfig = ProcessingConfig()) -> list[Surface]:
    """Disjoint, margin-shrunk convex contact surfaces from raw terrain polygons."""
    return process_surfaces_report(raw, config).surfaces


def support_surfaces(raw: Sequence[RawSurface]) -> list[Surface]:
    """Un-shrunk surfaces used only for elevation queries."""
    out = []
    for r, surf in enumerate(raw):
        try:
            plane = surf.plane
        except DegenerateFit:
            continue
        out.append(Surface.from_polygon(r, surf.vertices[:, :2], plane, source=r))
    return out


@dataclass
class Terrain:
    """Everything the planners need to know about the ground."""

    surfaces: list[Surface]
    obstacles: list[Obstacle] = field(default_factory=list)
    support: list[Surface] = field(default_factory=list)
    heightmap: HeightmapGrid | None = None
    default_height: float = 0.0

    def elevation(self, x, y, default: float | None = None):
        return elevation(self.support or self.surfaces, x, y, self.heightmap,
                         self.default_height if default is None else default)

    def fit_plane(self, center, extent=(1.0, 1.0), resolution=(10, 10), default: float | None = None) -> PlaneCoeffs:
        return fit_plane(lambda x, y: self.elevation(x, y, default), center, extent, resolution)

    def surface(self, sid: int) -> Surface:
        for s in self.surfaces:
            if s.id == sid:
                return s
        raise KeyError(sid)

    @classmethod
    def from_raw(cls, raw: Sequence[RawSurface], config: ProcessingConfig = ProcessingConfig(),
                 heightmap: HeightmapGrid | None = None, default_height: float = 0.0) -> "Terrain":
        report = process_surfaces_report(raw, config)
        return cls(report.surfaces, report.obstacles, support_surfaces(raw), heightmap, default_height)


__all__ = [
    "PlaneCoeffs", "RawSurface", "Surface", "Obstacle", "HeightmapGrid", "Terrain", "ProcessingConfig",
    "ProcessingReport", "plane_through", "elevation", "fit_plane", "simplify_contour", "offset_contour",
    "polygon_difference", "convex_decompose", "convex_pieces", "triangulate", "process_surfaces",
    "process_surfaces_report", "support_surfaces",
]
