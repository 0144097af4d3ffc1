import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from shapely.geometry import Polygon

from contactplan import geometry as geo
from contactplan.errors import DegenerateFit
from contactplan.terrain import (
    HeightmapGrid,
    PlaneCoeffs,
    ProcessingConfig,
    RawSurface,
    Surface,
    Terrain,
    convex_decompose,
    elevation,
    fit_plane,
    offset_contour,
    polygon_difference,
    process_surfaces,
    process_surfaces_report,
    simplify_contour,
)

from oracles import convex_by_cross, greedy_vw, shoelace
from scenes import check_processing, random_rect_scene


def _square(x0, y0, side, z=0.0):
    return np.array([[x0, y0, z], [x0 + side, y0, z], [x0 + side, y0 + side, z], [x0, y0 + side, z]])


def _regular(n, r=1.0):
    th = np.linspace(0.0, 2 * np.pi, n, endpoint=False)
    return np.column_stack([r * np.cos(th), r * np.sin(th)])


def _surface(poly2d, z=0.0):
    return Surface.from_polygon(0, poly2d, PlaneCoeffs(0.0, 0.0, z))


# ---- planes and elevation ---------------------------------------------------------------


def test_fit_plane_constant_field():
    p = fit_plane(lambda x, y: np.full_like(x, 0.2), (0.3, -1.0), (1.0, 0.6))
    assert np.allclose(p.as_tuple(), (0.0, 0.0, 0.2), atol=1e-12)


def test_fit_plane_ramp():
    p = fit_plane(lambda x, y: 0.5 * x, (0.0, 0.0))
    assert np.allclose(p.as_tuple(), (0.5, 0.0, 0.0), atol=1e-12)


def test_fit_plane_noisy_matches_normal_equations():
    rng = np.random.default_rng(3)
    noise = rng.uniform(-1e-3, 1e-3, 100)

    def field(x, y):
        return 0.1 * x + 0.3 * y + 0.05 + noise

    p = fit_plane(field, (0.0, 0.0), (1.0, 1.0), (10, 10))
    xs = np.linspace(-0.5, 0.5, 10)
    X, Y = np.meshgrid(xs, xs)
    A = np.column_stack([X.ravel(), Y.ravel(), np.ones(100)])
    ref = np.linalg.solve(A.T @ A, A.T @ field(X.ravel(), Y.ravel()))
    assert np.allclose(p.as_tuple(), ref, atol=1e-10)
    assert np.allclose(p.as_tuple(), (0.1, 0.3, 0.05), atol=1e-2)


def test_fit_plane_degenerate():
    with pytest.raises(DegenerateFit):
        fit_plane(lambda x, y: x, (0.0, 0.0), (1.0, 1.0), (1, 10))
    with pytest.raises(DegenerateFit):
        fit_plane(lambda x, y: 3.0 * x, (0.0, 0.0))


def test_fit_plane_heightmap_source():
    hm = HeightmapGrid((-1.0, -1.0), 0.5, np.fromfunction(lambda i, j: 0.1 * (-1.0 + 0.5 * i), (5, 5)))
    p = fit_plane(hm, (0.0, 0.0), (1.0, 1.0))
    assert np.allclose(p.as_tuple(), (0.1, 0.0, 0.0), atol=1e-12)


def test_elevation_examples():
    ground = _surface(_square(-1, -1, 2)[:, :2], 0.0)
    step = _surface(_square(-0.2, -0.2, 0.4)[:, :2], 0.17)
    assert elevation([ground], 0.5, 0.5) == 0.0
    assert elevation([ground, step], 0.0, 0.0) == pytest.approx(0.17)
    assert elevation([ground, step], 5.0, 0.0, default=-0.3) == -0.3
    hm = HeightmapGrid((0.0, 0.0), 1.0, [[0.0, 0.0], [1.0, 1.0]])
    assert elevation([], 0.5, 0.5, hm) == pytest.approx(0.5)


def test_elevation_vectorised_matches_scalar():
    ground = _surface(_square(-1, -1, 2)[:, :2], 0.0)
    step = _surface(_square(-0.2, -0.2, 0.4)[:, :2], 0.17)
    xs = np.linspace(-1.5, 1.5, 31)
    z = elevation([ground, step], xs, np.zeros_like(xs), default=-1.0)
    assert np.array_equal(z, [elevation([ground, step], x, 0.0, default=-1.0) for x in xs])


def test_heightmap_validation():
    with pytest.raises(ValueError):
        HeightmapGrid((0, 0), 0.1, [[0.0, 1.0]])
    with pytest.raises(ValueError):
        HeightmapGrid((0, 0), 0.0, np.zeros((2, 2)))
    with pytest.raises(ValueError):
        HeightmapGrid((0, 0), 0.1, [[0.0, np.nan], [0.0, 0.0]])


def test_raw_surface_validation():
    RawSurface(_square(0, 0, 1)).validate()
    steep = np.array([[0, 0, 0], [1, 0, 1.5], [1, 1, 1.5], [0, 1, 0]], dtype=float)
    with pytest.raises(ValueError, match="45"):
        RawSurface(steep).validate()
    bow = np.array([[0, 0, 0], [1, 1, 0], [1, 0, 0], [0, 1, 0]], dtype=float)
    with pytest.raises(ValueError, match="intersect"):
        RawSurface(bow).validate()


# ---- Surface half-spaces ------------------------------------------------------------------


def test_surface_halfspace_shape_and_vertices():
    s = _surface(_regular(8, 0.5), 0.3)
    assert s.S.shape == (10, 3)
    for v in s.vertices:
        assert np.all(s.S @ v <= s.s + 1e-9)


@settings(max_examples=60, deadline=None)
@given(st.integers(3, 8), st.floats(0.2, 2.0), st.floats(-0.3, 0.3), st.floats(-0.3, 0.3), st.integers(0, 2 ** 31))
def test_halfspace_soundness(n, r, a, b, seed):
    rng = np.random.default_rng(seed)
    th = np.sort(rng.uniform(0, 2 * np.pi, n))
    poly = geo.convex_hull(np.column_stack([r * np.cos(th), r * np.sin(th)]))
    if len(poly) < 3 or geo.area(poly) < 1e-3:
        return
    plane = PlaneCoeffs(a, b, 0.1)
    s = Surface.from_polygon(0, poly, plane)
    # random interior points via convex combinations of the vertices
    w = rng.dirichlet(np.ones(len(poly)), 200)
    pts = w @ poly
    P = np.column_stack([pts, plane.height(pts[:, 0], pts[:, 1])])
    assert np.all(P @ s.S.T <= s.s + 1e-9)
    # 1 cm outside every edge midpoint violates a row
    normals, _ = geo.edge_halfplanes(poly)
    mids = 0.5 * (poly + np.roll(poly, -1, axis=0)) + 0.01 * normals
    M = np.column_stack([mids, plane.height(mids[:, 0], mids[:, 1])])
    assert np.all(np.any(M @ s.S.T > s.s, axis=1))


# ---- simplification -----------------------------------------------------------------------


def test_simplify_octagon_unchanged():
    p = _regular(8)
    assert np.array_equal(simplify_contour(p, 8), p)


def test_simplify_collinear_midpoint():
    p = np.array([[0, 0], [0.5, 0], [1, 0], [1, 1], [0, 1]], dtype=float)
    out = simplify_contour(p, 4)
    assert np.array_equal(out, p[[0, 2, 3, 4]])


def test_simplify_twenty_gon_matches_greedy_oracle():
    p = _regular(20)
    keep = greedy_vw(p, 8)
    assert keep == [3, 7, 9, 11, 13, 15, 17, 19]
    assert np.array_equal(simplify_contour(p, 8), p[keep])


@settings(max_examples=80, deadline=None)
@given(st.integers(4, 24), st.integers(3, 10), st.integers(0, 2 ** 31))
def test_simplify_monotone_and_ordered(n, n_max, seed):
    rng = np.random.default_rng(seed)
    th = np.sort(rng.uniform(0, 2 * np.pi, n))
    r = rng.uniform(0.5, 1.5, n)
    p = np.column_stack([r * np.cos(th), r * np.sin(th)])
    out = simplify_contour(p, n_max)
    assert len(out) == min(n, n_max)
    idx = [int(np.flatnonzero(np.all(p == q, axis=1))[0]) for q in out]
    assert idx == sorted(idx)
    assert idx == greedy_vw(p, n_max)


def test_simplify_rejects_small_nmax():
    with pytest.raises(ValueError):
        simplify_contour(_regular(5), 2)


# ---- offsets ------------------------------------------------------------------------------


def test_offset_square_in_and_out():
    sq = _square(0, 0, 1)[:, :2]
    inner = offset_contour(sq, 0.1)
    assert shoelace(inner) == pytest.approx(0.64)
    assert np.allclose(inner.mean(axis=0), [0.5, 0.5])
    outer = offset_contour(sq, -0.1)
    assert shoelace(outer) == pytest.approx(1.44)


def test_offset_thin_rectangle_vanishes():
    rect = np.array([[0, 0], [0.06, 0], [0.06, 1], [0, 1]], dtype=float)
    assert offset_contour(rect, 0.04) is None


def test_offset_inner_points_keep_margin():
    poly = _regular(7, 0.8)
    inner = offset_contour(poly, 0.05)
    d = geo.segment_distances(inner, poly)
    assert d.min() >= 0.05 - 1e-9


def test_offset_concave_keeps_shape():
    L = np.array([[0, 0], [2, 0], [2, 1], [1, 1], [1, 2], [0, 2]], dtype=float)
    inner = offset_contour(L, 0.1)
    assert len(inner) == 6
    assert not geo.is_convex(inner)
    ref = Polygon(L).buffer(-0.1, join_style="mitre")
    assert shoelace(inner) == pytest.approx(ref.area, rel=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.integers(3, 8), st.floats(0.01, 0.1), st.integers(0, 2 ** 31))
def test_offset_duality_convex(n, d, seed):
    rng = np.random.default_rng(seed)
    th = np.sort(rng.uniform(0, 2 * np.pi, n))
    poly = geo.convex_hull(np.column_stack([np.cos(th), np.sin(th)]))
    if len(poly) < 3 or geo.area(poly) < 0.2:
        return
    shrunk = offset_contour(poly, d)
    if shrunk is None:
        return
    regrown = offset_contour(shrunk, -d)
    opening = Polygon(poly).buffer(-d).buffer(d)
    assert Polygon(regrown).buffer(1e-9).contains(opening)
    if len(shrunk) == len(poly):
        # no edge vanished: shrink then grow returns the polygon itself
        assert Polygon(regrown).symmetric_difference(Polygon(poly)).area < 1e-9


# ---- boolean difference and decomposition -------------------------------------------------


def test_difference_examples():
    base = _square(-1, -1, 2)[:, :2]
    hole = _square(-0.25, -0.25, 0.5)[:, :2]
    pieces = polygon_difference(base, [hole])
    assert sum(abs(shoelace(p)) for p in pieces) == pytest.approx(3.75)
    assert len(polygon_difference(base, [])) == 1
    assert polygon_difference(base, [base.copy()]) == []


def test_decompose_convex_passthrough():
    sq = _square(0, 0, 1)[:, :2]
    out = convex_decompose(sq, 0.03)
    assert len(out) == 1 and shoelace(out[0]) == pytest.approx(1.0)


def test_decompose_l_shape():
    L = np.array([[0, 0], [1, 0], [1, 0.5], [0.5, 0.5], [0.5, 1], [0, 1]], dtype=float)
    out = convex_decompose(L, 0.03)
    assert len(out) >= 2
    assert sum(shoelace(p) for p in out) == pytest.approx(0.75)
    assert all(convex_by_cross(p) for p in out)


def test_decompose_ring_pieces():
    base = _square(-1, -1, 2)[:, :2]
    hole = _square(-0.25, -0.25, 0.5)[:, :2]
    pieces = [q for p in polygon_difference(base, [hole]) for q in convex_decompose(p, 0.0)]
    assert sum(shoelace(p) for p in pieces) == pytest.approx(3.75, rel=1e-9)
    assert all(convex_by_cross(p) and shoelace(p) > 0 for p in pieces)
    assert all(len(p) <= 8 for p in pieces)
    _assert_disjoint(pieces)


def test_decompose_splits_many_vertex_convex_piece():
    poly = _regular(20)
    out = convex_decompose(poly, 0.0, n_max=8)
    assert all(len(p) <= 8 and convex_by_cross(p) for p in out)
    assert sum(shoelace(p) for p in out) == pytest.approx(shoelace(poly), rel=1e-9)


def test_decompose_drops_small_pieces():
    thin = np.array([[0, 0], [1, 0], [1, 0.02], [0, 0.02]], dtype=float)
    assert convex_decompose(thin, 0.03) == []


def _assert_disjoint(polys, tol=1e-9):
    shp = [Polygon(p) for p in polys]
    for i in range(len(shp)):
        for j in range(i + 1, len(shp)):
            assert shp[i].intersection(shp[j]).area < tol


# ---- full processing ----------------------------------------------------------------------


def test_process_single_square():
    out = process_surfaces([RawSurface(_square(0, 0, 1))])
    assert len(out) == 1
    assert out[0].area == pytest.approx(0.92 ** 2)


def test_process_block_on_ground():
    raw = [RawSurface(_square(-1, -1, 2)), RawSurface(_square(-0.25, -0.25, 0.5, 0.2))]
    cfg = ProcessingConfig(0.04, 0.04, 0.03)
    out = process_surfaces(raw, cfg)
    ground = [s for s in out if s.source == 0]
    block = [s for s in out if s.source == 1]
    assert len(block) == 1 and block[0].area == pytest.approx(0.42 ** 2)
    # ring: inner ground contour minus the block's outer contour
    assert sum(s.area for s in ground) == pytest.approx(1.92 ** 2 - 0.58 ** 2, rel=1e-9)
    hole = Polygon(_square(-0.29, -0.29, 0.58)[:, :2])
    assert all(Polygon(s.polygon).intersection(hole).area < 1e-12 for s in ground)


def test_process_staircase_passthrough():
    from contactplan.scenarios import staircase

    raw = [RawSurface(np.asarray(s["vertices"])) for s in staircase()]
    out = process_surfaces(raw)
    assert len(out) == 8
    assert [s.source for s in sorted(out, key=lambda s: s.mean_height)] == list(range(8))
    for s, r in zip(sorted(out, key=lambda s: s.source), raw):
        assert len(s.polygon) == 4
        x0, y0 = r.vertices[:, :2].min(axis=0)
        assert np.allclose(s.polygon.min(axis=0), (x0 + 0.04, y0 + 0.04))


def test_process_drops_degenerate_inputs(caplog):
    line = np.array([[0, 0, 0], [1, 0, 0], [2, 0, 0]], dtype=float)
    out = process_surfaces([RawSurface(line), RawSurface(_square(0, 0, 1))])
    assert len(out) == 1 and out[0].source == 1
    assert "degenerate" in caplog.text


def test_safety_floor_never_a_hole():
    raw = [RawSurface(_square(-1, -1, 2))]
    floor = (_square(-0.5, -0.5, 1.0)[:, :2], -0.05)
    rep = process_surfaces_report(raw, ProcessingConfig(safety_floor=floor))
    ground = [s for s in rep.surfaces if s.source == 0]
    assert sum(s.area for s in ground) == pytest.approx(1.92 ** 2)
    assert not any(s.source == -1 for s in rep.surfaces)    # covered completely by the ground outer contour


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2 ** 31))
def test_processing_invariants(n, seed):
    raw = random_rect_scene(np.random.default_rng(seed), n)
    assert check_processing(raw, ProcessingConfig()) == []


def test_processing_output_area_bounded_by_inner():
    raw = random_rect_scene(np.random.default_rng(11), 5)
    rep = process_surfaces_report(raw)
    assert sum(s.area for s in rep.surfaces) <= sum(Polygon(p).area for p in rep.inner.values()) + 1e-9


def test_terrain_from_raw_and_lookup():
    t = Terrain.from_raw([RawSurface(_square(0, 0, 1)), RawSurface(_square(0.3, 0.3, 0.3, 0.2))])
    assert t.elevation(0.45, 0.45) == pytest.approx(0.2)
    assert t.surface(t.surfaces[0].id) is t.surfaces[0]
    with pytest.raises(KeyError):
        t.surface(99)
    assert len(t.obstacles) == 2
    R, r = t.obstacles[1].halfspaces()
    assert np.allclose(R[-1], [0, 0, 1]) and r[-1] == pytest.approx(0.2)
