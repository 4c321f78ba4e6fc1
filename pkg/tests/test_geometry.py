"""Geometry contracts: canonical form, corners, clipping, IoU."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import rotbox as rb
from rotbox.errors import InvalidArgumentError, InvalidBoxError, InvalidQuadError

from helpers import (
    angle_distance,
    apply_rigid,
    corner_sets_match,
    random_box,
    random_nearby_pair,
)
from oracles import mc_intersection_area, mc_iou, point_in_convex

SQRT2 = math.sqrt(2.0)


# ---------------------------------------------------------------- validation


def test_box_rejects_degenerate_sides():
    with pytest.raises(InvalidBoxError):
        rb.OrientedBox(0, 0, 0, 1, 0)
    with pytest.raises(InvalidBoxError):
        rb.OrientedBox(0, 0, 1, -2, 0)
    with pytest.raises(InvalidBoxError):
        rb.OrientedBox(0, 0, 1, 1, math.nan)
    with pytest.raises(InvalidBoxError):
        rb.OrientedBox(math.inf, 0, 1, 1, 0)


def test_aligned_box_rejects_empty_extent():
    with pytest.raises(InvalidBoxError):
        rb.AlignedBox(0, 0, 0, 1)
    with pytest.raises(InvalidBoxError):
        rb.AlignedBox(0, 2, 1, 1)
    assert rb.AlignedBox(0, 0, 2, 1).area == 2.0


def test_polygon_rejects_non_finite_vertex():
    with pytest.raises(InvalidArgumentError):
        rb.ConvexPolygon(((0, 0), (1, math.nan), (1, 1)))


# ------------------------------------------------------------- canonicalize


def test_canonicalize_already_canonical():
    b = rb.canonicalize((0, 0, 4, 2, 0))
    assert b.astuple() == (0, 0, 4, 2, 0)


def test_canonicalize_swaps_short_long():
    b = rb.canonicalize((0, 0, 2, 4, 0))
    assert (b.cx, b.cy, b.w, b.h) == (0, 0, 4, 2)
    assert b.theta == pytest.approx(math.pi / 2, abs=1e-15)


def test_canonicalize_reduces_theta_mod_pi():
    b = rb.canonicalize((0, 0, 4, 2, 3 * math.pi / 2))
    assert b.theta == pytest.approx(math.pi / 2, abs=1e-12)
    assert (b.w, b.h) == (4, 2)


def test_canonicalize_never_emits_pi():
    # a tiny negative angle must wrap to ~0, not to pi itself
    b = rb.canonicalize((0, 0, 4, 2, -1e-18))
    assert 0.0 <= b.theta < math.pi


def test_canonicalize_rejects_bad_boxes():
    with pytest.raises(InvalidBoxError):
        rb.canonicalize((0, 0, -1, 2, 0))
    with pytest.raises(InvalidBoxError):
        rb.canonicalize((0, 0, 1, 2, math.inf))


def test_canonicalize_preserves_corner_set():
    rng = np.random.default_rng(11)
    for _ in range(300):
        raw = (
            float(rng.uniform(-50, 50)),
            float(rng.uniform(-50, 50)),
            float(rng.uniform(0.5, 20)),
            float(rng.uniform(0.5, 20)),
            float(rng.uniform(-4 * math.pi, 4 * math.pi)),
        )
        canon = rb.canonicalize(raw)
        assert canon.w >= canon.h
        assert 0.0 <= canon.theta < math.pi
        assert corner_sets_match(
            rb.corners_of(raw).vertices, rb.corners_of(canon).vertices, tol=1e-9
        )


@given(
    cx=st.floats(-1e3, 1e3),
    cy=st.floats(-1e3, 1e3),
    w=st.floats(1e-3, 1e3),
    h=st.floats(1e-3, 1e3),
    theta=st.floats(-20.0, 20.0),
)
@settings(max_examples=80, deadline=None)
def test_canonicalize_idempotent(cx, cy, w, h, theta):
    once = rb.canonicalize((cx, cy, w, h, theta))
    twice = rb.canonicalize(once)
    assert once.astuple() == twice.astuple()


# ------------------------------------------------------------------ corners


def test_corners_axis_aligned_square():
    got = rb.corners_of((0, 0, 2, 2, 0)).vertices
    assert corner_sets_match(got, [(-1, -1), (1, -1), (1, 1), (-1, 1)], tol=1e-12)


def test_corners_translate_with_center():
    got = rb.corners_of((1, 1, 2, 2, 0)).vertices
    assert corner_sets_match(got, [(0, 0), (2, 0), (2, 2), (0, 2)], tol=1e-12)


def test_corners_rotated_square():
    got = rb.corners_of((0, 0, 2 * SQRT2, 2 * SQRT2, math.pi / 4)).vertices
    assert corner_sets_match(got, [(0, -2), (2, 0), (0, 2), (-2, 0)], tol=1e-12)


def test_corners_centroid_is_center():
    rng = np.random.default_rng(3)
    for _ in range(100):
        b = random_box(rng)
        verts = rb.corners_of(b).vertices
        assert math.fsum(x for x, _ in verts) / 4 == pytest.approx(b.cx, abs=1e-9)
        assert math.fsum(y for _, y in verts) / 4 == pytest.approx(b.cy, abs=1e-9)


def test_corners_counter_clockwise():
    rng = np.random.default_rng(4)
    for _ in range(100):
        verts = rb.corners_of(random_box(rng)).vertices
        shoelace = sum(
            verts[i][0] * verts[(i + 1) % 4][1] - verts[(i + 1) % 4][0] * verts[i][1]
            for i in range(4)
        )
        assert shoelace > 0


# ------------------------------------------------------------ box_from_quad


def test_quad_exact_rectangle():
    b = rb.box_from_quad([(-1, -1), (1, -1), (1, 1), (-1, 1)])
    assert b.cx == pytest.approx(0, abs=1e-12)
    assert b.cy == pytest.approx(0, abs=1e-12)
    assert b.w == pytest.approx(2, abs=1e-12)
    assert b.h == pytest.approx(2, abs=1e-12)


def test_quad_diamond_roundtrip():
    quad = [(0, -2), (2, 0), (0, 2), (-2, 0)]
    b = rb.box_from_quad(quad)
    assert b.w == pytest.approx(2 * SQRT2, abs=1e-9)
    assert b.h == pytest.approx(2 * SQRT2, abs=1e-9)
    assert corner_sets_match(rb.corners_of(b).vertices, quad, tol=1e-9)


def test_quad_rectangle_roundtrip_random():
    rng = np.random.default_rng(5)
    for _ in range(200):
        b = random_box(rng)
        quad = rb.corners_of(b)
        back = rb.box_from_quad(quad)
        assert corner_sets_match(rb.corners_of(back).vertices, quad.vertices, tol=1e-6)


def test_quad_arbitrary_convex_enclosed():
    rng = np.random.default_rng(6)
    checked = 0
    while checked < 100:
        pts = [tuple(p) for p in rng.uniform(-10, 10, (4, 2))]
        hull = rb.geometry._convex_hull(pts)
        if len(hull) != 4:
            continue
        checked += 1
        box = rb.box_from_quad(hull)
        rect = rb.corners_of(box).vertices
        for p in hull:
            assert point_in_convex(p, rect)
        assert box.area >= rb.polygon_area(hull) - 1e-9


def test_quad_rejects_degenerate():
    with pytest.raises(InvalidQuadError):
        rb.box_from_quad([(0, 0), (1, 1), (2, 2), (3, 3)])
    with pytest.raises(InvalidQuadError):
        rb.box_from_quad([(0, 0), (1, 0), (2, 0)])


def test_quad_rejects_self_intersection():
    # bowtie: edges (0,1) and (2,3) cross
    with pytest.raises(InvalidQuadError):
        rb.box_from_quad([(0, 0), (2, 2), (2, 0), (0, 2)])


# ------------------------------------------------------------- aligned_hull


@pytest.mark.parametrize(
    "box,expected",
    [
        ((0, 0, 4, 2, 0), (-2, -1, 2, 1)),
        ((0, 0, 2 * SQRT2, 2 * SQRT2, math.pi / 4), (-2, -2, 2, 2)),
        ((5, 5, 4, 2, math.pi / 2), (4, 3, 6, 7)),
    ],
)
def test_aligned_hull_examples(box, expected):
    got = rb.aligned_hull(box).astuple()
    assert got == pytest.approx(expected, abs=1e-9)


def test_aligned_hull_is_tight():
    rng = np.random.default_rng(7)
    for _ in range(100):
        b = random_box(rng)
        hull = rb.aligned_hull(b)
        xs = [x for x, _ in rb.corners_of(b).vertices]
        ys = [y for _, y in rb.corners_of(b).vertices]
        assert hull.xmin == pytest.approx(min(xs), abs=1e-12)
        assert hull.xmax == pytest.approx(max(xs), abs=1e-12)
        assert hull.ymin == pytest.approx(min(ys), abs=1e-12)
        assert hull.ymax == pytest.approx(max(ys), abs=1e-12)


# ----------------------------------------------------------------- clipping


def test_clip_identity():
    sq = rb.corners_of((0.5, 0.5, 1, 1, 0))
    out = rb.clip_convex(sq, sq)
    assert rb.polygon_area(out) == pytest.approx(1.0, abs=1e-12)
    assert corner_sets_match(out.vertices, sq.vertices, tol=1e-9)


def test_clip_disjoint():
    a = rb.corners_of((0, 0, 1, 1, 0))
    b = rb.corners_of((5, 5, 1, 1, 0))
    out = rb.clip_convex(a, b)
    assert out.is_empty
    assert rb.polygon_area(out) == 0.0


def test_clip_octagon_area():
    a = rb.corners_of((0.5, 0.5, 1, 1, 0))
    b = rb.corners_of((0.5, 0.5, 1, 1, math.pi / 4))
    out = rb.clip_convex(a, b)
    assert len(out) == 8
    expected = 2 * (SQRT2 - 1)
    assert rb.polygon_area(out) == pytest.approx(expected, abs=1e-9)
    mc = mc_intersection_area((0.5, 0.5, 1, 1, 0), (0.5, 0.5, 1, 1, math.pi / 4))
    assert rb.polygon_area(out) == pytest.approx(mc, abs=5e-3)


def test_clip_output_shape_and_bounds():
    rng = np.random.default_rng(8)
    for _ in range(300):
        a, b = random_nearby_pair(rng)
        pa, pb = rb.corners_of(a), rb.corners_of(b)
        out = rb.clip_convex(pa, pb)
        n = len(out)
        assert n == 0 or 3 <= n <= 8
        area = rb.polygon_area(out)
        assert area <= min(a.area, b.area) + 1e-9
        if n:
            # intersection vertices lie inside both rectangles
            for p in out.vertices:
                assert point_in_convex(p, pa.vertices)
                assert point_in_convex(p, pb.vertices)
            # convexity: uniform turn direction
            verts = out.vertices
            for i in range(n):
                o = verts[i]
                u = verts[(i + 1) % n]
                v = verts[(i + 2) % n]
                cross = (u[0] - o[0]) * (v[1] - o[1]) - (u[1] - o[1]) * (v[0] - o[0])
                assert cross >= -1e-6


def test_polygon_area_basics():
    assert rb.polygon_area([(0, 0), (1, 0), (1, 1), (0, 1)]) == 1.0
    assert rb.polygon_area(rb.EMPTY_POLYGON) == 0.0
    assert rb.polygon_area([(0, 0), (1, 1)]) == 0.0


# ---------------------------------------------------------------------- IoU


def test_iou_identity():
    rng = np.random.default_rng(9)
    for _ in range(50):
        b = random_box(rng)
        assert rb.iou_oriented(b, b) == pytest.approx(1.0, abs=1e-12)


def test_iou_offset_squares():
    v = rb.iou_oriented((0.5, 0.5, 1, 1, 0), (1.0, 0.5, 1, 1, 0))
    assert v == pytest.approx(1.0 / 3.0, abs=1e-12)
    assert v == pytest.approx(mc_iou((0.5, 0.5, 1, 1, 0), (1.0, 0.5, 1, 1, 0)), abs=3e-3)


def test_iou_rotated_square():
    v = rb.iou_oriented((0, 0, 1, 1, 0), (0, 0, 1, 1, math.pi / 4))
    oct_area = 2 * (SQRT2 - 1)
    assert v == pytest.approx(oct_area / (2 - oct_area), abs=1e-6)
    assert v == pytest.approx(0.707107, abs=1e-6)


def test_iou_thin_boxes_small_angle():
    # aspect ratio 10, shared center, 0.12 rad apart; the exact value (strip
    # crossing with end truncation) is 0.540455, pinned by the sampling oracle
    a = (0, 0, 10, 1, 0)
    b = (0, 0, 10, 1, 0.12)
    v = rb.iou_oriented(a, b)
    assert v == pytest.approx(0.5404545618607207, abs=1e-9)
    assert v == pytest.approx(mc_iou(a, b), abs=3e-3)


def test_iou_symmetry():
    rng = np.random.default_rng(10)
    for _ in range(200):
        a, b = random_nearby_pair(rng)
        assert abs(rb.iou_oriented(a, b) - rb.iou_oriented(b, a)) < 1e-12


def test_iou_range():
    rng = np.random.default_rng(12)
    for _ in range(200):
        a, b = random_nearby_pair(rng)
        v = rb.iou_oriented(a, b)
        assert 0.0 <= v <= 1.0


def test_iou_rigid_invariance():
    rng = np.random.default_rng(13)
    for _ in range(200):
        a, b = random_nearby_pair(rng)
        base = rb.iou_oriented(a, b)
        phi = float(rng.uniform(0, 2 * math.pi))
        tx, ty = (float(v) for v in rng.uniform(-100, 100, 2))
        moved = rb.iou_oriented(apply_rigid(a, phi, tx, ty), apply_rigid(b, phi, tx, ty))
        assert moved == pytest.approx(base, abs=1e-9)


def test_iou_scale_invariance():
    rng = np.random.default_rng(14)
    for _ in range(100):
        a, b = random_nearby_pair(rng)
        base = rb.iou_oriented(a, b)
        k = float(rng.uniform(0.1, 10.0))
        sa = rb.OrientedBox(a.cx * k, a.cy * k, a.w * k, a.h * k, a.theta)
        sb = rb.OrientedBox(b.cx * k, b.cy * k, b.w * k, b.h * k, b.theta)
        assert rb.iou_oriented(sa, sb) == pytest.approx(base, abs=1e-9)


def test_iou_containment():
    rng = np.random.default_rng(15)
    for _ in range(100):
        outer = random_box(rng, lo=10.0, hi=30.0)
        # a box centered inside whose diagonal fits the inner half of outer
        diag_cap = min(outer.w, outer.h) / 2.0
        w = float(rng.uniform(0.2, 0.7)) * diag_cap
        h = float(rng.uniform(0.2, 0.7)) * diag_cap
        inner = rb.OrientedBox(
            outer.cx, outer.cy, w, h, float(rng.uniform(0, 2 * math.pi))
        )
        assert math.hypot(inner.w, inner.h) <= min(outer.w, outer.h)
        expected = inner.area / outer.area
        assert rb.iou_oriented(inner, outer) == pytest.approx(expected, abs=1e-9)


def test_iou_monte_carlo_spot_suite():
    rng = np.random.default_rng(16)
    for _ in range(40):
        a, b = random_nearby_pair(rng)
        assert rb.iou_oriented(a, b) == pytest.approx(
            mc_iou(a, b, n=1_000_000, rng=rng), abs=3e-3
        )


@given(
    cx=st.floats(-20, 20),
    cy=st.floats(-20, 20),
    w1=st.floats(0.5, 30),
    h1=st.floats(0.5, 30),
    t1=st.floats(0, 6.4),
    w2=st.floats(0.5, 30),
    h2=st.floats(0.5, 30),
    t2=st.floats(0, 6.4),
)
@settings(max_examples=80, deadline=None)
def test_iou_symmetric_and_bounded(cx, cy, w1, h1, t1, w2, h2, t2):
    a = rb.OrientedBox(0, 0, w1, h1, t1)
    b = rb.OrientedBox(cx, cy, w2, h2, t2)
    ab = rb.iou_oriented(a, b)
    ba = rb.iou_oriented(b, a)
    assert abs(ab - ba) < 1e-12
    assert 0.0 <= ab <= 1.0


# -------------------------------------------------------------- iou_aligned


def test_iou_aligned_examples():
    a = rb.AlignedBox(0, 0, 2, 2)
    assert rb.iou_aligned(a, a) == 1.0
    assert rb.iou_aligned(a, rb.AlignedBox(5, 5, 6, 6)) == 0.0
    assert rb.iou_aligned(a, rb.AlignedBox(2, 0, 4, 2)) == 0.0  # touching edge


def test_iou_aligned_agrees_with_oriented():
    rng = np.random.default_rng(17)
    for _ in range(200):
        x0, y0 = rng.uniform(-50, 50, 2)
        w0, h0 = rng.uniform(1, 30, 2)
        x1, y1 = x0 + rng.uniform(-20, 20), y0 + rng.uniform(-20, 20)
        w1, h1 = rng.uniform(1, 30, 2)
        a = rb.AlignedBox(x0, y0, x0 + w0, y0 + h0)
        b = rb.AlignedBox(x1, y1, x1 + w1, y1 + h1)
        oa = rb.OrientedBox(x0 + w0 / 2, y0 + h0 / 2, w0, h0, 0.0)
        ob = rb.OrientedBox(x1 + w1 / 2, y1 + h1 / 2, w1, h1, 0.0)
        assert abs(rb.iou_aligned(a, b) - rb.iou_oriented(oa, ob)) < 1e-12


# --------------------------------------------------------------- iou_matrix


def test_iou_matrix_matches_scalar():
    rng = np.random.default_rng(18)
    boxes_a = [random_box(rng, span=30) for _ in range(12)]
    boxes_b = [random_box(rng, span=30) for _ in range(9)]
    mat = rb.iou_matrix(boxes_a, boxes_b)
    assert mat.shape == (12, 9)
    for i, a in enumerate(boxes_a):
        for j, b in enumerate(boxes_b):
            assert mat[i, j] == pytest.approx(rb.iou_oriented(a, b), abs=1e-15)


def test_iou_matrix_empty_and_errors():
    assert rb.iou_matrix([], []).shape == (0, 0)
    assert rb.iou_matrix(np.zeros((0, 5)), [rb.OrientedBox(0, 0, 1, 1, 0)]).shape == (0, 1)
    with pytest.raises(InvalidArgumentError):
        rb.iou_matrix(np.zeros((3, 4)), np.zeros((2, 5)))
    with pytest.raises(InvalidBoxError):
        rb.iou_matrix(np.array([[0, 0, -1, 1, 0]]), np.array([[0, 0, 1, 1, 0]]))
