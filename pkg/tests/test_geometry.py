"""Kernel oracles: every construction is checked against the defining
residuals (point-on-line, tangency, equal distance) rather than against
itself, plus a handful of frozen closed-form values."""

from __future__ import annotations

import math
import random

import pytest
from hypothesis import given, strategies as st

from profileforge import geometry as g
from profileforge.geometry import (
    ArcSegment,
    DirectedLine,
    NoSolutionError,
    OrientedCircle,
    Point2,
)

TAU = 2.0 * math.pi

angles = st.floats(min_value=0.0, max_value=TAU, exclude_max=True, allow_nan=False)
coords = st.floats(min_value=-1.0, max_value=1.0, allow_nan=False)
lines = st.builds(DirectedLine, angles, coords)
points = st.builds(Point2, coords, coords)


def approx_pt(p: Point2, q: Point2, tol: float = 1e-9) -> bool:
    return p.dist(q) <= tol


class TestLineXLine:
    def test_axes_cross_at_origin(self):
        p = g.line_x_line(DirectedLine(0.0, 0.0), DirectedLine(math.pi / 2, 0.0))
        assert approx_pt(p, Point2(0.0, 0.0))

    def test_frozen_offset_axes(self):
        p = g.line_x_line(DirectedLine(0.0, 0.25), DirectedLine(math.pi / 2, 0.25))
        assert approx_pt(p, Point2(-0.25, 0.25))

    def test_parallel_rejected(self):
        with pytest.raises(NoSolutionError):
            g.line_x_line(DirectedLine(0.3, 0.1), DirectedLine(0.3, 0.4))
        with pytest.raises(NoSolutionError):
            g.line_x_line(DirectedLine(0.3, 0.1), DirectedLine(0.3 + math.pi, 0.4))

    @given(lines, lines)
    def test_residual_on_both_lines(self, l1, l2):
        if g.parallel(l1.phi, l2.phi, 1e-6):
            return
        p = g.line_x_line(l1, l2)
        assert abs(l1.signed_dist(p)) < 1e-6
        assert abs(l2.signed_dist(p)) < 1e-6


class TestLineXCircle:
    def test_two_points_ordered_along_direction(self):
        pts = g.line_x_circle(DirectedLine(0.0, 0.0), OrientedCircle(Point2(0.0, 0.0), 0.3, True))
        assert len(pts) == 2
        assert approx_pt(pts[0], Point2(-0.3, 0.0))
        assert approx_pt(pts[1], Point2(0.3, 0.0))

    def test_tangent_collapses_to_one_point(self):
        pts = g.line_x_circle(DirectedLine(0.0, 0.3), OrientedCircle(Point2(0.0, 0.0), 0.3, True))
        assert len(pts) == 1
        assert approx_pt(pts[0], Point2(0.0, 0.3))

    def test_miss_rejected(self):
        with pytest.raises(NoSolutionError):
            g.line_x_circle(DirectedLine(0.0, 0.5), OrientedCircle(Point2(0.0, 0.0), 0.3, True))

    @given(lines, points, st.floats(min_value=0.05, max_value=0.9))
    def test_residuals(self, l, c, r):
        circle = OrientedCircle(c, r, True)
        try:
            pts = g.line_x_circle(l, circle)
        except NoSolutionError:
            assert abs(l.signed_dist(c)) > r
            return
        for p in pts:
            assert abs(l.signed_dist(p)) < 1e-7
            assert abs(p.dist(c) - r) < 1e-7
        if len(pts) == 2:
            assert l.param_of(pts[0]) < l.param_of(pts[1])


class TestOffsets:
    def test_left_offset_moves_along_normal(self):
        l = g.line_offset_line(DirectedLine(0.0, 0.1), 0.2)
        assert l.d == pytest.approx(0.3)
        assert l.phi == 0.0

    def test_ccw_circle_shrinks(self):
        c = g.circle_offset_circle(OrientedCircle(Point2(0, 0), 0.4, True), 0.1)
        assert c.radius == pytest.approx(0.3)

    def test_cw_circle_grows(self):
        c = g.circle_offset_circle(OrientedCircle(Point2(0, 0), 0.4, False), 0.1)
        assert c.radius == pytest.approx(0.5)

    def test_collapse_rejected(self):
        with pytest.raises(NoSolutionError):
            g.circle_offset_circle(OrientedCircle(Point2(0, 0), 0.4, True), 0.4)
        with pytest.raises(NoSolutionError):
            g.circle_offset_circle(OrientedCircle(Point2(0, 0), 0.4, True), -0.1)

    @given(lines, st.floats(min_value=-0.5, max_value=0.5))
    def test_offset_distance_residual(self, l, off):
        moved = g.line_offset_line(l, off)
        # any point of the moved line sits at signed distance off from l
        assert abs(l.signed_dist(moved.foot()) - off) < 1e-9


class TestReverse:
    def test_frozen(self):
        r = g.line_reverse_line(DirectedLine(0.0, 0.2))
        assert r.phi == pytest.approx(math.pi)
        assert r.d == pytest.approx(-0.2)

    @given(lines)
    def test_involution_and_same_point_set(self, l):
        r = g.line_reverse_line(l)
        rr = g.line_reverse_line(r)
        assert abs(math.sin(rr.phi - l.phi)) < 1e-12
        assert rr.d == pytest.approx(l.d, abs=1e-12)
        # the reversed line contains the original foot
        assert abs(r.signed_dist(l.foot())) < 1e-12

    @given(points, st.floats(min_value=0.05, max_value=1.0), st.booleans())
    def test_circle_involution(self, c, r, ccw):
        circle = OrientedCircle(c, r, ccw)
        assert g.circle_reverse_circle(g.circle_reverse_circle(circle)) == circle


class TestSymmetry:
    def test_frozen_point_mirror(self):
        sym = DirectedLine(math.pi / 2, 0.0)  # the y axis
        q = g.point_line_sym_point(Point2(0.2, 0.3), sym)
        assert approx_pt(q, Point2(-0.2, 0.3))

    def test_frozen_line_mirror(self):
        m = g.line_sym_line_line(DirectedLine(0.0, 0.3), DirectedLine(0.0, 0.0))
        assert m.phi == pytest.approx(0.0)
        assert m.d == pytest.approx(-0.3)

    @given(points, lines)
    def test_point_involution_and_midpoint(self, p, sym):
        q = g.point_line_sym_point(p, sym)
        assert approx_pt(g.point_line_sym_point(q, sym), p, 1e-9)
        midpoint = (p + q) * 0.5
        assert abs(sym.signed_dist(midpoint)) < 1e-9

    @given(lines, lines)
    def test_line_involution(self, l, sym):
        m = g.line_sym_line_line(g.line_sym_line_line(l, sym), sym)
        assert abs(math.sin(m.phi - l.phi)) < 1e-9
        assert m.d == pytest.approx(l.d, abs=1e-9)


class TestRotationAndParallels:
    def test_frozen_rotation(self):
        r = g.line_axis_rotated_line(DirectedLine(0.0, 0.0), Point2(0.5, 0.0), math.pi / 2)
        assert r.phi == pytest.approx(math.pi / 2)
        assert r.d == pytest.approx(-0.5)

    @given(lines, points, st.floats(min_value=-3.0, max_value=3.0))
    def test_rotation_preserves_pivot_distance(self, l, pivot, a):
        r = g.line_axis_rotated_line(l, pivot, a)
        assert abs(l.signed_dist(pivot)) == pytest.approx(abs(r.signed_dist(pivot)), abs=1e-9)

    def test_frozen_datum_parallel(self):
        r = g.line_datum_parallel_line(DirectedLine(0.0, 0.3), Point2(0.1, 0.2))
        assert (r.phi, r.d) == (0.0, pytest.approx(0.2))
        r = g.line_datum_parallel_line(DirectedLine(math.pi / 2, 0.0), Point2(0.4, 0.0))
        assert r.d == pytest.approx(-0.4)

    @given(lines, points)
    def test_datum_parallel_contains_datum(self, l, p):
        r = g.line_datum_parallel_line(l, p)
        assert abs(r.signed_dist(p)) < 1e-9
        assert r.phi == l.phi

    def test_frozen_circle_tangent(self):
        r = g.line_circle_parallel_line(
            DirectedLine(0.0, -0.9), OrientedCircle(Point2(0.0, 0.5), 0.2, True)
        )
        assert r.d == pytest.approx(0.3)

    def test_reversed_input_gives_other_tangent(self):
        c = OrientedCircle(Point2(0.0, 0.5), 0.2, True)
        r = g.line_circle_parallel_line(DirectedLine(math.pi, 0.0), c)
        assert r.d == pytest.approx(-0.7)  # the line y = 0.7

    @given(lines, points, st.floats(min_value=0.05, max_value=0.8))
    def test_tangency_residual_exact(self, l, c, r):
        circle = OrientedCircle(c, r, True)
        tangent = g.line_circle_parallel_line(l, circle)
        assert tangent.signed_dist(c) == pytest.approx(r, abs=1e-12)


class TestSymOffsetPair:
    def test_frozen_pair(self):
        first, second = g.sym_line_offset_line_line(DirectedLine(math.pi / 2, 0.0), 0.3)
        assert (first.phi, first.d) == (pytest.approx(math.pi / 2), pytest.approx(0.3))
        assert (second.phi, second.d) == (pytest.approx(3 * math.pi / 2), pytest.approx(0.3))

    def test_zero_offset_rejected(self):
        with pytest.raises(NoSolutionError):
            g.sym_line_offset_line_line(DirectedLine(0.0, 0.0), 0.0)

    @given(lines, st.floats(min_value=1e-3, max_value=0.9))
    def test_pair_is_mutually_symmetric(self, sym, off):
        # the second line is the reversed mirror of the first, so that a
        # ccw traversal can use both as carriers
        first, second = g.sym_line_offset_line_line(sym, off)
        m = g.line_reverse_line(g.line_sym_line_line(first, sym))
        assert abs(math.sin(m.phi - second.phi)) < 1e-9
        assert m.d == pytest.approx(second.d, abs=1e-9)


class TestArcs:
    def test_ccw_mid(self):
        c = OrientedCircle(Point2(0.0, 0.0), 0.5, True)
        arc = g.circle_point_point_arc(c, Point2(0.5, 0.0), Point2(0.0, 0.5))
        assert approx_pt(arc.mid, Point2(0.353553, 0.353553), 1e-5)

    def test_cw_mid_takes_long_way(self):
        c = OrientedCircle(Point2(0.0, 0.0), 0.5, False)
        arc = g.circle_point_point_arc(c, Point2(0.5, 0.0), Point2(0.0, 0.5))
        assert approx_pt(arc.mid, Point2(-0.353553, -0.353553), 1e-5)

    def test_off_circle_rejected(self):
        c = OrientedCircle(Point2(0.0, 0.0), 0.5, True)
        with pytest.raises(NoSolutionError):
            g.circle_point_point_arc(c, Point2(0.6, 0.0), Point2(0.0, 0.5))

    @given(points, st.floats(min_value=0.1, max_value=0.8), angles, angles, st.booleans())
    def test_mid_on_circle_and_reversal(self, c, r, a0, a1, ccw):
        circle = OrientedCircle(c, r, ccw)
        start, end = circle.point_at(a0), circle.point_at(a1)
        if start.dist(end) < 1e-6:
            return
        arc = g.circle_point_point_arc(circle, start, end)
        assert abs(arc.mid.dist(c) - r) < 1e-9
        other = g.circle_point_point_arc(g.circle_reverse_circle(circle), end, start)
        assert approx_pt(arc.mid, other.mid, 1e-9)


class TestFillet:
    def test_frozen_corner(self):
        l1 = DirectedLine(0.0, 0.0)  # +x axis
        l2 = DirectedLine(math.pi / 2, -0.5)  # x = 0.5 pointing +y
        arc = g.line_line_fillet(l1, l2, 0.1)
        assert approx_pt(arc.start, Point2(0.4, 0.0))
        assert approx_pt(arc.end, Point2(0.5, 0.1))
        assert arc.is_ccw()
        assert approx_pt(arc.circle().center, Point2(0.4, 0.1))

    def test_parallel_rejected(self):
        with pytest.raises(NoSolutionError):
            g.line_line_fillet(DirectedLine(0.0, 0.0), DirectedLine(0.0, 0.2), 0.1)

    def test_nonpositive_radius_rejected(self):
        with pytest.raises(NoSolutionError):
            g.line_line_fillet(DirectedLine(0.0, 0.0), DirectedLine(1.0, 0.2), 0.0)

    @given(lines, lines, st.floats(min_value=0.01, max_value=0.4))
    def test_tangency_oracle(self, l1, l2, r):
        if g.parallel(l1.phi, l2.phi, 1e-3):
            return
        arc = g.line_line_fillet(l1, l2, r)
        circle = arc.circle()
        assert circle.radius == pytest.approx(r, abs=1e-7)
        # tangents: centre is at distance r from both lines, feet are the ends
        assert abs(abs(l1.signed_dist(circle.center)) - r) < 1e-7
        assert abs(abs(l2.signed_dist(circle.center)) - r) < 1e-7
        assert abs(l1.signed_dist(arc.start)) < 1e-7
        assert abs(l2.signed_dist(arc.end)) < 1e-7
        # start tangent matches l1's direction
        assert arc.tangent_at_start().dot(l1.direction()) == pytest.approx(1.0, abs=1e-6)


def test_randomized_residual_sweep():
    """1000 random instances across all ops, residuals below 1e-9."""
    rng = random.Random(20240817)
    worst = 0.0
    for _ in range(1000):
        l1 = DirectedLine(rng.uniform(0, TAU), rng.uniform(-1, 1))
        l2 = DirectedLine(rng.uniform(0, TAU), rng.uniform(-1, 1))
        c = OrientedCircle(
            Point2(rng.uniform(-0.4, 0.4), rng.uniform(-0.4, 0.4)),
            rng.uniform(0.05, 0.5),
            rng.random() < 0.5,
        )
        if not g.parallel(l1.phi, l2.phi, 1e-3):
            p = g.line_x_line(l1, l2)
            worst = max(worst, abs(l1.signed_dist(p)), abs(l2.signed_dist(p)))
        try:
            for p in g.line_x_circle(l1, c):
                worst = max(worst, abs(l1.signed_dist(p)), abs(p.dist(c.center) - c.radius))
        except NoSolutionError:
            pass
        t = g.line_circle_parallel_line(l1, c)
        worst = max(worst, abs(t.signed_dist(c.center) - c.radius))
        q = g.point_line_sym_point(Point2(rng.uniform(-1, 1), rng.uniform(-1, 1)), l2)
        worst = max(worst, abs(l2.signed_dist((q + g.point_line_sym_point(q, l2)) * 0.5)))
    assert worst < 1e-9
