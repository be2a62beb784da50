import csv
import math

import pytest

from profileforge.fixtures import i_beam, parametric_rectangle
from profileforge.geometry import (
    ArcSegment,
    BoundingBox,
    DirectedLine,
    LineSegment,
    OrientedCircle,
    Point2,
)
from profileforge.interpreter import replay
from profileforge.metrics import (
    REPORT_COLUMNS,
    bbox_iou,
    hole_center_distance,
    line_segment_metrics,
    mirror_iou,
    profile_area,
    profile_cog,
    raster_iou,
    rasterize_profile,
    score_prompt,
    score_row,
    smooth_fraction,
    step_residuals,
    summarize_rows,
    write_report_csv,
)
from profileforge.model import BoltHole
from profileforge.profile import CircleLoop, PathLoop, Profile


def pt(x, y):
    return Point2(x, y)


def polygon(*coords):
    pts = [pt(*c) for c in coords]
    return PathLoop(tuple(LineSegment(a, b) for a, b in zip(pts, pts[1:] + pts[:1])))


def square(cx=0.0, cy=0.0, half=0.3):
    return polygon(
        (cx - half, cy - half), (cx + half, cy - half), (cx + half, cy + half), (cx - half, cy + half)
    )


def circle_profile(cx, cy, r, ccw=True):
    return Profile((CircleLoop(OrientedCircle(pt(cx, cy), r, ccw)),))


def stadium():
    top = LineSegment(pt(0.3, 0.2), pt(-0.3, 0.2))
    bottom = LineSegment(pt(-0.3, -0.2), pt(0.3, -0.2))
    left = ArcSegment(pt(-0.3, 0.2), pt(-0.5, 0.0), pt(-0.3, -0.2))
    right = ArcSegment(pt(0.3, -0.2), pt(0.5, 0.0), pt(0.3, 0.2))
    return Profile((PathLoop((bottom, right, top, left)),))


class TestAreaAndCog:
    def test_circle_area_analytic(self):
        assert abs(profile_area(circle_profile(0.1, -0.2, 0.3)) - math.pi * 0.09) < 1e-9

    def test_square_minus_hole(self):
        outer = square(half=0.4)
        hole = CircleLoop(OrientedCircle(pt(0.0, 0.0), 0.1, ccw=False))
        p = Profile((outer, hole))
        assert abs(p.area() - (0.64 - math.pi * 0.01)) < 1e-12
        assert p.area() < Profile((outer,)).area()

    def test_square_cog_is_center(self):
        cog = profile_cog(Profile((square(cx=0.1, cy=-0.05),)))
        assert cog.dist(pt(0.1, -0.05)) < 1e-9

    def test_circle_cog_is_center(self):
        cog = profile_cog(circle_profile(-0.2, 0.15, 0.25))
        assert cog.dist(pt(-0.2, 0.15)) < 1e-6

    def test_hole_shifts_cog_away(self):
        outer = square(half=0.4)
        hole = CircleLoop(OrientedCircle(pt(0.2, 0.0), 0.15, ccw=False))
        cog = profile_cog(Profile((outer, hole)))
        assert cog.x < -0.01
        assert abs(cog.y) < 1e-6


class TestLineSegmentMetrics:
    def test_exact_match(self):
        p = Profile((square(half=0.3),))
        req = [LineSegment(pt(-0.3, -0.3), pt(0.3, -0.3))]
        dist, ratio = line_segment_metrics(req, p)
        assert dist < 1e-12
        assert ratio == 1.0

    def test_reversed_segment_still_matches(self):
        p = Profile((square(half=0.3),))
        req = [LineSegment(pt(0.3, -0.3), pt(-0.3, -0.3))]
        dist, ratio = line_segment_metrics(req, p)
        assert dist < 1e-12
        assert ratio == 1.0

    def test_shifted_by_0_01_is_unmatched(self):
        p = Profile((square(half=0.3),))
        req = [LineSegment(pt(-0.3, -0.31), pt(0.3, -0.31))]
        dist, ratio = line_segment_metrics(req, p)
        assert ratio == 0.0
        assert dist == 0.0

    def test_partial_match_ratio(self):
        p = Profile((square(half=0.3),))
        req = [
            LineSegment(pt(-0.3, -0.3), pt(0.3, -0.3)),
            LineSegment(pt(-0.3, 0.45), pt(0.3, 0.45)),
        ]
        _, ratio = line_segment_metrics(req, p)
        assert ratio == 0.5

    def test_non_overlapping_collinear_is_unmatched(self):
        p = Profile((square(half=0.3),))
        req = [LineSegment(pt(0.4, -0.3), pt(0.9, -0.3))]
        _, ratio = line_segment_metrics(req, p)
        assert ratio == 0.0

    def test_shorter_overlapping_segment_scores_endpoint_gap(self):
        p = Profile((square(half=0.3),))
        req = [LineSegment(pt(-0.2, -0.3), pt(0.2, -0.3))]
        dist, ratio = line_segment_metrics(req, p)
        assert ratio == 1.0
        assert abs(dist - 0.1) < 1e-12

    def test_no_requests(self):
        assert line_segment_metrics([], Profile((square(),))) == (0.0, 1.0)


class TestMirrorIoU:
    def test_symmetric_square(self):
        vsym = DirectedLine(math.pi / 2, 0.0)
        iou = mirror_iou(Profile((square(half=0.3),)), [vsym])
        assert iou is not None
        assert abs(iou - 1.0) <= 0.01

    def test_translate_sanity(self):
        a = rasterize_profile(Profile((square(cx=-0.2, half=0.2),)))
        b = rasterize_profile(Profile((square(cx=0.3, half=0.2),)))
        assert raster_iou(a, b) < 0.1

    def test_asymmetric_profile_scores_low(self):
        p = Profile((square(cx=0.25, half=0.2),))
        iou = mirror_iou(p, [DirectedLine(math.pi / 2, 0.0)])
        assert iou is not None
        assert iou < 0.1

    def test_no_symmetry_lines_absent(self):
        assert mirror_iou(Profile((square(),)), []) is None

    def test_iou_symmetry_and_identity(self):
        a = rasterize_profile(Profile((square(half=0.25),)))
        b = rasterize_profile(circle_profile(0.1, 0.0, 0.2))
        assert raster_iou(a, b) == raster_iou(b, a)
        assert raster_iou(a, a) == 1.0

    def test_hole_respected_by_even_odd_fill(self):
        solid = rasterize_profile(Profile((square(half=0.4),)))
        holed = rasterize_profile(
            Profile((square(half=0.4), CircleLoop(OrientedCircle(pt(0, 0), 0.2, ccw=False))))
        )
        assert holed.sum() < solid.sum()
        frac = (solid.sum() - holed.sum()) / solid.sum()
        assert abs(frac - math.pi * 0.04 / 0.64) < 0.01


class TestBBoxIoU:
    def test_identical(self):
        b = BoundingBox(pt(-0.2, -0.1), pt(0.3, 0.4))
        assert bbox_iou(b, b) == 1.0

    def test_disjoint(self):
        a = BoundingBox(pt(-0.4, -0.4), pt(-0.1, -0.1))
        b = BoundingBox(pt(0.1, 0.1), pt(0.4, 0.4))
        assert bbox_iou(a, b) == 0.0

    def test_half_overlap_closed_form(self):
        a = BoundingBox(pt(0.0, 0.0), pt(1.0, 1.0))
        b = BoundingBox(pt(0.5, 0.0), pt(1.5, 1.0))
        assert abs(bbox_iou(a, b) - (0.5 / 1.5)) < 1e-12


class TestSmoothFraction:
    def test_rectangle_has_no_smooth_vertices(self):
        assert smooth_fraction(Profile((square(),))) == 0.0

    def test_stadium_fully_smooth(self):
        assert smooth_fraction(stadium()) == 1.0

    def test_circle_only_profile_is_smooth(self):
        assert smooth_fraction(circle_profile(0, 0, 0.3)) == 1.0

    def test_mixed_profile_counts_joints(self):
        # one arc replacing a corner: the two arc joints are tangent, the
        # other three corners are not: 2 smooth of 5
        a_start = pt(0.3, 0.1)
        a_end = pt(0.1, 0.3)
        arc = ArcSegment(a_start, pt(0.3 - 0.2 + 0.2 * math.cos(math.pi / 4), 0.1 + 0.2 * math.sin(math.pi / 4)), a_end)
        loop = PathLoop(
            (
                LineSegment(pt(-0.3, -0.3), pt(0.3, -0.3)),
                LineSegment(pt(0.3, -0.3), a_start),
                arc,
                LineSegment(a_end, pt(-0.3, 0.3)),
                LineSegment(pt(-0.3, 0.3), pt(-0.3, -0.3)),
            )
        )
        assert abs(smooth_fraction(Profile((loop,))) - 2 / 5) < 1e-12


class TestHoleCenterDistance:
    def test_matching_hole(self):
        holes = [BoltHole(pt(0.1, 0.1), 0.05, 0.2)]
        p = Profile((square(half=0.4), CircleLoop(OrientedCircle(pt(0.1, 0.1), 0.05, False))))
        assert hole_center_distance(holes, p) == 0.0

    def test_moved_hole(self):
        holes = [BoltHole(pt(0.1, 0.1), 0.05, 0.2)]
        p = Profile((square(half=0.4), CircleLoop(OrientedCircle(pt(0.15, 0.1), 0.05, False))))
        assert abs(hole_center_distance(holes, p) - 0.05) < 1e-12

    def test_missing_hole_penalty(self):
        holes = [BoltHole(pt(0.1, 0.1), 0.05, 0.2)]
        p = Profile((square(half=0.4),))
        assert hole_center_distance(holes, p) == 1.0
        assert hole_center_distance(holes, p, missing_penalty=0.5) == 0.5

    def test_no_holes_requested(self):
        assert hole_center_distance([], Profile((square(),))) == 0.0


class TestStepResiduals:
    def test_kernel_trace_residuals_vanish(self):
        seq = i_beam()
        _, trace = replay(seq)
        stats = step_residuals(trace)
        assert stats
        assert set(stats) == {
            "SymLineOffsetLineLine",
            "LineOffsetLine",
            "LineXLine",
            "LineLineFillet",
        }
        for s in stats.values():
            assert s.count > 0
            assert s.max < 1e-12

    def test_injected_perturbation_is_recovered(self):
        seq = parametric_rectangle()
        _, trace = replay(seq)
        victim = next(r for r in trace.records if r.kind == "LineXLine")
        p = victim.outputs[0]
        victim.outputs[0] = Point2(p.x + 0.003, p.y)
        stats = step_residuals(trace)
        assert abs(stats["LineXLine"].max - 0.003) < 1e-12
        assert stats["LineXLine"].mean > 0.0

    def test_empty_trace(self):
        from profileforge.interpreter import ReplayTrace

        assert step_residuals(ReplayTrace(records=[], registers=[])) == {}


class TestRotationInvariance:
    def test_loop_start_rotation_changes_nothing(self):
        seq = i_beam()
        profile, _ = replay(seq)
        loop = profile.loops[0]
        rotated = Profile((loop.rotated(5),) + profile.loops[1:])
        assert abs(profile.area() - rotated.area()) < 1e-12
        assert profile_cog(profile).dist(profile_cog(rotated)) < 1e-12
        assert smooth_fraction(profile) == smooth_fraction(rotated)
        a = rasterize_profile(profile)
        b = rasterize_profile(rotated)
        assert raster_iou(a, b) == 1.0


class TestScoreRows:
    def test_rectangle_fixture_scores_well(self):
        seq = parametric_rectangle()
        profile, _ = replay(seq)
        score = score_prompt(seq.prompt, profile)
        assert score.area_diff < 0.02
        assert score.line_segment_ratio == 1.0
        assert score.line_segment_dist < 1e-9
        assert score.cog_dist < 0.02
        assert score.bbox_iou > 0.95
        assert score.mirror_iou is not None and score.mirror_iou > 0.99
        assert score.smooth_fraction_diff < 0.02

    def test_row_has_exact_column_names(self):
        seq = parametric_rectangle()
        profile, _ = replay(seq)
        row = score_row(seq.prompt, profile)
        assert tuple(row) == REPORT_COLUMNS
        assert row["Syntactic validity"] == 1.0
        assert row["No self-intersection"] == 1.0
        assert row["No short edges"] == 1.0

    def test_invalid_row_scores_only_validity(self):
        seq = parametric_rectangle()
        row = score_row(seq.prompt, None, syntactic_valid=False)
        assert row["Syntactic validity"] == 0.0
        assert all(row[name] is None for name in REPORT_COLUMNS[1:])

    def test_summary_and_csv(self, tmp_path):
        seq = parametric_rectangle()
        profile, _ = replay(seq)
        rows = [score_row(seq.prompt, profile), score_row(seq.prompt, None, syntactic_valid=False)]
        summary = summarize_rows(rows)
        assert summary["Syntactic validity"] == 0.5
        assert summary["No self-intersection"] == 1.0
        out = tmp_path / "report.csv"
        write_report_csv(rows, str(out))
        with open(out) as fh:
            parsed = list(csv.reader(fh))
        assert parsed[0] == ["id"] + list(REPORT_COLUMNS)
        assert len(parsed) == 3
        assert parsed[2][1] == "0.0"
        assert parsed[2][2] == ""


class TestDegenerateGuard:
    def test_cog_of_empty_area_raises(self):
        from profileforge.geometry import NoSolutionError

        zero = polygon((0.0, 0.0), (0.2, 0.0), (0.0, 0.0), (0.2, 0.0))
        with pytest.raises(NoSolutionError):
            profile_cog(Profile((zero,)))
