"""Geometric validity of profiles: self-intersection and short edges.

Curve pairs are tested with the closed-form kernel intersections, so the
detector is exact up to floating point.  Adjacent curves in a loop are
allowed to meet at their shared chain point and nowhere else; any other
contact, including tangential touching and collinear overlap, counts as a
self-intersection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .geometry import (
    TAU,
    ArcSegment,
    DirectedLine,
    LineSegment,
    NoSolutionError,
    OrientedCircle,
    Point2,
    circle_x_circle,
    line_x_circle,
    line_x_line,
)
from .profile import CircleLoop, PathLoop, Profile

MIN_EDGE_LENGTH = 1.0 / 127.0
TOUCH_TOL = 1e-7


@dataclass(frozen=True)
class Violation:
    point: Point2
    loop_a: int
    curve_a: int
    loop_b: int
    curve_b: int


@dataclass(frozen=True)
class ValidityReport:
    syntactic_valid: bool
    intersections: tuple[Violation, ...]
    short_edges: tuple[tuple[int, int], ...]

    @property
    def self_intersection_free(self) -> bool:
        return not self.intersections

    @property
    def no_short_edges(self) -> bool:
        return not self.short_edges

    def ok(self) -> bool:
        return self.syntactic_valid and self.self_intersection_free and self.no_short_edges


def short_edges(profile: Profile, min_len: float = MIN_EDGE_LENGTH) -> list[tuple[int, int]]:
    """(loop, curve) indices of curves shorter than min_len; equality passes."""
    out = []
    for li, loop in enumerate(profile.loops):
        if isinstance(loop, CircleLoop):
            if TAU * loop.circle.radius < min_len:
                out.append((li, 0))
            continue
        for ci, curve in enumerate(loop.curves):
            if curve.length() < min_len:
                out.append((li, ci))
    return out


def check_profile(profile: Profile, syntactic_valid: bool = True,
                  min_len: float = MIN_EDGE_LENGTH) -> ValidityReport:
    return ValidityReport(
        syntactic_valid=syntactic_valid,
        intersections=tuple(self_intersections(profile)),
        short_edges=tuple(short_edges(profile, min_len)),
    )


# ---------------------------------------------------------------------------
# self intersection


def _seg_param(seg: LineSegment, p: Point2) -> float:
    return (p - seg.start).dot(seg.direction())


def _seg_contains(seg: LineSegment, p: Point2) -> bool:
    t = _seg_param(seg, p)
    return -TOUCH_TOL <= t <= seg.length() + TOUCH_TOL


def _arc_circle(arc: ArcSegment) -> OrientedCircle | None:
    try:
        return arc.circle()
    except NoSolutionError:
        return None


def _arc_contains(arc: ArcSegment, circle: OrientedCircle, p: Point2) -> bool:
    slack = TOUCH_TOL / max(circle.radius, TOUCH_TOL)
    a0 = circle.angle_of(arc.start)
    a1 = circle.angle_of(arc.end)
    a = circle.angle_of(p)
    if arc.is_ccw():
        full = (a1 - a0) % TAU
        delta = (a - a0) % TAU
    else:
        full = (a0 - a1) % TAU
        delta = (a0 - a) % TAU
    return delta <= full + slack or TAU - delta <= slack


def _as_chord(arc: ArcSegment) -> LineSegment:
    # degenerate arc (collinear points after snapping); treat as its chord
    return LineSegment(arc.start, arc.end)


def _collinear_overlap(a: LineSegment, b: LineSegment) -> tuple[list[Point2], list[Point2]]:
    """(touch candidates, overlap violations) for parallel segments."""
    dir_a = a.direction()
    off = (b.start - a.start).cross(dir_a)
    if abs(off) > TOUCH_TOL:
        return [], []
    lo_b, hi_b = sorted((_seg_param(a, b.start), _seg_param(a, b.end)))
    lo = max(0.0, lo_b)
    hi = min(a.length(), hi_b)
    if hi - lo > TOUCH_TOL:
        mid = a.start + dir_a * (0.5 * (lo + hi))
        return [], [mid]
    if hi - lo >= -TOUCH_TOL:
        return [a.start + dir_a * (0.5 * (lo + hi))], []
    return [], []


def _pair_hits(c1, c2) -> tuple[list[Point2], list[Point2]]:
    """(touch candidates, overlap violations) between two curves.

    Curves are LineSegment, ArcSegment or OrientedCircle (a circle loop).
    Candidates still need the adjacency filter; overlaps never do.
    """
    if isinstance(c1, ArcSegment) and _arc_circle(c1) is None:
        c1 = _as_chord(c1)
    if isinstance(c2, ArcSegment) and _arc_circle(c2) is None:
        c2 = _as_chord(c2)
    if isinstance(c1, LineSegment) and isinstance(c2, LineSegment):
        denom = math.sin(c2.carrier().phi - c1.carrier().phi)
        if abs(denom) < 1e-9:
            return _collinear_overlap(c1, c2)
        try:
            p = line_x_line(c1.carrier(), c2.carrier())
        except NoSolutionError:
            return [], []
        if _seg_contains(c1, p) and _seg_contains(c2, p):
            return [p], []
        return [], []
    if isinstance(c2, LineSegment):
        c1, c2 = c2, c1
    if isinstance(c1, LineSegment):
        circle = c2 if isinstance(c2, OrientedCircle) else _arc_circle(c2)
        try:
            pts = line_x_circle(c1.carrier(), circle)
        except NoSolutionError:
            return [], []
        hits = [
            p
            for p in pts
            if _seg_contains(c1, p)
            and (isinstance(c2, OrientedCircle) or _arc_contains(c2, circle, p))
        ]
        return hits, []
    # two circular curves
    circle1 = c1 if isinstance(c1, OrientedCircle) else _arc_circle(c1)
    circle2 = c2 if isinstance(c2, OrientedCircle) else _arc_circle(c2)
    concentric = (
        circle1.center.dist(circle2.center) < TOUCH_TOL
        and abs(circle1.radius - circle2.radius) < TOUCH_TOL
    )
    if concentric:
        return _cocircular_overlap(c1, c2, circle1)
    pts = circle_x_circle(circle1, circle2)
    hits = [
        p
        for p in pts
        if (isinstance(c1, OrientedCircle) or _arc_contains(c1, circle1, p))
        and (isinstance(c2, OrientedCircle) or _arc_contains(c2, circle2, p))
    ]
    return hits, []


def _cocircular_overlap(c1, c2, circle: OrientedCircle) -> tuple[list[Point2], list[Point2]]:
    if isinstance(c1, OrientedCircle) and isinstance(c2, OrientedCircle):
        return [], [circle.point_at(0.0)]
    if isinstance(c1, OrientedCircle) or isinstance(c2, OrientedCircle):
        arc = c2 if isinstance(c1, OrientedCircle) else c1
        return [], [arc.mid]
    # two arcs on one circle: compare angular intervals
    slack = TOUCH_TOL / max(circle.radius, TOUCH_TOL)
    span1 = _ccw_interval(c1, circle)
    span2 = _ccw_interval(c2, circle)
    overlap = _interval_overlap(span1, span2, slack)
    touches, overlaps = [], []
    for lo, hi in overlap:
        mid = circle.point_at(0.5 * (lo + hi))
        if hi - lo > slack:
            overlaps.append(mid)
        else:
            touches.append(mid)
    return touches, overlaps


def _ccw_interval(arc: ArcSegment, circle: OrientedCircle) -> tuple[float, float]:
    a0 = circle.angle_of(arc.start)
    a1 = circle.angle_of(arc.end)
    if arc.is_ccw():
        return a0, a0 + ((a1 - a0) % TAU)
    return a1, a1 + ((a0 - a1) % TAU)


def _interval_overlap(s1: tuple[float, float], s2: tuple[float, float],
                      slack: float) -> list[tuple[float, float]]:
    out = []
    for shift in (-TAU, 0.0, TAU):
        lo = max(s1[0], s2[0] + shift)
        hi = min(s1[1], s2[1] + shift)
        if hi - lo >= -slack:
            out.append((lo, hi))
    return out


def _loop_curves(profile: Profile) -> list[tuple[int, int, object, int]]:
    flat = []
    for li, loop in enumerate(profile.loops):
        if isinstance(loop, CircleLoop):
            flat.append((li, 0, loop.circle, 1))
        else:
            for ci, curve in enumerate(loop.curves):
                flat.append((li, ci, curve, len(loop.curves)))
    return flat


def _shared_points(profile: Profile, li: int, ca: int, cb: int, n: int) -> list[Point2]:
    loop: PathLoop = profile.loops[li]
    pts = []
    if (ca + 1) % n == cb:
        pts.append(loop.curves[ca].end)
    if (cb + 1) % n == ca:
        pts.append(loop.curves[cb].end)
    return pts


def self_intersections(profile: Profile) -> list[Violation]:
    """Every improper contact point between curve pairs of the profile."""
    flat = _loop_curves(profile)
    violations = []
    for i in range(len(flat)):
        li, ci, curve_i, n_i = flat[i]
        for j in range(i + 1, len(flat)):
            lj, cj, curve_j, _ = flat[j]
            touches, overlaps = _pair_hits(curve_i, curve_j)
            allowed: list[Point2] = []
            if li == lj and n_i > 1:
                allowed = _shared_points(profile, li, ci, cj, n_i)
            for p in overlaps:
                violations.append(Violation(p, li, ci, lj, cj))
            for p in touches:
                if not any(p.dist(q) <= TOUCH_TOL * 10 for q in allowed):
                    violations.append(Violation(p, li, ci, lj, cj))
    return violations
