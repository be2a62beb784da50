"""Profiles: closed loops of line segments, arcs and full circles.

The first loop is the outer boundary; the remaining loops are holes.  In
canonical form the outer loop runs counter-clockwise, inner loops run
clockwise, so material always lies on the left of traversal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Union

from .geometry import (
    TAU,
    ArcSegment,
    BoundingBox,
    LineSegment,
    NoSolutionError,
    OrientedCircle,
    Point2,
    norm_angle,
)

Curve = Union[LineSegment, ArcSegment]


@dataclass(frozen=True)
class PathLoop:
    curves: tuple[Curve, ...]

    def is_closed(self, tol: float = 1e-9) -> bool:
        if not self.curves:
            return False
        for cur, nxt in zip(self.curves, self.curves[1:] + self.curves[:1]):
            if cur.end.dist(nxt.start) > tol:
                return False
        return True

    def vertices(self) -> list[Point2]:
        return [c.start for c in self.curves]

    def signed_area(self) -> float:
        """Green's theorem: vertex shoelace plus exact circular segments."""
        area = 0.0
        for c in self.curves:
            area += 0.5 * c.start.cross(c.end)
            if isinstance(c, ArcSegment):
                circle = c.circle()
                span = c.span()
                seg = 0.5 * circle.radius**2 * (span - math.sin(span))
                area += seg if c.is_ccw() else -seg
        return area

    def reversed(self) -> "PathLoop":
        return PathLoop(tuple(c.reversed() for c in reversed(self.curves)))

    def rotated(self, start: int) -> "PathLoop":
        return PathLoop(self.curves[start:] + self.curves[:start])


@dataclass(frozen=True)
class CircleLoop:
    circle: OrientedCircle

    def signed_area(self) -> float:
        a = math.pi * self.circle.radius**2
        return a if self.circle.ccw else -a

    def reversed(self) -> "CircleLoop":
        return CircleLoop(OrientedCircle(self.circle.center, self.circle.radius, not self.circle.ccw))


Loop = Union[PathLoop, CircleLoop]


@dataclass(frozen=True)
class Profile:
    loops: tuple[Loop, ...]

    def curve_count(self) -> int:
        return sum(len(l.curves) if isinstance(l, PathLoop) else 1 for l in self.loops)

    def path_curves(self) -> Iterator[tuple[int, Curve]]:
        for i, loop in enumerate(self.loops):
            if isinstance(loop, PathLoop):
                for c in loop.curves:
                    yield i, c

    def circles(self) -> Iterator[tuple[int, OrientedCircle]]:
        for i, loop in enumerate(self.loops):
            if isinstance(loop, CircleLoop):
                yield i, loop.circle

    def bbox(self) -> BoundingBox:
        boxes = [curve_bbox(c) for _, c in self.path_curves()]
        boxes += [circle_bbox(c) for _, c in self.circles()]
        if not boxes:
            raise NoSolutionError("empty profile has no bounding box")
        out = boxes[0]
        for b in boxes[1:]:
            out = out.union(b)
        return out

    def area(self) -> float:
        return sum(l.signed_area() for l in self.loops)


def curve_length(c: Curve) -> float:
    return c.length()


def arc_bbox(arc: ArcSegment) -> BoundingBox:
    circle = arc.circle()
    xs = [arc.start.x, arc.end.x]
    ys = [arc.start.y, arc.end.y]
    a0 = circle.angle_of(arc.start)
    span = arc.span() if arc.is_ccw() else -arc.span()
    for extreme in (0.0, 0.5 * math.pi, math.pi, 1.5 * math.pi):
        rel = norm_angle(extreme - a0)
        hit = rel <= span if span >= 0 else rel - TAU >= span
        if hit:
            p = circle.point_at(extreme)
            xs.append(p.x)
            ys.append(p.y)
    return BoundingBox(Point2(min(xs), min(ys)), Point2(max(xs), max(ys)))


def circle_bbox(c: OrientedCircle) -> BoundingBox:
    r = c.radius
    return BoundingBox(Point2(c.center.x - r, c.center.y - r), Point2(c.center.x + r, c.center.y + r))


def curve_bbox(c: Curve) -> BoundingBox:
    if isinstance(c, ArcSegment):
        return arc_bbox(c)
    return BoundingBox(
        Point2(min(c.start.x, c.end.x), min(c.start.y, c.end.y)),
        Point2(max(c.start.x, c.end.x), max(c.start.y, c.end.y)),
    )


def _arc_polyline(arc: ArcSegment, max_sagitta: float, max_spacing: float) -> list[Point2]:
    circle = arc.circle()
    r = circle.radius
    span = arc.span()
    theta = TAU
    if max_sagitta < r:
        theta = 2.0 * math.acos(1.0 - max_sagitta / r)
    theta = min(theta, max_spacing / r if r > 0 else TAU)
    n = max(2, int(math.ceil(span / theta)))
    a0 = circle.angle_of(arc.start)
    step = span / n if arc.is_ccw() else -span / n
    pts = [arc.start]
    for k in range(1, n):
        pts.append(circle.point_at(a0 + k * step))
    pts.append(arc.end)
    return pts


def densify_curve(c: Curve, max_sagitta: float = 1e-4, max_spacing: float = math.inf) -> list[Point2]:
    """Polyline approximation including both end points."""
    if isinstance(c, ArcSegment):
        return _arc_polyline(c, max_sagitta, max_spacing)
    if math.isfinite(max_spacing):
        n = max(1, int(math.ceil(c.length() / max_spacing)))
        return [c.start + (c.end - c.start) * (k / n) for k in range(n)] + [c.end]
    return [c.start, c.end]


def densify_circle(c: OrientedCircle, max_sagitta: float = 1e-4, max_spacing: float = math.inf) -> list[Point2]:
    """Closed polyline (first point repeated last)."""
    theta = TAU
    if max_sagitta < c.radius:
        theta = 2.0 * math.acos(1.0 - max_sagitta / c.radius)
    theta = min(theta, max_spacing / c.radius if c.radius > 0 else TAU)
    n = max(8, int(math.ceil(TAU / theta)))
    step = TAU / n if c.ccw else -TAU / n
    pts = [c.point_at(k * step) for k in range(n)]
    pts.append(pts[0])
    return pts


def densify_loop(loop: Loop, max_sagitta: float = 1e-4, max_spacing: float = math.inf) -> list[Point2]:
    if isinstance(loop, CircleLoop):
        return densify_circle(loop.circle, max_sagitta, max_spacing)
    pts: list[Point2] = []
    for c in loop.curves:
        poly = densify_curve(c, max_sagitta, max_spacing)
        pts.extend(poly[:-1])
    if loop.curves:
        pts.append(loop.curves[-1].end)
    return pts


def _pt_json(p: Point2) -> list[float]:
    return [p.x, p.y]


def _pt_from(v: list[float]) -> Point2:
    return Point2(float(v[0]), float(v[1]))


def curve_to_json(c: Curve) -> dict:
    if isinstance(c, ArcSegment):
        return {"type": "arc", "start": _pt_json(c.start), "mid": _pt_json(c.mid), "end": _pt_json(c.end)}
    return {"type": "line", "start": _pt_json(c.start), "end": _pt_json(c.end)}


def curve_from_json(d: dict) -> Curve:
    if d["type"] == "arc":
        return ArcSegment(_pt_from(d["start"]), _pt_from(d["mid"]), _pt_from(d["end"]))
    if d["type"] == "line":
        return LineSegment(_pt_from(d["start"]), _pt_from(d["end"]))
    raise ValueError(f"unknown curve type {d.get('type')!r}")


def profile_to_json(p: Profile) -> dict:
    loops = []
    for loop in p.loops:
        if isinstance(loop, CircleLoop):
            loops.append(
                {
                    "kind": "circle",
                    "center": _pt_json(loop.circle.center),
                    "radius": loop.circle.radius,
                    "ccw": loop.circle.ccw,
                }
            )
        else:
            loops.append({"kind": "path", "curves": [curve_to_json(c) for c in loop.curves]})
    return {"loops": loops}


def profile_from_json(d: dict) -> Profile:
    loops: list[Loop] = []
    for l in d["loops"]:
        if l["kind"] == "circle":
            loops.append(
                CircleLoop(OrientedCircle(_pt_from(l["center"]), float(l["radius"]), bool(l["ccw"])))
            )
        elif l["kind"] == "path":
            loops.append(PathLoop(tuple(curve_from_json(c) for c in l["curves"])))
        else:
            raise ValueError(f"unknown loop kind {l.get('kind')!r}")
    return Profile(tuple(loops))
