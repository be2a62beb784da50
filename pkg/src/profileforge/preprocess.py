"""Normalization and cleanup that every profile passes through before
prompt extraction and sequence construction.

Canonical form after preprocess: the profile fits the unit square centered
on the origin, no curve is shorter than the 1/127 length tolerance,
adjacent collinear segments are merged, the outer loop comes first and runs
counter-clockwise, inner loops run clockwise and are sorted, and every loop
starts just after its lexicographically lowest vertex.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .geometry import (
    ArcSegment,
    LineSegment,
    NoSolutionError,
    OrientedCircle,
    Point2,
)
from .profile import CircleLoop, Curve, Loop, PathLoop, Profile

LENGTH_TOL = 1.0 / 127.0
ANGLE_TOL = math.radians(1.0)


class DegenerateProfile(ValueError):
    """The profile has no usable extent after cleanup."""


@dataclass(frozen=True)
class Transform:
    """Similarity between normalized and original coordinates."""

    scale: float  # original units per normalized unit
    offset: Point2  # original-space center

    def to_original(self, p: Point2) -> Point2:
        return Point2(p.x * self.scale + self.offset.x, p.y * self.scale + self.offset.y)

    def to_normalized(self, p: Point2) -> Point2:
        return Point2((p.x - self.offset.x) / self.scale, (p.y - self.offset.y) / self.scale)


def _map_curve(c: Curve, f) -> Curve:
    if isinstance(c, ArcSegment):
        return ArcSegment(f(c.start), f(c.mid), f(c.end))
    return LineSegment(f(c.start), f(c.end))


def _map_profile(p: Profile, f, radius_scale: float) -> Profile:
    loops: list[Loop] = []
    for loop in p.loops:
        if isinstance(loop, CircleLoop):
            c = loop.circle
            loops.append(
                CircleLoop(OrientedCircle(f(c.center), c.radius * radius_scale, c.ccw))
            )
        else:
            loops.append(PathLoop(tuple(_map_curve(c, f) for c in loop.curves)))
    return Profile(tuple(loops))


def normalize_profile(p: Profile) -> tuple[Profile, Transform]:
    """Scale and translate so the bounding box fits [-0.5, 0.5]^2."""
    if not p.loops:
        raise DegenerateProfile("profile has no loops")
    try:
        box = p.bbox()
    except NoSolutionError as e:
        raise DegenerateProfile(str(e)) from e
    extent = max(box.width(), box.height())
    if extent < 1e-12:
        raise DegenerateProfile("profile has no extent")
    center = box.center()
    transform = Transform(scale=extent, offset=center)
    return _map_profile(p, transform.to_normalized, 1.0 / extent), transform


def _drop_short_and_close_gaps(loop: PathLoop) -> PathLoop | None:
    kept = [c for c in loop.curves if c.length() >= LENGTH_TOL]
    if len(kept) < 2:
        return None
    if len(kept) == len(loop.curves):
        return loop
    n = len(kept)
    joints = [
        Point2(
            0.5 * (kept[i].end.x + kept[(i + 1) % n].start.x),
            0.5 * (kept[i].end.y + kept[(i + 1) % n].start.y),
        )
        for i in range(n)
    ]
    closed: list[Curve] = []
    for i, c in enumerate(kept):
        start = joints[i - 1]
        end = joints[i]
        if isinstance(c, ArcSegment):
            closed.append(ArcSegment(start, c.mid, end))
        else:
            closed.append(LineSegment(start, end))
    return PathLoop(tuple(closed))


def _same_direction(a: LineSegment, b: LineSegment) -> bool:
    da = a.direction()
    db = b.direction()
    return da.dot(db) > 0.0 and math.atan2(abs(da.cross(db)), da.dot(db)) <= ANGLE_TOL


def _merge_collinear(loop: PathLoop) -> PathLoop:
    curves = list(loop.curves)
    changed = True
    while changed and len(curves) > 2:
        changed = False
        for i in range(len(curves)):
            a = curves[i]
            b = curves[(i + 1) % len(curves)]
            if (
                isinstance(a, LineSegment)
                and isinstance(b, LineSegment)
                and _same_direction(a, b)
            ):
                merged = LineSegment(a.start, b.end)
                if (i + 1) % len(curves) == 0:
                    curves = [merged] + curves[1:i]
                else:
                    curves = curves[:i] + [merged] + curves[i + 2 :]
                changed = True
                break
    return PathLoop(tuple(curves))


def _rotate_to_lowest(loop: PathLoop) -> PathLoop:
    low = min(range(len(loop.curves)), key=lambda i: (loop.curves[i].end.y, loop.curves[i].end.x))
    return loop.rotated((low + 1) % len(loop.curves))


def _loop_sort_key(loop: Loop) -> tuple[float, float]:
    if isinstance(loop, CircleLoop):
        return (loop.circle.center.y - loop.circle.radius, loop.circle.center.x)
    p = loop.curves[0].end
    return (p.y, p.x)


def _oriented(loop: Loop, ccw: bool) -> Loop:
    area = loop.signed_area()
    if (area > 0.0) == ccw:
        return loop
    return loop.reversed()


def preprocess(p: Profile) -> Profile:
    """Cleanup to canonical form; raises DegenerateProfile if nothing is left."""
    cleaned: list[Loop] = []
    for loop in p.loops:
        if isinstance(loop, CircleLoop):
            if 2.0 * math.pi * loop.circle.radius >= LENGTH_TOL:
                cleaned.append(loop)
            continue
        shrunk = _drop_short_and_close_gaps(loop)
        if shrunk is None:
            continue
        merged = _merge_collinear(shrunk)
        if len(merged.curves) >= 2 and merged.is_closed(tol=LENGTH_TOL):
            cleaned.append(merged)
    if not cleaned:
        raise DegenerateProfile("no loops survive cleanup")

    outer_i = max(range(len(cleaned)), key=lambda i: abs(cleaned[i].signed_area()))
    outer = _oriented(cleaned[outer_i], ccw=True)
    inner = [_oriented(l, ccw=False) for i, l in enumerate(cleaned) if i != outer_i]

    loops = [outer] + sorted(inner, key=_loop_sort_key)
    loops = [_rotate_to_lowest(l) if isinstance(l, PathLoop) else l for l in loops]
    return Profile(tuple(loops))
