"""Closed-form 2d construction geometry.

Lines are directed and stored in Hessian normal form (phi, d): a point p
lies on the line iff dot(p, n) == d, where n = (-sin phi, cos phi) is the
left normal of the direction t = (cos phi, sin phi).  Positive offsets move
a line to the left of its direction.  A counter-clockwise circle has its
interior on the left of traversal, so a positive offset shrinks it and a
positive offset grows a clockwise circle.

Every operation either returns exact closed-form geometry or raises
NoSolutionError; nothing here iterates or approximates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

TAU = 2.0 * math.pi

# Below this |sin(dphi)| two directions count as parallel.
PARALLEL_EPS = 1e-12

# Model-unit coincidence tolerance, one quantization cell of the profile grid.
COINCIDENCE_TOL = 1.0 / 127.0


class NoSolutionError(Exception):
    """A construction has no solution for the given inputs."""


def norm_angle(a: float) -> float:
    """Map an angle to [0, tau)."""
    a = math.fmod(a, TAU)
    if a < 0.0:
        a += TAU
    if a >= TAU:
        a = 0.0
    return a


@dataclass(frozen=True, slots=True)
class Point2:
    x: float
    y: float

    def __add__(self, other: "Point2") -> "Point2":
        return Point2(self.x + other.x, self.y + other.y)

    def __sub__(self, other: "Point2") -> "Point2":
        return Point2(self.x - other.x, self.y - other.y)

    def __mul__(self, s: float) -> "Point2":
        return Point2(self.x * s, self.y * s)

    __rmul__ = __mul__

    def dot(self, other: "Point2") -> float:
        return self.x * other.x + self.y * other.y

    def cross(self, other: "Point2") -> float:
        return self.x * other.y - self.y * other.x

    def norm(self) -> float:
        return math.hypot(self.x, self.y)

    def dist(self, other: "Point2") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)

    def perp_ccw(self) -> "Point2":
        """Rotate by +90 degrees."""
        return Point2(-self.y, self.x)


@dataclass(frozen=True, slots=True)
class DirectedLine:
    """Infinite directed line in Hessian normal form."""

    phi: float
    d: float

    def direction(self) -> Point2:
        return Point2(math.cos(self.phi), math.sin(self.phi))

    def normal(self) -> Point2:
        return Point2(-math.sin(self.phi), math.cos(self.phi))

    def eval_at(self, t: float) -> Point2:
        """Point at arc-length t from the foot of the origin perpendicular."""
        return self.foot() + self.direction() * t

    def foot(self) -> Point2:
        """The point of the line closest to the origin."""
        return self.normal() * self.d

    def signed_dist(self, p: Point2) -> float:
        """Positive when p is on the left of the line."""
        return p.dot(self.normal()) - self.d

    def project(self, p: Point2) -> Point2:
        """Foot of the perpendicular from p."""
        return p - self.normal() * self.signed_dist(p)

    def param_of(self, p: Point2) -> float:
        """Arc-length coordinate of p projected onto the line."""
        return p.dot(self.direction())


@dataclass(frozen=True, slots=True)
class OrientedCircle:
    center: Point2
    radius: float
    ccw: bool

    def point_at(self, angle: float) -> Point2:
        return self.center + Point2(math.cos(angle), math.sin(angle)) * self.radius

    def angle_of(self, p: Point2) -> float:
        return math.atan2(p.y - self.center.y, p.x - self.center.x)


@dataclass(frozen=True, slots=True)
class LineSegment:
    start: Point2
    end: Point2

    def length(self) -> float:
        return self.start.dist(self.end)

    def direction(self) -> Point2:
        d = self.end - self.start
        n = d.norm()
        if n == 0.0:
            raise NoSolutionError("degenerate segment")
        return d * (1.0 / n)

    def carrier(self) -> DirectedLine:
        """Infinite line through the segment, directed start to end."""
        t = self.direction()
        phi = norm_angle(math.atan2(t.y, t.x))
        line = DirectedLine(phi, 0.0)
        return DirectedLine(phi, self.start.dot(line.normal()))

    def reversed(self) -> "LineSegment":
        return LineSegment(self.end, self.start)


@dataclass(frozen=True, slots=True)
class ArcSegment:
    """Circular arc fixed by its start, mid and end points.

    The mid point sits on the arc strictly between the ends, so the three
    points are never collinear and the traversal direction is implied.
    """

    start: Point2
    mid: Point2
    end: Point2

    def circle(self) -> OrientedCircle:
        center, radius = circumcircle(self.start, self.mid, self.end)
        return OrientedCircle(center, radius, self.is_ccw())

    def is_ccw(self) -> bool:
        return (self.mid - self.start).cross(self.end - self.mid) > 0.0

    def span(self) -> float:
        """Traversed central angle in (0, tau), independent of direction."""
        c = self.circle()
        a0 = c.angle_of(self.start)
        a1 = c.angle_of(self.end)
        if self.is_ccw():
            s = norm_angle(a1 - a0)
        else:
            s = norm_angle(a0 - a1)
        return s if s > 0.0 else TAU

    def length(self) -> float:
        return self.circle().radius * self.span()

    def reversed(self) -> "ArcSegment":
        return ArcSegment(self.end, self.mid, self.start)

    def tangent_at_start(self) -> Point2:
        r = self.start - self.circle().center
        t = r.perp_ccw() * (1.0 / r.norm())
        return t if self.is_ccw() else t * -1.0

    def tangent_at_end(self) -> Point2:
        r = self.end - self.circle().center
        t = r.perp_ccw() * (1.0 / r.norm())
        return t if self.is_ccw() else t * -1.0


@dataclass(frozen=True, slots=True)
class BoundingBox:
    min_pt: Point2
    max_pt: Point2

    def width(self) -> float:
        return self.max_pt.x - self.min_pt.x

    def height(self) -> float:
        return self.max_pt.y - self.min_pt.y

    def center(self) -> Point2:
        return Point2(
            0.5 * (self.min_pt.x + self.max_pt.x),
            0.5 * (self.min_pt.y + self.max_pt.y),
        )

    def area(self) -> float:
        return max(0.0, self.width()) * max(0.0, self.height())

    def union(self, other: "BoundingBox") -> "BoundingBox":
        return BoundingBox(
            Point2(min(self.min_pt.x, other.min_pt.x), min(self.min_pt.y, other.min_pt.y)),
            Point2(max(self.max_pt.x, other.max_pt.x), max(self.max_pt.y, other.max_pt.y)),
        )


def circumcircle(a: Point2, b: Point2, c: Point2) -> tuple[Point2, float]:
    """Center and radius of the circle through three points."""
    ab = b - a
    ac = c - a
    d = 2.0 * ab.cross(ac)
    if abs(d) < 1e-15:
        raise NoSolutionError("collinear points have no circumcircle")
    # solved relative to a: absolute coordinates cancel out of the center,
    # so keeping them in the sums only sheds precision far from the origin
    abb = ab.dot(ab)
    acc = ac.dot(ac)
    ux = (ac.y * abb - ab.y * acc) / d
    uy = (ab.x * acc - ac.x * abb) / d
    return a + Point2(ux, uy), math.hypot(ux, uy)


def parallel(phi_a: float, phi_b: float, eps: float = PARALLEL_EPS) -> bool:
    return abs(math.sin(phi_b - phi_a)) <= eps


def line_x_line(l1: DirectedLine, l2: DirectedLine) -> Point2:
    """Intersection of two non-parallel lines."""
    det = math.sin(l2.phi - l1.phi)
    if abs(det) <= PARALLEL_EPS:
        raise NoSolutionError("parallel lines do not intersect")
    c1, s1 = math.cos(l1.phi), math.sin(l1.phi)
    c2, s2 = math.cos(l2.phi), math.sin(l2.phi)
    x = (l1.d * c2 - c1 * l2.d) / det
    y = (s2 * l1.d - s1 * l2.d) / det
    return Point2(x, y)


def line_x_circle(l: DirectedLine, c: OrientedCircle) -> list[Point2]:
    """Line/circle intersection, ordered along the line direction.

    Tangency collapses to a single point.  The centre may overshoot the
    radius by 1e-12 before the intersection is declared empty.
    """
    offset = l.signed_dist(c.center)
    if abs(offset) > c.radius + 1e-12:
        raise NoSolutionError("line misses circle")
    foot = c.center - l.normal() * offset
    half = math.sqrt(max(c.radius * c.radius - offset * offset, 0.0))
    if half < 1e-9:
        return [foot]
    t = l.direction()
    return [foot - t * half, foot + t * half]


def circle_x_circle(a: OrientedCircle, b: OrientedCircle) -> list[Point2]:
    """Circle/circle intersection; empty for concentric or distant pairs.

    Tangency collapses to a single point, with 1e-12 of slack before the
    intersection is declared empty.
    """
    delta = b.center - a.center
    d = delta.norm()
    if d < PARALLEL_EPS:
        return []
    if d > a.radius + b.radius + 1e-12 or d < abs(a.radius - b.radius) - 1e-12:
        return []
    along = (d * d + a.radius * a.radius - b.radius * b.radius) / (2.0 * d)
    half = math.sqrt(max(a.radius * a.radius - along * along, 0.0))
    axis = delta * (1.0 / d)
    foot = a.center + axis * along
    # the radicand cancels badly near tangency, so the collapse window is
    # wider than the line/circle one
    if half < 1e-7:
        return [foot]
    off = axis.perp_ccw() * half
    return [foot - off, foot + off]


def line_offset_line(l: DirectedLine, offset: float) -> DirectedLine:
    """Parallel line moved by offset to the left of the direction."""
    return DirectedLine(l.phi, l.d + offset)


def circle_offset_circle(c: OrientedCircle, offset: float) -> OrientedCircle:
    """Concentric circle moved by offset to the left of traversal."""
    if offset <= 0.0:
        raise NoSolutionError("circle offset must be positive")
    radius = c.radius - offset if c.ccw else c.radius + offset
    if radius <= 0.0:
        raise NoSolutionError("circle offset collapses the circle")
    return OrientedCircle(c.center, radius, c.ccw)


def line_reverse_line(l: DirectedLine) -> DirectedLine:
    return DirectedLine(norm_angle(l.phi + math.pi), -l.d)


def circle_reverse_circle(c: OrientedCircle) -> OrientedCircle:
    return OrientedCircle(c.center, c.radius, not c.ccw)


def point_line_sym_point(p: Point2, sym: DirectedLine) -> Point2:
    """Mirror image of p across sym."""
    return p - sym.normal() * (2.0 * sym.signed_dist(p))


def line_sym_line_line(l: DirectedLine, sym: DirectedLine) -> DirectedLine:
    """Mirror image of l across sym, direction reflected as well."""
    phi = norm_angle(2.0 * sym.phi - l.phi)
    p = point_line_sym_point(l.foot(), sym)
    out = DirectedLine(phi, 0.0)
    return DirectedLine(phi, p.dot(out.normal()))


def line_axis_rotated_line(l: DirectedLine, pivot: Point2, angle: float) -> DirectedLine:
    """Rotate l by angle about pivot."""
    phi = norm_angle(l.phi + angle)
    rel = l.foot() - pivot
    ca, sa = math.cos(angle), math.sin(angle)
    p = pivot + Point2(rel.x * ca - rel.y * sa, rel.x * sa + rel.y * ca)
    out = DirectedLine(phi, 0.0)
    return DirectedLine(phi, p.dot(out.normal()))


def line_datum_parallel_line(l: DirectedLine, datum: Point2) -> DirectedLine:
    """Line through datum parallel to l, same direction."""
    return DirectedLine(l.phi, datum.dot(l.normal()))


def line_circle_parallel_line(l: DirectedLine, c: OrientedCircle) -> DirectedLine:
    """Tangent to c parallel to l, chosen so the circle lies on the left."""
    if c.radius <= 0.0:
        raise NoSolutionError("degenerate circle has no tangent")
    return DirectedLine(l.phi, c.center.dot(l.normal()) - c.radius)


def sym_line_offset_line_line(sym: DirectedLine, offset: float) -> tuple[DirectedLine, DirectedLine]:
    """Pair of lines mirror-symmetric about sym at the given offset.

    The first keeps sym's direction, the second is the reverse of the
    opposite offset, so the pair is a mirror image of itself.
    """
    if offset <= 0.0:
        raise NoSolutionError("symmetric offset must be positive")
    first = line_offset_line(sym, offset)
    second = line_reverse_line(line_offset_line(sym, -offset))
    return first, second


def point_radius_circle(center: Point2, radius: float, ccw: bool) -> OrientedCircle:
    if radius <= 0.0:
        raise NoSolutionError("circle radius must be positive")
    return OrientedCircle(center, radius, ccw)


def circle_point_point_arc(c: OrientedCircle, start: Point2, end: Point2) -> ArcSegment:
    """Arc of c from start to end following c's orientation.

    The ends must sit on c within the coincidence tolerance; the returned
    mid point sits exactly on c at the angular midpoint.
    """
    for p in (start, end):
        if abs(p.dist(c.center) - c.radius) > COINCIDENCE_TOL:
            raise NoSolutionError("arc end point is not on the circle")
    a0 = c.angle_of(start)
    a1 = c.angle_of(end)
    if c.ccw:
        span = norm_angle(a1 - a0)
    else:
        span = -norm_angle(a0 - a1)
    if span == 0.0:
        raise NoSolutionError("arc end points coincide")
    mid = c.point_at(a0 + 0.5 * span)
    return ArcSegment(start, mid, end)


def line_line_fillet(l1: DirectedLine, l2: DirectedLine, radius: float) -> ArcSegment:
    """Fillet arc of the given radius tangent to both lines.

    The centre is the intersection of the two left offsets.  The arc runs
    from its tangent point on l1 to its tangent point on l2 and is oriented
    so the tangent at the start equals l1's direction.
    """
    if radius <= 0.0:
        raise NoSolutionError("fillet radius must be positive")
    center = line_x_line(line_offset_line(l1, radius), line_offset_line(l2, radius))
    start = l1.project(center)
    end = l2.project(center)
    spoke = start - center
    ccw = spoke.perp_ccw().dot(l1.direction()) > 0.0
    circle = OrientedCircle(center, radius, ccw)
    a0 = circle.angle_of(start)
    a1 = circle.angle_of(end)
    span = norm_angle(a1 - a0) if ccw else -norm_angle(a0 - a1)
    mid = circle.point_at(a0 + 0.5 * span)
    return ArcSegment(start, mid, end)
