"""Builds a GeometricPrompt from a preprocessed profile.

The prompt carries what a designer would state up front: bound lines chosen
from the convex hull, bolt holes with clearance disks, symmetry lines, the
bounding box, area, center of gravity, complexity and a dimensioning datum.
Hull-group dropping and the datum choice are the only randomized decisions,
driven by the caller's RNG.
"""

from __future__ import annotations

import math
import random

from .geometry import (
    ArcSegment,
    DirectedLine,
    LineSegment,
    OrientedCircle,
    Point2,
    norm_angle,
)
from .metrics import profile_cog, smooth_fraction
from .model import BoltHole, GeometricPrompt
from .preprocess import ANGLE_TOL, LENGTH_TOL
from .profile import CircleLoop, Curve, PathLoop, Profile, densify_loop

HULL_SAGITTA = 1e-3


def _dist_point_curve(q: Point2, c: Curve) -> float:
    if isinstance(c, ArcSegment):
        try:
            circle = c.circle()
        except Exception:
            return min(q.dist(c.start), q.dist(c.end))
        angle = circle.angle_of(q) if q.dist(circle.center) > 1e-12 else 0.0
        on_arc = _arc_contains_angle(c, circle, angle)
        radial = abs(q.dist(circle.center) - circle.radius)
        if on_arc:
            return radial
        return min(q.dist(c.start), q.dist(c.end))
    d = c.end - c.start
    ll = d.dot(d)
    t = 0.0 if ll == 0.0 else max(0.0, min(1.0, (q - c.start).dot(d) / ll))
    foot = c.start + d * t
    return q.dist(foot)


def _arc_contains_angle(arc: ArcSegment, circle, angle: float) -> bool:
    a0 = circle.angle_of(arc.start)
    span = arc.span()
    if arc.is_ccw():
        return norm_angle(angle - a0) <= span
    return norm_angle(a0 - angle) <= span


def _dist_point_loop(q: Point2, loop) -> float:
    if isinstance(loop, CircleLoop):
        return abs(q.dist(loop.circle.center) - loop.circle.radius)
    return min(_dist_point_curve(q, c) for c in loop.curves)


def _profile_samples(p: Profile) -> list[Point2]:
    pts: list[Point2] = []
    for loop in p.loops:
        pts.extend(densify_loop(loop, max_sagitta=HULL_SAGITTA))
    return pts


def _mirror(q: Point2, line: DirectedLine) -> Point2:
    n = line.normal()
    return q + n * (2.0 * (line.d - q.dot(n)))


def _canonical_axis(phi: float, d: float) -> DirectedLine:
    phi = norm_angle(phi)
    if phi >= math.pi - 1e-12:
        phi = norm_angle(phi - math.pi)
        d = -d
    return DirectedLine(phi, d)


def _curve_matches_mirror(c: Curve, m: Curve, tol: float) -> bool:
    if isinstance(c, ArcSegment) != isinstance(m, ArcSegment):
        return False
    ends_same = c.start.dist(m.start) <= tol and c.end.dist(m.end) <= tol
    ends_flip = c.start.dist(m.end) <= tol and c.end.dist(m.start) <= tol
    if not (ends_same or ends_flip):
        return False
    if isinstance(c, ArcSegment):
        return c.mid.dist(m.mid) <= tol
    return True


def _mirror_curve(c: Curve, line: DirectedLine) -> Curve:
    if isinstance(c, ArcSegment):
        return ArcSegment(_mirror(c.start, line), _mirror(c.mid, line), _mirror(c.end, line))
    return LineSegment(_mirror(c.start, line), _mirror(c.end, line))


def _is_symmetry_line(p: Profile, line: DirectedLine, tol: float = LENGTH_TOL) -> bool:
    curves: list[Curve] = [c for _, c in p.path_curves()]
    circles = [c for _, c in p.circles()]
    used = [False] * len(curves)
    for c in curves:
        m = _mirror_curve(c, line)
        hit = None
        for j, other in enumerate(curves):
            if not used[j] and _curve_matches_mirror(other, m, tol):
                hit = j
                break
        if hit is None:
            return False
        used[hit] = True
    circ_used = [False] * len(circles)
    for c in circles:
        mc = _mirror(c.center, line)
        hit = None
        for j, other in enumerate(circles):
            if (
                not circ_used[j]
                and other.center.dist(mc) <= tol
                and abs(other.radius - c.radius) <= tol
            ):
                hit = j
                break
        if hit is None:
            return False
        circ_used[hit] = True
    return True


def detect_symmetry_lines(p: Profile) -> list[DirectedLine]:
    """Accepted mirror axes, canonicalized to phi in [0, pi) and sorted.

    Candidates are the perpendicular bisectors of outer-loop vertex pairs
    plus the horizontal and vertical axes through the bounding-box center.
    """
    box = p.bbox()
    center = box.center()
    candidates: list[DirectedLine] = [
        _canonical_axis(0.0, Point2(0.0, 1.0).dot(center)),
        _canonical_axis(math.pi / 2, Point2(-1.0, 0.0).dot(center)),
    ]
    outer = p.loops[0]
    vertices = outer.vertices() if isinstance(outer, PathLoop) else []
    for i in range(len(vertices)):
        for j in range(i + 1, len(vertices)):
            a, b = vertices[i], vertices[j]
            if a.dist(b) < LENGTH_TOL:
                continue
            mid = Point2(0.5 * (a.x + b.x), 0.5 * (a.y + b.y))
            d = b - a
            phi = math.atan2(d.y, d.x) + math.pi / 2
            axis = _canonical_axis(phi, mid.dot(DirectedLine(norm_angle(phi), 0.0).normal()))
            candidates.append(axis)

    accepted: list[DirectedLine] = []
    for cand in candidates:
        if any(
            abs(cand.phi - got.phi) <= ANGLE_TOL and abs(cand.d - got.d) <= LENGTH_TOL
            for got in accepted
        ):
            continue
        if _is_symmetry_line(p, cand):
            accepted.append(cand)
    accepted.sort(key=lambda l: (l.phi, l.d))
    return accepted


def hull_segments(p: Profile) -> list[tuple[int, LineSegment]]:
    """Outer-loop segments whose carrier supports the whole profile."""
    outer = p.loops[0]
    if not isinstance(outer, PathLoop):
        return []
    samples = _profile_samples(p)
    out: list[tuple[int, LineSegment]] = []
    for i, c in enumerate(outer.curves):
        if not isinstance(c, LineSegment):
            continue
        carrier = c.carrier()
        if all(carrier.signed_dist(q) >= -LENGTH_TOL for q in samples):
            out.append((i, c))
    return out


def _convex_hull(points: list[Point2]) -> list[Point2]:
    pts = sorted(set((p.x, p.y) for p in points))
    if len(pts) <= 2:
        return [Point2(*p) for p in pts]

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower: list = []
    for pt in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], pt) <= 0:
            lower.pop()
        lower.append(pt)
    upper: list = []
    for pt in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], pt) <= 0:
            upper.pop()
        upper.append(pt)
    return [Point2(*q) for q in lower[:-1] + upper[:-1]]


def _hull_area(points: list[Point2]) -> float:
    hull = _convex_hull(points)
    if len(hull) < 3:
        return 0.0
    area = 0.0
    for a, b in zip(hull, hull[1:] + hull[:1]):
        area += a.cross(b)
    return 0.5 * abs(area)


def _segment_orbit_groups(
    segments: list[tuple[int, LineSegment]], sym_lines: list[DirectedLine]
) -> list[list[int]]:
    """Indices into `segments`, grouped by mirror-image orbits."""
    n = len(segments)
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)

    for line in sym_lines:
        for i, (_, seg) in enumerate(segments):
            m = _mirror_curve(seg, line)
            for j, (_, other) in enumerate(segments):
                if _curve_matches_mirror(other, m, LENGTH_TOL):
                    union(i, j)
                    break
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return [groups[k] for k in sorted(groups)]


def select_bound_lines(
    segments: list[tuple[int, LineSegment]],
    sym_lines: list[DirectedLine],
    rng: random.Random,
    drop_prob: float = 0.5,
) -> list[LineSegment]:
    """Drops removable symmetric groups at random, keeps the hull intact."""
    groups = _segment_orbit_groups(segments, sym_lines)
    keep = set(range(len(segments)))
    all_endpoints = lambda idx: [q for i in sorted(idx) for q in (segments[i][1].start, segments[i][1].end)]
    full_area = _hull_area(all_endpoints(keep))
    for group in groups:
        remaining = keep - set(group)
        if not remaining:
            continue
        if _hull_area(all_endpoints(remaining)) >= full_area - 1e-9:
            if rng.random() < drop_prob:
                keep = remaining
    return [segments[i][1] for i in sorted(keep)]


def _bolt_holes(p: Profile) -> list[BoltHole]:
    holes: list[BoltHole] = []
    for i, loop in enumerate(p.loops):
        if i == 0 or not isinstance(loop, CircleLoop):
            continue
        c = loop.circle
        others = [l for j, l in enumerate(p.loops) if j != i]
        clearance = min(_dist_point_loop(c.center, l) for l in others)
        holes.append(BoltHole(c.center, c.radius, max(clearance, c.radius)))
    return holes


def _pick_datum(p: Profile, rng: random.Random) -> Point2:
    box = p.bbox()
    lo, hi = box.min_pt, box.max_pt
    corners = [Point2(lo.x, lo.y), Point2(hi.x, lo.y), Point2(hi.x, hi.y), Point2(lo.x, hi.y)]
    mids = [
        Point2(0.5 * (lo.x + hi.x), lo.y),
        Point2(hi.x, 0.5 * (lo.y + hi.y)),
        Point2(0.5 * (lo.x + hi.x), hi.y),
        Point2(lo.x, 0.5 * (lo.y + hi.y)),
    ]
    kind = rng.randrange(4)
    if kind == 0:
        return corners[rng.randrange(4)]
    if kind == 1:
        return mids[rng.randrange(4)]
    if kind == 3:
        circles = [c for _, c in p.circles()]
        if circles:
            return max(circles, key=lambda c: c.radius).center
    return box.center()


def extract_prompt(p: Profile, rng: random.Random, drop_prob: float = 0.5) -> GeometricPrompt:
    """All prompt fields from a preprocessed profile; rng drives the hull
    subset and datum choices only."""
    sym = detect_symmetry_lines(p)
    hull = hull_segments(p)
    bound = select_bound_lines(hull, sym, rng, drop_prob)
    return GeometricPrompt(
        datum=_pick_datum(p, rng),
        bbox=p.bbox(),
        area=p.area(),
        complexity=p.curve_count(),
        num_loops=len(p.loops),
        smooth_fraction=smooth_fraction(p),
        cog=profile_cog(p),
        symmetry_lines=tuple(sym),
        bound_lines=tuple(bound),
        bolt_holes=tuple(_bolt_holes(p)),
    )
