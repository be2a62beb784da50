"""Geometric relationship mining over a preprocessed profile.

Finds the structure the sequence builder turns into construction steps:
parallel-line groups, fillet arcs with their neighbor lines, point pairs
mirrored about symmetry lines, concentric circle groups, collinear vertex
groups, and the frequency table of recurring distances.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field

from .geometry import (
    ArcSegment,
    DirectedLine,
    LineSegment,
    NoSolutionError,
    OrientedCircle,
    Point2,
    norm_angle,
)
from .preprocess import ANGLE_TOL, LENGTH_TOL
from .profile import CircleLoop, PathLoop, Profile

# distances are considered "the same value" within the 1/127 tolerance; the
# frequency table keys them by rounded bin index
FREQ_BIN = LENGTH_TOL


def distance_bin(d: float) -> int:
    return round(d / FREQ_BIN)


@dataclass(frozen=True)
class FilletRel:
    loop: int
    curve: int  # arc position within the loop
    arc: ArcSegment
    prev_carrier: DirectedLine  # directed along the preceding segment
    next_carrier: DirectedLine
    radius: float


@dataclass(frozen=True)
class SymPair:
    axis: DirectedLine
    a: Point2
    b: Point2


@dataclass(frozen=True)
class ParallelGroup:
    """Lines sharing a direction modulo pi (within 1 degree)."""

    phi: float  # representative direction in [0, pi)
    lines: tuple[DirectedLine, ...]


@dataclass(frozen=True)
class ConcentricGroup:
    center: Point2
    circles: tuple[OrientedCircle, ...]


@dataclass
class RelationSet:
    parallel_groups: list[ParallelGroup] = field(default_factory=list)
    fillets: list[FilletRel] = field(default_factory=list)
    sym_pairs: list[SymPair] = field(default_factory=list)
    concentric_groups: list[ConcentricGroup] = field(default_factory=list)
    collinear_points: list[list[Point2]] = field(default_factory=list)
    distance_freq: Counter = field(default_factory=Counter)


def _fold_pi(phi: float) -> float:
    phi = norm_angle(phi)
    return phi - math.pi if phi >= math.pi else phi


def line_position(line: DirectedLine, group_phi: float) -> float:
    """Signed offset of a group member in the group direction's frame.

    Lines pointing along group_phi keep their d; anti-parallel members
    flip sign, so equal positions mean geometrically coincident carriers.
    """
    return line.d if math.cos(line.phi - group_phi) > 0.0 else -line.d


def _profile_vertices(p: Profile) -> list[Point2]:
    out: list[Point2] = []
    for loop in p.loops:
        if isinstance(loop, PathLoop):
            out.extend(loop.vertices())
    return out


def _profile_carriers(p: Profile) -> list[DirectedLine]:
    return [c.carrier() for _, c in p.path_curves() if isinstance(c, LineSegment)]


def _profile_circles(p: Profile) -> list[OrientedCircle]:
    """Circle loops plus the oriented circles under every arc."""
    out = [c for _, c in p.circles()]
    for _, c in p.path_curves():
        if isinstance(c, ArcSegment):
            try:
                out.append(c.circle())
            except NoSolutionError:
                pass
    return out


def _tangent_to(line: DirectedLine, circle: OrientedCircle) -> bool:
    return abs(abs(line.signed_dist(circle.center)) - circle.radius) <= LENGTH_TOL


def _find_fillets(p: Profile) -> list[FilletRel]:
    fillets = []
    for li, loop in enumerate(p.loops):
        if not isinstance(loop, PathLoop):
            continue
        n = len(loop.curves)
        for ci, c in enumerate(loop.curves):
            if not isinstance(c, ArcSegment):
                continue
            prev = loop.curves[(ci - 1) % n]
            nxt = loop.curves[(ci + 1) % n]
            if not (isinstance(prev, LineSegment) and isinstance(nxt, LineSegment)):
                continue
            try:
                circle = c.circle()
            except NoSolutionError:
                continue
            pc = prev.carrier()
            nc = nxt.carrier()
            if abs(math.sin(nc.phi - pc.phi)) <= math.sin(ANGLE_TOL):
                continue  # parallel neighbors cannot make a fillet
            if _tangent_to(pc, circle) and _tangent_to(nc, circle):
                fillets.append(FilletRel(li, ci, c, pc, nc, circle.radius))
    return fillets


def _group_parallel(lines: list[DirectedLine]) -> list[ParallelGroup]:
    groups: list[tuple[float, list[DirectedLine]]] = []
    for line in lines:
        folded = _fold_pi(line.phi)
        placed = False
        for i, (phi, members) in enumerate(groups):
            gap = abs(folded - phi)
            gap = min(gap, math.pi - gap)
            if gap <= ANGLE_TOL:
                members.append(line)
                placed = True
                break
        if not placed:
            groups.append((folded, [line]))
    return [ParallelGroup(phi, tuple(members)) for phi, members in groups]


def _dedup_lines(lines: list[DirectedLine]) -> list[DirectedLine]:
    out: list[DirectedLine] = []
    for line in lines:
        if not any(
            abs(math.sin(line.phi - got.phi)) <= math.sin(ANGLE_TOL)
            and math.cos(line.phi - got.phi) > 0.0
            and abs(line.d - got.d) <= LENGTH_TOL
            for got in out
        ):
            out.append(line)
    return out


def _sym_point_pairs(p: Profile, sym_lines: tuple[DirectedLine, ...]) -> list[SymPair]:
    pairs = []
    vertices = _profile_vertices(p)
    for axis in sym_lines:
        n = axis.normal()
        for i, a in enumerate(vertices):
            m = a + n * (2.0 * (axis.d - a.dot(n)))
            if m.dist(a) <= LENGTH_TOL:
                continue  # on the axis
            for b in vertices[i + 1 :]:
                if b.dist(m) <= LENGTH_TOL:
                    pairs.append(SymPair(axis, a, b))
                    break
    return pairs


def _concentric(p: Profile) -> list[ConcentricGroup]:
    groups: list[tuple[Point2, list[OrientedCircle]]] = []
    for c in _profile_circles(p):
        placed = False
        for center, members in groups:
            if center.dist(c.center) <= LENGTH_TOL:
                members.append(c)
                placed = True
                break
        if not placed:
            groups.append((c.center, [c]))
    return [ConcentricGroup(center, tuple(members)) for center, members in groups]


def _collinear_groups(p: Profile) -> list[list[Point2]]:
    vertices = _profile_vertices(p)
    out = []
    for carrier in _dedup_lines(_profile_carriers(p)):
        on_line = [v for v in vertices if abs(carrier.signed_dist(v)) <= LENGTH_TOL]
        if len(on_line) >= 3:
            out.append(on_line)
    return out


def analyze_relations(p: Profile, sym_lines: tuple[DirectedLine, ...] = ()) -> RelationSet:
    rel = RelationSet()
    carriers = _dedup_lines(_profile_carriers(p))
    rel.parallel_groups = _group_parallel(carriers)
    rel.fillets = _find_fillets(p)
    rel.sym_pairs = _sym_point_pairs(p, sym_lines)
    rel.concentric_groups = _concentric(p)
    rel.collinear_points = _collinear_groups(p)

    freq: Counter = Counter()
    for group in rel.parallel_groups:
        lines = group.lines
        for i in range(len(lines)):
            for j in range(i + 1, len(lines)):
                a, b = lines[i], lines[j]
                gap = abs(line_position(a, group.phi) - line_position(b, group.phi))
                if gap > LENGTH_TOL:
                    freq[distance_bin(gap)] += 1
    for group in rel.concentric_groups:
        radii = sorted({c.radius for c in group.circles})
        for i in range(len(radii)):
            for j in range(i + 1, len(radii)):
                freq[distance_bin(radii[j] - radii[i])] += 1
    for c in _profile_circles(p):
        freq[distance_bin(c.radius)] += 1
    rel.distance_freq = freq
    return rel
