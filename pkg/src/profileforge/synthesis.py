"""Seeded synthetic profiles for corpus generation.

Every family is built from coarse dimension grids inside the unit frame
(x spans exactly [-0.5, 0.5], y is centered), which keeps normalization an
exact identity and keeps features clear of the coarse hash grid lines.
All families stick to geometry the step catalog can rebuild: axis-aligned
edges, 45-degree notches and chamfers, corner fillets, round holes.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .extractor import ExtractionResult, try_extract
from .geometry import ArcSegment, LineSegment, OrientedCircle, Point2
from .graphhash import profile_graph_hash, split_by_hash
from .profile import CircleLoop, PathLoop, Profile


def _P(x: float, y: float) -> Point2:
    return Point2(x, y)


def _polygon(pts: list[Point2]) -> PathLoop:
    return PathLoop(
        tuple(LineSegment(pts[i], pts[(i + 1) % len(pts)]) for i in range(len(pts)))
    )


def _rect(h: float) -> list[Point2]:
    return [_P(-0.5, -h / 2), _P(0.5, -h / 2), _P(0.5, h / 2), _P(-0.5, h / 2)]


HEIGHTS = (0.4, 0.6, 0.7, 0.8, 0.9, 1.0)
FILLET_RADII = (0.05, 0.08, 0.11, 0.14)
CHAMFERS = (0.08, 0.13, 0.18)
HOLE_RADII = (0.06, 0.09, 0.11)
NOTCH_DEPTHS = (0.1, 0.15, 0.2)


def _rectangle(rng: random.Random) -> Profile:
    return Profile((_polygon(_rect(rng.choice(HEIGHTS))),))


def _fillet_corner(a: Point2, corner: Point2, b: Point2, r: float) -> list:
    """Arc replacing the corner, with trimmed neighbour endpoints."""

    def toward(p: Point2, q: Point2, dist: float) -> Point2:
        d = q - p
        n = (d.x**2 + d.y**2) ** 0.5
        return _P(p.x + d.x / n * dist, p.y + d.y / n * dist)

    start = toward(corner, a, r)
    end = toward(corner, b, r)
    mid_dir = _P(
        (start.x + end.x) / 2 - corner.x, (start.y + end.y) / 2 - corner.y
    )
    n = (mid_dir.x**2 + mid_dir.y**2) ** 0.5
    # circle center sits r*sqrt(2) along the bisector for a right angle
    cx = corner.x + mid_dir.x / n * r * 2**0.5
    cy = corner.y + mid_dir.y / n * r * 2**0.5
    mx = cx - mid_dir.x / n * r
    my = cy - mid_dir.y / n * r
    return [start, ArcSegment(start, _P(mx, my), end), end]


def _filleted_plate(rng: random.Random) -> Profile:
    h = rng.choice(HEIGHTS)
    r = rng.choice([v for v in FILLET_RADII if v < h / 2 - 0.05])
    pts = _rect(h)
    curves: list = []
    pieces = []
    for i, corner in enumerate(pts):
        a = pts[(i - 1) % 4]
        b = pts[(i + 1) % 4]
        pieces.append(_fillet_corner(a, corner, b, r))
    for i in range(4):
        curves.append(LineSegment(pieces[i][2], pieces[(i + 1) % 4][0]))
        curves.append(pieces[(i + 1) % 4][1])
    return Profile((PathLoop(tuple(curves)),))


def _chamfered_plate(rng: random.Random) -> Profile:
    """All four corners cut at 45 degrees, keeping both mirror axes."""
    h = rng.choice([v for v in HEIGHTS if v >= 0.6])
    c = rng.choice([v for v in CHAMFERS if v < h / 2 - 0.05])
    y = h / 2
    pts = [
        _P(-0.5 + c, -y), _P(0.5 - c, -y), _P(0.5, -y + c),
        _P(0.5, y - c), _P(0.5 - c, y), _P(-0.5 + c, y),
        _P(-0.5, y - c), _P(-0.5, -y + c),
    ]
    return Profile((_polygon(pts),))


def _holed_plate(rng: random.Random) -> Profile:
    h = rng.choice([v for v in HEIGHTS if v >= 0.6])
    count = rng.randrange(1, 4)
    xs = {1: (0.0,), 2: (-0.23, 0.23), 3: (-0.32, 0.0, 0.32)}[count]
    r = rng.choice([v for v in HOLE_RADII if v < h / 2 - 0.1])
    loops = [_polygon(_rect(h))]
    for x in xs:
        loops.append(CircleLoop(OrientedCircle(_P(x, 0.0), r, False)))
    return Profile(tuple(loops))


def _notched_plate(rng: random.Random) -> Profile:
    h = rng.choice([v for v in HEIGHTS if v >= 0.6])
    d = rng.choice([v for v in NOTCH_DEPTHS if v < h - 0.2])
    y = h / 2
    pts = [
        _P(-0.5, -y), _P(0.5, -y), _P(0.5, y),
        _P(d, y), _P(0.0, y - d), _P(-d, y),
        _P(-0.5, y),
    ]
    return Profile((_polygon(pts),))


def _beam(rng: random.Random) -> Profile:
    flange = rng.choice((0.14, 0.19, 0.24))
    web = rng.choice((0.16, 0.22, 0.28))
    h = rng.choice((0.8, 0.9, 1.0))
    y, w = h / 2, web / 2
    pts = [
        _P(-0.5, -y), _P(0.5, -y), _P(0.5, -y + flange), _P(w, -y + flange),
        _P(w, y - flange), _P(0.5, y - flange), _P(0.5, y),
        _P(-0.5, y), _P(-0.5, y - flange), _P(-w, y - flange),
        _P(-w, -y + flange), _P(-0.5, -y + flange),
    ]
    return Profile((_polygon(pts),))


def _channel(rng: random.Random) -> Profile:
    h = rng.choice((0.6, 0.8, 1.0))
    t = rng.choice((0.14, 0.18, 0.22))
    y = h / 2
    pts = [
        _P(-0.5, -y), _P(0.5, -y), _P(0.5, y), _P(0.5 - t, y),
        _P(0.5 - t, -y + t), _P(-0.5 + t, -y + t), _P(-0.5 + t, y),
        _P(-0.5, y),
    ]
    return Profile((_polygon(pts),))


def _ring(rng: random.Random) -> Profile:
    inner = rng.choice((0.12, 0.17, 0.22))
    loops: list = [CircleLoop(OrientedCircle(_P(0.0, 0.0), 0.5, True))]
    if rng.random() < 0.7:
        loops.append(CircleLoop(OrientedCircle(_P(0.0, 0.0), inner, False)))
    return Profile(tuple(loops))


def _l_plate(rng: random.Random) -> Profile:
    h = rng.choice((0.7, 0.9, 1.0))
    cut_w = rng.choice((0.3, 0.45, 0.6))
    cut_h = rng.choice([v for v in (0.2, 0.3, 0.4) if v < h - 0.15])
    y = h / 2
    pts = [
        _P(-0.5, -y), _P(0.5, -y), _P(0.5, y - cut_h),
        _P(0.5 - cut_w, y - cut_h), _P(0.5 - cut_w, y), _P(-0.5, y),
    ]
    return Profile((_polygon(pts),))


def _cross(rng: random.Random) -> Profile:
    arm = rng.choice((0.14, 0.19, 0.24))
    h = rng.choice((0.8, 1.0))
    y, a = h / 2, arm / 2
    pts = [
        _P(-a, -y), _P(a, -y), _P(a, -a), _P(0.5, -a), _P(0.5, a),
        _P(a, a), _P(a, y), _P(-a, y), _P(-a, a), _P(-0.5, a),
        _P(-0.5, -a), _P(-a, -a),
    ]
    return Profile((_polygon(pts),))


def _swap_axes(p: Profile) -> Profile:
    """The profile mirrored across y=x; heights become widths."""

    def m(q: Point2) -> Point2:
        return _P(q.y, q.x)

    loops: list = []
    for loop in p.loops:
        if isinstance(loop, CircleLoop):
            c = loop.circle
            loops.append(CircleLoop(OrientedCircle(m(c.center), c.radius, c.ccw)))
            continue
        curves: list = []
        for c in loop.curves:
            if isinstance(c, ArcSegment):
                curves.append(ArcSegment(m(c.start), m(c.mid), m(c.end)))
            else:
                curves.append(LineSegment(m(c.start), m(c.end)))
        loops.append(PathLoop(tuple(curves)))
    return Profile(tuple(loops))


FAMILIES = (
    _rectangle,
    _filleted_plate,
    _chamfered_plate,
    _holed_plate,
    _notched_plate,
    _beam,
    _channel,
    _ring,
    _l_plate,
    _cross,
)


def synth_profile(rng: random.Random) -> Profile:
    p = rng.choice(FAMILIES)(rng)
    if rng.random() < 0.5:
        p = _swap_axes(p)
    return p


def synth_corpus(n: int, seed: int = 0) -> list[Profile]:
    """n seeded profiles drawn from all families; repeats are possible
    and removed later by hash dedup."""
    rng = random.Random(seed)
    return [synth_profile(rng) for _ in range(n)]


def distinct_corpus(n: int, seed: int = 0) -> list[Profile]:
    """n profiles with pairwise distinct coarse graph hashes."""
    rng = random.Random(seed)
    out: list[Profile] = []
    seen: set[str] = set()
    attempts = 0
    while len(out) < n:
        attempts += 1
        if attempts > 500 * n:
            raise RuntimeError(f"only found {len(out)} distinct profiles of {n}")
        p = synth_profile(rng)
        h = profile_graph_hash(p)
        if h in seen:
            continue
        seen.add(h)
        out.append(p)
    return out


def congruent_copy(p: Profile, rng: random.Random) -> Profile:
    """A scaled/translated/reindexed copy that hashes like the original.

    Scale factors and offsets are dyadic so normalization reproduces the
    source coordinates bit for bit.
    """
    s = rng.choice((0.5, 2.0, 4.0))
    tx = rng.choice((-2.0, -0.5, 0.25, 1.0, 3.0))
    ty = rng.choice((-1.5, -0.25, 0.5, 2.0))

    def m(q: Point2) -> Point2:
        return _P(q.x * s + tx, q.y * s + ty)

    loops = []
    for loop in p.loops:
        if isinstance(loop, CircleLoop):
            c = loop.circle
            loops.append(CircleLoop(OrientedCircle(m(c.center), c.radius * s, c.ccw)))
            continue
        curves = []
        for c in loop.curves:
            if isinstance(c, ArcSegment):
                curves.append(ArcSegment(m(c.start), m(c.mid), m(c.end)))
            else:
                curves.append(LineSegment(m(c.start), m(c.end)))
        new = PathLoop(tuple(curves))
        if len(new.curves) > 1:
            new = new.rotated(rng.randrange(len(new.curves)))
        loops.append(new)
    return Profile(tuple(loops))


def inject_duplicates(
    profiles: list[Profile], fraction: float, seed: int = 0
) -> tuple[list[Profile], int]:
    """Corpus with congruent copies appended; returns (corpus, copy count)."""
    rng = random.Random(seed)
    k = round(len(profiles) * fraction)
    picks = rng.sample(range(len(profiles)), k)
    out = list(profiles)
    for i in picks:
        out.append(congruent_copy(profiles[i], rng))
    return out, k


@dataclass
class CorpusEntry:
    index: int
    result: ExtractionResult
    hash: str


@dataclass
class CorpusReport:
    entries: list[CorpusEntry]
    failures: list[tuple[int, str]]
    duplicates_dropped: int
    splits: dict[str, list[int]]

    def completion_rate(self) -> float:
        total = len(self.entries) + len(self.failures)
        return len(self.entries) / total if total else 0.0


def build_corpus(
    profiles: list[Profile], seed: int = 0, drop_prob: float = 0.5
) -> CorpusReport:
    """Extract every profile, drop hash duplicates, split the survivors."""
    extracted: list[tuple[int, ExtractionResult]] = []
    failures: list[tuple[int, str]] = []
    for i, p in enumerate(profiles):
        res, err = try_extract(p, seed=seed + i, drop_prob=drop_prob)
        if err is None:
            extracted.append((i, res))
        else:
            failures.append((i, err))

    entries: list[CorpusEntry] = []
    seen: set[str] = set()
    duplicates = 0
    for i, res in extracted:
        h = profile_graph_hash(res.sequence.profile)
        if h in seen:
            duplicates += 1
            continue
        seen.add(h)
        entries.append(CorpusEntry(i, res, h))
    splits = split_by_hash([e.hash for e in entries])
    return CorpusReport(
        entries=entries,
        failures=failures,
        duplicates_dropped=duplicates,
        splits=splits,
    )
