"""Scores a profile against the prompt that requested it.

Validity (self-intersection, short edges) lives in validity.py; this module
adds the prompt-satisfaction distances, the raster mirror IoU, and per-step
numeric residuals of a replay trace.  All functions are pure.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .geometry import (
    ArcSegment,
    BoundingBox,
    DirectedLine,
    LineSegment,
    NoSolutionError,
    OrientedCircle,
    Point2,
)
from .interpreter import ReplayTrace, _run_step
from .model import BoltHole, GeometricPrompt, Geometry, Step
from .profile import Curve, PathLoop, Profile, densify_loop
from .validity import MIN_EDGE_LENGTH, check_profile

ANGLE_TOL = math.radians(1.0)
# collinearity offset tolerance: the same 1/127 bin that sets the minimum
# edge length, so a segment shifted by one bin or more is a different line
OFFSET_TOL = MIN_EDGE_LENGTH
RASTER_SIZE = 1024
RASTER_SAGITTA = 1e-3
COG_SAGITTA = 1e-4


def profile_area(p: Profile) -> float:
    return p.area()


def profile_cog(p: Profile, max_sagitta: float = COG_SAGITTA) -> Point2:
    """Area centroid from the densified boundary (holes subtract)."""
    area2 = 0.0  # twice the signed area
    cx = 0.0
    cy = 0.0
    for loop in p.loops:
        pts = densify_loop(loop, max_sagitta=max_sagitta)
        for a, b in zip(pts, pts[1:]):
            w = a.cross(b)
            area2 += w
            cx += (a.x + b.x) * w
            cy += (a.y + b.y) * w
    if abs(area2) < 1e-12:
        raise NoSolutionError("profile area vanishes, centroid undefined")
    return Point2(cx / (3.0 * area2), cy / (3.0 * area2))


def _wrap_pi(a: float) -> float:
    return math.atan2(math.sin(a), math.cos(a))


def _undirected_angle_gap(a: float, b: float) -> float:
    d = (a - b) % math.pi
    return min(d, math.pi - d)


def _segment_match_distance(req: LineSegment, cand: LineSegment) -> float | None:
    """None unless cand is collinear with and overlaps req; else endpoint score."""
    gap = _undirected_angle_gap(req.carrier().phi, cand.carrier().phi)
    if gap > ANGLE_TOL:
        return None
    direction = req.direction()
    normal = direction.perp_ccw()
    rel0 = cand.start - req.start
    rel1 = cand.end - req.start
    if abs(rel0.dot(normal)) > OFFSET_TOL or abs(rel1.dot(normal)) > OFFSET_TOL:
        return None
    t0, t1 = sorted((rel0.dot(direction), rel1.dot(direction)))
    if min(req.length(), t1) - max(0.0, t0) <= 1e-9:
        return None
    same = 0.5 * (req.start.dist(cand.start) + req.end.dist(cand.end))
    flipped = 0.5 * (req.start.dist(cand.end) + req.end.dist(cand.start))
    return min(same, flipped)


def line_segment_metrics(
    bound_lines: Sequence[LineSegment], p: Profile
) -> tuple[float, float]:
    """(mean endpoint distance over matches, matched fraction).

    A profile segment matches a requested one when the carriers agree within
    1 degree and OFFSET_TOL and their projections overlap; each request
    keeps its best match.  No requests -> (0.0, 1.0).
    """
    if not bound_lines:
        return 0.0, 1.0
    candidates = [c for _, c in p.path_curves() if isinstance(c, LineSegment)]
    dists = []
    for req in bound_lines:
        scores = [s for c in candidates if (s := _segment_match_distance(req, c)) is not None]
        if scores:
            dists.append(min(scores))
    ratio = len(dists) / len(bound_lines)
    return (sum(dists) / len(dists) if dists else 0.0), ratio


def _loop_polylines(p: Profile, max_sagitta: float) -> list[list[Point2]]:
    return [densify_loop(loop, max_sagitta=max_sagitta) for loop in p.loops]


def _rasterize(polylines: Iterable[list[Point2]], n: int) -> np.ndarray:
    """Even-odd fill over [-0.5, 0.5]^2 sampled at pixel centers."""
    centers = -0.5 + (np.arange(n) + 0.5) / n
    toggles = np.zeros((n, n + 1), dtype=np.int32)
    for pts in polylines:
        for a, b in zip(pts, pts[1:]):
            if a.y == b.y:
                continue
            rows = (a.y <= centers) != (b.y <= centers)
            if not rows.any():
                continue
            yc = centers[rows]
            xc = a.x + (yc - a.y) * (b.x - a.x) / (b.y - a.y)
            cols = np.searchsorted(centers, xc)
            np.add.at(toggles, (np.nonzero(rows)[0], cols), 1)
    return (np.cumsum(toggles, axis=1)[:, :n] % 2).astype(bool)


def rasterize_profile(
    p: Profile, n: int = RASTER_SIZE, max_sagitta: float = RASTER_SAGITTA
) -> np.ndarray:
    return _rasterize(_loop_polylines(p, max_sagitta), n)


def raster_iou(a: np.ndarray, b: np.ndarray) -> float:
    union = np.logical_or(a, b).sum()
    if union == 0:
        return 1.0
    return float(np.logical_and(a, b).sum() / union)


def _reflect_point(p: Point2, line: DirectedLine) -> Point2:
    n = line.normal()
    return p + n * (2.0 * (line.d - p.dot(n)))


def mirror_iou(
    p: Profile, sym_lines: Sequence[DirectedLine], n: int = RASTER_SIZE
) -> float | None:
    """IoU of the profile with its reflection, averaged; None without lines."""
    if not sym_lines:
        return None
    polylines = _loop_polylines(p, RASTER_SAGITTA)
    base = _rasterize(polylines, n)
    total = 0.0
    for line in sym_lines:
        mirrored = [[_reflect_point(q, line) for q in pts] for pts in polylines]
        total += raster_iou(base, _rasterize(mirrored, n))
    return total / len(sym_lines)


def bbox_iou(a: BoundingBox, b: BoundingBox) -> float:
    iw = min(a.max_pt.x, b.max_pt.x) - max(a.min_pt.x, b.min_pt.x)
    ih = min(a.max_pt.y, b.max_pt.y) - max(a.min_pt.y, b.min_pt.y)
    inter = max(0.0, iw) * max(0.0, ih)
    union = a.area() + b.area() - inter
    if union <= 0.0:
        return 1.0
    return inter / union


def _tangent(c: Curve, at_start: bool) -> Point2:
    pt = c.start if at_start else c.end
    if isinstance(c, ArcSegment):
        try:
            circle = c.circle()
        except NoSolutionError:
            pass  # degenerate arc: fall through to the chord
        else:
            radial = (pt - circle.center) * (1.0 / circle.radius)
            t = radial.perp_ccw()
            return t if c.is_ccw() else t * -1.0
    d = c.end - c.start
    return d * (1.0 / d.norm())


def smooth_fraction(p: Profile) -> float:
    """Fraction of loop vertices where tangents agree within 1 degree.

    Full circles have no vertices; a circle-only profile counts as fully
    smooth.
    """
    total = 0
    smooth = 0
    for loop in p.loops:
        if not isinstance(loop, PathLoop):
            continue
        curves = loop.curves
        for cur, nxt in zip(curves, curves[1:] + curves[:1]):
            total += 1
            a = _tangent(cur, at_start=False)
            b = _tangent(nxt, at_start=True)
            if math.atan2(abs(a.cross(b)), a.dot(b)) <= ANGLE_TOL:
                smooth += 1
    if total == 0:
        return 1.0
    return smooth / total


def hole_center_distance(
    holes: Sequence[BoltHole], p: Profile, missing_penalty: float = 1.0
) -> float:
    """Mean distance from each requested hole center to the nearest circle
    loop; the penalty stands in when the profile has no circle loops."""
    if not holes:
        return 0.0
    centers = [c.center for _, c in p.circles()]
    total = 0.0
    for hole in holes:
        if centers:
            total += min(hole.center.dist(c) for c in centers)
        else:
            total += missing_penalty
    return total / len(holes)


def geometry_gap(a: Geometry, b: Geometry) -> float:
    """Worst-coordinate distance between two geometry values of one kind."""
    if isinstance(a, Point2) and isinstance(b, Point2):
        return a.dist(b)
    if isinstance(a, DirectedLine) and isinstance(b, DirectedLine):
        return max(abs(a.d - b.d), abs(_wrap_pi(a.phi - b.phi)))
    if isinstance(a, OrientedCircle) and isinstance(b, OrientedCircle):
        if a.ccw != b.ccw:
            return math.inf
        return max(a.center.dist(b.center), abs(a.radius - b.radius))
    return math.inf


@dataclass(frozen=True)
class ResidualStats:
    count: int
    mean: float
    max: float


def step_residuals(trace: ReplayTrace) -> dict[str, ResidualStats]:
    """Re-runs each successful step from its recorded inputs and parameter
    values and reports, per step kind, how far the recorded outputs drift."""
    gaps: dict[str, list[float]] = {}
    for rec in trace.records:
        if not rec.ok or rec.kind.startswith("emit:") or not rec.outputs:
            continue
        ccw = None
        if rec.kind == "PointRadiusCircle":
            ccw = rec.outputs[0].ccw
        shim = Step(kind=rec.kind, inputs=(), params=(), outputs=(), ccw=ccw)
        try:
            fresh = _run_step(shim, rec.inputs, rec.params)
        except NoSolutionError:
            gaps.setdefault(rec.kind, []).append(math.inf)
            continue
        if len(fresh) != len(rec.outputs):
            gaps.setdefault(rec.kind, []).append(math.inf)
            continue
        worst = max(geometry_gap(r, f) for r, f in zip(rec.outputs, fresh))
        gaps.setdefault(rec.kind, []).append(worst)
    return {
        kind: ResidualStats(count=len(v), mean=sum(v) / len(v), max=max(v))
        for kind, v in gaps.items()
    }


@dataclass(frozen=True)
class PromptScore:
    area_diff: float
    line_segment_dist: float
    line_segment_ratio: float
    cog_dist: float
    hole_center_dist: float
    mirror_iou: float | None
    bbox_iou: float
    smooth_fraction_diff: float


def score_prompt(
    prompt: GeometricPrompt, p: Profile, missing_hole_penalty: float = 1.0
) -> PromptScore:
    seg_dist, seg_ratio = line_segment_metrics(prompt.bound_lines, p)
    return PromptScore(
        area_diff=abs(prompt.area - p.area()),
        line_segment_dist=seg_dist,
        line_segment_ratio=seg_ratio,
        cog_dist=prompt.cog.dist(profile_cog(p)),
        hole_center_dist=hole_center_distance(prompt.bolt_holes, p, missing_hole_penalty),
        mirror_iou=mirror_iou(p, prompt.symmetry_lines),
        bbox_iou=bbox_iou(prompt.bbox, p.bbox()),
        smooth_fraction_diff=abs(smooth_fraction(p) - prompt.smooth_fraction),
    )


REPORT_COLUMNS = (
    "Syntactic validity",
    "No self-intersection",
    "No short edges",
    "Difference in area",
    "Line segment dist",
    "Line segment ratio",
    "Center-of-gravity distance",
    "Hole center dist",
    "Mirror IoU",
    "Outer bounding box IoU",
    "Tangent continuous vertices difference",
)


def score_row(
    prompt: GeometricPrompt,
    p: Profile | None,
    syntactic_valid: bool = True,
    missing_hole_penalty: float = 1.0,
) -> dict[str, float | None]:
    """One report row; a missing profile scores only the validity column."""
    if p is None or not syntactic_valid:
        row: dict[str, float | None] = {name: None for name in REPORT_COLUMNS}
        row["Syntactic validity"] = 0.0
        return row
    validity = check_profile(p, syntactic_valid=True)
    score = score_prompt(prompt, p, missing_hole_penalty)
    return {
        "Syntactic validity": 1.0,
        "No self-intersection": 1.0 if validity.self_intersection_free else 0.0,
        "No short edges": 1.0 if validity.no_short_edges else 0.0,
        "Difference in area": score.area_diff,
        "Line segment dist": score.line_segment_dist,
        "Line segment ratio": score.line_segment_ratio,
        "Center-of-gravity distance": score.cog_dist,
        "Hole center dist": score.hole_center_dist,
        "Mirror IoU": score.mirror_iou,
        "Outer bounding box IoU": score.bbox_iou,
        "Tangent continuous vertices difference": score.smooth_fraction_diff,
    }


def summarize_rows(rows: Sequence[dict[str, float | None]]) -> dict[str, float | None]:
    """Column means; absent values (no symmetry lines, invalid rows) skipped."""
    out: dict[str, float | None] = {}
    for name in REPORT_COLUMNS:
        vals = [r[name] for r in rows if r.get(name) is not None]
        out[name] = sum(vals) / len(vals) if vals else None
    return out


def write_report_csv(rows: Sequence[dict[str, float | None]], path: str) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("id",) + REPORT_COLUMNS)
        for i, row in enumerate(rows):
            writer.writerow(
                [i] + ["" if row[name] is None else repr(row[name]) for name in REPORT_COLUMNS]
            )
