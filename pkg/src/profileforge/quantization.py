"""Uniform quantizers mapping continuous geometry onto small token grids.

Each family maps a value to a bin index and back to the bin centre.  Grids
are laid out so that the values worth preserving exactly sit on centres:
lengths hit -1, 0 and 1; angles hit the common constructive angles (pi/3,
pi/2, pi, ...); the point grid hits the origin and the unit-square corners.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .geometry import TAU, DirectedLine, Point2, norm_angle

LENGTH_BINS = 127
ANGLE_BINS = 121
POINT_AXIS_BINS = 127
UNIT_BINS = 127
COUNT_BINS = 127


class OutOfRangeError(ValueError):
    """Value lies outside the quantizer's domain (plus half-bin slack)."""


@dataclass(frozen=True)
class LinearQuantizer:
    """Evenly spaced bin centres lo + k * step for k in [0, bins)."""

    lo: float
    step: float
    bins: int

    def encode(self, value: float) -> int:
        k = round((value - self.lo) / self.step)
        if k < 0 or k >= self.bins:
            clamped = min(max(k, 0), self.bins - 1)
            if abs(value - self.decode(clamped)) > 0.5 * self.step + 1e-12:
                raise OutOfRangeError(f"{value!r} outside quantizer domain")
            k = clamped
        return k

    def decode(self, k: int) -> float:
        if not 0 <= k < self.bins:
            raise OutOfRangeError(f"bin {k} outside [0, {self.bins})")
        return self.lo + k * self.step


# Lengths and signed distances share one grid over [-1, 1].
length_quantizer = LinearQuantizer(-1.0, 1.0 / 63.0, LENGTH_BINS)

# Fractions of the unit square (areas, vertex fractions) over [0, 1].
unit_quantizer = LinearQuantizer(0.0, 1.0 / 126.0, UNIT_BINS)

# One point-grid axis over [-0.5, 0.5].
point_axis_quantizer = LinearQuantizer(-0.5, 1.0 / 126.0, POINT_AXIS_BINS)

ANGLE_STEP = TAU / 120.0


def encode_angle(value: float) -> int:
    """Angle bin in [0, 121); the full turn canonicalizes to bin 0."""
    k = round(norm_angle(value) / ANGLE_STEP)
    return 0 if k >= ANGLE_BINS - 1 else k


def decode_angle(k: int) -> float:
    if not 0 <= k < ANGLE_BINS:
        raise OutOfRangeError(f"angle bin {k} outside [0, {ANGLE_BINS})")
    return 0.0 if k == ANGLE_BINS - 1 else k * ANGLE_STEP


def encode_point(p: Point2) -> tuple[int, int]:
    return point_axis_quantizer.encode(p.x), point_axis_quantizer.encode(p.y)


def decode_point(ix: int, iy: int) -> Point2:
    return Point2(point_axis_quantizer.decode(ix), point_axis_quantizer.decode(iy))


def encode_line(l: DirectedLine) -> tuple[int, int]:
    """Infline bins: direction on the angle grid, distance on the length grid."""
    return encode_angle(l.phi), length_quantizer.encode(l.d)


def decode_line(ia: int, id_: int) -> DirectedLine:
    return DirectedLine(decode_angle(ia), length_quantizer.decode(id_))


def encode_count(n: int) -> int:
    """Curve/loop counts 1..127; everything above sticks to the last bin."""
    if n < 1:
        raise OutOfRangeError(f"count {n} must be at least 1")
    return min(n, COUNT_BINS) - 1


def decode_count(k: int) -> int:
    if not 0 <= k < COUNT_BINS:
        raise OutOfRangeError(f"count bin {k} outside [0, {COUNT_BINS})")
    return k + 1


def snap_length(v: float) -> float:
    return length_quantizer.decode(length_quantizer.encode(v))


def snap_angle(v: float) -> float:
    return decode_angle(encode_angle(v))


def snap_unit(v: float) -> float:
    return unit_quantizer.decode(unit_quantizer.encode(v))


def snap_point(p: Point2) -> Point2:
    return decode_point(*encode_point(p))


def snap_line(l: DirectedLine) -> DirectedLine:
    return decode_line(*encode_line(l))


def exact_sentinel_check() -> None:
    """Sanity anchor: the grid must represent the listed values exactly."""
    for v in (-1.0, 0.0, 1.0):
        assert snap_length(v) == v
    for a in (0.0, math.pi / 3, math.pi / 2, math.pi):
        assert snap_angle(a) == a
    assert snap_point(Point2(0.0, 0.0)) == Point2(0.0, 0.0)


# Continuous override bounds per parameter kind; sliders and range checks
# share these so every accepted value stays encodable.
PARAM_DOMAINS: dict[str, tuple[float, float]] = {
    "length": (length_quantizer.lo, length_quantizer.decode(LENGTH_BINS - 1)),
    "angle": (0.0, TAU),
}


def override_error(kind: str, value: float) -> str | None:
    """Why a continuous parameter override is not encodable, or None if it is."""
    if kind not in PARAM_DOMAINS:
        return f"unknown parameter kind {kind!r}"
    if not math.isfinite(value):
        return f"{kind} override must be finite, got {value!r}"
    if kind == "length":
        try:
            length_quantizer.encode(value)
        except OutOfRangeError:
            lo, hi = PARAM_DOMAINS[kind]
            return f"length {value!r} outside quantizer domain [{lo}, {hi}]"
    return None
