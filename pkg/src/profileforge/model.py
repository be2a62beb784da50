"""Construction sequences: a geometric prompt, a register-based program of
construction steps with interleaved curve emissions, and the final profile.

Registers are single-assignment.  The prompt materializes a fixed block of
registers before the first step runs (see prompt_registers); each step then
appends its outputs.  Curve emissions reference point/circle registers and
say which profile curve just became expressible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

from .geometry import (
    BoundingBox,
    DirectedLine,
    LineSegment,
    OrientedCircle,
    Point2,
)
from .profile import Profile, profile_from_json, profile_to_json
from .vocabulary import MAX_PARAMETERS, STEP_NAMES

LENGTH_PARAM = "length"
ANGLE_PARAM = "angle"


@dataclass(frozen=True)
class BoltHole:
    center: Point2
    radius: float
    clearance: float


@dataclass(frozen=True)
class GeometricPrompt:
    """Everything a profile request states about the desired shape."""

    datum: Point2
    bbox: BoundingBox
    area: float
    complexity: int
    num_loops: int
    smooth_fraction: float
    cog: Point2
    symmetry_lines: tuple[DirectedLine, ...] = ()
    bound_lines: tuple[LineSegment, ...] = ()
    bolt_holes: tuple[BoltHole, ...] = ()

    def datum_x_axis(self) -> DirectedLine:
        return DirectedLine(0.0, self.datum.y)

    def datum_y_axis(self) -> DirectedLine:
        return DirectedLine(0.5 * math.pi, -self.datum.x)


@dataclass(frozen=True)
class ParamUse:
    """One use site of a shared parameter.

    The value is the default; replay overrides substitute by index, so all
    use sites of an index move together.
    """

    index: int
    kind: str
    value: float


@dataclass(frozen=True)
class Step:
    kind: str
    inputs: tuple[int, ...]
    params: tuple[ParamUse, ...]
    outputs: tuple[int, ...]
    ccw: bool | None = None  # orientation literal, PointRadiusCircle only


@dataclass(frozen=True)
class CurveEmit:
    """Marks that a profile curve is now expressible from registers.

    kind "line" references (start, end) points, "arc" references
    (start, mid, end) points and "circle" references one circle register.
    """

    kind: str
    refs: tuple[int, ...]


SequenceItem = Union[Step, CurveEmit]


@dataclass(frozen=True)
class ConstructionSequence:
    prompt: GeometricPrompt
    steps: tuple[SequenceItem, ...]
    profile: Profile

    def construction_steps(self) -> list[Step]:
        return [s for s in self.steps if isinstance(s, Step)]

    def emits(self) -> list[CurveEmit]:
        return [s for s in self.steps if isinstance(s, CurveEmit)]


# Per-kind slot layout: input register kinds, parameter kinds and the
# output shape.  "points2" is one or two intersection points ordered along
# the input line; "arc3" is the fillet's start/mid/end point triple;
# "line_pair" is the symmetric pair.
SIGNATURES: dict[str, tuple[tuple[str, ...], tuple[str, ...], str]] = {
    "LineXLine": (("line", "line"), (), "point"),
    "LineXCircle": (("line", "circle"), (), "points2"),
    "LineOffsetLine": (("line",), (LENGTH_PARAM,), "line"),
    "CircleOffsetCircle": (("circle",), (LENGTH_PARAM,), "circle"),
    "LineReverseLine": (("line",), (), "line"),
    "CircleReverseCircle": (("circle",), (), "circle"),
    "PointLineSymPoint": (("point", "line"), (), "point"),
    "LineSymLineLine": (("line", "line"), (), "line"),
    "LineAxisRotatedLine": (("line", "point"), (ANGLE_PARAM,), "line"),
    "LineDatumParallelLine": (("line", "point"), (), "line"),
    "LineCircleParallelLine": (("line", "circle"), (), "line"),
    "SymLineOffsetLineLine": (("line",), (LENGTH_PARAM,), "line_pair"),
    "PointRadiusCircle": (("point",), (LENGTH_PARAM,), "circle"),
    "CirclePointPointArc": (("circle", "point", "point"), (), "point"),
    "LineLineFillet": (("line", "line"), (LENGTH_PARAM,), "arc3"),
}

assert set(SIGNATURES) == set(STEP_NAMES)

OUTPUT_KINDS = {
    "point": ("point",),
    "line": ("line",),
    "circle": ("circle",),
    "line_pair": ("line", "line"),
    "arc3": ("point", "point", "point"),
    # points2 arity is dynamic: one point when tangent, two otherwise
}

EMIT_ARITY = {"line": 2, "arc": 3, "circle": 1}
EMIT_REF_KINDS = {"line": ("point", "point"), "arc": ("point", "point", "point"), "circle": ("circle",)}

Geometry = Union[Point2, DirectedLine, OrientedCircle]


def geometry_kind(g: Geometry) -> str:
    if isinstance(g, Point2):
        return "point"
    if isinstance(g, DirectedLine):
        return "line"
    if isinstance(g, OrientedCircle):
        return "circle"
    raise TypeError(f"not register geometry: {g!r}")


def prompt_registers(prompt: GeometricPrompt) -> list[Geometry]:
    """The fixed register block every replay starts from.

    Order: datum point, datum x axis, datum y axis, the symmetry lines,
    then per bound line its start point, end point and carrier line, then
    per bolt hole its center point, the hole circle (clockwise, as an
    inner loop runs) and the clearance disk (counter-clockwise).
    """
    regs: list[Geometry] = [prompt.datum, prompt.datum_x_axis(), prompt.datum_y_axis()]
    regs.extend(prompt.symmetry_lines)
    for seg in prompt.bound_lines:
        regs.append(seg.start)
        regs.append(seg.end)
        regs.append(seg.carrier())
    for hole in prompt.bolt_holes:
        regs.append(hole.center)
        regs.append(OrientedCircle(hole.center, hole.radius, False))
        regs.append(OrientedCircle(hole.center, hole.clearance, True))
    return regs


@dataclass(frozen=True)
class Parameter:
    index: int
    kind: str
    value: float


def list_parameters(seq: ConstructionSequence) -> list[Parameter]:
    """Parameter table in index order, defaults taken from first use."""
    seen: dict[int, Parameter] = {}
    for step in seq.construction_steps():
        for use in step.params:
            if use.index not in seen:
                seen[use.index] = Parameter(use.index, use.kind, use.value)
    return [seen[i] for i in sorted(seen)]


class SequenceError(ValueError):
    """A structurally malformed construction sequence."""


def validate_parameters(seq: ConstructionSequence) -> list[str]:
    problems = []
    table: dict[int, ParamUse] = {}
    for si, step in enumerate(seq.construction_steps()):
        for use in step.params:
            if not 0 <= use.index < MAX_PARAMETERS:
                problems.append(f"step {si}: parameter index {use.index} out of range")
                continue
            first = table.setdefault(use.index, use)
            if first.kind != use.kind:
                problems.append(
                    f"step {si}: parameter {use.index} used as {use.kind}, first use was {first.kind}"
                )
    indices = sorted(table)
    if indices and indices != list(range(len(indices))):
        problems.append(f"parameter indices not dense from zero: {indices}")
    return problems


def _pt(p: Point2) -> list[float]:
    return [p.x, p.y]


def _pt_from(v) -> Point2:
    return Point2(float(v[0]), float(v[1]))


def prompt_to_json(p: GeometricPrompt) -> dict:
    return {
        "datum": _pt(p.datum),
        "bbox": [_pt(p.bbox.min_pt), _pt(p.bbox.max_pt)],
        "area": p.area,
        "complexity": p.complexity,
        "num_loops": p.num_loops,
        "smooth_fraction": p.smooth_fraction,
        "cog": _pt(p.cog),
        "symmetry_lines": [{"phi": l.phi, "d": l.d} for l in p.symmetry_lines],
        "bound_lines": [{"start": _pt(s.start), "end": _pt(s.end)} for s in p.bound_lines],
        "bolt_holes": [
            {"center": _pt(h.center), "radius": h.radius, "clearance": h.clearance}
            for h in p.bolt_holes
        ],
    }


def prompt_from_json(d: dict) -> GeometricPrompt:
    return GeometricPrompt(
        datum=_pt_from(d["datum"]),
        bbox=BoundingBox(_pt_from(d["bbox"][0]), _pt_from(d["bbox"][1])),
        area=float(d["area"]),
        complexity=int(d["complexity"]),
        num_loops=int(d["num_loops"]),
        smooth_fraction=float(d["smooth_fraction"]),
        cog=_pt_from(d["cog"]),
        symmetry_lines=tuple(DirectedLine(float(l["phi"]), float(l["d"])) for l in d["symmetry_lines"]),
        bound_lines=tuple(
            LineSegment(_pt_from(s["start"]), _pt_from(s["end"])) for s in d["bound_lines"]
        ),
        bolt_holes=tuple(
            BoltHole(_pt_from(h["center"]), float(h["radius"]), float(h["clearance"]))
            for h in d["bolt_holes"]
        ),
    )


def step_to_json(item: SequenceItem) -> dict:
    if isinstance(item, CurveEmit):
        return {"emit": item.kind, "refs": list(item.refs)}
    d = {
        "kind": item.kind,
        "inputs": list(item.inputs),
        "params": [{"index": u.index, "kind": u.kind, "value": u.value} for u in item.params],
        "outputs": list(item.outputs),
    }
    if item.ccw is not None:
        d["ccw"] = item.ccw
    return d


def step_from_json(d: dict) -> SequenceItem:
    if "emit" in d:
        kind = d["emit"]
        if kind not in EMIT_ARITY:
            raise SequenceError(f"unknown emit kind {kind!r}")
        return CurveEmit(kind, tuple(int(r) for r in d["refs"]))
    kind = d["kind"]
    if kind not in SIGNATURES:
        raise SequenceError(f"unknown step kind {kind!r}")
    return Step(
        kind=kind,
        inputs=tuple(int(r) for r in d["inputs"]),
        params=tuple(
            ParamUse(int(u["index"]), str(u["kind"]), float(u["value"])) for u in d["params"]
        ),
        outputs=tuple(int(r) for r in d["outputs"]),
        ccw=bool(d["ccw"]) if "ccw" in d else None,
    )


def sequence_to_json(seq: ConstructionSequence) -> dict:
    return {
        "version": 1,
        "prompt": prompt_to_json(seq.prompt),
        "steps": [step_to_json(s) for s in seq.steps],
        "profile": profile_to_json(seq.profile),
    }


def sequence_from_json(d: dict) -> ConstructionSequence:
    if d.get("version") != 1:
        raise SequenceError(f"unsupported sequence version {d.get('version')!r}")
    return ConstructionSequence(
        prompt=prompt_from_json(d["prompt"]),
        steps=tuple(step_from_json(s) for s in d["steps"]),
        profile=profile_from_json(d["profile"]),
    )
