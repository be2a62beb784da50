"""Replay of construction sequences at floating point precision.

Tokenization throws geometry away; replay never does.  The prompt block is
materialized into registers, each step runs its closed-form construction,
and curve emissions stream out the profile.  A step whose construction has
no solution is recorded as failed; its registers become invalid and
everything depending on them (steps and curve emissions alike) is dropped
rather than aborting the replay.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import geometry as geom
from .geometry import (
    ArcSegment,
    DirectedLine,
    LineSegment,
    NoSolutionError,
    OrientedCircle,
    Point2,
)
from .model import (
    EMIT_ARITY,
    EMIT_REF_KINDS,
    OUTPUT_KINDS,
    SIGNATURES,
    ConstructionSequence,
    CurveEmit,
    Geometry,
    SequenceError,
    Step,
    geometry_kind,
    prompt_registers,
    validate_parameters,
)
from .profile import CircleLoop, Curve, PathLoop, Profile

CHAIN_TOL = 1e-9


@dataclass
class StepRecord:
    index: int
    kind: str
    ok: bool
    error: str | None = None
    inputs: list[Geometry] = field(default_factory=list)
    params: list[float] = field(default_factory=list)
    outputs: list[Geometry] = field(default_factory=list)
    emitted: Curve | OrientedCircle | None = None


@dataclass
class ReplayTrace:
    records: list[StepRecord]
    registers: list[Geometry | None]

    def failed_steps(self) -> list[StepRecord]:
        return [r for r in self.records if not r.ok]

    def ok(self) -> bool:
        return all(r.ok for r in self.records)


def _run_step(step: Step, inputs: list[Geometry], values: list[float]) -> list[Geometry]:
    k = step.kind
    if k == "LineXLine":
        return [geom.line_x_line(inputs[0], inputs[1])]
    if k == "LineXCircle":
        return list(geom.line_x_circle(inputs[0], inputs[1]))
    if k == "LineOffsetLine":
        return [geom.line_offset_line(inputs[0], values[0])]
    if k == "CircleOffsetCircle":
        return [geom.circle_offset_circle(inputs[0], values[0])]
    if k == "LineReverseLine":
        return [geom.line_reverse_line(inputs[0])]
    if k == "CircleReverseCircle":
        return [geom.circle_reverse_circle(inputs[0])]
    if k == "PointLineSymPoint":
        return [geom.point_line_sym_point(inputs[0], inputs[1])]
    if k == "LineSymLineLine":
        return [geom.line_sym_line_line(inputs[0], inputs[1])]
    if k == "LineAxisRotatedLine":
        return [geom.line_axis_rotated_line(inputs[0], inputs[1], values[0])]
    if k == "LineDatumParallelLine":
        return [geom.line_datum_parallel_line(inputs[0], inputs[1])]
    if k == "LineCircleParallelLine":
        return [geom.line_circle_parallel_line(inputs[0], inputs[1])]
    if k == "SymLineOffsetLineLine":
        return list(geom.sym_line_offset_line_line(inputs[0], values[0]))
    if k == "PointRadiusCircle":
        ccw = True if step.ccw is None else step.ccw
        return [geom.point_radius_circle(inputs[0], values[0], ccw)]
    if k == "CirclePointPointArc":
        return [geom.circle_point_point_arc(inputs[0], inputs[1], inputs[2]).mid]
    if k == "LineLineFillet":
        arc = geom.line_line_fillet(inputs[0], inputs[1], values[0])
        return [arc.start, arc.mid, arc.end]
    raise SequenceError(f"unknown step kind {k!r}")


def replay(
    seq: ConstructionSequence, overrides: dict[int, float] | None = None
) -> tuple[Profile, ReplayTrace]:
    """Execute the sequence; returns the assembled profile and the trace.

    Overrides map parameter indices to replacement values and apply to
    every use site of the index.
    """
    overrides = overrides or {}
    regs: list[Geometry | None] = list(prompt_registers(seq.prompt))
    records: list[StepRecord] = []
    emitted: list[tuple[str, object]] = []

    for idx, item in enumerate(seq.steps):
        if isinstance(item, CurveEmit):
            rec = StepRecord(index=idx, kind=f"emit:{item.kind}", ok=True)
            vals = []
            bad = None
            for r in item.refs:
                if not 0 <= r < len(regs):
                    raise SequenceError(f"emit at {idx} references unknown register {r}")
                if regs[r] is None:
                    bad = r
                    break
                vals.append(regs[r])
            if bad is not None:
                rec.ok = False
                rec.error = f"dropped: register {bad} comes from a failed step"
            else:
                curve = _build_curve(item, vals, idx)
                rec.emitted = curve
                emitted.append((item.kind, curve))
            records.append(rec)
            continue

        step = item
        rec = StepRecord(index=idx, kind=step.kind, ok=False)
        inputs: list[Geometry] = []
        invalid = None
        for r in step.inputs:
            if not 0 <= r < len(regs):
                raise SequenceError(f"step at {idx} references unknown register {r}")
            if regs[r] is None:
                invalid = r
                break
            inputs.append(regs[r])
        values = [overrides.get(u.index, u.value) for u in step.params]
        rec.params = values
        if invalid is not None:
            rec.ok = False
            rec.error = f"skipped: register {invalid} comes from a failed step"
            regs.extend([None] * len(step.outputs))
            records.append(rec)
            continue
        rec.inputs = inputs
        try:
            outputs = _run_step(step, inputs, values)
            if len(outputs) != len(step.outputs):
                raise NoSolutionError(
                    f"solution count changed: expected {len(step.outputs)}, got {len(outputs)}"
                )
        except NoSolutionError as e:
            rec.ok = False
            rec.error = str(e)
            regs.extend([None] * len(step.outputs))
            records.append(rec)
            continue
        rec.ok = True
        rec.outputs = outputs
        regs.extend(outputs)
        records.append(rec)

    profile = assemble_profile(emitted)
    return profile, ReplayTrace(records=records, registers=regs)


def _build_curve(item: CurveEmit, vals: list[Geometry], idx: int):
    if item.kind == "line":
        return LineSegment(vals[0], vals[1])
    if item.kind == "arc":
        return ArcSegment(vals[0], vals[1], vals[2])
    if item.kind == "circle":
        return vals[0]
    raise SequenceError(f"unknown emit kind {item.kind!r} at {idx}")


def assemble_profile(emitted: list[tuple[str, object]]) -> Profile:
    """Chain emitted curves into loops.

    A new loop starts whenever a curve does not continue the previous one;
    circles always stand alone.
    """
    loops = []
    chain: list[Curve] = []

    def flush():
        nonlocal chain
        if chain:
            loops.append(PathLoop(tuple(chain)))
            chain = []

    for kind, curve in emitted:
        if kind == "circle":
            flush()
            loops.append(CircleLoop(curve))
            continue
        if chain and chain[-1].end.dist(curve.start) > CHAIN_TOL:
            flush()
        chain.append(curve)
    flush()
    return Profile(tuple(loops))


def validate_topology(seq: ConstructionSequence) -> list[str]:
    """Static checks; an empty list means the sequence is well formed.

    Registers are verified to be single-assignment with consecutive fresh
    output ids, every reference to point backwards, slot kinds to agree
    with the step signatures, and curve emissions to carry the right
    register kinds.
    """
    problems = validate_parameters(seq)
    kinds = [geometry_kind(g) for g in prompt_registers(seq.prompt)]

    for idx, item in enumerate(seq.steps):
        if isinstance(item, CurveEmit):
            if item.kind not in EMIT_ARITY:
                problems.append(f"item {idx}: unknown emit kind {item.kind!r}")
                continue
            if len(item.refs) != EMIT_ARITY[item.kind]:
                problems.append(f"item {idx}: emit {item.kind} takes {EMIT_ARITY[item.kind]} refs")
                continue
            for ref, want in zip(item.refs, EMIT_REF_KINDS[item.kind]):
                if not 0 <= ref < len(kinds):
                    problems.append(f"item {idx}: emit references unknown register {ref}")
                elif kinds[ref] != want:
                    problems.append(
                        f"item {idx}: emit {item.kind} needs a {want}, register {ref} is {kinds[ref]}"
                    )
            continue

        step = item
        if step.kind not in SIGNATURES:
            problems.append(f"item {idx}: unknown step kind {step.kind!r}")
            continue
        in_kinds, param_kinds, out_shape = SIGNATURES[step.kind]
        if len(step.inputs) != len(in_kinds):
            problems.append(f"item {idx}: {step.kind} takes {len(in_kinds)} inputs")
            continue
        for ref, want in zip(step.inputs, in_kinds):
            if not 0 <= ref < len(kinds):
                problems.append(f"item {idx}: input register {ref} not yet defined")
            elif kinds[ref] != want:
                problems.append(
                    f"item {idx}: {step.kind} input needs a {want}, register {ref} is {kinds[ref]}"
                )
        if tuple(u.kind for u in step.params) != param_kinds:
            problems.append(f"item {idx}: {step.kind} parameter kinds must be {param_kinds}")
        if (step.ccw is not None) != (step.kind == "PointRadiusCircle"):
            problems.append(f"item {idx}: ccw literal only belongs on PointRadiusCircle")
        if out_shape == "points2":
            if len(step.outputs) not in (1, 2):
                problems.append(f"item {idx}: {step.kind} outputs one or two points")
                continue
            out_kinds = ("point",) * len(step.outputs)
        else:
            out_kinds = OUTPUT_KINDS[out_shape]
            if len(step.outputs) != len(out_kinds):
                problems.append(f"item {idx}: {step.kind} outputs {len(out_kinds)} registers")
                continue
        expected = tuple(range(len(kinds), len(kinds) + len(step.outputs)))
        if step.outputs != expected:
            problems.append(
                f"item {idx}: outputs must be the next fresh registers {expected}, got {step.outputs}"
            )
        kinds.extend(out_kinds)
    return problems


def geometry_to_json(g: Geometry | Curve | None) -> dict | None:
    if g is None:
        return None
    if isinstance(g, Point2):
        return {"type": "point", "x": g.x, "y": g.y}
    if isinstance(g, DirectedLine):
        return {"type": "line", "phi": g.phi, "d": g.d}
    if isinstance(g, OrientedCircle):
        return {"type": "circle", "cx": g.center.x, "cy": g.center.y, "r": g.radius, "ccw": g.ccw}
    if isinstance(g, LineSegment):
        return {"type": "segment", "start": [g.start.x, g.start.y], "end": [g.end.x, g.end.y]}
    if isinstance(g, ArcSegment):
        return {
            "type": "arc",
            "start": [g.start.x, g.start.y],
            "mid": [g.mid.x, g.mid.y],
            "end": [g.end.x, g.end.y],
        }
    raise TypeError(f"cannot serialize {g!r}")


def trace_to_json(trace: ReplayTrace) -> dict:
    return {
        "ok": trace.ok(),
        "records": [
            {
                "index": r.index,
                "kind": r.kind,
                "ok": r.ok,
                "error": r.error,
                "inputs": [geometry_to_json(g) for g in r.inputs],
                "outputs": [geometry_to_json(g) for g in r.outputs],
                "emitted": geometry_to_json(r.emitted),
            }
            for r in trace.records
        ],
    }
