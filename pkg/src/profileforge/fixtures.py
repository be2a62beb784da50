"""Hand-built construction sequences used by tests, the demo store and the
editor.  Each builder returns a sequence whose profile was produced by
replaying the construction once with default parameter values.
"""

from __future__ import annotations

import math

from .geometry import BoundingBox, DirectedLine, LineSegment, Point2
from .interpreter import replay
from .model import (
    OUTPUT_KINDS,
    SIGNATURES,
    ConstructionSequence,
    CurveEmit,
    GeometricPrompt,
    ParamUse,
    SequenceItem,
    Step,
    prompt_registers,
)
from .profile import Profile


class SequenceBuilder:
    """Accumulates steps against a prompt, handing out register ids."""

    def __init__(self, prompt: GeometricPrompt):
        self.prompt = prompt
        self.items: list[SequenceItem] = []
        self._next = len(prompt_registers(prompt))

    def step(
        self,
        kind: str,
        inputs: tuple[int, ...],
        params: tuple[ParamUse, ...] = (),
        ccw: bool | None = None,
        n_out: int | None = None,
    ) -> tuple[int, ...]:
        shape = SIGNATURES[kind][2]
        if n_out is None:
            n_out = 2 if shape == "points2" else len(OUTPUT_KINDS[shape])
        outputs = tuple(range(self._next, self._next + n_out))
        self._next += n_out
        self.items.append(Step(kind, inputs, params, outputs, ccw=ccw))
        return outputs

    def emit_line(self, start: int, end: int) -> None:
        self.items.append(CurveEmit("line", (start, end)))

    def emit_arc(self, start: int, mid: int, end: int) -> None:
        self.items.append(CurveEmit("arc", (start, mid, end)))

    def emit_circle(self, circle: int) -> None:
        self.items.append(CurveEmit("circle", (circle,)))

    def build(self) -> ConstructionSequence:
        """Replay with defaults to attach the resulting profile."""
        seq = ConstructionSequence(self.prompt, tuple(self.items), Profile(()))
        profile, trace = replay(seq)
        if not trace.ok():
            bad = trace.failed_steps()[0]
            raise ValueError(f"fixture replay failed at item {bad.index}: {bad.error}")
        return ConstructionSequence(self.prompt, tuple(self.items), profile)


def parametric_rectangle() -> ConstructionSequence:
    """Axis-aligned rectangle; parameter 0 is the half width.

    The horizontals come from prompt bound lines, the verticals from a
    symmetric offset pair, so one override widens the whole shape while
    the loop stays closed.
    """
    vsym = DirectedLine(0.5 * math.pi, 0.0)
    bottom = LineSegment(Point2(-0.25, -0.3), Point2(0.25, -0.3))
    top = LineSegment(Point2(0.25, 0.3), Point2(-0.25, 0.3))
    prompt = GeometricPrompt(
        datum=Point2(0.0, 0.0),
        bbox=BoundingBox(Point2(-0.25, -0.3), Point2(0.25, 0.3)),
        area=0.3,
        complexity=4,
        num_loops=1,
        smooth_fraction=0.0,
        cog=Point2(0.0, 0.0),
        symmetry_lines=(vsym,),
        bound_lines=(bottom, top),
    )
    b = SequenceBuilder(prompt)
    # prompt registers: 0 datum, 1..2 axes, 3 vsym, 4..6 bottom, 7..9 top
    left, right = b.step(
        "SymLineOffsetLineLine", (3,), (ParamUse(0, "length", 0.25),)
    )
    v0 = b.step("LineXLine", (left, 6))[0]
    v1 = b.step("LineXLine", (6, right))[0]
    v2 = b.step("LineXLine", (right, 9))[0]
    v3 = b.step("LineXLine", (9, left))[0]
    b.emit_line(v0, v1)
    b.emit_line(v1, v2)
    b.emit_line(v2, v3)
    b.emit_line(v3, v0)
    return b.build()


def filleted_plate() -> ConstructionSequence:
    """Rectangle with one rounded corner; parameter 1 is the radius."""
    vsym = DirectedLine(0.5 * math.pi, 0.0)
    bottom = LineSegment(Point2(-0.25, -0.3), Point2(0.25, -0.3))
    top = LineSegment(Point2(0.25, 0.3), Point2(-0.25, 0.3))
    prompt = GeometricPrompt(
        datum=Point2(0.0, 0.0),
        bbox=BoundingBox(Point2(-0.25, -0.3), Point2(0.25, 0.3)),
        area=0.3 - 0.01 * (1.0 - 0.25 * math.pi),
        complexity=5,
        num_loops=1,
        smooth_fraction=0.4,
        cog=Point2(0.0, 0.0),
        symmetry_lines=(vsym,),
        bound_lines=(bottom, top),
    )
    b = SequenceBuilder(prompt)
    left, right = b.step(
        "SymLineOffsetLineLine", (3,), (ParamUse(0, "length", 0.25),)
    )
    right_up = b.step("LineReverseLine", (right,))[0]
    v0 = b.step("LineXLine", (left, 6))[0]
    v1 = b.step("LineXLine", (6, right))[0]
    v3 = b.step("LineXLine", (9, left))[0]
    a_start, a_mid, a_end = b.step(
        "LineLineFillet", (right_up, 9), (ParamUse(1, "length", 0.1),)
    )
    b.emit_line(v0, v1)
    b.emit_line(v1, a_start)
    b.emit_arc(a_start, a_mid, a_end)
    b.emit_line(a_end, v3)
    b.emit_line(v3, v0)
    return b.build()


def i_beam() -> ConstructionSequence:
    """I-beam outline with three parameters.

    Parameter 0 is the half thickness of the central beam, parameter 1 the
    width of the two side bars and parameter 2 the radius of the four
    fillets at the beam/bar junctions.  Non-positive values for 0 or 2
    make the corresponding construction unsolvable, which replay reports
    as failed steps rather than an abort.
    """
    vsym = DirectedLine(0.5 * math.pi, 0.0)
    hsym = DirectedLine(0.0, 0.0)
    left_outer = LineSegment(Point2(-0.45, 0.35), Point2(-0.45, -0.35))
    right_outer = LineSegment(Point2(0.45, -0.35), Point2(0.45, 0.35))
    left_top = LineSegment(Point2(-0.3, 0.35), Point2(-0.45, 0.35))
    left_bottom = LineSegment(Point2(-0.45, -0.35), Point2(-0.3, -0.35))
    prompt = GeometricPrompt(
        datum=Point2(0.0, 0.0),
        bbox=BoundingBox(Point2(-0.45, -0.35), Point2(0.45, 0.35)),
        area=2 * 0.15 * 0.7 + 0.6 * 0.2,
        complexity=16,
        num_loops=1,
        smooth_fraction=0.5,
        cog=Point2(0.0, 0.0),
        symmetry_lines=(vsym, hsym),
        bound_lines=(left_outer, right_outer, left_top, left_bottom),
    )
    b = SequenceBuilder(prompt)
    # prompt registers: 0 datum, 1 x axis, 2 y axis, 3 vsym, 4 hsym,
    # 5..7 left outer (carrier 7 points -y), 8..10 right outer (carrier 10
    # points +y), 11..13 left top (carrier 13 points -x, the line y=0.35),
    # 14..16 left bottom (carrier 16 points +x, the line y=-0.35)
    p_beam = ParamUse(0, "length", 0.10)
    p_bar = ParamUse(1, "length", 0.15)
    p_fil = ParamUse(2, "length", 0.03)

    beam_top, beam_bot = b.step("SymLineOffsetLineLine", (4,), (p_beam,))
    inner_left = b.step("LineOffsetLine", (7,), (p_bar,))[0]
    inner_right = b.step("LineOffsetLine", (10,), (p_bar,))[0]

    a = b.step("LineXLine", (7, 16))[0]
    bb = b.step("LineXLine", (16, inner_left))[0]
    e = b.step("LineXLine", (inner_right, 16))[0]
    f = b.step("LineXLine", (10, 16))[0]
    g = b.step("LineXLine", (10, 13))[0]
    h = b.step("LineXLine", (inner_right, 13))[0]
    k = b.step("LineXLine", (inner_left, 13))[0]
    ll = b.step("LineXLine", (7, 13))[0]

    # Concave corners: the fillet runs against the traversal, so each arc
    # is emitted with its ends swapped.
    c1s, c1m, c1e = b.step("LineLineFillet", (beam_bot, inner_left), (p_fil,))
    c2s, c2m, c2e = b.step("LineLineFillet", (inner_right, beam_bot), (p_fil,))
    c3s, c3m, c3e = b.step("LineLineFillet", (beam_top, inner_right), (p_fil,))
    c4s, c4m, c4e = b.step("LineLineFillet", (inner_left, beam_top), (p_fil,))

    b.emit_line(a, bb)
    b.emit_line(bb, c1e)
    b.emit_arc(c1e, c1m, c1s)
    b.emit_line(c1s, c2e)
    b.emit_arc(c2e, c2m, c2s)
    b.emit_line(c2s, e)
    b.emit_line(e, f)
    b.emit_line(f, g)
    b.emit_line(g, h)
    b.emit_line(h, c3e)
    b.emit_arc(c3e, c3m, c3s)
    b.emit_line(c3s, c4e)
    b.emit_arc(c4e, c4m, c4s)
    b.emit_line(c4s, k)
    b.emit_line(k, ll)
    b.emit_line(ll, a)
    return b.build()


FIXTURES = {
    "rectangle": parametric_rectangle,
    "filleted-plate": filleted_plate,
    "i-beam": i_beam,
}
