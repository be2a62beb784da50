"""Conversion between construction sequences and integer token streams.

Geometry inside a step is encoded by value: points and infinite lines are
single tokens, circles a four token entity.  The detokenizer recovers the
dataflow by matching each input against the most recently created register
with the same quantized value, so producer and consumer must quantize the
same floats; to guarantee that, ``tokenize`` snaps the prompt and the
parameter values first (``snap_sequence``) and replays the snapped
sequence to obtain the register values it encodes.

Tokenization is therefore lossy by design while replay is not:

    detokenize(tokenize(s)) == snap_sequence(s)
    tokenize(detokenize(ts)) == ts            for ts produced by tokenize

Streams that did not come from ``tokenize`` (model output, fuzzed input)
either parse into a well formed sequence or raise ``TokenSyntaxError``
pointing at the first offending token.
"""

from __future__ import annotations

from .geometry import (
    ArcSegment,
    DirectedLine,
    LineSegment,
    NoSolutionError,
    OrientedCircle,
    Point2,
)
from .interpreter import ReplayTrace, replay, validate_topology
from .model import (
    SIGNATURES,
    BoltHole,
    ConstructionSequence,
    CurveEmit,
    GeometricPrompt,
    Geometry,
    ParamUse,
    SequenceError,
    SequenceItem,
    Step,
    geometry_kind,
    prompt_registers,
)
from .profile import CircleLoop, PathLoop, Profile
from .quantization import (
    OutOfRangeError,
    decode_angle,
    decode_count,
    decode_line,
    decode_point,
    encode_angle,
    encode_count,
    encode_line,
    encode_point,
    length_quantizer,
    snap_point,
    unit_quantizer,
)
from .vocabulary import (
    MARKER,
    STEP_NAMES,
    STEP_TAG,
    VOCAB_SIZE,
    ccw_token,
    family_of,
    family_token,
    in_family,
    infline_bins,
    infline_token,
    param_index,
    param_tag,
    point_bins,
    point_token,
    token_name,
    value_bin,
)

TOKEN_FILE_MAGIC = "profileforge-tokens"
TOKEN_FILE_VERSION = 1


class TokenSyntaxError(ValueError):
    """A token stream that violates the grammar.

    ``position`` indexes the offending token; for truncated streams it is
    one past the last token.
    """

    def __init__(self, position: int, reason: str):
        self.position = position
        self.reason = reason
        super().__init__(f"token {position}: {reason}")


# ---------------------------------------------------------------------------
# snapping


def snap_prompt(p: GeometricPrompt) -> GeometricPrompt:
    """The prompt with every field moved onto its token grid."""
    return GeometricPrompt(
        datum=snap_point(p.datum),
        bbox=type(p.bbox)(snap_point(p.bbox.min_pt), snap_point(p.bbox.max_pt)),
        area=unit_quantizer.decode(unit_quantizer.encode(p.area)),
        complexity=decode_count(encode_count(p.complexity)),
        num_loops=decode_count(encode_count(p.num_loops)),
        smooth_fraction=unit_quantizer.decode(unit_quantizer.encode(p.smooth_fraction)),
        cog=snap_point(p.cog),
        symmetry_lines=tuple(_snap_line(l) for l in p.symmetry_lines),
        bound_lines=tuple(
            LineSegment(snap_point(s.start), snap_point(s.end)) for s in p.bound_lines
        ),
        bolt_holes=tuple(
            BoltHole(snap_point(h.center), _snap_len(h.radius), _snap_len(h.clearance))
            for h in p.bolt_holes
        ),
    )


def _snap_len(v: float) -> float:
    return length_quantizer.decode(length_quantizer.encode(v))


def _snap_line(l: DirectedLine) -> DirectedLine:
    return decode_line(*encode_line(l))


def _snap_items(items: tuple[SequenceItem, ...]) -> tuple[SequenceItem, ...]:
    out: list[SequenceItem] = []
    for item in items:
        if isinstance(item, Step) and item.params:
            params = tuple(
                ParamUse(
                    u.index,
                    u.kind,
                    _snap_len(u.value) if u.kind == "length" else decode_angle(encode_angle(u.value)),
                )
                for u in item.params
            )
            out.append(Step(item.kind, item.inputs, params, item.outputs, ccw=item.ccw))
        else:
            out.append(item)
    return tuple(out)


def _chain_snap_profile(profile: Profile) -> Profile:
    """Snap curves the way the profile section encodes them.

    Only curve end points (and arc mid points) are written to the stream;
    each start point is taken from the previous curve, so the snapped loop
    is chained through the snapped ends rather than snapping every start
    independently.
    """
    loops = []
    for loop in profile.loops:
        if isinstance(loop, CircleLoop):
            c = loop.circle
            loops.append(
                CircleLoop(OrientedCircle(snap_point(c.center), _snap_len(c.radius), c.ccw))
            )
            continue
        ends = [snap_point(c.end) for c in loop.curves]
        curves = []
        for i, curve in enumerate(loop.curves):
            start = ends[i - 1]
            if isinstance(curve, ArcSegment):
                curves.append(ArcSegment(start, snap_point(curve.mid), ends[i]))
            else:
                curves.append(LineSegment(start, ends[i]))
        loops.append(PathLoop(tuple(curves)))
    return Profile(tuple(loops))


def _snap_with_trace(seq: ConstructionSequence) -> tuple[ConstructionSequence, ReplayTrace]:
    problems = validate_topology(seq)
    if problems:
        raise SequenceError(f"cannot tokenize: {problems[0]}")
    prompt = snap_prompt(seq.prompt)
    items = _snap_items(seq.steps)
    _, trace = replay(ConstructionSequence(prompt, items, Profile(())))
    if not trace.ok():
        bad = trace.failed_steps()[0]
        raise SequenceError(
            f"cannot tokenize: snapped replay failed at item {bad.index}: {bad.error}"
        )
    return ConstructionSequence(prompt, items, _chain_snap_profile(seq.profile)), trace


def snap_sequence(seq: ConstructionSequence) -> ConstructionSequence:
    """The sequence as tokenization preserves it.

    Prompt fields and parameter values move onto their token grids and the
    attached profile is snapped curve by curve; the construction is
    replayed with the snapped values to check it still succeeds.
    Idempotent; raises SequenceError when the snapped replay fails.

    Circle loop orientation is not part of the profile encoding; it
    survives a token round trip only for circles the construction emits,
    other circle loops come back counter-clockwise.
    """
    return _snap_with_trace(seq)[0]


def canonicalize_refs(seq: ConstructionSequence) -> ConstructionSequence:
    """Rewrite register references the way a token round trip resolves them.

    The stream names registers by quantized value and the decoder picks the
    newest match, so ``detokenize(tokenize(s)) == snap_sequence(s)`` only
    holds when every reference already points at the most recent register
    holding its value.  Keys come from the snapped replay, mirroring what
    ``tokenize`` encodes.
    """
    _, trace = _snap_with_trace(seq)
    keys = [_register_key(g) for g in trace.registers]
    latest: dict[tuple, int] = {}
    for i in range(len(prompt_registers(seq.prompt))):
        latest[keys[i]] = i
    items: list[SequenceItem] = []
    for item in seq.steps:
        if isinstance(item, CurveEmit):
            items.append(CurveEmit(item.kind, tuple(latest[keys[r]] for r in item.refs)))
            continue
        inputs = tuple(latest[keys[r]] for r in item.inputs)
        items.append(Step(item.kind, inputs, item.params, item.outputs, ccw=item.ccw))
        for r in item.outputs:
            latest[keys[r]] = r
    return ConstructionSequence(seq.prompt, tuple(items), seq.profile)


# ---------------------------------------------------------------------------
# encoding


def _point_tok(p: Point2) -> int:
    return point_token(*encode_point(p))


def _line_tok(l: DirectedLine) -> int:
    return infline_token(*encode_line(l))


def _len_tok(v: float) -> int:
    return family_token("length", length_quantizer.encode(v))


def _angle_tok(v: float) -> int:
    return family_token("angle", encode_angle(v))


def _geometry_tokens(g: Geometry) -> list[int]:
    kind = geometry_kind(g)
    if kind == "point":
        return [_point_tok(g)]
    if kind == "line":
        return [_line_tok(g)]
    return [MARKER["Circle"], _point_tok(g.center), _len_tok(g.radius), ccw_token(g.ccw)]


def tokenize(seq: ConstructionSequence) -> list[int]:
    """Encode a well formed sequence as a token id list."""
    snapped, trace = _snap_with_trace(seq)
    regs = trace.registers
    prompt = snapped.prompt
    out: list[int] = []

    out.append(MARKER["StartOfPrompt"])
    out.append(MARKER["DimensionDatum"])
    out.append(_point_tok(prompt.datum))
    out.append(_line_tok(prompt.datum_x_axis()))
    out.append(_line_tok(prompt.datum_y_axis()))
    out.append(MARKER["BoundingBox"])
    out.append(_point_tok(prompt.bbox.min_pt))
    out.append(_point_tok(prompt.bbox.max_pt))
    out.append(family_token("area", unit_quantizer.encode(prompt.area)))
    out.append(family_token("complexity", encode_count(prompt.complexity)))
    out.append(family_token("num_loops", encode_count(prompt.num_loops)))
    out.append(family_token("smooth", unit_quantizer.encode(prompt.smooth_fraction)))
    out.append(MARKER["CenterOfGravity"])
    out.append(_point_tok(prompt.cog))
    out.append(MARKER["SymmetryLines"])
    for line in prompt.symmetry_lines:
        out.append(_line_tok(line))
    out.append(MARKER["BoundLines"])
    for seg in prompt.bound_lines:
        out.append(MARKER["BoundLine"])
        out.append(_point_tok(seg.start))
        out.append(_point_tok(seg.end))
    out.append(MARKER["BoltHoles"])
    for hole in prompt.bolt_holes:
        out.append(MARKER["BoltHole"])
        out.append(_point_tok(hole.center))
        out.append(_len_tok(hole.radius))
        out.append(_len_tok(hole.clearance))
    out.append(MARKER["EndOfPrompt"])

    out.append(MARKER["StartOfConstruction"])
    for item in snapped.steps:
        if isinstance(item, CurveEmit):
            out.append(MARKER["CreatedCurve"])
            if item.kind == "line":
                out.append(MARKER["BoundLine"])
                for r in item.refs:
                    out.append(_point_tok(regs[r]))
            elif item.kind == "arc":
                out.append(MARKER["Arc"])
                for r in item.refs:
                    out.append(_point_tok(regs[r]))
            else:
                out.extend(_geometry_tokens(regs[item.refs[0]]))
            continue
        out.append(STEP_TAG[item.kind])
        for r in item.inputs:
            out.extend(_geometry_tokens(regs[r]))
        for use in item.params:
            out.append(param_tag(use.index))
            out.append(_len_tok(use.value) if use.kind == "length" else _angle_tok(use.value))
        for r in item.outputs:
            out.extend(_geometry_tokens(regs[r]))
    out.append(MARKER["EndOfConstruction"])

    out.append(MARKER["StartOfProfile"])
    for loop in snapped.profile.loops:
        if isinstance(loop, CircleLoop):
            out.append(MARKER["SingleCircleLoop"])
            out.append(_point_tok(loop.circle.center))
            out.append(_len_tok(loop.circle.radius))
            continue
        out.append(MARKER["PolyArcLineLoop"])
        for curve in loop.curves:
            if isinstance(curve, ArcSegment):
                out.append(MARKER["ProfileArc"])
                out.append(_point_tok(curve.mid))
                out.append(_point_tok(curve.end))
            else:
                out.append(MARKER["ProfileLine"])
                out.append(_point_tok(curve.end))
    out.append(MARKER["EndOfProfile"])
    return out


# ---------------------------------------------------------------------------
# decoding


class _Reader:
    def __init__(self, tokens: list[int]):
        self.tokens = tokens
        self.pos = 0

    def eof(self) -> bool:
        return self.pos >= len(self.tokens)

    def fail(self, reason: str):
        raise TokenSyntaxError(self.pos, reason)

    def peek(self) -> int:
        if self.eof():
            self.fail("unexpected end of stream")
        t = self.tokens[self.pos]
        if not isinstance(t, int) or not 0 <= t < VOCAB_SIZE:
            self.fail(f"id {t!r} outside the vocabulary")
        return t

    def take(self) -> int:
        t = self.peek()
        self.pos += 1
        return t

    def expect(self, marker: str) -> None:
        t = self.take()
        if t != MARKER[marker]:
            self.pos -= 1
            self.fail(f"expected {marker}, found {token_name(t)}")

    def at_marker(self, marker: str) -> bool:
        return not self.eof() and self.peek() == MARKER[marker]

    def value(self, family: str) -> int:
        t = self.take()
        if not in_family(t, family):
            self.pos -= 1
            self.fail(f"expected a {family} value, found {token_name(t)}")
        return value_bin(t, family)

    def point(self) -> Point2:
        t = self.take()
        if not in_family(t, "point"):
            self.pos -= 1
            self.fail(f"expected a point, found {token_name(t)}")
        return decode_point(*point_bins(t))

    def infline(self) -> DirectedLine:
        t = self.take()
        if not in_family(t, "infline"):
            self.pos -= 1
            self.fail(f"expected an infinite line, found {token_name(t)}")
        return decode_line(*infline_bins(t))

    def length(self) -> float:
        return length_quantizer.decode(self.value("length"))

    def angle(self) -> float:
        return decode_angle(self.value("angle"))

    def ccw(self) -> bool:
        return self.value("is_ccw") == 1


def _read_prompt(r: _Reader) -> GeometricPrompt:
    from .geometry import BoundingBox

    r.expect("StartOfPrompt")
    r.expect("DimensionDatum")
    datum = r.point()
    r.infline()  # the axes are implied by the datum point
    r.infline()
    r.expect("BoundingBox")
    bb_min = r.point()
    bb_max = r.point()
    area = unit_quantizer.decode(r.value("area"))
    complexity = decode_count(r.value("complexity"))
    num_loops = decode_count(r.value("num_loops"))
    smooth = unit_quantizer.decode(r.value("smooth"))
    r.expect("CenterOfGravity")
    cog = r.point()
    r.expect("SymmetryLines")
    sym = []
    while not r.eof() and in_family(r.peek(), "infline"):
        sym.append(r.infline())
    r.expect("BoundLines")
    bounds = []
    while r.at_marker("BoundLine"):
        r.take()
        at = r.pos
        start = r.point()
        end = r.point()
        if start == end:
            raise TokenSyntaxError(at, "bound line start and end coincide")
        bounds.append(LineSegment(start, end))
    r.expect("BoltHoles")
    holes = []
    while r.at_marker("BoltHole"):
        r.take()
        center = r.point()
        at = r.pos
        radius = r.length()
        clearance = r.length()
        if radius <= 0.0 or clearance <= 0.0:
            raise TokenSyntaxError(at, "bolt hole radius and clearance must be positive")
        holes.append(BoltHole(center, radius, clearance))
    r.expect("EndOfPrompt")
    return GeometricPrompt(
        datum=datum,
        bbox=BoundingBox(bb_min, bb_max),
        area=area,
        complexity=complexity,
        num_loops=num_loops,
        smooth_fraction=smooth,
        cog=cog,
        symmetry_lines=tuple(sym),
        bound_lines=tuple(bounds),
        bolt_holes=tuple(holes),
    )


class _Registers:
    """Token-keyed register table; lookups resolve to the newest match."""

    def __init__(self):
        self.by_key: dict[tuple, int] = {}
        self.count = 0

    def add(self, key: tuple) -> int:
        rid = self.count
        self.count += 1
        self.by_key[key] = rid
        return rid

    def find(self, key: tuple) -> int | None:
        return self.by_key.get(key)


def _register_key(g: Geometry) -> tuple:
    kind = geometry_kind(g)
    if kind == "point":
        return ("point", _point_tok(g))
    if kind == "line":
        return ("line", _line_tok(g))
    return ("circle", _point_tok(g.center), _len_tok(g.radius), ccw_token(g.ccw))


def _read_point_ref(r: _Reader, regs: _Registers) -> int:
    at = r.pos
    p = r.point()
    rid = regs.find(("point", _point_tok(p)))
    if rid is None:
        raise TokenSyntaxError(at, "no register holds this point")
    return rid


def _read_line_ref(r: _Reader, regs: _Registers) -> int:
    at = r.pos
    l = r.infline()
    rid = regs.find(("line", _line_tok(l)))
    if rid is None:
        raise TokenSyntaxError(at, "no register holds this line")
    return rid


def _read_circle_entity(r: _Reader) -> tuple:
    r.expect("Circle")
    center = r.point()
    at = r.pos
    radius = r.length()
    if radius <= 0.0:
        raise TokenSyntaxError(at, "circle radius must be positive")
    flag = r.ccw()
    return ("circle", _point_tok(center), _len_tok(radius), ccw_token(flag)), flag


def _read_circle_ref(r: _Reader, regs: _Registers) -> int:
    at = r.pos
    key, _ = _read_circle_entity(r)
    rid = regs.find(key)
    if rid is None:
        raise TokenSyntaxError(at, "no register holds this circle")
    return rid


def _read_step(r: _Reader, regs: _Registers) -> Step:
    tag = r.take()
    kind = STEP_NAMES[value_bin(tag, "steps")]
    in_kinds, param_kinds, out_shape = SIGNATURES[kind]

    inputs = []
    for want in in_kinds:
        if want == "point":
            inputs.append(_read_point_ref(r, regs))
        elif want == "line":
            inputs.append(_read_line_ref(r, regs))
        else:
            inputs.append(_read_circle_ref(r, regs))

    params = []
    for want in param_kinds:
        at = r.pos
        t = r.take()
        if not in_family(t, "params"):
            raise TokenSyntaxError(at, f"{kind} needs a UseParameterN tag, found {token_name(t)}")
        index = param_index(t)
        value = r.length() if want == "length" else r.angle()
        params.append(ParamUse(index, want, value))

    ccw: bool | None = None
    outputs = []
    if out_shape == "points2":
        outputs.append(regs.add(("point", _point_out(r))))
        if not r.eof() and in_family(r.peek(), "point"):
            outputs.append(regs.add(("point", _point_out(r))))
    elif out_shape == "arc3":
        for _ in range(3):
            outputs.append(regs.add(("point", _point_out(r))))
    elif out_shape == "point":
        outputs.append(regs.add(("point", _point_out(r))))
    elif out_shape == "line":
        outputs.append(regs.add(("line", _line_out(r))))
    elif out_shape == "line_pair":
        outputs.append(regs.add(("line", _line_out(r))))
        outputs.append(regs.add(("line", _line_out(r))))
    else:  # circle
        key, flag = _read_circle_entity(r)
        outputs.append(regs.add(key))
        if kind == "PointRadiusCircle":
            ccw = flag
    return Step(kind, tuple(inputs), tuple(params), tuple(outputs), ccw=ccw)


def _point_out(r: _Reader) -> int:
    t = r.take()
    if not in_family(t, "point"):
        r.pos -= 1
        r.fail(f"expected an output point, found {token_name(t)}")
    return t


def _line_out(r: _Reader) -> int:
    t = r.take()
    if not in_family(t, "infline"):
        r.pos -= 1
        r.fail(f"expected an output line, found {token_name(t)}")
    return t


def _read_emit(r: _Reader, regs: _Registers, circle_ccw: dict) -> CurveEmit:
    r.expect("CreatedCurve")
    t = r.peek()
    if t == MARKER["BoundLine"]:
        r.take()
        refs = (_read_point_ref(r, regs), _read_point_ref(r, regs))
        return CurveEmit("line", refs)
    if t == MARKER["Arc"]:
        r.take()
        refs = tuple(_read_point_ref(r, regs) for _ in range(3))
        return CurveEmit("arc", refs)
    if t == MARKER["Circle"]:
        at = r.pos
        key, flag = _read_circle_entity(r)
        rid = regs.find(key)
        if rid is None:
            raise TokenSyntaxError(at, "no register holds this circle")
        circle_ccw[key[1], key[2]] = flag
        return CurveEmit("circle", (rid,))
    r.fail(f"expected BoundLine, Arc or Circle after CreatedCurve, found {token_name(t)}")


def _read_profile(r: _Reader, circle_ccw: dict) -> Profile:
    r.expect("StartOfProfile")
    loops = []
    while not r.at_marker("EndOfProfile"):
        t = r.peek()
        if t == MARKER["SingleCircleLoop"]:
            r.take()
            center = r.point()
            at = r.pos
            radius = r.length()
            if radius <= 0.0:
                raise TokenSyntaxError(at, "circle radius must be positive")
            flag = circle_ccw.get((_point_tok(center), _len_tok(radius)), True)
            loops.append(CircleLoop(OrientedCircle(center, radius, flag)))
            continue
        if t != MARKER["PolyArcLineLoop"]:
            r.fail(
                f"expected PolyArcLineLoop, SingleCircleLoop or EndOfProfile, found {token_name(t)}"
            )
        at_loop = r.pos
        r.take()
        items: list[tuple[Point2 | None, Point2]] = []
        while not r.eof() and r.peek() in (MARKER["ProfileLine"], MARKER["ProfileArc"]):
            if r.take() == MARKER["ProfileLine"]:
                items.append((None, r.point()))
            else:
                items.append((r.point(), r.point()))
        if len(items) < 2:
            raise TokenSyntaxError(at_loop, "a loop needs at least two curves")
        curves = []
        for i, (mid, end) in enumerate(items):
            start = items[i - 1][1]
            if mid is None:
                curves.append(LineSegment(start, end))
            else:
                curves.append(ArcSegment(start, mid, end))
        loops.append(PathLoop(tuple(curves)))
    r.take()
    return Profile(tuple(loops))


def detokenize(tokens: list[int]) -> ConstructionSequence:
    """Parse a token stream; raises TokenSyntaxError on the first violation."""
    r = _Reader(tokens)
    prompt = _read_prompt(r)

    regs = _Registers()
    try:
        for g in prompt_registers(prompt):
            regs.add(_register_key(g))
    except (NoSolutionError, OutOfRangeError) as e:
        raise TokenSyntaxError(r.pos, f"prompt produces unusable registers: {e}") from e

    r.expect("StartOfConstruction")
    items: list[SequenceItem] = []
    circle_ccw: dict = {}
    while not r.at_marker("EndOfConstruction"):
        t = r.peek()
        if in_family(t, "steps"):
            items.append(_read_step(r, regs))
        elif t == MARKER["CreatedCurve"]:
            items.append(_read_emit(r, regs, circle_ccw))
        else:
            r.fail(
                f"expected a step tag, CreatedCurve or EndOfConstruction, found {token_name(t)}"
            )
    r.take()

    profile = _read_profile(r, circle_ccw)
    if not r.eof():
        r.fail("trailing tokens after EndOfProfile")
    return ConstructionSequence(prompt, tuple(items), profile)


# ---------------------------------------------------------------------------
# token files


def write_token_file(path, tokens: list[int]) -> None:
    lines = [f"{TOKEN_FILE_MAGIC} {TOKEN_FILE_VERSION}"]
    for i in range(0, len(tokens), 16):
        lines.append(" ".join(str(t) for t in tokens[i : i + 16]))
    with open(path, "w", encoding="ascii") as f:
        f.write("\n".join(lines) + "\n")


def read_token_file(path) -> list[int]:
    with open(path, "r", encoding="ascii") as f:
        header = f.readline().split()
        if header[:1] != [TOKEN_FILE_MAGIC] or len(header) != 2:
            raise ValueError(f"{path}: not a token file")
        if int(header[1]) != TOKEN_FILE_VERSION:
            raise ValueError(f"{path}: unsupported token file version {header[1]}")
        tokens = []
        for raw in f:
            for field in raw.split():
                t = int(field)
                if not 0 <= t < VOCAB_SIZE:
                    raise ValueError(f"{path}: token id {t} outside the vocabulary")
                tokens.append(t)
    return tokens
