"""Token vocabulary shared by the tokenizer, detokenizer and any model.

The id layout is frozen in a versioned manifest file shipped with the
package (data/vocab_v1.txt) so token files stay portable across builds.
The module builds its tables from that file and refuses to start on a
mismatch.

Families:
  markers         structural tokens (section starts/ends, entity headers)
  steps           one tag per construction step kind
  params          UseParameter0 .. UseParameter31
  length/angle    scalar value grids
  point           row-major 127 x 127 grid over the unit square
  infline         angle bin * 127 + distance bin
  area/complexity/num_loops/smooth  prompt summary scalars
  is_ccw          orientation flag
"""

from __future__ import annotations

from importlib import resources

VOCAB_VERSION = 1

MARKER_NAMES = [
    "StartOfPrompt",
    "EndOfPrompt",
    "StartOfConstruction",
    "EndOfConstruction",
    "StartOfProfile",
    "EndOfProfile",
    "CreatedCurve",
    "PolyArcLineLoop",
    "SingleCircleLoop",
    "ProfileLine",
    "ProfileArc",
    "BoundLine",
    "Arc",
    "Circle",
    "BoundingBox",
    "DimensionDatum",
    "BoltHole",
    "CenterOfGravity",
    "SymmetryLines",
    "BoundLines",
    "BoltHoles",
]

STEP_NAMES = [
    "LineXLine",
    "LineXCircle",
    "LineOffsetLine",
    "CircleOffsetCircle",
    "LineReverseLine",
    "CircleReverseCircle",
    "PointLineSymPoint",
    "LineSymLineLine",
    "LineAxisRotatedLine",
    "LineDatumParallelLine",
    "LineCircleParallelLine",
    "SymLineOffsetLineLine",
    "PointRadiusCircle",
    "CirclePointPointArc",
    "LineLineFillet",
]

MAX_PARAMETERS = 32

_FAMILY_SIZES = [
    ("markers", len(MARKER_NAMES)),
    ("steps", len(STEP_NAMES)),
    ("params", MAX_PARAMETERS),
    ("length", 127),
    ("angle", 121),
    ("point", 127 * 127),
    ("infline", 121 * 127),
    ("area", 127),
    ("complexity", 127),
    ("num_loops", 127),
    ("smooth", 127),
    ("is_ccw", 2),
]


def _load_manifest() -> dict[str, tuple[int, int]]:
    text = resources.files("profileforge").joinpath("data/vocab_v1.txt").read_text()
    families: dict[str, tuple[int, int]] = {}
    version = None
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if fields[0] == "version":
            version = int(fields[1])
        elif fields[0] == "range":
            families[fields[1]] = (int(fields[2]), int(fields[3]))
        else:
            raise ValueError(f"bad manifest line: {raw!r}")
    if version != VOCAB_VERSION:
        raise ValueError(f"vocabulary manifest version {version} != {VOCAB_VERSION}")
    return families


def render_manifest() -> str:
    """The canonical manifest text for the layout compiled into this module."""
    lines = [f"version {VOCAB_VERSION}"]
    base = 0
    for name, size in _FAMILY_SIZES:
        lines.append(f"range {name} {base} {size}")
        base += size
    return "\n".join(lines) + "\n"


FAMILY_RANGES: dict[str, tuple[int, int]] = _load_manifest()

_expected = {}
_base = 0
for _name, _size in _FAMILY_SIZES:
    _expected[_name] = (_base, _size)
    _base += _size
if FAMILY_RANGES != _expected:
    raise ValueError("vocabulary manifest does not match the compiled layout")

VOCAB_SIZE = _base

MARKER = {name: FAMILY_RANGES["markers"][0] + i for i, name in enumerate(MARKER_NAMES)}
STEP_TAG = {name: FAMILY_RANGES["steps"][0] + i for i, name in enumerate(STEP_NAMES)}

_ID_NAME: dict[int, str] = {}
for name, tid in MARKER.items():
    _ID_NAME[tid] = name
for name, tid in STEP_TAG.items():
    _ID_NAME[tid] = name
for i in range(MAX_PARAMETERS):
    _ID_NAME[FAMILY_RANGES["params"][0] + i] = f"UseParameter{i}"


def family_of(token: int) -> str:
    for name, (base, size) in FAMILY_RANGES.items():
        if base <= token < base + size:
            return name
    raise ValueError(f"token {token} outside the vocabulary")


def in_family(token: int, family: str) -> bool:
    base, size = FAMILY_RANGES[family]
    return base <= token < base + size


def value_bin(token: int, family: str) -> int:
    base, size = FAMILY_RANGES[family]
    if not base <= token < base + size:
        raise ValueError(f"token {token} is not a {family} token")
    return token - base


def family_token(family: str, bin_: int) -> int:
    base, size = FAMILY_RANGES[family]
    if not 0 <= bin_ < size:
        raise ValueError(f"bin {bin_} outside family {family}")
    return base + bin_


def param_tag(index: int) -> int:
    if not 0 <= index < MAX_PARAMETERS:
        raise ValueError(f"parameter index {index} outside [0, {MAX_PARAMETERS})")
    return FAMILY_RANGES["params"][0] + index


def param_index(token: int) -> int:
    return value_bin(token, "params")


def point_token(ix: int, iy: int) -> int:
    return family_token("point", ix * 127 + iy)


def point_bins(token: int) -> tuple[int, int]:
    b = value_bin(token, "point")
    return divmod(b, 127)


def infline_token(ia: int, id_: int) -> int:
    return family_token("infline", ia * 127 + id_)


def infline_bins(token: int) -> tuple[int, int]:
    b = value_bin(token, "infline")
    return divmod(b, 127)


def ccw_token(ccw: bool) -> int:
    return family_token("is_ccw", 1 if ccw else 0)


def token_name(token: int) -> str:
    """Readable name, mostly for error messages and debug dumps."""
    if token in _ID_NAME:
        return _ID_NAME[token]
    fam = family_of(token)
    return f"{fam}[{token - FAMILY_RANGES[fam][0]}]"
