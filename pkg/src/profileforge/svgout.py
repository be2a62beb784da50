"""Render profiles as standalone SVG documents.

All loops are joined into one even-odd filled path so holes punch through.
Path data stays in model coordinates (y up); a group transform flips the
axis for screen display.
"""

from __future__ import annotations

import math

from .geometry import ArcSegment, OrientedCircle
from .profile import CircleLoop, PathLoop, Profile


def _f(v: float) -> str:
    out = f"{v:.6f}".rstrip("0").rstrip(".")
    return out if out not in ("", "-0") else "0"


def _arc_cmd(arc: ArcSegment) -> str:
    circle = arc.circle()
    r = circle.radius
    large = 1 if arc.span() > math.pi else 0
    sweep = 1 if arc.is_ccw() else 0
    return f"A {_f(r)} {_f(r)} 0 {large} {sweep} {_f(arc.end.x)} {_f(arc.end.y)}"


def _circle_cmds(c: OrientedCircle) -> str:
    sweep = 1 if c.ccw else 0
    left = c.center.x - c.radius
    right = c.center.x + c.radius
    y = c.center.y
    r = _f(c.radius)
    return (
        f"M {_f(right)} {_f(y)} "
        f"A {r} {r} 0 1 {sweep} {_f(left)} {_f(y)} "
        f"A {r} {r} 0 1 {sweep} {_f(right)} {_f(y)} Z"
    )


def profile_path_data(profile: Profile) -> str:
    parts = []
    for loop in profile.loops:
        if isinstance(loop, CircleLoop):
            parts.append(_circle_cmds(loop.circle))
            continue
        if not loop.curves:
            continue
        start = loop.curves[0].start
        cmds = [f"M {_f(start.x)} {_f(start.y)}"]
        for curve in loop.curves:
            if isinstance(curve, ArcSegment):
                cmds.append(_arc_cmd(curve))
            else:
                cmds.append(f"L {_f(curve.end.x)} {_f(curve.end.y)}")
        cmds.append("Z")
        parts.append(" ".join(cmds))
    return " ".join(parts)


def profile_to_svg(
    profile: Profile,
    size: int = 512,
    fill: str = "#cfd8e3",
    stroke: str = "#c0392b",
    stroke_width: float = 0.004,
) -> str:
    data = profile_path_data(profile)
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="-0.55 -0.55 1.1 1.1">\n'
        f'  <g transform="scale(1,-1)">\n'
        f'    <path d="{data}" fill="{fill}" fill-rule="evenodd" '
        f'stroke="{stroke}" stroke-width="{stroke_width}" stroke-linejoin="round"/>\n'
        f"  </g>\n"
        f"</svg>\n"
    )
