"""Turns a preprocessed profile plus its prompt and relations into a
replayable construction sequence.

The build runs in phases: plan source lines and offset chains per parallel
group, emit an over-complete candidate step set for every required piece of
geometry, complete the graph with reverse/radius steps, break dataflow
cycles, prune to the cheapest provider per geometry, and order what
survives into an SSA step list interleaved with curve emissions.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

from . import geometry as geom
from .geometry import (
    ArcSegment,
    DirectedLine,
    LineSegment,
    NoSolutionError,
    OrientedCircle,
    Point2,
    norm_angle,
)
from .model import (
    ConstructionSequence,
    CurveEmit,
    GeometricPrompt,
    Geometry,
    ParamUse,
    Step,
    geometry_kind,
    prompt_registers,
)
from .preprocess import ANGLE_TOL, LENGTH_TOL
from .profile import CircleLoop, PathLoop, Profile
from .relations import ParallelGroup, RelationSet, distance_bin, line_position

STEP_COST = 0.1
PARAM_COST = 1.0

# cycle-break tie priorities: higher survives longer
PRIORITY = {
    "LineLineFillet": 5,
    "LineCircleParallelLine": 4,
    "LineXCircle": 3,
    "PointLineSymPoint": 2,
    "LineSymLineLine": 2,
}


class UnreachableGroup(ValueError):
    """A parallel group has no source line to start its offsets from."""


class UnbreakableCycle(ValueError):
    """A dataflow cycle consists entirely of essential edges."""


class IncompleteConstruction(ValueError):
    """Required geometry cannot be built from the prompt."""


def _same_value(a: Geometry, b: Geometry) -> bool:
    if isinstance(a, Point2) and isinstance(b, Point2):
        return a.dist(b) <= LENGTH_TOL
    if isinstance(a, DirectedLine) and isinstance(b, DirectedLine):
        return (
            math.cos(a.phi - b.phi) > 0.0
            and abs(math.sin(a.phi - b.phi)) <= math.sin(ANGLE_TOL)
            and abs(a.d - b.d) <= LENGTH_TOL
        )
    if isinstance(a, OrientedCircle) and isinstance(b, OrientedCircle):
        return (
            a.ccw == b.ccw
            and a.center.dist(b.center) <= LENGTH_TOL
            and abs(a.radius - b.radius) <= LENGTH_TOL
        )
    return False


@dataclass
class GeomNode:
    id: int
    kind: str
    value: Geometry
    prompt_register: int | None = None


@dataclass
class StepCand:
    id: int
    kind: str
    inputs: tuple[int, ...]
    params: tuple[tuple[str, float], ...]
    outputs: tuple[int, ...]
    ccw: bool | None = None
    priority: int = 1


@dataclass
class _Plan:
    """Working state shared by the build phases."""

    profile: Profile
    prompt: GeometricPrompt
    rel: RelationSet
    nodes: list[GeomNode] = field(default_factory=list)
    steps: list[StepCand] = field(default_factory=list)
    removed: set[tuple[int, int]] = field(default_factory=set)  # (step, geom) output edges
    emissions: list[tuple[str, list[int]]] = field(default_factory=list)

    # --- geometry table ---

    def find(self, value: Geometry) -> int | None:
        for n in self.nodes:
            if n.kind == geometry_kind(value) and _same_value(n.value, value):
                return n.id
        return None

    def add_node(self, value: Geometry, prompt_register: int | None = None) -> int:
        node = GeomNode(len(self.nodes), geometry_kind(value), value, prompt_register)
        self.nodes.append(node)
        return node.id

    def find_or_add(self, value: Geometry) -> int:
        got = self.find(value)
        return got if got is not None else self.add_node(value)

    def line_nodes(self) -> list[GeomNode]:
        return [n for n in self.nodes if n.kind == "line"]

    def add_step(
        self,
        kind: str,
        inputs: tuple[int, ...],
        params: tuple[tuple[str, float], ...],
        out_values: list[Geometry],
        ccw: bool | None = None,
    ) -> StepCand | None:
        outputs = tuple(self.find_or_add(v) for v in out_values)
        for s in self.steps:
            if (s.kind, s.inputs, s.outputs, s.ccw) == (kind, inputs, outputs, ccw) and all(
                pk == qk and abs(pv - qv) < 1e-12 for (pk, pv), (qk, qv) in zip(s.params, params)
            ):
                return None
        cand = StepCand(
            len(self.steps), kind, inputs, params, outputs, ccw, PRIORITY.get(kind, 1)
        )
        self.steps.append(cand)
        return cand

    # --- live-graph views (respect removed edges) ---

    def dead_steps(self) -> set[int]:
        return {
            s.id
            for s in self.steps
            if all((s.id, g) in self.removed for g in s.outputs)
        }

    def providers(self, gid: int) -> list[StepCand]:
        dead = self.dead_steps()
        return [
            s
            for s in self.steps
            if s.id not in dead and gid in s.outputs and (s.id, gid) not in self.removed
        ]


# ---------------------------------------------------------------------------
# phase 1: sources and offset plans


def _fold_pi(phi: float) -> float:
    phi = norm_angle(phi)
    return phi - math.pi if phi >= math.pi else phi


def _in_family(phi: float, family_phi: float) -> bool:
    gap = abs(_fold_pi(phi) - family_phi)
    return min(gap, math.pi - gap) <= ANGLE_TOL


def _pos_bin(pos: float) -> int:
    return round(pos / LENGTH_TOL)


def _plan_sources(plan: _Plan) -> dict[int, list[int]]:
    """Per parallel group, the node ids of lines usable as offset roots.

    Groups with no parallel or anti-parallel source get one
    LineAxisRotatedLine step from the nearest datum axis.
    """
    prompt = plan.prompt
    source_ids: list[int] = []
    n_sym = len(prompt.symmetry_lines)
    source_ids.extend([1, 2])  # datum axes
    source_ids.extend(range(3, 3 + n_sym))
    base = 3 + n_sym
    for k in range(len(prompt.bound_lines)):
        source_ids.append(base + 3 * k + 2)  # the carrier register

    roots: dict[int, list[int]] = {}
    for gi, group in enumerate(plan.rel.parallel_groups):
        here = [
            sid for sid in source_ids if _in_family(plan.nodes[sid].value.phi, group.phi)
        ]
        if not here:
            axis_id = min(
                (1, 2),
                key=lambda sid: min(
                    abs(_wrap_pi(group.phi - plan.nodes[sid].value.phi)),
                    abs(_wrap_pi(group.phi + math.pi - plan.nodes[sid].value.phi)),
                ),
            )
            axis = plan.nodes[axis_id].value
            angle = _wrap_pi(group.phi - axis.phi)
            if abs(_wrap_pi(group.phi + math.pi - axis.phi)) < abs(angle):
                angle = _wrap_pi(group.phi + math.pi - axis.phi)
            angle = norm_angle(angle)
            rotated = geom.line_axis_rotated_line(axis, plan.prompt.datum, angle)
            cand = plan.add_step(
                "LineAxisRotatedLine",
                (axis_id, 0),
                (("angle", angle),),
                [rotated],
            )
            here = [cand.outputs[0]]
        roots[gi] = here
    return roots


def _wrap_pi(a: float) -> float:
    return math.atan2(math.sin(a), math.cos(a))


def _plan_offsets(plan: _Plan, group: ParallelGroup, root_ids: list[int]) -> None:
    """Symmetric offsets first, then a frequency-guided offset tree."""
    phi = group.phi
    built: dict[int, tuple[float, int]] = {}  # pos bin -> (pos, node id)
    for rid in root_ids:
        pos = line_position(plan.nodes[rid].value, phi)
        built.setdefault(_pos_bin(pos), (pos, rid))

    needed: dict[int, float] = {}
    for line in group.lines:
        pos = line_position(line, phi)
        b = _pos_bin(pos)
        if b not in built and b not in needed:
            needed[b] = pos

    # mirror pairs about symmetry lines in this family
    for sym_i, sym in enumerate(plan.prompt.symmetry_lines):
        if not _in_family(sym.phi, phi):
            continue
        sym_id = 3 + sym_i
        s = line_position(sym, phi)
        open_bins = sorted(needed)
        for i, ba in enumerate(open_bins):
            for bb in open_bins[i + 1 :]:
                if ba not in needed or bb not in needed:
                    continue
                pa, pb = needed[ba], needed[bb]
                if abs((pa - s) + (pb - s)) > LENGTH_TOL:
                    continue
                t = abs(pa - s)
                if t <= 1e-9:
                    continue
                first = geom.line_offset_line(sym, t)
                second = geom.line_reverse_line(geom.line_offset_line(sym, -t))
                cand = plan.add_step(
                    "SymLineOffsetLineLine", (sym_id,), (("length", t),), [first, second]
                )
                if cand is None:
                    continue
                for value, nid in ((first, cand.outputs[0]), (second, cand.outputs[1])):
                    b = _pos_bin(line_position(value, phi))
                    built.setdefault(b, (line_position(value, phi), nid))
                    needed.pop(b, None)

    if not needed:
        return
    if not built:
        raise UnreachableGroup(f"parallel group at {phi:.4f} rad has no source line")

    # fully connected position graph; rarely used distances go first
    bins = sorted(built) + sorted(needed)
    pos_of = {b: (built[b][0] if b in built else needed[b]) for b in bins}
    edges = [
        (bins[i], bins[j])
        for i in range(len(bins))
        for j in range(i + 1, len(bins))
    ]
    alive = set(edges)
    order = sorted(
        edges,
        key=lambda e: (
            plan.rel.distance_freq.get(distance_bin(abs(pos_of[e[0]] - pos_of[e[1]])), 0),
            abs(pos_of[e[0]] - pos_of[e[1]]),
            e,
        ),
    )
    root_bins = set(built)
    for e in order:
        if len(alive) <= len(bins) - 1:
            break
        alive.discard(e)
        if not _connected(bins, alive, root_bins):
            alive.add(e)

    # Dijkstra from the built lines over the surviving edges
    dist = {b: (0.0 if b in built else math.inf) for b in bins}
    heap = [(0.0, b) for b in sorted(built)]
    heapq.heapify(heap)
    settled: set[int] = set()
    parent: dict[int, int] = {}
    adj: dict[int, list[int]] = {b: [] for b in bins}
    for a, b in alive:
        adj[a].append(b)
        adj[b].append(a)
    while heap:
        d, b = heapq.heappop(heap)
        if b in settled:
            continue
        settled.add(b)
        if b in needed:
            pb, parent_id = built[parent[b]]
            parent_value = plan.nodes[parent_id].value
            sign = 1.0 if math.cos(parent_value.phi - phi) > 0.0 else -1.0
            off = sign * (pos_of[b] - pb)
            out = geom.line_offset_line(parent_value, off)
            cand = plan.add_step("LineOffsetLine", (parent_id,), (("length", off),), [out])
            nid = cand.outputs[0] if cand else plan.find(out)
            built[b] = (pos_of[b], nid)
        for nb in sorted(adj[b]):
            w = d + abs(pos_of[nb] - pos_of[b])
            if nb not in settled and w < dist[nb]:
                dist[nb] = w
                parent[nb] = b
                heapq.heappush(heap, (w, nb))
    missing = [b for b in needed if b not in settled]
    if missing:
        raise UnreachableGroup(f"positions {missing} unreachable in group at {phi:.4f}")


def _connected(bins: list[int], edges: set[tuple[int, int]], roots: set[int]) -> bool:
    if not bins:
        return True
    comp = {b: b for b in bins}

    def find(x: int) -> int:
        while comp[x] != x:
            comp[x] = comp[comp[x]]
            x = comp[x]
        return x

    def union(a: int, b: int) -> None:
        ra, rb = find(a), find(b)
        if ra != rb:
            comp[ra] = rb

    roots = sorted(roots)
    for a, b in zip(roots, roots[1:]):
        union(a, b)  # sources are mutually constructible
    for a, b in edges:
        union(a, b)
    first = find(bins[0])
    return all(find(b) == first for b in bins)


# ---------------------------------------------------------------------------
# phase 2: candidate steps


def _plan_concentric(plan: _Plan) -> None:
    for group in plan.rel.concentric_groups:
        center_id = plan.find_or_add(group.center)
        members: list[OrientedCircle] = []
        for c in group.circles:
            if not any(_same_value(c, m) for m in members):
                members.append(c)
        for c in members:
            plan.add_step(
                "PointRadiusCircle", (center_id,), (("length", c.radius),), [c], ccw=c.ccw
            )
        for a in members:
            for b in members:
                if a is b or a.ccw != b.ccw:
                    continue
                off = (a.radius - b.radius) if a.ccw else (b.radius - a.radius)
                if off <= LENGTH_TOL / 2:
                    continue
                plan.add_step(
                    "CircleOffsetCircle",
                    (plan.find_or_add(a),),
                    (("length", off),),
                    [b],
                )


def _point_candidates(plan: _Plan) -> None:
    lines = plan.line_nodes()
    sym_ids = [3 + i for i in range(len(plan.prompt.symmetry_lines))]
    for target in [n for n in plan.nodes if n.kind == "point"]:
        if target.prompt_register is not None:
            continue
        through = [
            ln for ln in lines if abs(ln.value.signed_dist(target.value)) <= LENGTH_TOL
        ]
        for i, la in enumerate(through):
            for lb in through[i + 1 :]:
                if abs(math.sin(la.value.phi - lb.value.phi)) <= math.sin(ANGLE_TOL):
                    continue
                try:
                    q = geom.line_x_line(la.value, lb.value)
                except NoSolutionError:
                    continue
                if q.dist(target.value) > LENGTH_TOL or plan.find(q) != target.id:
                    continue
                plan.add_step("LineXLine", (la.id, lb.id), (), [q])
        for sid in sym_ids:
            mirrored = geom.point_line_sym_point(target.value, plan.nodes[sid].value)
            src = plan.find(mirrored)
            if src is not None and src != target.id:
                plan.add_step("PointLineSymPoint", (src, sid), (), [target.value])


def _line_mirror_candidates(plan: _Plan) -> None:
    sym_ids = [3 + i for i in range(len(plan.prompt.symmetry_lines))]
    for ln in list(plan.line_nodes()):
        for sid in sym_ids:
            mirrored = geom.line_sym_line_line(ln.value, plan.nodes[sid].value)
            tgt = plan.find(mirrored)
            if tgt is None or tgt == ln.id:
                continue
            if plan.nodes[tgt].prompt_register is not None:
                continue
            plan.add_step("LineSymLineLine", (ln.id, sid), (), [plan.nodes[tgt].value])


def _fillet_candidates(plan: _Plan) -> None:
    for f in plan.rel.fillets:
        variants = (
            (f.prev_carrier, f.next_carrier),
            (geom.line_reverse_line(f.next_carrier), geom.line_reverse_line(f.prev_carrier)),
        )
        for l1, l2 in variants:
            try:
                arc = geom.line_line_fillet(l1, l2, f.radius)
            except NoSolutionError:
                continue
            forward = arc.start.dist(f.arc.start) <= LENGTH_TOL and arc.end.dist(
                f.arc.end
            ) <= LENGTH_TOL
            backward = arc.start.dist(f.arc.end) <= LENGTH_TOL and arc.end.dist(
                f.arc.start
            ) <= LENGTH_TOL
            if (forward or backward) and arc.mid.dist(f.arc.mid) <= LENGTH_TOL:
                plan.add_step(
                    "LineLineFillet",
                    (plan.find_or_add(l1), plan.find_or_add(l2)),
                    (("length", f.radius),),
                    [arc.start, arc.mid, arc.end],
                )


def _line_circle_vertex_candidates(plan: _Plan) -> None:
    fillet_at = {(f.loop, f.curve) for f in plan.rel.fillets}
    for li, loop in enumerate(plan.profile.loops):
        if not isinstance(loop, PathLoop):
            continue
        n = len(loop.curves)
        for ci in range(n):
            cur, nxt = loop.curves[ci], loop.curves[(ci + 1) % n]
            pair = None
            if isinstance(cur, LineSegment) and isinstance(nxt, ArcSegment):
                if (li, (ci + 1) % n) in fillet_at:
                    continue
                pair = (cur, nxt)
            elif isinstance(cur, ArcSegment) and isinstance(nxt, LineSegment):
                if (li, ci) in fillet_at:
                    continue
                pair = (nxt, cur)
            if pair is None:
                continue
            seg, arc = pair
            try:
                circle = arc.circle()
            except NoSolutionError:
                continue
            carrier = seg.carrier()
            vertex = cur.end
            reach = abs(carrier.signed_dist(circle.center))
            if abs(reach - circle.radius) <= LENGTH_TOL:
                continue  # tangential contact has no stable intersection
            try:
                pts = geom.line_x_circle(carrier, circle)
            except NoSolutionError:
                continue
            if not any(q.dist(vertex) <= LENGTH_TOL for q in pts):
                continue
            plan.add_step(
                "LineXCircle",
                (plan.find_or_add(carrier), plan.find_or_add(circle)),
                (),
                list(pts),
            )


def _arc_mid_candidates(plan: _Plan) -> None:
    fillet_at = {(f.loop, f.curve) for f in plan.rel.fillets}
    for li, loop in enumerate(plan.profile.loops):
        if not isinstance(loop, PathLoop):
            continue
        for ci, c in enumerate(loop.curves):
            if not isinstance(c, ArcSegment) or (li, ci) in fillet_at:
                continue
            try:
                circle = c.circle()
                arc = geom.circle_point_point_arc(circle, c.start, c.end)
            except NoSolutionError:
                continue
            if arc.mid.dist(c.mid) > LENGTH_TOL:
                continue
            plan.add_step(
                "CirclePointPointArc",
                (plan.find_or_add(circle), plan.find_or_add(c.start), plan.find_or_add(c.end)),
                (),
                [arc.mid],
            )


def _parallel_through_candidates(plan: _Plan) -> None:
    """LineDatumParallelLine through prompt segment ends; LineCircleParallelLine
    tangent to clearance disks and profile circles.  Both are parameter-free."""
    prompt = plan.prompt
    n_sym = len(prompt.symmetry_lines)
    endpoint_ids = []
    for k in range(len(prompt.bound_lines)):
        endpoint_ids.extend([3 + n_sym + 3 * k, 3 + n_sym + 3 * k + 1])
    circle_ids = [n.id for n in plan.nodes if n.kind == "circle"]
    lines = plan.line_nodes()
    for target in list(lines):
        if target.prompt_register is not None:
            continue
        sources = [
            ln
            for ln in lines
            if ln.id != target.id
            and math.cos(ln.value.phi - target.value.phi) > 0.0
            and abs(math.sin(ln.value.phi - target.value.phi)) <= math.sin(ANGLE_TOL)
        ]
        for pid in endpoint_ids:
            pt = plan.nodes[pid].value
            if abs(target.value.signed_dist(pt)) > LENGTH_TOL:
                continue
            for src in sources:
                out = geom.line_datum_parallel_line(src.value, pt)
                if plan.find(out) == target.id:
                    plan.add_step("LineDatumParallelLine", (src.id, pid), (), [out])
        for cid in circle_ids:
            c = plan.nodes[cid].value
            if abs(target.value.signed_dist(c.center) - c.radius) > LENGTH_TOL:
                continue
            for src in sources:
                try:
                    out = geom.line_circle_parallel_line(src.value, c)
                except NoSolutionError:
                    continue
                if plan.find(out) == target.id:
                    plan.add_step("LineCircleParallelLine", (src.id, cid), (), [out])


def _complete(plan: _Plan) -> None:
    changed = True
    while changed:
        changed = False
        for node in list(plan.nodes):
            if node.prompt_register is not None or plan.providers(node.id):
                continue
            if node.kind == "line":
                rev = geom.line_reverse_line(node.value)
                src = plan.find(rev)
                if src is not None and src != node.id:
                    if plan.add_step("LineReverseLine", (src,), (), [node.value]):
                        changed = True
            elif node.kind == "circle":
                rev = geom.circle_reverse_circle(node.value)
                src = plan.find(rev)
                if src is not None and src != node.id:
                    if plan.add_step("CircleReverseCircle", (src,), (), [node.value]):
                        changed = True
                center = plan.find(node.value.center)
                if center is not None:
                    if plan.add_step(
                        "PointRadiusCircle",
                        (center,),
                        (("length", node.value.radius),),
                        [node.value],
                        ccw=node.value.ccw,
                    ):
                        changed = True


# ---------------------------------------------------------------------------
# phase 3: cycle breaking


def _essential_edges(plan: _Plan, required: set[int]) -> set[tuple[int, int]]:
    essential: set[tuple[int, int]] = set()
    seen: set[int] = set()
    work = sorted(required)
    while work:
        gid = work.pop()
        if gid in seen:
            continue
        seen.add(gid)
        if plan.nodes[gid].prompt_register is not None:
            continue
        steps = plan.providers(gid)
        if len(steps) != 1:
            continue
        step = steps[0]
        essential.add((step.id, gid))
        for inp in step.inputs:
            work.append(inp)
    return essential


def _hops(plan: _Plan) -> dict[str, dict[int, float]]:
    """Hop counts from the prompt; a step is reached once ALL inputs are.

    Steps whose inputs only exist inside an unentered cycle stay at
    infinity, which makes their edges the first to go.
    """
    dead = plan.dead_steps()
    live = [s for s in plan.steps if s.id not in dead]
    geom_hops: dict[int, float] = {
        n.id: (0 if n.prompt_register is not None else math.inf) for n in plan.nodes
    }
    step_hops: dict[int, float] = {s.id: math.inf for s in live}
    changed = True
    while changed:
        changed = False
        for s in live:
            worst = 0.0
            for inp in s.inputs:
                worst = max(worst, geom_hops[inp])
            h = worst + 1
            if h < step_hops[s.id]:
                step_hops[s.id] = h
                changed = True
            for out in s.outputs:
                if (s.id, out) in plan.removed:
                    continue
                if step_hops[s.id] + 1 < geom_hops[out]:
                    geom_hops[out] = step_hops[s.id] + 1
                    changed = True
    return {"geom": geom_hops, "step": step_hops}


def _find_cycle(plan: _Plan) -> list[tuple[int, int]] | None:
    """One cycle as a list of (step, geom) output edges, or None."""
    dead = plan.dead_steps()
    producer_edges: dict[int, list[StepCand]] = {}
    for s in plan.steps:
        if s.id in dead:
            continue
        for out in s.outputs:
            if (s.id, out) not in plan.removed:
                producer_edges.setdefault(out, []).append(s)

    WHITE, GRAY, BLACK = 0, 1, 2
    color: dict[int, int] = {}
    path: list[tuple[int, int, int]] = []  # (step id, produced geom, consumed geom)

    def visit(gid: int) -> list[tuple[int, int]] | None:
        color[gid] = GRAY
        for s in producer_edges.get(gid, ()):
            for inp in s.inputs:
                state = color.get(inp, WHITE)
                if state == GRAY:
                    cycle = [(s.id, gid)]
                    for s2, out2, _ in reversed(path):
                        cycle.append((s2, out2))
                        if out2 == inp:
                            break
                    return cycle
                if state == WHITE:
                    path.append((s.id, gid, inp))
                    got = visit(inp)
                    path.pop()
                    if got:
                        return got
        color[gid] = BLACK
        return None

    for node in plan.nodes:
        if color.get(node.id, WHITE) == WHITE:
            got = visit(node.id)
            if got:
                return got
    return None


def _break_cycles(plan: _Plan, required: set[int]) -> None:
    while True:
        cycle = _find_cycle(plan)
        if cycle is None:
            return
        essential = _essential_edges(plan, required)
        removable = [e for e in cycle if e not in essential]
        if not removable:
            raise UnbreakableCycle(f"cycle of {len(cycle)} essential edges")
        hops = _hops(plan)
        sid, gid = max(
            removable,
            key=lambda e: (
                max(hops["step"].get(e[0], math.inf), hops["geom"].get(e[1], math.inf)),
                -plan.steps[e[0]].priority,
                e,
            ),
        )
        plan.removed.add((sid, gid))


# ---------------------------------------------------------------------------
# phase 4: pruning


def _prune(plan: _Plan, required: set[int]) -> tuple[dict[int, StepCand], list[StepCand]]:
    """Cheapest provider per geometry; returns (chosen, kept steps in id order)."""
    dead = plan.dead_steps()
    live = [s for s in plan.steps if s.id not in dead]

    cost: dict[int, float] = {}
    for n in plan.nodes:
        cost[n.id] = 0.0 if n.prompt_register is not None else math.inf
    step_cost: dict[int, float] = {s.id: math.inf for s in live}
    chosen: dict[int, StepCand] = {}

    # fixed-point relaxation; the graph is a small DAG after cycle breaking
    for _ in range(len(live) + 1):
        moved = False
        for s in live:
            c = STEP_COST + PARAM_COST * len(s.params)
            for inp in s.inputs:
                c += cost[inp]
            if c < step_cost[s.id] - 1e-15:
                step_cost[s.id] = c
                moved = True
            for out in s.outputs:
                if (s.id, out) in plan.removed:
                    continue
                if plan.nodes[out].prompt_register is not None:
                    continue
                if step_cost[s.id] < cost[out] - 1e-15:
                    cost[out] = step_cost[s.id]
                    chosen[out] = s
                    moved = True
        if not moved:
            break

    kept: set[int] = set()
    work = sorted(required)
    seen: set[int] = set()
    while work:
        gid = work.pop()
        if gid in seen:
            continue
        seen.add(gid)
        if plan.nodes[gid].prompt_register is not None:
            continue
        if gid not in chosen or math.isinf(cost[gid]):
            raise IncompleteConstruction(
                f"no construction for {plan.nodes[gid].kind} node {gid}"
            )
        s = chosen[gid]
        kept.add(s.id)
        work.extend(s.inputs)
    return chosen, [s for s in plan.steps if s.id in kept]


# ---------------------------------------------------------------------------
# phase 5: ordering and register assignment


def _line_sort_point(line: DirectedLine, plan: _Plan) -> tuple[float, float]:
    box = plan.profile.bbox()
    hits: list[Point2] = []
    for phi, d in (
        (0.0, box.min_pt.y),
        (0.0, box.max_pt.y),
        (math.pi / 2, -box.min_pt.x),
        (math.pi / 2, -box.max_pt.x),
    ):
        try:
            q = geom.line_x_line(line, DirectedLine(phi, d))
        except NoSolutionError:
            continue
        if (
            box.min_pt.x - LENGTH_TOL <= q.x <= box.max_pt.x + LENGTH_TOL
            and box.min_pt.y - LENGTH_TOL <= q.y <= box.max_pt.y + LENGTH_TOL
        ):
            hits.append(q)
    if not hits:
        foot = line.foot()
        return (foot.y, foot.x)
    best = min(hits, key=lambda p: (p.y, p.x))
    return (best.y, best.x)


def _geom_key(plan: _Plan, gid: int):
    n = plan.nodes[gid]
    if n.kind == "point":
        return (0, n.value.y, n.value.x, 0.0)
    if n.kind == "line":
        y, x = _line_sort_point(n.value, plan)
        return (1, y, x, n.value.phi)
    return (2, n.value.center.y, n.value.center.x, n.value.radius)


def _order_items(
    plan: _Plan, chosen: dict[int, StepCand], kept: list[StepCand]
) -> list[tuple[str, object]]:
    """Steps scheduled per profile curve, emissions interleaved in order."""
    kept_ids = {s.id for s in kept}

    def deps_of(s: StepCand) -> list[int]:
        out = []
        for inp in s.inputs:
            if plan.nodes[inp].prompt_register is None:
                provider = chosen[inp]
                if provider.id in kept_ids:
                    out.append(provider.id)
        return out

    scheduled: set[int] = set()
    items: list[tuple[str, object]] = []

    def schedule_for(gids: list[int]) -> None:
        need: list[int] = []
        seen: set[int] = set()
        stack = sorted(gids)
        while stack:
            gid = stack.pop()
            if plan.nodes[gid].prompt_register is not None:
                continue
            s = chosen[gid]
            if s.id in scheduled or s.id in seen:
                continue
            seen.add(s.id)
            need.append(s.id)
            stack.extend(s.inputs)
        pending = set(need)
        ready: list = []
        blockers: dict[int, int] = {}
        waiting: dict[int, list[int]] = {}
        for sid in need:
            ds = [d for d in deps_of(plan.steps[sid]) if d in pending]
            blockers[sid] = len(ds)
            for d in ds:
                waiting.setdefault(d, []).append(sid)
            if not ds:
                heapq.heappush(ready, (_step_key(plan, sid), sid))
        while ready:
            _, sid = heapq.heappop(ready)
            scheduled.add(sid)
            items.append(("step", plan.steps[sid]))
            for w in waiting.get(sid, ()):  # release dependents
                blockers[w] -= 1
                if blockers[w] == 0:
                    heapq.heappush(ready, (_step_key(plan, w), w))

    for kind, gids in plan.emissions:
        schedule_for(gids)
        items.append(("emit", (kind, gids)))
    return items


def _step_key(plan: _Plan, sid: int):
    s = plan.steps[sid]
    return (min(_geom_key(plan, out) for out in s.outputs), sid)


def _assemble(
    plan: _Plan, chosen: dict[int, StepCand], items: list[tuple[str, object]]
) -> ConstructionSequence:
    n_prompt = len(prompt_registers(plan.prompt))
    reg_of_output: dict[tuple[int, int], int] = {}
    param_index: dict[tuple[str, float], int] = {}
    next_reg = n_prompt

    def register_for(gid: int) -> int:
        node = plan.nodes[gid]
        if node.prompt_register is not None:
            return node.prompt_register
        s = chosen[gid]
        return reg_of_output[(s.id, s.outputs.index(gid))]

    seq_items: list = []
    for kind, payload in items:
        if kind == "step":
            s = payload
            inputs = tuple(register_for(g) for g in s.inputs)
            uses = []
            for pkind, pvalue in s.params:
                key = (pkind, round(pvalue, 9))
                if key not in param_index:
                    param_index[key] = len(param_index)
                uses.append(ParamUse(param_index[key], pkind, pvalue))
            outputs = []
            for slot in range(len(s.outputs)):
                reg_of_output[(s.id, slot)] = next_reg
                outputs.append(next_reg)
                next_reg += 1
            seq_items.append(
                Step(s.kind, inputs, tuple(uses), tuple(outputs), ccw=s.ccw)
            )
        else:
            emit_kind, gids = payload
            seq_items.append(CurveEmit(emit_kind, tuple(register_for(g) for g in gids)))
    return ConstructionSequence(plan.prompt, tuple(seq_items), plan.profile)


# ---------------------------------------------------------------------------
# entry point


def build_sequence(
    profile: Profile, prompt: GeometricPrompt, rel: RelationSet
) -> ConstructionSequence:
    """Construction sequence for a preprocessed profile.

    Raises UnreachableGroup, UnbreakableCycle or IncompleteConstruction when
    the candidate rules cannot build the profile; such profiles are skipped
    by corpus extraction.
    """
    plan = _Plan(profile, prompt, rel)
    for i, g in enumerate(prompt_registers(prompt)):
        plan.add_node(g, prompt_register=i)

    required: set[int] = set()
    for loop in profile.loops:
        if isinstance(loop, CircleLoop):
            gid = plan.find_or_add(loop.circle)
            plan.emissions.append(("circle", [gid]))
            required.add(gid)
        else:
            for c in loop.curves:
                if isinstance(c, ArcSegment):
                    gids = [plan.find_or_add(q) for q in (c.start, c.mid, c.end)]
                    plan.emissions.append(("arc", gids))
                else:
                    gids = [plan.find_or_add(q) for q in (c.start, c.end)]
                    plan.emissions.append(("line", gids))
                required.update(gids)

    for _, c in profile.path_curves():
        if isinstance(c, LineSegment):
            plan.find_or_add(c.carrier())

    roots = _plan_sources(plan)
    for gi, group in enumerate(plan.rel.parallel_groups):
        _plan_offsets(plan, group, roots[gi])
    _plan_concentric(plan)
    _fillet_candidates(plan)
    _line_circle_vertex_candidates(plan)
    _arc_mid_candidates(plan)
    _point_candidates(plan)
    _line_mirror_candidates(plan)
    _parallel_through_candidates(plan)
    _complete(plan)
    _break_cycles(plan, required)
    chosen, kept = _prune(plan, required)
    items = _order_items(plan, chosen, kept)
    return _assemble(plan, chosen, items)
