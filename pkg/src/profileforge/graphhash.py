"""Congruence hashing of profiles for corpus deduplication.

A profile becomes an undirected labelled graph: nodes are loop vertices
labelled by their 8x8-quantized coordinates, edges are the curves between
them labelled by curve type.  A full circle has no vertices, so it turns
into a single self-looped node at its center.  Iterated label refinement
(each round every node absorbs the multiset of its neighbours' labels and
edge labels) makes the final multiset of node labels independent of loop
order, loop start, or traversal direction, which is exactly the notion of
"duplicate" the dedup needs.
"""

from __future__ import annotations

import hashlib

from .geometry import ArcSegment, Point2
from .profile import CircleLoop, PathLoop, Profile

GRID_BINS = 8
WL_ROUNDS = 3


def _bin(value: float) -> int:
    """Coordinate bin over [-0.5, 0.5] in an 8x8 grid, clamped."""
    k = int((value + 0.5) * GRID_BINS)
    return min(max(k, 0), GRID_BINS - 1)


def _node_label(p: Point2) -> str:
    return f"v{_bin(p.x)},{_bin(p.y)}"


def _digest(text: str) -> str:
    return hashlib.blake2b(text.encode(), digest_size=8).hexdigest()


def profile_graph_hash(p: Profile) -> str:
    # adjacency: node index -> list of (edge label, neighbour index)
    labels: list[str] = []
    adjacency: list[list[tuple[str, int]]] = []

    def add_node(label: str) -> int:
        labels.append(label)
        adjacency.append([])
        return len(labels) - 1

    for loop in p.loops:
        if isinstance(loop, CircleLoop):
            c = loop.circle
            node = add_node(f"c{_bin(c.center.x)},{_bin(c.center.y)}")
            adjacency[node].append((f"circle{_bin(2.0 * c.radius)}", node))
            continue
        if not isinstance(loop, PathLoop) or not loop.curves:
            continue
        first = len(labels)
        for curve in loop.curves:
            add_node(_node_label(curve.start))
        n = len(loop.curves)
        for i, curve in enumerate(loop.curves):
            a = first + i
            b = first + (i + 1) % n
            kind = "arc" if isinstance(curve, ArcSegment) else "line"
            adjacency[a].append((kind, b))
            adjacency[b].append((kind, a))

    colors = [_digest(l) for l in labels]
    for _ in range(WL_ROUNDS):
        fresh = []
        for i, my in enumerate(colors):
            around = sorted(f"{edge}:{colors[j]}" for edge, j in adjacency[i])
            fresh.append(_digest(my + "|" + "|".join(around)))
        colors = fresh
    return _digest("|".join(sorted(colors)))


def dedup_by_hash(profiles: list[Profile]) -> tuple[list[int], list[int]]:
    """Indices of kept (first-seen hash) and dropped profiles, in order."""
    seen: set[str] = set()
    kept: list[int] = []
    dropped: list[int] = []
    for i, p in enumerate(profiles):
        h = profile_graph_hash(p)
        if h in seen:
            dropped.append(i)
        else:
            seen.add(h)
            kept.append(i)
    return kept, dropped


def split_by_hash(hashes: list[str]) -> dict[str, list[int]]:
    """Deterministic 95/3/2 train/validation/test split by hash order."""
    order = sorted(range(len(hashes)), key=lambda i: (hashes[i], i))
    n = len(order)
    n_test = round(n * 0.02)
    n_val = round(n * 0.03)
    n_train = n - n_val - n_test
    return {
        "train": sorted(order[:n_train]),
        "validation": sorted(order[n_train : n_train + n_val]),
        "test": sorted(order[n_train + n_val :]),
    }
