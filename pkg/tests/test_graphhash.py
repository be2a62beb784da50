import math

from profileforge.fixtures import filleted_plate, i_beam, parametric_rectangle
from profileforge.geometry import LineSegment, OrientedCircle, Point2
from profileforge.graphhash import dedup_by_hash, profile_graph_hash, split_by_hash
from profileforge.interpreter import replay
from profileforge.profile import CircleLoop, PathLoop, Profile


def pt(x, y):
    return Point2(x, y)


def polygon(*coords):
    pts = [pt(*c) for c in coords]
    return PathLoop(tuple(LineSegment(a, b) for a, b in zip(pts, pts[1:] + pts[:1])))


def square(cx=0.0, cy=0.0, half=0.3):
    return polygon(
        (cx - half, cy - half), (cx + half, cy - half), (cx + half, cy + half), (cx - half, cy + half)
    )


class TestHashInvariance:
    def test_profile_equals_itself(self):
        p = Profile((square(),))
        assert profile_graph_hash(p) == profile_graph_hash(p)

    def test_loop_start_rotation_equal(self):
        loop = square()
        assert profile_graph_hash(Profile((loop,))) == profile_graph_hash(
            Profile((loop.rotated(2),))
        )

    def test_traversal_direction_equal(self):
        loop = square()
        assert profile_graph_hash(Profile((loop,))) == profile_graph_hash(
            Profile((loop.reversed(),))
        )

    def test_loop_order_equal(self):
        hole = CircleLoop(OrientedCircle(pt(0.1, 0.1), 0.05, False))
        hole2 = CircleLoop(OrientedCircle(pt(-0.2, -0.2), 0.05, False))
        a = Profile((square(half=0.4), hole, hole2))
        b = Profile((square(half=0.4), hole2, hole))
        assert profile_graph_hash(a) == profile_graph_hash(b)

    def test_square_vs_circle_unequal(self):
        sq = Profile((square(),))
        circ = Profile((CircleLoop(OrientedCircle(pt(0, 0), 0.3, True)),))
        assert profile_graph_hash(sq) != profile_graph_hash(circ)

    def test_moved_square_unequal(self):
        assert profile_graph_hash(Profile((square(cx=0.0),))) != profile_graph_hash(
            Profile((square(cx=0.25),))
        )

    def test_line_vs_arc_edges_distinguished(self):
        plate, _ = replay(filleted_plate())
        beam, _ = replay(i_beam())
        rect, _ = replay(parametric_rectangle())
        hashes = {profile_graph_hash(p) for p in (plate, beam, rect)}
        assert len(hashes) == 3

    def test_circle_radius_distinguished(self):
        small = Profile((CircleLoop(OrientedCircle(pt(0, 0), 0.05, True)),))
        big = Profile((CircleLoop(OrientedCircle(pt(0, 0), 0.4, True)),))
        assert profile_graph_hash(small) != profile_graph_hash(big)


class TestDedupAndSplit:
    def corpus(self):
        rect, _ = replay(parametric_rectangle())
        plate, _ = replay(filleted_plate())
        beam, _ = replay(i_beam())
        singles = [rect, plate, beam]
        ngons = []
        for n in range(3, 10):
            pts = [
                (0.4 * math.cos(2 * math.pi * k / n), 0.4 * math.sin(2 * math.pi * k / n))
                for k in range(n)
            ]
            ngons.append(Profile((polygon(*pts),)))
        return singles + ngons

    def test_injected_duplicates_are_removed(self):
        base = self.corpus()
        rotated_rect = Profile(tuple(l.rotated(1) if isinstance(l, PathLoop) else l for l in (base[0].loops)))
        reversed_beam = Profile(tuple(l.reversed() for l in base[2].loops))
        corpus = base + [rotated_rect, reversed_beam]
        kept, dropped = dedup_by_hash(corpus)
        assert kept == list(range(len(base)))
        assert dropped == [len(base), len(base) + 1]

    def test_split_fractions_and_determinism(self):
        hashes = [f"{i:04x}" for i in range(100)]
        split = split_by_hash(hashes)
        assert len(split["train"]) == 95
        assert len(split["validation"]) == 3
        assert len(split["test"]) == 2
        assert sorted(split["train"] + split["validation"] + split["test"]) == list(range(100))
        assert split == split_by_hash(list(hashes))

    def test_split_of_empty(self):
        assert split_by_hash([]) == {"train": [], "validation": [], "test": []}

    def test_split_partitions_any_size(self):
        for n in (1, 7, 33, 997):
            hashes = [f"h{i}" for i in range(n)]
            split = split_by_hash(hashes)
            merged = sorted(split["train"] + split["validation"] + split["test"])
            assert merged == list(range(n))
