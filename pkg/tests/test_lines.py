import numpy as np
import pytest

from pidgraph import draw, lines
from pidgraph.geometry import Point
from pidgraph.lines import HoughParams, Junction, Segment


def seg(i, x0, y0, x1, y1):
    return Segment(id=i, p=Point(x0, y0), q=Point(x1, y1))


class TestDetectSegments:
    def test_single_horizontal_line(self):
        img = np.zeros((60, 300), bool)
        img[30, 40:241] = True
        out = lines.detect_segments(img)
        assert len(out) == 1
        s = out[0]
        a, b = Point(40, 30), Point(240, 30)
        assert min(s.p.dist(a) + s.q.dist(b), s.p.dist(b) + s.q.dist(a)) <= 3

    def test_blank_image(self):
        assert lines.detect_segments(np.zeros((50, 50), bool)) == []

    def test_cross_gives_two_segments(self):
        img = np.zeros((300, 300), bool)
        img[150, 50:251] = True
        img[50:251, 150] = True
        out = lines.detect_segments(img)
        assert len(out) == 2
        angles = sorted(round(s.angle_deg()) % 180 for s in out)
        assert angles == [0, 90]

    def test_deterministic(self):
        rng = np.random.default_rng(0)
        img = rng.random((200, 200)) < 0.02
        img[100, 20:180] = True
        a = lines.detect_segments(img)
        b = lines.detect_segments(img)
        assert a == b


class TestMergeCollinear:
    def test_small_gap_merges(self):
        out = lines.merge_collinear([seg(0, 10, 50, 100, 50), seg(1, 103, 50, 200, 50)])
        assert len(out) == 1
        assert out[0].p == Point(10, 50) and out[0].q == Point(200, 50)

    def test_perpendicular_untouched(self):
        out = lines.merge_collinear([seg(0, 10, 50, 100, 50), seg(1, 50, 10, 50, 100)])
        assert len(out) == 2

    def test_full_overlap_unions(self):
        out = lines.merge_collinear([seg(0, 0, 0, 100, 0), seg(1, 40, 0, 60, 0)])
        assert len(out) == 1
        assert out[0].p == Point(0, 0) and out[0].q == Point(100, 0)

    def test_gap_beyond_tolerance_kept_apart(self):
        out = lines.merge_collinear([seg(0, 0, 0, 50, 0), seg(1, 60, 0, 120, 0)], gap_tol=5.0)
        assert len(out) == 2

    def test_offset_beyond_tolerance_kept_apart(self):
        out = lines.merge_collinear([seg(0, 0, 0, 100, 0), seg(1, 0, 4, 100, 4)])
        assert len(out) == 2

    def test_chain_of_fragments(self):
        frags = [seg(i, i * 52, 10, i * 52 + 48, 10) for i in range(5)]
        out = lines.merge_collinear(frags)
        assert len(out) == 1
        assert out[0].q.x - out[0].p.x == 4 * 52 + 48

    def test_ids_reassigned_by_position(self):
        out = lines.merge_collinear([seg(7, 0, 90, 50, 90), seg(3, 0, 10, 50, 10)])
        assert [s.id for s in out] == [0, 1]
        assert out[0].p.y == 10 and out[1].p.y == 90


class TestComputeIntersections:
    def test_analytic_cross(self):
        out = lines.compute_intersections([seg(0, 0, 0, 10, 10), seg(1, 0, 10, 10, 0)])
        assert len(out) == 1
        assert out[0].at == Point(5, 5)
        assert out[0].segments == (0, 1)
        assert out[0].valid is None

    def test_parallel_no_candidate(self):
        assert lines.compute_intersections([seg(0, 0, 0, 10, 0), seg(1, 0, 5, 10, 5)]) == []

    def test_crossing_outside_extents_rejected(self):
        out = lines.compute_intersections([seg(0, 0, 0, 10, 10), seg(1, 30, 40, 40, 30)])
        assert out == []

    def test_order_invariant_as_set(self):
        segs = [seg(0, 0, 50, 100, 50), seg(1, 20, 0, 20, 100), seg(2, 80, 0, 80, 100)]
        a = lines.compute_intersections(segs)
        b = lines.compute_intersections(segs[::-1])
        assert {(j.at.x, j.at.y, j.segments) for j in a} == {
            (j.at.x, j.at.y, j.segments) for j in b
        }

    def test_finite_extent_random_oracle(self):
        rng = np.random.default_rng(12)
        checked = 0
        while checked < 100:
            a = seg(0, *rng.uniform(0, 100, 4))
            b = seg(1, *rng.uniform(0, 100, 4))
            from pidgraph.geometry import point_segment_distance, segment_intersection

            pt = segment_intersection(a.p, a.q, b.p, b.q)
            if pt is None:
                continue
            on_both = (
                point_segment_distance(pt, a.p, a.q) <= 1.0
                and point_segment_distance(pt, b.p, b.q) <= 1.0
            )
            got = lines.compute_intersections([a, b])
            assert bool(got) == on_both
            checked += 1


def edge_runs_oracle(image, cx, cy, k):
    """Brute force: walk each kernel edge pixel by pixel, count runs."""
    h, w = image.shape
    half = k // 2
    total = 0
    edges = [
        [(x, cy - half) for x in range(cx - half, cx + half + 1)],
        [(x, cy + half) for x in range(cx - half, cx + half + 1)],
        [(cx - half, y) for y in range(cy - half, cy + half + 1)],
        [(cx + half, y) for y in range(cy - half, cy + half + 1)],
    ]
    for pixels in edges:
        prev = False
        for x, y in pixels:
            val = image[y, x] if 0 <= x < w and 0 <= y < h else False
            if val and not prev:
                total += 1
            prev = val
    return total


class TestValidateIntersection:
    def make(self, kind, k=21):
        img = np.zeros((101, 101), bool)
        if kind == "cross":
            draw.hline(img, 50, 10, 90, 1)
            draw.vline(img, 50, 10, 90, 1)
        elif kind == "tee":
            draw.hline(img, 50, 10, 90, 1)
            draw.vline(img, 50, 50, 90, 1)
        elif kind == "broken":
            draw.hline(img, 50, 10, 90, 1)
            draw.vline(img, 50, 10, 35, 1)
            draw.vline(img, 50, 65, 90, 1)
        return img

    def test_full_cross_valid(self):
        img = self.make("cross")
        out = lines.validate_intersection(img, Junction(at=Point(50, 50), segments=(0, 1)))
        assert out.arm_count == 4 and out.valid

    def test_tee_valid(self):
        img = self.make("tee")
        out = lines.validate_intersection(img, Junction(at=Point(50, 50), segments=(0, 1)))
        assert out.arm_count == 3 and out.valid

    def test_broken_crossing_invalid(self):
        img = self.make("broken")
        out = lines.validate_intersection(img, Junction(at=Point(50, 50), segments=(0, 1)))
        assert out.arm_count == 2 and not out.valid

    def test_matches_pixel_oracle(self):
        for kind in ("cross", "tee", "broken"):
            img = self.make(kind)
            out = lines.validate_intersection(img, Junction(at=Point(50, 50), segments=(0, 1)))
            assert out.arm_count == edge_runs_oracle(img, 50, 50, 21)

    def test_kernel_clipped_at_border(self):
        img = np.zeros((30, 30), bool)
        draw.hline(img, 2, 0, 29, 1)
        draw.vline(img, 2, 0, 29, 1)
        out = lines.validate_intersection(img, Junction(at=Point(2, 2), segments=(0, 1)))
        assert out.arm_count == edge_runs_oracle(img, 2, 2, 21)

    def test_valid_point_near_ink(self):
        img = self.make("cross")
        out = lines.validate_intersection(img, Junction(at=Point(50, 50), segments=(0, 1)))
        assert out.valid
        ys, xs = np.nonzero(img)
        d = np.hypot(xs - 50, ys - 50).min()
        assert d <= 1.0


class TestHoughParams:
    def test_positive_required(self):
        with pytest.raises(ValueError):
            HoughParams(votes_threshold=0)
        with pytest.raises(ValueError):
            HoughParams(max_line_gap=-1)

    def test_segment_zero_length_rejected(self):
        with pytest.raises(ValueError):
            seg(0, 5, 5, 5, 5)
