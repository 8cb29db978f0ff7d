"""Shared planar geometry primitives: points, boxes, polylines, distances."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Tuple


@dataclass(frozen=True)
class Point:
    """Pixel-space point; origin top-left, y increases downward."""

    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"non-finite point ({self.x}, {self.y})")

    def dist(self, other: "Point") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)

    def as_tuple(self) -> Tuple[float, float]:
        return (self.x, self.y)


@dataclass(frozen=True)
class BBox:
    """Axis-aligned box, inclusive pixel corners (x0,y0)..(x1,y1)."""

    x0: int
    y0: int
    x1: int
    y1: int

    def __post_init__(self):
        if self.x1 < self.x0 or self.y1 < self.y0:
            raise ValueError(f"inverted bbox {self!r}")

    @property
    def width(self) -> int:
        return self.x1 - self.x0

    @property
    def height(self) -> int:
        return self.y1 - self.y0

    @property
    def center(self) -> Point:
        return Point((self.x0 + self.x1) / 2.0, (self.y0 + self.y1) / 2.0)

    def corners(self) -> Tuple[Point, Point, Point, Point]:
        return (
            Point(self.x0, self.y0),
            Point(self.x1, self.y0),
            Point(self.x1, self.y1),
            Point(self.x0, self.y1),
        )

    def contains(self, p: Point) -> bool:
        return self.x0 <= p.x <= self.x1 and self.y0 <= p.y <= self.y1

    def as_list(self) -> list:
        return [self.x0, self.y0, self.x1, self.y1]


@dataclass(frozen=True)
class Polyline:
    """Ordered point chain; closed polylines do not repeat the first point."""

    points: Tuple[Point, ...]
    closed: bool = False

    def __post_init__(self):
        if len(self.points) < 2:
            raise ValueError("polyline needs at least 2 points")

    def __len__(self) -> int:
        return len(self.points)

    def perimeter(self) -> float:
        pts = self.points + (self.points[0],) if self.closed else self.points
        return sum(pts[i].dist(pts[i + 1]) for i in range(len(pts) - 1))

    def bbox(self) -> BBox:
        xs = [p.x for p in self.points]
        ys = [p.y for p in self.points]
        return BBox(
            int(math.floor(min(xs))), int(math.floor(min(ys))),
            int(math.ceil(max(xs))), int(math.ceil(max(ys))),
        )


def iou(a: BBox, b: BBox) -> float:
    """Intersection-over-union of two boxes with inclusive pixel extents."""
    ix = min(a.x1, b.x1) - max(a.x0, b.x0) + 1
    iy = min(a.y1, b.y1) - max(a.y0, b.y0) + 1
    if ix <= 0 or iy <= 0:
        return 0.0
    inter = ix * iy
    area_a = (a.width + 1) * (a.height + 1)
    area_b = (b.width + 1) * (b.height + 1)
    return inter / float(area_a + area_b - inter)


def point_segment_distance(p: Point, a: Point, b: Point) -> float:
    """Euclidean distance from p to the finite segment a-b."""
    ax, ay = a.x, a.y
    dx, dy = b.x - ax, b.y - ay
    L2 = dx * dx + dy * dy
    if L2 == 0.0:
        return p.dist(a)
    t = ((p.x - ax) * dx + (p.y - ay) * dy) / L2
    t = max(0.0, min(1.0, t))
    return math.hypot(p.x - (ax + t * dx), p.y - (ay + t * dy))


def closest_point_on_segment(p: Point, a: Point, b: Point) -> Point:
    """Point of the finite segment a-b closest to p."""
    ax, ay = a.x, a.y
    dx, dy = b.x - ax, b.y - ay
    L2 = dx * dx + dy * dy
    if L2 == 0.0:
        return a
    t = ((p.x - ax) * dx + (p.y - ay) * dy) / L2
    t = max(0.0, min(1.0, t))
    return Point(ax + t * dx, ay + t * dy)


def segment_intersection(
    p1: Point, p2: Point, p3: Point, p4: Point
) -> Optional[Point]:
    """Intersection point of the infinite lines through p1-p2 and p3-p4.

    Returns None for (near-)parallel lines. Whether the point lies on the
    finite segments is the caller's concern.
    """
    d1x, d1y = p2.x - p1.x, p2.y - p1.y
    d2x, d2y = p4.x - p3.x, p4.y - p3.y
    den = d1x * d2y - d1y * d2x
    if abs(den) < 1e-12:
        return None
    t = ((p3.x - p1.x) * d2y - (p3.y - p1.y) * d2x) / den
    return Point(p1.x + t * d1x, p1.y + t * d1y)


def segment_segment_distance(a1: Point, a2: Point, b1: Point, b2: Point) -> float:
    """Minimum distance between two finite segments (0 if they cross)."""
    pt = segment_intersection(a1, a2, b1, b2)
    if pt is not None:
        if (
            point_segment_distance(pt, a1, a2) <= 1e-9
            and point_segment_distance(pt, b1, b2) <= 1e-9
        ):
            return 0.0
    return min(
        point_segment_distance(a1, b1, b2),
        point_segment_distance(a2, b1, b2),
        point_segment_distance(b1, a1, a2),
        point_segment_distance(b2, a1, a2),
    )


def segment_bbox_distance(a: Point, b: Point, box: BBox) -> float:
    """Minimum distance between segment a-b and a box (0 when they touch)."""
    if box.contains(a) or box.contains(b):
        return 0.0
    c = box.corners()
    edges = [(c[0], c[1]), (c[1], c[2]), (c[2], c[3]), (c[3], c[0])]
    return min(segment_segment_distance(a, b, e1, e2) for e1, e2 in edges)


def simplify_rdp(line: Polyline, epsilon: float) -> Polyline:
    """Ramer-Douglas-Peucker simplification.

    Open polylines keep their endpoints. Closed polylines are anchored at
    the point farthest from the centroid (then its farthest partner) so the
    recursion never pins a mid-edge start point.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be > 0")
    pts = [p.as_tuple() for p in line.points]
    if not line.closed:
        kept = _rdp_open(pts, epsilon)
        return Polyline(tuple(Point(x, y) for x, y in kept), closed=False)

    cx = sum(p[0] for p in pts) / len(pts)
    cy = sum(p[1] for p in pts) / len(pts)
    i0 = max(range(len(pts)), key=lambda i: ((pts[i][0] - cx) ** 2 + (pts[i][1] - cy) ** 2, -i))
    rot = pts[i0:] + pts[:i0]
    a = rot[0]
    i1 = max(range(len(rot)), key=lambda i: ((rot[i][0] - a[0]) ** 2 + (rot[i][1] - a[1]) ** 2, -i))
    if i1 == 0:
        # all points coincide with the anchor
        return Polyline((Point(*rot[0]), Point(*rot[min(1, len(rot) - 1)])), closed=True)
    half1 = _rdp_open(rot[: i1 + 1], epsilon)
    half2 = _rdp_open(rot[i1:] + rot[:1], epsilon)
    kept = half1[:-1] + half2[:-1]
    return Polyline(tuple(Point(x, y) for x, y in kept), closed=True)


def _rdp_open(pts: Sequence[Tuple[float, float]], epsilon: float) -> list:
    """Iterative RDP on an open point chain; returns the kept points."""
    n = len(pts)
    if n <= 2:
        return list(pts)
    keep = [False] * n
    keep[0] = keep[-1] = True
    stack = [(0, n - 1)]
    while stack:
        i, j = stack.pop()
        if j <= i + 1:
            continue
        ax, ay = pts[i]
        bx, by = pts[j]
        dx, dy = bx - ax, by - ay
        norm = math.hypot(dx, dy)
        best_d = -1.0
        best_k = i + 1
        for k in range(i + 1, j):
            px, py = pts[k]
            if norm == 0.0:
                d = math.hypot(px - ax, py - ay)
            else:
                d = abs(dx * (ay - py) - (ax - px) * dy) / norm
            if d > best_d:
                best_d = d
                best_k = k
        if best_d > epsilon:
            keep[best_k] = True
            stack.append((i, best_k))
            stack.append((best_k, j))
    return [pts[k] for k in range(n) if keep[k]]


def merge_boxes(boxes: Iterable[BBox]) -> BBox:
    bs = list(boxes)
    if not bs:
        raise ValueError("no boxes to merge")
    return BBox(
        min(b.x0 for b in bs), min(b.y0 for b in bs),
        max(b.x1 for b in bs), max(b.y1 for b in bs),
    )
