"""Pipeline segment detection and junction validation.

Segments come from a probabilistic Hough transform over the skeletonized,
text/tag-subtracted sheet; Hough fragments are merged into maximal
collinear chains before ids are assigned. Candidate junctions are the
pairwise finite-segment intersections; each is validated by counting
stroke runs on the edges of a square kernel centered at the point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import List, Optional, Sequence, Tuple

import cv2
import numpy as np

from .geometry import Point, point_segment_distance, segment_intersection
from .raster import BinaryImage, count_runs

HOUGH_SEED = 0x5EED


@dataclass(frozen=True)
class HoughParams:
    rho_resolution: float = 1.0       # px
    theta_resolution: float = 1.0     # degrees
    votes_threshold: int = 50
    min_line_length: float = 50.0     # px
    max_line_gap: float = 4.0         # px

    def __post_init__(self):
        for name in ("rho_resolution", "theta_resolution", "votes_threshold",
                     "min_line_length", "max_line_gap"):
            if getattr(self, name) <= 0:
                raise ValueError(f"HoughParams.{name} must be positive")


@dataclass(frozen=True)
class Segment:
    id: int
    p: Point
    q: Point

    def __post_init__(self):
        if self.p.dist(self.q) <= 0:
            raise ValueError(f"zero-length segment at {self.p}")

    @property
    def length(self) -> float:
        return self.p.dist(self.q)

    def angle_deg(self) -> float:
        """Orientation in [0, 180)."""
        a = math.degrees(math.atan2(self.q.y - self.p.y, self.q.x - self.p.x))
        return a % 180.0


@dataclass(frozen=True)
class Junction:
    at: Point
    segments: Tuple[int, int]
    arm_count: Optional[int] = None
    valid: Optional[bool] = None


def _ordered(p: Point, q: Point) -> Tuple[Point, Point]:
    return (p, q) if (p.y, p.x) <= (q.y, q.x) else (q, p)


def number_segments(pairs: Sequence[Tuple[Point, Point]]) -> List[Segment]:
    """Deterministic ids ordered by (min-y, min-x) of each segment."""
    normed = [_ordered(p, q) for p, q in pairs]
    normed.sort(
        key=lambda pq: (
            min(pq[0].y, pq[1].y), min(pq[0].x, pq[1].x),
            pq[0].y, pq[0].x, pq[1].y, pq[1].x,
        )
    )
    return [Segment(id=i, p=p, q=q) for i, (p, q) in enumerate(normed)]


def detect_segments(
    skeleton: BinaryImage,
    params: HoughParams = HoughParams(),
    angle_tol: float = 1.5,
    gap_tol: float = 5.0,
    offset_tol: float = 2.0,
) -> List[Segment]:
    """Probabilistic Hough line segments, merged and deterministically numbered.

    The OpenCV probabilistic transform samples edge points randomly, so the
    RNG is reseeded on every call to keep the op a pure function of its
    inputs. Fragments are merged per merge_collinear with the given
    tolerances before ids are assigned.
    """
    img = (np.asarray(skeleton, dtype=bool)).astype(np.uint8) * 255
    cv2.setRNGSeed(HOUGH_SEED)
    raw = cv2.HoughLinesP(
        img,
        rho=params.rho_resolution,
        theta=math.radians(params.theta_resolution),
        threshold=int(params.votes_threshold),
        minLineLength=params.min_line_length,
        maxLineGap=params.max_line_gap,
    )
    if raw is None:
        return []
    pairs = []
    for x0, y0, x1, y1 in raw.reshape(-1, 4):
        p, q = Point(float(x0), float(y0)), Point(float(x1), float(y1))
        if p.dist(q) > 0:
            pairs.append((p, q))
    return merge_collinear(number_segments(pairs), angle_tol, gap_tol, offset_tol)


def _angle_close(a: float, b: float, tol: float) -> bool:
    d = abs(a - b) % 180.0
    return min(d, 180.0 - d) <= tol


def _mergeable(s: Segment, t: Segment, angle_tol: float, gap_tol: float,
               offset_tol: float) -> bool:
    if not _angle_close(s.angle_deg(), t.angle_deg(), angle_tol):
        return False
    offset = max(
        point_segment_distance_to_line(t.p, s.p, s.q),
        point_segment_distance_to_line(t.q, s.p, s.q),
        point_segment_distance_to_line(s.p, t.p, t.q),
        point_segment_distance_to_line(s.q, t.p, t.q),
    )
    if offset > offset_tol:
        return False
    # 1-D gap along the shared direction; overlapping extents merge freely
    dx, dy = s.q.x - s.p.x, s.q.y - s.p.y
    norm = math.hypot(dx, dy)
    ux, uy = dx / norm, dy / norm
    proj = [p.x * ux + p.y * uy for p in (s.p, s.q, t.p, t.q)]
    lo_s, hi_s = min(proj[0], proj[1]), max(proj[0], proj[1])
    lo_t, hi_t = min(proj[2], proj[3]), max(proj[2], proj[3])
    gap = max(lo_s, lo_t) - min(hi_s, hi_t)
    return gap <= gap_tol


def point_segment_distance_to_line(p: Point, a: Point, b: Point) -> float:
    """Perpendicular distance from p to the infinite line through a-b."""
    dx, dy = b.x - a.x, b.y - a.y
    norm = math.hypot(dx, dy)
    if norm == 0.0:
        return p.dist(a)
    return abs(dx * (a.y - p.y) - (a.x - p.x) * dy) / norm


def merge_collinear(
    segments: Sequence[Segment],
    angle_tol: float = 1.5,
    gap_tol: float = 5.0,
    offset_tol: float = 2.0,
) -> List[Segment]:
    """Replace chains of near-collinear, near-touching segments by their span.

    Chains are the transitive closure of the pairwise mergeability relation;
    each chain becomes the segment between the two extreme endpoint
    projections along the chain's dominant direction. Ids are reassigned by
    (min-y, min-x) of the results.
    """
    segs = list(segments)
    n = len(segs)
    if n == 0:
        return []
    parent = list(range(n))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if find(i) != find(j) and _mergeable(segs[i], segs[j], angle_tol, gap_tol, offset_tol):
                parent[find(j)] = find(i)

    groups = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(segs[i])

    spans = []
    for members in groups.values():
        longest = max(members, key=lambda s: (s.length, -s.id))
        dx, dy = longest.q.x - longest.p.x, longest.q.y - longest.p.y
        norm = math.hypot(dx, dy)
        ux, uy = dx / norm, dy / norm
        pts = [pt for s in members for pt in (s.p, s.q)]
        lo = min(pts, key=lambda p: (p.x * ux + p.y * uy, p.y, p.x))
        hi = max(pts, key=lambda p: (p.x * ux + p.y * uy, p.y, p.x))
        spans.append((lo, hi))
    return number_segments(spans)


def compute_intersections(segments: Sequence[Segment], on_tol: float = 1.0) -> List[Junction]:
    """Pairwise finite-segment intersections (validity left unset).

    The linear-system solution is kept only when it lies within on_tol px
    of both finite segments.
    """
    out = []
    segs = sorted(segments, key=lambda s: s.id)
    for i in range(len(segs)):
        for j in range(i + 1, len(segs)):
            a, b = segs[i], segs[j]
            pt = segment_intersection(a.p, a.q, b.p, b.q)
            if pt is None:
                continue
            if (
                point_segment_distance(pt, a.p, a.q) <= on_tol
                and point_segment_distance(pt, b.p, b.q) <= on_tol
            ):
                out.append(Junction(at=pt, segments=(a.id, b.id)))
    out.sort(key=lambda jn: (jn.segments, jn.at.y, jn.at.x))
    return out


def kernel_edge_runs(image: BinaryImage, center: Point, kernel_side: int = 21) -> List[int]:
    """Stroke runs on the four edges of a square kernel centered at a point.

    Returns [top, bottom, left, right] run counts. The kernel is clipped at
    the image border; an edge fully outside the image counts zero runs.
    """
    arr = np.asarray(image, dtype=bool)
    h, w = arr.shape
    half = kernel_side // 2
    cx, cy = int(round(center.x)), int(round(center.y))
    x0, x1 = cx - half, cx + half
    y0, y1 = cy - half, cy + half
    cx0, cx1 = max(0, x0), min(w - 1, x1)
    cy0, cy1 = max(0, y0), min(h - 1, y1)
    runs = []
    for edge in ("top", "bottom", "left", "right"):
        if edge == "top":
            ok = 0 <= y0 < h and cx0 <= cx1
            vals = arr[y0, cx0 : cx1 + 1] if ok else None
        elif edge == "bottom":
            ok = 0 <= y1 < h and cx0 <= cx1
            vals = arr[y1, cx0 : cx1 + 1] if ok else None
        elif edge == "left":
            ok = 0 <= x0 < w and cy0 <= cy1
            vals = arr[cy0 : cy1 + 1, x0] if ok else None
        else:
            ok = 0 <= x1 < w and cy0 <= cy1
            vals = arr[cy0 : cy1 + 1, x1] if ok else None
        runs.append(count_runs(vals) if vals is not None else 0)
    return runs


def validate_intersection(
    image: BinaryImage, candidate: Junction, kernel_side: int = 21
) -> Junction:
    """Set arm count and validity from kernel-edge stroke runs.

    The arm count is the total number of maximal foreground runs over the
    four kernel edges (two runs on one edge count separately); a junction
    is valid when at least three arms cross, which rules out the
    opposite-edges-only case of a single through line.
    """
    arms = int(sum(kernel_edge_runs(image, candidate.at, kernel_side)))
    return replace(candidate, arm_count=arms, valid=arms >= 3)
