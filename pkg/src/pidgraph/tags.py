"""Inlet/outlet tag detection: pentagon contours, orientation, kind probing.

Tags are the 5-vertex pentagon connectors whose bounding box is at least
three times as wide as it is tall. The apex side (3 of the 5 simplified
vertices) gives the pointing direction; a probe kernel outside the left
and right box edges finds which side the pipeline attaches to, and the
attachment side decides inlet vs outlet.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Tuple

import cv2
import numpy as np
from scipy import ndimage

from .geometry import BBox, Point, Polyline, simplify_rdp
from .raster import BinaryImage, count_runs, label_components

DEFAULT_RDP_EPSILON_FRAC = 0.02
DEFAULT_PROBE_KERNEL = 21
MIN_WIDTH_TO_HEIGHT = 3.0


class Direction(str, Enum):
    LEFT = "left"
    RIGHT = "right"


class TagKind(str, Enum):
    INLET = "inlet"
    OUTLET = "outlet"


class OrientationError(ValueError):
    """Vertex split is not 3/2 about the vertical midline."""


class UnclassifiedTagError(ValueError):
    """No probe side (or both sides) showed exactly one attached stroke."""


@dataclass(frozen=True)
class Tag:
    vertices: Tuple[Point, ...]
    bbox: BBox
    direction: Optional[Direction] = None
    kind: Optional[TagKind] = None
    emerge_point: Optional[Point] = None

    def __post_init__(self):
        if len(self.vertices) != 5:
            raise ValueError(f"tag needs exactly 5 vertices, got {len(self.vertices)}")
        if self.bbox.width < MIN_WIDTH_TO_HEIGHT * self.bbox.height:
            raise ValueError(f"tag bbox {self.bbox} is not >= 3x wider than tall")
        if self.emerge_point is not None:
            p = self.emerge_point
            on_x = p.x in (self.bbox.x0, self.bbox.x1) and self.bbox.y0 <= p.y <= self.bbox.y1
            on_y = p.y in (self.bbox.y0, self.bbox.y1) and self.bbox.x0 <= p.x <= self.bbox.x1
            if not (on_x or on_y):
                raise ValueError(f"emerge point {p} not on bbox boundary {self.bbox}")


def extract_contours(image: BinaryImage) -> List[Polyline]:
    """Closed outer boundary of every foreground component.

    Boundaries are traced per component so nested components still get
    their own contour. Single-pixel components are skipped (no boundary
    polyline exists for them).
    """
    labels, _ = label_components(image)
    out: List[Polyline] = []
    for i, sl in enumerate(ndimage.find_objects(labels)):
        if sl is None:
            continue
        ys, xs = sl
        mask = (labels[sl] == i + 1).astype(np.uint8)
        found, _ = cv2.findContours(mask, cv2.RETR_EXTERNAL, cv2.CHAIN_APPROX_NONE)
        if not found:
            continue
        contour = max(found, key=len).reshape(-1, 2)
        if len(contour) < 2:
            continue
        pts = tuple(
            Point(float(x + xs.start), float(y + ys.start)) for x, y in contour
        )
        out.append(Polyline(pts, closed=True))
    return out


def detect_tags(
    image: BinaryImage, epsilon_frac: float = DEFAULT_RDP_EPSILON_FRAC
) -> List[Tag]:
    """Candidate tags: contours simplifying to 5 vertices with a wide bbox.

    The RDP epsilon is epsilon_frac of each contour's perimeter, so the
    test is scale-free. Candidates come back without direction or kind.
    """
    candidates = []
    for contour in extract_contours(image):
        bbox = contour.bbox()
        if bbox.height == 0 or bbox.width < MIN_WIDTH_TO_HEIGHT * bbox.height:
            continue
        simplified = simplify_rdp(contour, epsilon_frac * contour.perimeter())
        if len(simplified) != 5:
            continue
        candidates.append(Tag(vertices=simplified.points, bbox=bbox))
    candidates.sort(key=lambda t: (t.bbox.y0, t.bbox.x0))
    return candidates


def orient_tag(vertices: Tuple[Point, ...], tie_eps: float = 1.0) -> Direction:
    """Pointing direction: the side of the vertical midline holding 3 vertices.

    Vertices within tie_eps of the midline count toward whichever side has
    fewer so a 3/2 split is reached when possible; anything else raises
    OrientationError.
    """
    if len(vertices) != 5:
        raise OrientationError(f"need 5 vertices, got {len(vertices)}")
    xs = [v.x for v in vertices]
    mid = (min(xs) + max(xs)) / 2.0
    left = sum(1 for x in xs if x < mid - tie_eps)
    right = sum(1 for x in xs if x > mid + tie_eps)
    ties = 5 - left - right
    if ties:
        # mirror-symmetric tie rule: all midline vertices join the strictly
        # smaller side; an even split stays ambiguous
        if left == right:
            raise OrientationError(f"midline ties cannot break a {left}/{right} split")
        if left < right:
            left += ties
        else:
            right += ties
    if right == 3 and left == 2:
        return Direction.RIGHT
    if left == 3 and right == 2:
        return Direction.LEFT
    raise OrientationError(f"vertex split {left}/{right} about midline is not 3/2")


def _probe_runs(image: BinaryImage, bbox: BBox, side: Direction, kernel_side: int) -> int:
    """Stroke runs crossing the outer edge of a probe square.

    The probe sits just outside the given bbox side, vertically centered;
    its outer edge is the vertical pixel column kernel_side away from the
    box. Parts outside the image count as background.
    """
    h, w = image.shape
    cy = int(round((bbox.y0 + bbox.y1) / 2.0))
    half = kernel_side // 2
    if side is Direction.RIGHT:
        x = bbox.x1 + kernel_side
    else:
        x = bbox.x0 - kernel_side
    if x < 0 or x >= w:
        return 0
    y0 = max(0, cy - half)
    y1 = min(h - 1, cy + half)
    if y0 > y1:
        return 0
    return count_runs(image[y0 : y1 + 1, x])


def classify_tag(
    image: BinaryImage,
    tag: Tag,
    kernel_side: int = DEFAULT_PROBE_KERNEL,
    apex_attachment_kind: TagKind = TagKind.OUTLET,
) -> Tag:
    """Assign kind and emerge point by probing both sides for one stroke.

    Exactly one of the two probe sides must be crossed by a single stroke;
    that side is where the pipeline attaches. Attachment on the apex side
    maps to apex_attachment_kind (outlet by default), the flat side to the
    other kind. Ambiguous or unattached candidates raise
    UnclassifiedTagError rather than guessing.
    """
    direction = tag.direction or orient_tag(tag.vertices)
    runs = {
        Direction.LEFT: _probe_runs(image, tag.bbox, Direction.LEFT, kernel_side),
        Direction.RIGHT: _probe_runs(image, tag.bbox, Direction.RIGHT, kernel_side),
    }
    single = [side for side, n in runs.items() if n == 1]
    if len(single) != 1:
        raise UnclassifiedTagError(
            f"tag at {tag.bbox}: probe runs left={runs[Direction.LEFT]} "
            f"right={runs[Direction.RIGHT]} do not identify one attachment side"
        )
    attach = single[0]
    other = TagKind.INLET if apex_attachment_kind is TagKind.OUTLET else TagKind.OUTLET
    kind = apex_attachment_kind if attach is direction else other
    cy = (tag.bbox.y0 + tag.bbox.y1) / 2.0
    emerge_x = tag.bbox.x1 if attach is Direction.RIGHT else tag.bbox.x0
    return Tag(
        vertices=tag.vertices,
        bbox=tag.bbox,
        direction=direction,
        kind=kind,
        emerge_point=Point(float(emerge_x), cy),
    )
