"""Deterministic rasterization helpers for masks and synthetic sheets.

All functions stamp boolean ink in place. Lines in the engine's scope are
horizontal, vertical, or 45-degree diagonal; their renderers keep the ink
extent exactly equal to the stated endpoints so ground truth boxes can be
ink-exact.
"""

from __future__ import annotations

from typing import Sequence, Tuple

import cv2
import numpy as np


def _clip_span(lo: int, hi: int, size: int) -> Tuple[int, int]:
    return max(0, lo), min(size, hi)


def hline(ink: np.ndarray, y: int, x0: int, x1: int, thickness: int = 2) -> None:
    """Horizontal line; ink rows y..y+thickness-1, cols x0..x1 inclusive."""
    h, w = ink.shape
    if x1 < x0:
        x0, x1 = x1, x0
    y0, y1 = _clip_span(y, y + thickness, h)
    c0, c1 = _clip_span(x0, x1 + 1, w)
    if y0 < y1 and c0 < c1:
        ink[y0:y1, c0:c1] = True


def vline(ink: np.ndarray, x: int, y0: int, y1: int, thickness: int = 2) -> None:
    """Vertical line; ink cols x..x+thickness-1, rows y0..y1 inclusive."""
    h, w = ink.shape
    if y1 < y0:
        y0, y1 = y1, y0
    x0, x1 = _clip_span(x, x + thickness, w)
    r0, r1 = _clip_span(y0, y1 + 1, h)
    if x0 < x1 and r0 < r1:
        ink[r0:r1, x0:x1] = True


def diagonal(ink: np.ndarray, x0: int, y0: int, x1: int, y1: int,
             thickness: int = 2) -> None:
    """45-degree line between two points, stamped as thickness^2 blocks."""
    n = abs(x1 - x0)
    if n != abs(y1 - y0):
        raise ValueError("diagonal() requires |dx| == |dy|")
    sx = 1 if x1 >= x0 else -1
    sy = 1 if y1 >= y0 else -1
    h, w = ink.shape
    for i in range(n + 1):
        x, y = x0 + sx * i, y0 + sy * i
        r0, r1 = _clip_span(y, y + thickness, h)
        c0, c1 = _clip_span(x, x + thickness, w)
        if r0 < r1 and c0 < c1:
            ink[r0:r1, c0:c1] = True


def stroke(ink: np.ndarray, x0: int, y0: int, x1: int, y1: int,
           thickness: int = 2) -> None:
    """General line via OpenCV (used inside symbol masks and tag shapes)."""
    buf = ink.astype(np.uint8)
    cv2.line(buf, (x0, y0), (x1, y1), 1, thickness)
    ink |= buf.astype(bool)


def polygon_fill(ink: np.ndarray, points: Sequence[Tuple[int, int]]) -> None:
    """Fill a polygon whose vertices are (x, y) pixel coordinates."""
    buf = ink.astype(np.uint8)
    pts = np.asarray(points, dtype=np.int32).reshape(-1, 1, 2)
    cv2.fillPoly(buf, [pts], 1)
    ink |= buf.astype(bool)


def polygon_ring(ink: np.ndarray, points: Sequence[Tuple[int, int]],
                 thickness: int = 2) -> None:
    """Polygon outline of the given thickness whose ink extent equals the
    filled polygon's extent (outline eats inward, never grows outward)."""
    from scipy import ndimage

    filled = np.zeros_like(ink, dtype=bool)
    polygon_fill(filled, points)
    interior = ndimage.binary_erosion(
        filled, structure=np.ones((2 * thickness + 1, 2 * thickness + 1), dtype=bool)
    )
    ink |= filled & ~interior


def circle(ink: np.ndarray, cx: int, cy: int, r: int, thickness: int = 2) -> None:
    """Circle outline; thickness -1 fills the disk."""
    buf = ink.astype(np.uint8)
    cv2.circle(buf, (cx, cy), r, 1, thickness)
    ink |= buf.astype(bool)


def speckle(ink: np.ndarray, probability: float, rng: np.random.Generator) -> None:
    """Salt noise: set each pixel with the given probability."""
    ink |= rng.random(ink.shape) < probability
