"""Raster substrate: loading, binarization, thinning, morphology, components.

Images are plain numpy arrays: GrayImage is a (H, W) uint8 array of luma
values, BinaryImage a (H, W) bool array where True marks foreground ink.
Origin is top-left, y grows downward.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Sequence

import numpy as np
from PIL import Image
from scipy import ndimage
from skimage.morphology import skeletonize as _thin

from .geometry import BBox

GrayImage = np.ndarray
BinaryImage = np.ndarray

# 8-connectivity: thin diagonal strokes are common in diagrams
STRUCT_8 = np.ones((3, 3), dtype=int)


@dataclass(frozen=True)
class Component:
    """One 8-connected foreground component."""

    id: int
    pixel_count: int
    bbox: BBox


class DimensionError(ValueError):
    """Raised for zero-area or mismatched image dimensions."""


def load_image(path) -> GrayImage:
    """Load a PNG or JPEG as 8-bit grayscale.

    Color inputs are reduced with luma = round(0.299R + 0.587G + 0.114B).
    """
    with Image.open(path) as im:
        if im.mode in ("L", "I;16", "I"):
            arr = np.asarray(im.convert("L"), dtype=np.uint8)
        else:
            rgb = np.asarray(im.convert("RGB"), dtype=np.float64)
            luma = 0.299 * rgb[..., 0] + 0.587 * rgb[..., 1] + 0.114 * rgb[..., 2]
            arr = np.rint(luma).clip(0, 255).astype(np.uint8)
    if arr.size == 0:
        raise DimensionError(f"zero-area image: {path}")
    return arr


def _as_gray(image: GrayImage) -> GrayImage:
    arr = np.asarray(image)
    if arr.ndim != 2 or arr.size == 0:
        raise DimensionError(f"expected non-empty 2-D gray image, got shape {arr.shape}")
    return arr.astype(np.uint8, copy=False)


def _as_binary(image: BinaryImage) -> BinaryImage:
    arr = np.asarray(image)
    if arr.ndim != 2:
        raise DimensionError(f"expected 2-D binary image, got shape {arr.shape}")
    return arr.astype(bool, copy=False)


def otsu_threshold(image: GrayImage) -> int:
    """Threshold maximizing inter-class variance over the 256-bin histogram.

    Sweeps every split t in 1..255 with classes {luma < t} / {luma >= t} and
    returns the smallest t attaining the maximum. A single-intensity image
    has no split; by convention it thresholds at 128 (dark ink wins).
    """
    arr = _as_gray(image)
    hist = np.bincount(arr.ravel(), minlength=256).astype(np.float64)
    total = hist.sum()
    if np.count_nonzero(hist) < 2:
        return 128
    w0 = np.cumsum(hist)[:-1]           # class sizes for t = 1..255
    w1 = total - w0
    levels = np.arange(256, dtype=np.float64)
    csum = np.cumsum(hist * levels)[:-1]
    gsum = csum[-1] + hist[255] * 255.0
    valid = (w0 > 0) & (w1 > 0)
    var = np.zeros(255)
    mu0 = np.divide(csum, w0, out=np.zeros(255), where=valid)
    mu1 = np.divide(gsum - csum, w1, out=np.zeros(255), where=valid)
    var[valid] = (w0 * w1)[valid] * (mu0 - mu1)[valid] ** 2
    return int(np.argmax(var)) + 1


def binarize(image: GrayImage) -> BinaryImage:
    """Foreground = dark ink: pixels with luma below the Otsu threshold."""
    arr = _as_gray(image)
    return arr < otsu_threshold(arr)


def render_binary(image: BinaryImage) -> GrayImage:
    """Render ink as 0 and background as 255 (inverse of binarize's view)."""
    return np.where(_as_binary(image), 0, 255).astype(np.uint8)


def skeletonize(image: BinaryImage) -> BinaryImage:
    """Thin all strokes to 1-px width, preserving per-component connectivity.

    Iterative morphological thinning (Lee's method): unlike the Zhang-Suen
    variant it keeps even-width straight strokes on a single row/column,
    which downstream line detection depends on.
    """
    arr = _as_binary(image)
    if not arr.any():
        return arr.copy()
    return _thin(arr, method="lee").astype(bool)


def erase_regions(image: BinaryImage, boxes: Sequence[BBox]) -> BinaryImage:
    """Clear all pixels inside the given boxes; boxes are clipped to bounds."""
    arr = _as_binary(image).copy()
    h, w = arr.shape
    for b in boxes:
        x0 = max(0, b.x0)
        y0 = max(0, b.y0)
        x1 = min(w - 1, b.x1)
        y1 = min(h - 1, b.y1)
        if x0 <= x1 and y0 <= y1:
            arr[y0 : y1 + 1, x0 : x1 + 1] = False
    return arr


def label_components(image: BinaryImage):
    """8-connected labeling; returns (labels array, count)."""
    return ndimage.label(_as_binary(image), structure=STRUCT_8)


def connected_components(image: BinaryImage) -> List[Component]:
    """8-connected components with pixel counts and bounding boxes."""
    labels, n = label_components(image)
    if n == 0:
        return []
    counts = np.bincount(labels.ravel())
    out = []
    for i, sl in enumerate(ndimage.find_objects(labels)):
        ys, xs = sl
        out.append(
            Component(
                id=i,
                pixel_count=int(counts[i + 1]),
                bbox=BBox(int(xs.start), int(ys.start), int(xs.stop) - 1, int(ys.stop) - 1),
            )
        )
    return out


def _square(kernel_side: int) -> np.ndarray:
    if kernel_side < 1 or kernel_side % 2 == 0:
        raise ValueError(f"kernel side must be odd and >= 1, got {kernel_side}")
    return np.ones((kernel_side, kernel_side), dtype=bool)


def dilate(image: BinaryImage, kernel_side: int = 3) -> BinaryImage:
    """Minkowski growth of the foreground by a square kernel."""
    k = _square(kernel_side)
    arr = _as_binary(image)
    if kernel_side == 1:
        return arr.copy()
    return ndimage.binary_dilation(arr, structure=k)


def erode(image: BinaryImage, kernel_side: int = 3) -> BinaryImage:
    """Minkowski shrink of the foreground by a square kernel."""
    k = _square(kernel_side)
    arr = _as_binary(image)
    if kernel_side == 1:
        return arr.copy()
    return ndimage.binary_erosion(arr, structure=k)


def count_runs(values: np.ndarray) -> int:
    """Number of maximal runs of True in a 1-D bool array."""
    v = np.asarray(values, dtype=bool)
    if v.size == 0:
        return 0
    starts = v & ~np.concatenate(([False], v[:-1]))
    return int(starts.sum())
