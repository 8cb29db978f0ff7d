"""Symbol detections: ingestion, template matching, annotation tooling.

The detector proper is pluggable: externally produced detections enter
through a JSON file, while the built-in binary template matcher covers
self-contained desk-scale runs. Both yield the same SymbolDetection
records, so downstream association code never cares which produced them.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import cv2
import numpy as np
from PIL import Image

from . import draw
from .codes import SchemaError, _parse_bbox
from .geometry import BBox, iou
from .raster import BinaryImage, GrayImage, erode, dilate

SYMBOL_CLASSES = (
    "Bl-V", "Ck-V", "Ch-sl", "Cr-V", "Con", "F-Con",
    "Gt-V-nc", "Gb-V", "Ins", "Gb-V-nc", "Others",
)

ROTATIONS = (0, 90, 180, 270)


@dataclass(frozen=True)
class SymbolDetection:
    cls: str
    bbox: BBox
    score: float

    def __post_init__(self):
        if self.cls not in SYMBOL_CLASSES:
            raise ValueError(f"unknown symbol class {self.cls!r}")
        if not (0.0 <= self.score <= 1.0):
            raise ValueError(f"score {self.score} outside [0, 1]")


@dataclass(frozen=True)
class SymbolTemplate:
    cls: str
    mask: np.ndarray                      # bool (H, W)
    rotations: Tuple[int, ...] = (0,)

    def __post_init__(self):
        if self.cls not in SYMBOL_CLASSES:
            raise ValueError(f"unknown symbol class {self.cls!r}")
        if not np.asarray(self.mask, dtype=bool).any():
            raise ValueError("empty template mask")
        bad = set(self.rotations) - set(ROTATIONS)
        if bad:
            raise ValueError(f"unsupported rotations {sorted(bad)}")


@dataclass(frozen=True)
class AnnotationConfig:
    patch_size: int = 400
    stride: Optional[int] = None          # None = patch_size (non-overlapping)
    boundary_dilation: int = 3
    augmentations: Tuple[str, ...] = ("translation", "rotation")
    translation_px: int = 10

    def __post_init__(self):
        stride = self.stride if self.stride is not None else self.patch_size
        if not (self.patch_size >= stride >= 1):
            raise ValueError(f"need patch_size >= stride >= 1, got {self.patch_size}/{stride}")
        if self.boundary_dilation < 1 or self.boundary_dilation % 2 == 0:
            raise ValueError("boundary_dilation must be odd and >= 1")
        bad = set(self.augmentations) - {"translation", "rotation"}
        if bad:
            raise ValueError(f"unknown augmentations {sorted(bad)}")

    @property
    def effective_stride(self) -> int:
        return self.stride if self.stride is not None else self.patch_size


@dataclass(frozen=True)
class Patch:
    image: np.ndarray
    offset_x: int
    offset_y: int
    annotation: Optional[np.ndarray] = None


def ingest_symbol_detections(path, bounds: Optional[Tuple[int, int]] = None) -> List[SymbolDetection]:
    """Read symbol detections from a JSON list of {"class", "bbox", "score"}."""
    raw = json.loads(Path(path).read_text())
    if not isinstance(raw, list):
        raise SchemaError(f"{path}: expected a top-level list")
    out = []
    for i, rec in enumerate(raw):
        where = f"{path}: record {i}"
        if not isinstance(rec, dict):
            raise SchemaError(f"{where}: expected an object")
        cls = rec.get("class")
        if cls not in SYMBOL_CLASSES:
            raise SchemaError(f"{where}: unknown symbol class {cls!r}")
        bbox = _parse_bbox(rec.get("bbox"), where, bounds)
        score = rec.get("score")
        if not isinstance(score, (int, float)) or isinstance(score, bool) or not (0.0 <= score <= 1.0):
            raise SchemaError(f"{where}: score must be a number in [0, 1]")
        out.append(SymbolDetection(cls=cls, bbox=bbox, score=float(score)))
    return out


# ---------------------------------------------------------------------------
# Built-in template library
# ---------------------------------------------------------------------------

MASK_SIDE = 41
_LINE_ROW = MASK_SIDE // 2  # through-line rows 20..21


def _base_mask(through_line: bool = True) -> np.ndarray:
    m = np.zeros((MASK_SIDE, MASK_SIDE), dtype=bool)
    if through_line:
        draw.hline(m, _LINE_ROW, 0, MASK_SIDE - 1, 2)
    return m


def _bowtie(m: np.ndarray, filled: bool = False) -> None:
    left = [(3, 9), (3, 33), (20, 21)]
    right = [(37, 9), (37, 33), (20, 21)]
    for tri in (left, right):
        if filled:
            draw.polygon_fill(m, tri)
        else:
            draw.polygon_ring(m, tri, 2)


def _make_builtin_masks() -> Dict[str, np.ndarray]:
    masks: Dict[str, np.ndarray] = {}

    m = _base_mask()
    _bowtie(m)
    draw.circle(m, 20, 20, 9, 2)
    masks["Bl-V"] = m

    m = _base_mask()
    draw.polygon_ring(m, [(4, 9), (4, 33), (33, 21)], 2)
    draw.vline(m, 35, 7, 35, 3)
    masks["Ck-V"] = m

    m = _base_mask()
    draw.polygon_ring(m, [(20, 3), (37, 21), (20, 39), (3, 21)], 2)
    masks["Ch-sl"] = m

    m = _base_mask()
    draw.circle(m, 20, 20, 13, 2)
    masks["Cr-V"] = m

    m = _base_mask()
    draw.polygon_ring(m, [(7, 9), (7, 33), (34, 27), (34, 15)], 2)
    masks["Con"] = m

    m = _base_mask()
    draw.circle(m, 20, 10, 8, 2)
    draw.hline(m, 17, 6, 34, 2)
    masks["F-Con"] = m

    m = _base_mask()
    _bowtie(m, filled=True)
    masks["Gt-V-nc"] = m

    m = _base_mask()
    _bowtie(m)
    draw.circle(m, 20, 20, 9, -1)
    masks["Gb-V"] = m

    m = _base_mask()
    draw.polygon_ring(m, [(5, 11), (35, 11), (35, 31), (5, 31)], 2)
    masks["Ins"] = m

    m = _base_mask()
    _bowtie(m)
    draw.vline(m, 20, 2, 11, 2)
    draw.hline(m, 2, 12, 29, 2)
    masks["Gb-V-nc"] = m

    m = _base_mask(through_line=False)
    draw.stroke(m, 6, 6, 34, 34, 2)
    draw.stroke(m, 6, 34, 34, 6, 2)
    masks["Others"] = m

    return masks


def builtin_template_library() -> List[SymbolTemplate]:
    """Default binary mask per class, inline classes rotatable by 90 degrees."""
    masks = _make_builtin_masks()
    lib = []
    for cls in SYMBOL_CLASSES:
        rotations = (0,) if cls == "Others" else (0, 90)
        lib.append(SymbolTemplate(cls=cls, mask=masks[cls], rotations=rotations))
    return lib


def save_template_library(library: Sequence[SymbolTemplate], directory) -> None:
    """Write masks as <label>_<n>.png plus a manifest listing rotations."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    manifest = []
    counters: Dict[str, int] = {}
    for tpl in library:
        n = counters.get(tpl.cls, 0)
        counters[tpl.cls] = n + 1
        name = f"{tpl.cls}_{n}.png"
        Image.fromarray(np.where(tpl.mask, 255, 0).astype(np.uint8)).save(directory / name)
        manifest.append({"file": name, "class": tpl.cls, "rotations": list(tpl.rotations)})
    (directory / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")


def load_template_library(directory) -> List[SymbolTemplate]:
    """Read a template directory written by save_template_library."""
    directory = Path(directory)
    manifest_path = directory / "manifest.json"
    if not manifest_path.exists():
        raise SchemaError(f"{directory}: missing manifest.json")
    manifest = json.loads(manifest_path.read_text())
    lib = []
    for i, rec in enumerate(manifest):
        where = f"{manifest_path}: record {i}"
        cls = rec.get("class")
        if cls not in SYMBOL_CLASSES:
            raise SchemaError(f"{where}: unknown symbol class {cls!r}")
        mask = np.asarray(Image.open(directory / rec["file"]).convert("L")) > 127
        lib.append(SymbolTemplate(cls=cls, mask=mask, rotations=tuple(rec.get("rotations", [0]))))
    return lib


# ---------------------------------------------------------------------------
# Template matching
# ---------------------------------------------------------------------------

def _score_map(image_f: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Jaccard score of the mask against every window position.

    Intersection and window ink counts come from correlation sums; values
    stay integer-exact in float32 at these magnitudes.
    """
    tpl = mask.astype(np.float32)
    inter = cv2.matchTemplate(image_f, tpl, cv2.TM_CCORR)
    window_ink = cv2.matchTemplate(image_f, np.ones_like(tpl), cv2.TM_CCORR)
    mask_count = float(mask.sum())
    union = window_ink + mask_count - inter
    with np.errstate(invalid="ignore", divide="ignore"):
        score = np.where(union > 0, inter / union, 0.0)
    return score


def match_templates(
    image: BinaryImage,
    library: Sequence[SymbolTemplate],
    threshold: float = 0.8,
    nms_iou: float = 0.3,
) -> List[SymbolDetection]:
    """Sliding-window Jaccard matcher over binary masks.

    Every library mask is tried at each of its configured rotations; window
    scores at or above the threshold become candidates, and overlapping
    same-class candidates (IoU > nms_iou) are suppressed keeping the max
    score.
    """
    if not library:
        raise ValueError("empty template library")
    if not (0.0 < threshold <= 1.0):
        raise ValueError(f"threshold {threshold} outside (0, 1]")
    arr = np.asarray(image, dtype=bool)
    image_f = arr.astype(np.float32)
    h, w = arr.shape
    candidates = []
    for tpl in library:
        for rot in tpl.rotations:
            mask = np.rot90(np.asarray(tpl.mask, dtype=bool), k=rot // 90)
            th, tw = mask.shape
            if th > h or tw > w:
                continue
            score = _score_map(image_f, mask)
            ys, xs = np.nonzero(score >= threshold)
            for y, x in zip(ys.tolist(), xs.tolist()):
                candidates.append(
                    (float(score[y, x]), y, x, tpl.cls,
                     BBox(x, y, x + tw - 1, y + th - 1))
                )
    candidates.sort(key=lambda c: (-c[0], c[1], c[2], c[3]))
    kept: List[SymbolDetection] = []
    for score, _, _, cls, bbox in candidates:
        if any(d.cls == cls and iou(d.bbox, bbox) > nms_iou for d in kept):
            continue
        kept.append(SymbolDetection(cls=cls, bbox=bbox, score=round(score, 6)))
    kept.sort(key=lambda d: (d.bbox.y0, d.bbox.x0, d.cls))
    return kept


# ---------------------------------------------------------------------------
# Annotation tooling (tiling, mask boundaries, augmentation)
# ---------------------------------------------------------------------------

def tile_sheet(image: GrayImage, config: AnnotationConfig = AnnotationConfig()) -> List[Patch]:
    """Cut the sheet into patch_size squares covering every pixel.

    Right/bottom remainder patches are padded with background (255) to the
    full patch size; offsets allow exact back-mapping.
    """
    arr = np.asarray(image)
    h, w = arr.shape
    size = config.patch_size
    stride = config.effective_stride
    patches = []
    for oy in range(0, h, stride):
        for ox in range(0, w, stride):
            tile = np.full((size, size), 255, dtype=arr.dtype)
            sub = arr[oy : oy + size, ox : ox + size]
            tile[: sub.shape[0], : sub.shape[1]] = sub
            patches.append(Patch(image=tile, offset_x=ox, offset_y=oy))
    return patches


def stitch_patches(patches: Sequence[Patch], width: int, height: int) -> GrayImage:
    """Paste patches back at their offsets, cropping padded margins."""
    out = np.full((height, width), 255, dtype=np.uint8)
    for p in patches:
        ph, pw = p.image.shape
        y1 = min(height, p.offset_y + ph)
        x1 = min(width, p.offset_x + pw)
        out[p.offset_y : y1, p.offset_x : x1] = p.image[: y1 - p.offset_y, : x1 - p.offset_x]
    return out


def export_mask_boundaries(
    mask: BinaryImage, config: AnnotationConfig = AnnotationConfig()
) -> BinaryImage:
    """Dilated 1-px boundary ring of a filled symbol mask."""
    arr = np.asarray(mask, dtype=bool)
    if not arr.any():
        return np.zeros_like(arr)
    ring = arr & ~erode(arr, 3)
    return dilate(ring, config.boundary_dilation)


def _translate(arr: np.ndarray, dx: int, dy: int, fill) -> np.ndarray:
    out = np.full_like(arr, fill)
    h, w = arr.shape
    src_x0, src_x1 = max(0, -dx), min(w, w - dx)
    src_y0, src_y1 = max(0, -dy), min(h, h - dy)
    if src_x0 < src_x1 and src_y0 < src_y1:
        out[src_y0 + dy : src_y1 + dy, src_x0 + dx : src_x1 + dx] = arr[src_y0:src_y1, src_x0:src_x1]
    return out


def augment_patches(
    patches: Sequence[Patch],
    config: AnnotationConfig = AnnotationConfig(),
    seed: int = 0,
) -> List[Patch]:
    """Rotation and translation variants of each patch, deterministically.

    Per input patch: the original, then (if rotation is enabled) one variant
    per 90-degree multiple, then (if translation is enabled) four variants
    shifted by offsets drawn uniformly from [-translation_px, translation_px]
    with the seeded generator. Annotations transform alongside images.
    """
    rng = np.random.default_rng(seed)
    out: List[Patch] = []
    bg = 255
    for p in patches:
        out.append(p)
        if "rotation" in config.augmentations:
            for k in range(4):
                img = np.ascontiguousarray(np.rot90(p.image, k))
                ann = None if p.annotation is None else np.ascontiguousarray(np.rot90(p.annotation, k))
                out.append(replace(p, image=img, annotation=ann))
        if "translation" in config.augmentations:
            k = config.translation_px
            for _ in range(4):
                dx = int(rng.integers(-k, k + 1))
                dy = int(rng.integers(-k, k + 1))
                img = _translate(p.image, dx, dy, bg)
                ann = None if p.annotation is None else _translate(p.annotation, dx, dy, False)
                out.append(replace(p, image=img, annotation=ann))
    return out


def write_patches(patches: Sequence[Patch], directory) -> None:
    """Write patch_<ox>_<oy>.png files (plus annotations) and an offsets manifest."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    manifest = []
    for i, p in enumerate(patches):
        name = f"patch_{p.offset_x}_{p.offset_y}.png"
        if (directory / name).exists():
            name = f"patch_{p.offset_x}_{p.offset_y}_{i}.png"
        Image.fromarray(np.asarray(p.image, dtype=np.uint8)).save(directory / name)
        entry = {"file": name, "offset": [p.offset_x, p.offset_y]}
        if p.annotation is not None:
            ann_name = name.replace("patch_", "annotation_")
            Image.fromarray(np.where(p.annotation, 255, 0).astype(np.uint8)).save(directory / ann_name)
            entry["annotation"] = ann_name
        manifest.append(entry)
    (directory / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
