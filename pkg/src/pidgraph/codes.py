"""Pipeline-code handling: text-region ingestion, fallback blob detection,
and grammar filtering.

Transcribed text regions normally arrive from an external detector/OCR
through a detections JSON file; the blob detector is a classical fallback
that yields boxes only (no transcriptions).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

from .geometry import BBox, merge_boxes
from .raster import BinaryImage, connected_components

DEFAULT_GRAMMAR = 'N"-AANNNNNNN-NNNNNA-AA'


class SchemaError(ValueError):
    """Malformed or invariant-violating detections file."""


@dataclass(frozen=True)
class TextRegion:
    bbox: BBox
    transcription: Optional[str] = None
    confidence: Optional[float] = None


@dataclass(frozen=True)
class PipelineCode:
    text: str
    bbox: BBox


class CodeGrammar:
    """Positional token pattern: N = digit, A = alpha, else literal char."""

    def __init__(self, pattern: str = DEFAULT_GRAMMAR):
        if not pattern:
            raise ValueError("empty grammar pattern")
        if not all(32 <= ord(c) < 127 for c in pattern):
            raise ValueError("grammar literals must be printable ASCII")
        self.pattern = pattern

    def __repr__(self) -> str:
        return f"CodeGrammar({self.pattern!r})"

    def __eq__(self, other) -> bool:
        return isinstance(other, CodeGrammar) and self.pattern == other.pattern

    def matches(self, text: str) -> bool:
        if len(text) != len(self.pattern):
            return False
        for ch, tok in zip(text, self.pattern):
            if tok == "N":
                if not ch.isdigit():
                    return False
            elif tok == "A":
                # OCR flips case; accept both
                if not ("A" <= ch <= "Z" or "a" <= ch <= "z"):
                    return False
            elif ch != tok:
                return False
        return True


def validate_code(text: str, grammar: CodeGrammar) -> bool:
    """True iff the whitespace-trimmed text matches the grammar exactly."""
    return grammar.matches(text.strip())


def _parse_bbox(raw, where: str, bounds: Optional[Tuple[int, int]] = None) -> BBox:
    if (
        not isinstance(raw, (list, tuple))
        or len(raw) != 4
        or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in raw)
    ):
        raise SchemaError(f"{where}: bbox must be [x0, y0, x1, y1] numbers, got {raw!r}")
    x0, y0, x1, y1 = (int(round(v)) for v in raw)
    if x1 < x0 or y1 < y0:
        raise SchemaError(f"{where}: inverted bbox {raw!r}")
    if bounds is not None:
        w, h = bounds
        if x0 < 0 or y0 < 0 or x1 >= w or y1 >= h:
            raise SchemaError(f"{where}: bbox {raw!r} outside sheet {w}x{h}")
    return BBox(x0, y0, x1, y1)


def ingest_text_regions(path, bounds: Optional[Tuple[int, int]] = None) -> List[TextRegion]:
    """Read text detections from a JSON file.

    Schema: a top-level list of {"bbox": [x0,y0,x1,y1], "text": str|null,
    "confidence": number|null}. `bounds` is an optional (width, height)
    pair used to reject out-of-sheet boxes.
    """
    raw = json.loads(Path(path).read_text())
    if not isinstance(raw, list):
        raise SchemaError(f"{path}: expected a top-level list")
    regions = []
    for i, rec in enumerate(raw):
        where = f"{path}: record {i}"
        if not isinstance(rec, dict):
            raise SchemaError(f"{where}: expected an object")
        bbox = _parse_bbox(rec.get("bbox"), where, bounds)
        text = rec.get("text")
        if text is not None and not isinstance(text, str):
            raise SchemaError(f"{where}: text must be a string or null")
        conf = rec.get("confidence")
        if conf is not None:
            if not isinstance(conf, (int, float)) or isinstance(conf, bool) or not (0.0 <= conf <= 1.0):
                raise SchemaError(f"{where}: confidence must be in [0, 1]")
            conf = float(conf)
        regions.append(TextRegion(bbox=bbox, transcription=text, confidence=conf))
    return regions


def detect_text_blobs(
    image: BinaryImage,
    min_area: int = 15,
    max_area: int = 2000,
    max_height: int = 40,
    merge_gap: int = 10,
) -> List[TextRegion]:
    """Group glyph-scale components into word-level boxes (no transcriptions).

    A component counts as glyph-scale when its ink area is within
    [min_area, max_area] and its bbox fits a max_height-sided square;
    the square gate is what rejects line work in any orientation.
    Glyph boxes on a shared row merge when their horizontal gap is at
    most merge_gap.
    """
    glyphs = [
        c.bbox
        for c in connected_components(image)
        if min_area <= c.pixel_count <= max_area
        and c.bbox.height <= max_height
        and c.bbox.width <= max_height
    ]
    if not glyphs:
        return []
    glyphs.sort(key=lambda b: (b.x0, b.y0))

    def row_overlap(a: BBox, b: BBox) -> bool:
        return min(a.y1, b.y1) - max(a.y0, b.y0) >= 0

    words: List[List[BBox]] = []
    for g in glyphs:
        placed = False
        for word in words:
            cur = merge_boxes(word)
            if row_overlap(cur, g) and g.x0 - cur.x1 <= merge_gap and g.x1 >= cur.x0 - merge_gap:
                word.append(g)
                placed = True
                break
        if not placed:
            words.append([g])

    boxes = sorted(
        (merge_boxes(w) for w in words), key=lambda b: (b.y0, b.x0, b.y1, b.x1)
    )
    return [TextRegion(bbox=b) for b in boxes]


def filter_codes(
    regions: Sequence[TextRegion], grammar: CodeGrammar
) -> Tuple[List[PipelineCode], List[int]]:
    """Keep regions whose transcription validates against the grammar.

    Returns (codes, skipped) where skipped lists the indices of regions
    that carried no transcription at all.
    """
    codes = []
    skipped = []
    for i, region in enumerate(regions):
        if region.transcription is None:
            skipped.append(i)
            continue
        if validate_code(region.transcription, grammar):
            codes.append(PipelineCode(text=region.transcription.strip(), bbox=region.bbox))
    return codes, skipped
