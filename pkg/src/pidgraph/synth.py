"""Deterministic synthetic P&ID sheet generator with exact ground truth.

Each sheet holds one horizontal trunk pipeline per outlet (pentagon tag at
its left end), a vertical manifold line crossing the trunk, and one
horizontal branch per inlet crossing the manifold with the inlet tag at
its right end; extra junctions beyond that budget become short dead-end
crossers over the trunks. Codes sit above their trunks and symbols sit on
them. All geometry lives on a jittered grid with guaranteed separation, so
the ground truth (the same schema as extraction results, plus
"ground_truth": true) is unambiguous and built before rendering.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np
from PIL import Image

from . import draw, fonts
from .codes import DEFAULT_GRAMMAR, CodeGrammar, PipelineCode
from .flow import (
    associate_codes,
    associate_symbols,
    associate_tags,
    build_forest,
    prune_forest,
)
from .geometry import BBox, Point
from .lines import Junction, compute_intersections, number_segments, validate_intersection
from .raster import GrayImage, render_binary
from .result import Report, Result, save_result
from .symbols import SYMBOL_CLASSES, SymbolDetection, builtin_template_library
from .tags import Direction, Tag, TagKind

TAG_W = 90
TAG_H = 30
ATTACH_GAP = 4
LINE_THICKNESS = 2
TEXT_SCALE = 2
MARGIN = 50

MAX_SYMBOL_STATIONS = 3
MAX_EXTRA_STATIONS = 2


class GenerationError(ValueError):
    """Spec cannot be laid out on the requested sheet."""


@dataclass(frozen=True)
class NoiseSpec:
    kind: str = "none"                  # none | speckle | break-gaps
    amount: float = 0.0                 # speckle probability or gap length px

    def __post_init__(self):
        if self.kind not in ("none", "speckle", "break-gaps"):
            raise ValueError(f"unknown noise kind {self.kind!r}")
        if self.kind == "speckle" and not (0.0 <= self.amount < 1.0):
            raise ValueError("speckle probability must be in [0, 1)")
        if self.kind == "break-gaps" and self.amount < 1:
            raise ValueError("break-gaps length must be >= 1 px")


@dataclass(frozen=True)
class SheetSpec:
    width: int = 1000
    height: int = 700
    outlet_count: int = 2
    inlet_count: int = 4
    junction_count: Optional[int] = None   # None = outlets + inlets (no extras)
    symbols: Tuple[Tuple[str, int], ...] = (
        ("Bl-V", 1), ("Gb-V", 1), ("Ck-V", 1), ("Ins", 1),
    )
    grammar: str = DEFAULT_GRAMMAR
    noise: NoiseSpec = NoiseSpec()

    def __post_init__(self):
        if self.outlet_count < 0 or self.inlet_count < 0:
            raise ValueError("counts must be >= 0")
        if self.outlet_count >= 1 and self.inlet_count < self.outlet_count:
            raise ValueError("connectivity specs need inlet_count >= outlet_count >= 1")
        for cls, count in self.symbols:
            if cls not in SYMBOL_CLASSES:
                raise ValueError(f"unknown symbol class {cls!r}")
            if count < 0:
                raise ValueError("symbol counts must be >= 0")

    @property
    def effective_junctions(self) -> int:
        if self.junction_count is None:
            return self.outlet_count + self.inlet_count
        return self.junction_count


def sheet_spec_to_dict(spec: SheetSpec) -> dict:
    return {
        "width": spec.width,
        "height": spec.height,
        "outlet_count": spec.outlet_count,
        "inlet_count": spec.inlet_count,
        "junction_count": spec.junction_count,
        "symbols": [[c, n] for c, n in spec.symbols],
        "grammar": spec.grammar,
        "noise": {"kind": spec.noise.kind, "amount": spec.noise.amount},
    }


def sheet_spec_from_dict(doc: dict) -> SheetSpec:
    noise_raw = doc.get("noise", {}) or {}
    return SheetSpec(
        width=int(doc.get("width", 1000)),
        height=int(doc.get("height", 700)),
        outlet_count=int(doc.get("outlet_count", 2)),
        inlet_count=int(doc.get("inlet_count", 4)),
        junction_count=(None if doc.get("junction_count") is None
                        else int(doc["junction_count"])),
        symbols=tuple((str(c), int(n)) for c, n in doc.get("symbols", [])),
        grammar=str(doc.get("grammar", DEFAULT_GRAMMAR)),
        noise=NoiseSpec(
            kind=str(noise_raw.get("kind", "none")),
            amount=float(noise_raw.get("amount", 0.0)),
        ),
    )


def load_sheet_spec(path) -> SheetSpec:
    return sheet_spec_from_dict(json.loads(Path(path).read_text()))


def _random_code(grammar: CodeGrammar, rng: np.random.Generator) -> str:
    out = []
    for tok in grammar.pattern:
        if tok == "N":
            out.append(str(rng.integers(0, 10)))
        elif tok == "A":
            out.append(chr(ord("A") + int(rng.integers(0, 26))))
        else:
            out.append(tok)
    return "".join(out)


def _pentagon_right(x0: int, y0: int) -> List[Tuple[int, int]]:
    """Right-pointing tag polygon with ink extent exactly TAG_W x TAG_H."""
    return [
        (x0, y0),
        (x0 + 59, y0),
        (x0 + TAG_W - 1, y0 + 15),
        (x0 + 59, y0 + TAG_H - 1),
        (x0, y0 + TAG_H - 1),
    ]


@dataclass
class _PlannedLine:
    orient: str                      # "h" | "v" | "d"
    p: Tuple[int, int]
    q: Tuple[int, int]
    cuts: List[Tuple[int, int]]      # (offset along line, gap length)

    def endpoints(self) -> Tuple[Point, Point]:
        return Point(*map(float, self.p)), Point(*map(float, self.q))

    def length(self) -> int:
        return max(abs(self.q[0] - self.p[0]), abs(self.q[1] - self.p[1]))


def _render_line(ink: np.ndarray, line: _PlannedLine) -> None:
    spans = [(0, line.length())]
    for off, gap in sorted(line.cuts):
        nxt = []
        for a, b in spans:
            if off > a:
                nxt.append((a, min(b, off)))
            if off + gap < b:
                nxt.append((max(a, off + gap), b))
        spans = nxt
    x0, y0 = line.p
    sx = np.sign(line.q[0] - x0)
    sy = np.sign(line.q[1] - y0)
    for a, b in spans:
        if b <= a:
            continue
        if line.orient == "h":
            draw.hline(ink, y0, x0 + sx * a, x0 + sx * b, LINE_THICKNESS)
        elif line.orient == "v":
            draw.vline(ink, x0, y0 + sy * a, y0 + sy * b, LINE_THICKNESS)
        else:
            draw.diagonal(ink, x0 + sx * a, y0 + sy * a, x0 + sx * b, y0 + sy * b,
                          LINE_THICKNESS)


def generate_sheet(spec: SheetSpec, seed: int) -> Tuple[GrayImage, Result]:
    """Render one sheet and its ground truth; bit-identical per (spec, seed)."""
    rng = np.random.default_rng(seed)
    grammar = CodeGrammar(spec.grammar)
    W, H = spec.width, spec.height
    outlets, inlets = spec.outlet_count, spec.inlet_count

    symbol_plan: List[str] = []
    for cls, count in spec.symbols:
        symbol_plan.extend([cls] * count)

    if outlets == 0:
        if inlets or symbol_plan or spec.effective_junctions:
            raise GenerationError("sheets without outlets can hold nothing else")
        return np.full((H, W), 255, dtype=np.uint8), Result(
            width=W, height=H, ground_truth=True
        )

    extras = spec.effective_junctions - (outlets + inlets)
    if extras < 0:
        raise GenerationError(
            f"junction_count {spec.effective_junctions} below the "
            f"{outlets + inlets} needed to connect every tag"
        )
    if extras > MAX_EXTRA_STATIONS * outlets:
        raise GenerationError(
            f"at most {MAX_EXTRA_STATIONS} extra junctions per trunk "
            f"({MAX_EXTRA_STATIONS * outlets} total), requested {extras}"
        )
    if len(symbol_plan) > MAX_SYMBOL_STATIONS * outlets:
        raise GenerationError(
            f"at most {MAX_SYMBOL_STATIONS} symbols per trunk "
            f"({MAX_SYMBOL_STATIONS * outlets} total), requested {len(symbol_plan)}"
        )

    # per-tree inlet shares, round-robin
    shares = [0] * outlets
    for k in range(inlets):
        shares[k % outlets] += 1
    extra_shares = [0] * outlets
    for k in range(extras):
        extra_shares[k % outlets] += 1

    band_h = (H - 2 * MARGIN) // outlets
    need_h = 44 + 70 * max(shares) + 22
    if band_h < need_h:
        raise GenerationError(f"sheet height {H} too small: band {band_h} < {need_h}")

    x_line0 = MARGIN + TAG_W + ATTACH_GAP
    x_line1 = W - MARGIN
    xv_base = x_line0 + 546
    xv_max = xv_base + 8 * (outlets - 1) + 6
    if xv_max + 165 + TAG_W > W - 6 or x_line1 - x_line0 < 600:
        raise GenerationError(f"sheet width {W} too small for the trunk layout")

    template_masks = {t.cls: t.mask for t in builtin_template_library()}

    planned_lines: List[_PlannedLine] = []
    gt_tags: List[Tag] = []
    code_specs: List[Tuple[str, int, int]] = []
    symbol_specs: List[Tuple[str, int, int]] = []

    sym_cursor = 0
    for t in range(outlets):
        band_top = MARGIN + t * band_h
        y_t = band_top + 44

        planned_lines.append(_PlannedLine("h", (x_line0, y_t), (x_line1, y_t), []))

        # outlet tag at the trunk's left end; apex (right) side attaches
        tx0, ty0 = MARGIN, y_t - 14
        gt_tags.append(
            Tag(
                vertices=tuple(Point(float(px), float(py)) for px, py in _pentagon_right(tx0, ty0)),
                bbox=BBox(tx0, ty0, tx0 + TAG_W - 1, ty0 + TAG_H - 1),
                direction=Direction.RIGHT,
                kind=TagKind.OUTLET,
                emerge_point=Point(float(tx0 + TAG_W - 1), ty0 + (TAG_H - 1) / 2.0),
            )
        )

        code_specs.append((_random_code(grammar, rng), x_line0 + 10, y_t - 26))

        n_t = shares[t]
        if n_t:
            # stagger per tree: collinear same-column manifolds would merge
            # into one Hough structure and shadow each other
            x_v = xv_base + 8 * t + int(rng.integers(0, 7))
            y_last = y_t + 70 * n_t
            planned_lines.append(_PlannedLine("v", (x_v, y_t - 30), (x_v, y_last + 30), []))
            for k in range(n_t):
                y_b = y_t + 70 * (k + 1)
                planned_lines.append(_PlannedLine("h", (x_v - 30, y_b), (x_v + 160, y_b), []))
                bx0, by0 = x_v + 160 + ATTACH_GAP + 1, y_b - 14
                gt_tags.append(
                    Tag(
                        vertices=tuple(
                            Point(float(px), float(py)) for px, py in _pentagon_right(bx0, by0)
                        ),
                        bbox=BBox(bx0, by0, bx0 + TAG_W - 1, by0 + TAG_H - 1),
                        direction=Direction.RIGHT,
                        kind=TagKind.INLET,
                        emerge_point=Point(float(bx0), by0 + (TAG_H - 1) / 2.0),
                    )
                )

        # diagonal dead-end crossers; diagonals in different bands are never
        # collinear, so they cannot shadow each other in the Hough accumulator
        for j in range(extra_shares[t]):
            x_e = x_line0 + 460 + 12 * j + 6 * (t % 2) + int(rng.integers(0, 4))
            planned_lines.append(
                _PlannedLine("d", (x_e - 45, y_t - 45), (x_e + 45, y_t + 45), [])
            )

        for j in range(MAX_SYMBOL_STATIONS):
            if sym_cursor >= len(symbol_plan):
                break
            sx = x_line0 + 306 + 50 * j + int(rng.integers(0, 7))
            symbol_specs.append((symbol_plan[sym_cursor], sx, y_t))
            sym_cursor += 1

    # noise cuts are part of the plan so truth and render agree
    if spec.noise.kind == "break-gaps":
        gap = int(spec.noise.amount)
        for line in planned_lines:
            if line.length() >= 3 * gap and rng.random() < 0.5:
                off = int(rng.integers(gap, line.length() - 2 * gap))
                line.cuts.append((off, gap))

    # ground-truth segments, deterministically numbered like detection output
    gt_segments = number_segments([ln.endpoints() for ln in planned_lines])

    # render
    ink = np.zeros((H, W), dtype=bool)
    for line in planned_lines:
        _render_line(ink, line)
    for tag in gt_tags:
        draw.polygon_ring(ink, [(int(v.x), int(v.y)) for v in tag.vertices], LINE_THICKNESS)

    gt_codes: List[PipelineCode] = []
    for text, cx, cy in code_specs:
        layer = np.zeros_like(ink)
        fonts.render_text(layer, text, cx, cy, TEXT_SCALE)
        ys, xs = np.nonzero(layer)
        gt_codes.append(
            PipelineCode(
                text=text,
                bbox=BBox(int(xs.min()), int(ys.min()), int(xs.max()), int(ys.max())),
            )
        )
        ink |= layer

    gt_symbols: List[SymbolDetection] = []
    for cls, sx, sy in symbol_specs:
        mask = template_masks[cls]
        mh, mw = mask.shape
        oy, ox = sy - mh // 2, sx - mw // 2
        ink[oy : oy + mh, ox : ox + mw] |= mask
        gt_symbols.append(
            SymbolDetection(cls=cls, bbox=BBox(ox, oy, ox + mw - 1, oy + mh - 1), score=1.0)
        )
    gt_symbols.sort(key=lambda s: (s.bbox.y0, s.bbox.x0, s.cls))

    if spec.noise.kind == "speckle":
        draw.speckle(ink, spec.noise.amount, rng)

    sheet = render_binary(ink)

    # junction validity is read off the rendered pixels
    candidates = compute_intersections(gt_segments)
    gt_junctions: List[Junction] = [validate_intersection(ink, c) for c in candidates]

    tag_assoc, tag_un = associate_tags(gt_tags, gt_segments)
    code_assoc, code_un = associate_codes(gt_codes, gt_segments)
    sym_assoc, sym_un = associate_symbols(gt_symbols, gt_segments)

    forest = prune_forest(build_forest(gt_tags, tag_assoc, gt_junctions, gt_segments))

    report = Report(
        unassociated=(
            [{"type": "tag", "id": i} for i in tag_un]
            + [{"type": "code", "id": i} for i in code_un]
            + [{"type": "symbol", "id": i} for i in sym_un]
        ),
        dropped_trees=list(forest.dropped),
        warnings=list(forest.warnings),
    )

    gt = Result(
        width=W,
        height=H,
        codes=gt_codes,
        tags=gt_tags,
        segments=gt_segments,
        junctions=gt_junctions,
        symbols=gt_symbols,
        associations=tag_assoc + code_assoc + sym_assoc,
        forest=forest,
        report=report,
        ground_truth=True,
    )
    return sheet, gt


def corpus(spec: SheetSpec, seeds: Sequence[int], directory, jobs: int = 1) -> dict:
    """Generate (PNG, ground-truth JSON) pairs plus a checksum manifest.

    Generation is pure per seed, so jobs > 1 fans it out over threads; the
    manifest and files are written in seed order either way.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    seeds = list(seeds)
    if jobs > 1 and len(seeds) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rendered = list(pool.map(lambda s: generate_sheet(spec, s), seeds))
    else:
        rendered = [generate_sheet(spec, s) for s in seeds]
    entries = []
    for seed, (sheet, gt) in zip(seeds, rendered):
        png_name = f"sheet_{seed:04d}.png"
        json_name = f"sheet_{seed:04d}.json"
        Image.fromarray(sheet).save(directory / png_name)
        save_result(gt, directory / json_name)
        entries.append(
            {
                "seed": int(seed),
                "image": png_name,
                "ground_truth": json_name,
                "sha256_image": hashlib.sha256((directory / png_name).read_bytes()).hexdigest(),
                "sha256_ground_truth": hashlib.sha256(
                    (directory / json_name).read_bytes()
                ).hexdigest(),
            }
        )
    manifest = {"spec": sheet_spec_to_dict(spec), "sheets": entries}
    (directory / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    return manifest
