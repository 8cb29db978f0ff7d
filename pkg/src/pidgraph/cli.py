"""Command-line surface: extract, tile, synth, eval, query, overlay.

Exit codes are scripting contract: 0 ok, 2 unreadable input, 3 schema
error, 4 unknown outlet, 5 render mismatch.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np
from PIL import Image, ImageDraw, UnidentifiedImageError

from . import flow, metrics as metrics_mod, raster, symbols as symbols_mod
from .codes import SchemaError, ingest_text_regions
from .config import PipelineConfig, config_from_dict, load_config
from .pipeline import extract_sheet
from .result import Result, load_result, save_result
from .symbols import AnnotationConfig, ingest_symbol_detections
from .synth import GenerationError, SheetSpec, corpus, load_sheet_spec
from .tags import TagKind

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_SCHEMA = 3
EXIT_QUERY = 4
EXIT_RENDER = 5


def _load_config(args) -> PipelineConfig:
    cfg = load_config(getattr(args, "config", None))
    overrides = {}
    for flag, key in (
        ("grammar", "grammar"),
        ("kernel", "junction_kernel"),
        ("rdp_epsilon", "rdp_epsilon_frac"),
        ("hough_votes", "hough_votes"),
        ("hough_min_line_length", "hough_min_line_length"),
        ("hough_max_line_gap", "hough_max_line_gap"),
        ("tag_max_dist", "tag_max_dist"),
        ("code_max_dist", "code_max_dist"),
        ("symbol_max_gap", "symbol_max_gap"),
        ("template_dir", "template_dir"),
    ):
        val = getattr(args, flag, None)
        if val is not None:
            overrides[key] = val
    if overrides.get("junction_kernel"):
        overrides["tag_probe_kernel"] = overrides["junction_kernel"]
    return config_from_dict(overrides, base=cfg)


def _extract_one(image_path: Path, args, cfg: PipelineConfig) -> Result:
    image = raster.load_image(image_path)
    h, w = image.shape
    text_regions = None
    if args.text_json:
        text_regions = ingest_text_regions(args.text_json, bounds=(w, h))
    symbol_detections = None
    if args.symbols_json:
        symbol_detections = ingest_symbol_detections(args.symbols_json, bounds=(w, h))
    return extract_sheet(image, cfg, text_regions, symbol_detections)


def cmd_extract(args) -> int:
    cfg = _load_config(args)
    paths = [Path(p) for p in args.images]
    multi = len(paths) > 1
    if multi and args.out and not Path(args.out).is_dir():
        Path(args.out).mkdir(parents=True, exist_ok=True)

    def out_path(p: Path) -> Path:
        if args.out is None:
            return p.with_suffix(".result.json")
        if multi or Path(args.out).is_dir():
            return Path(args.out) / (p.stem + ".result.json")
        return Path(args.out)

    def work(p: Path) -> Result:
        return _extract_one(p, args, cfg)

    try:
        if args.jobs > 1 and multi:
            with ThreadPoolExecutor(max_workers=args.jobs) as pool:
                results = list(pool.map(work, paths))
        else:
            results = [work(p) for p in paths]
    except (FileNotFoundError, UnidentifiedImageError, raster.DimensionError) as exc:
        print(f"error: cannot read input: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA

    for p, res in zip(paths, results):
        dest = out_path(p)
        save_result(res, dest)
        print(f"{p}: {len(res.codes)} codes, {len(res.tags)} tags, "
              f"{len(res.segments)} segments, {len(res.forest.trees)} trees -> {dest}")
        if args.overlay:
            if multi:
                Path(args.overlay).mkdir(parents=True, exist_ok=True)
                _draw_overlay(raster.load_image(p), res, Path(args.overlay) / (p.stem + ".overlay.png"))
            else:
                _draw_overlay(raster.load_image(p), res, args.overlay)
    return EXIT_OK


def cmd_tile(args) -> int:
    try:
        image = raster.load_image(args.image)
    except (FileNotFoundError, UnidentifiedImageError, raster.DimensionError) as exc:
        print(f"error: cannot read input: {exc}", file=sys.stderr)
        return EXIT_INPUT
    acfg = AnnotationConfig(
        patch_size=args.patch_size,
        stride=args.stride,
        boundary_dilation=args.boundary_dilation,
    )
    patches = symbols_mod.tile_sheet(image, acfg)
    if args.augment:
        patches = symbols_mod.augment_patches(patches, acfg, seed=args.seed)
    symbols_mod.write_patches(patches, args.out)
    print(f"{len(patches)} patches -> {args.out}")
    return EXIT_OK


def cmd_synth(args) -> int:
    try:
        spec = load_sheet_spec(args.spec) if args.spec else SheetSpec()
    except FileNotFoundError as exc:
        print(f"error: cannot read spec: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (SchemaError, json.JSONDecodeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    seeds = range(args.seed_start, args.seed_end)
    try:
        manifest = corpus(spec, seeds, args.out, jobs=args.jobs)
    except GenerationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    print(f"{len(manifest['sheets'])} sheets -> {args.out}")
    return EXIT_OK


def cmd_eval(args) -> int:
    try:
        pred = load_result(args.prediction)
        gt = load_result(args.ground_truth)
    except FileNotFoundError as exc:
        print(f"error: cannot read input: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (SchemaError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    m = metrics_mod.evaluate(pred, gt, iou_threshold=args.iou)
    print(metrics_mod.format_metrics(m))
    if args.json:
        Path(args.json).write_text(json.dumps(m.to_dict(), indent=2) + "\n")
    return EXIT_OK


def _line_annotations(res: Result, line_id: int) -> str:
    notes = []
    for a in res.associations:
        if a.line_id != line_id:
            continue
        if a.component_type == "code":
            notes.append(f"code {res.codes[a.component_id].text}")
        elif a.component_type == "symbol":
            notes.append(f"symbol {res.symbols[a.component_id].cls}")
    return f" [{', '.join(notes)}]" if notes else ""


def _print_paths(res: Result, outlet_id: int) -> None:
    for path in flow.query_paths(res.forest, outlet_id):
        parts = []
        for kind, ref in path:
            if kind is flow.NodeKind.OUTLET_ROOT:
                parts.append(f"outlet {ref}")
            elif kind is flow.NodeKind.INLET_LEAF:
                parts.append(f"inlet {ref}")
            else:
                parts.append(f"line {ref}{_line_annotations(res, ref)}")
        print(" -> ".join(parts))


def cmd_query(args) -> int:
    try:
        res = load_result(args.result)
    except FileNotFoundError as exc:
        print(f"error: cannot read input: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (SchemaError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    if args.all:
        for tree in res.forest.trees:
            _print_paths(res, tree.root[1])
        return EXIT_OK
    try:
        _print_paths(res, args.outlet)
    except flow.OutletNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_QUERY
    return EXIT_OK


def _draw_overlay(image: np.ndarray, res: Result, out_path) -> None:
    canvas = Image.fromarray(image).convert("RGB")
    d = ImageDraw.Draw(canvas)
    for c in res.codes:
        d.rectangle(c.bbox.as_list(), outline=(30, 80, 220), width=2)
    for t in res.tags:
        color = (200, 30, 30) if t.kind is TagKind.OUTLET else (30, 160, 30)
        d.polygon([(v.x, v.y) for v in t.vertices], outline=color, width=2)
    for s in res.segments:
        d.line([s.p.x, s.p.y, s.q.x, s.q.y], fill=(230, 180, 30), width=1)
    for j in res.junctions:
        r = 4
        box = [j.at.x - r, j.at.y - r, j.at.x + r, j.at.y + r]
        if j.valid:
            d.ellipse(box, outline=(30, 160, 30), width=2)
        else:
            d.line(box, fill=(200, 30, 30), width=2)
            d.line([box[0], box[3], box[2], box[1]], fill=(200, 30, 30), width=2)
    for s in res.symbols:
        d.rectangle(s.bbox.as_list(), outline=(240, 130, 20), width=2)
        d.text((s.bbox.x0, max(0, s.bbox.y0 - 10)), s.cls, fill=(240, 130, 20))
    canvas.save(out_path)


def cmd_overlay(args) -> int:
    try:
        image = raster.load_image(args.image)
        res = load_result(args.result)
    except (FileNotFoundError, UnidentifiedImageError, raster.DimensionError) as exc:
        print(f"error: cannot read input: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (SchemaError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    h, w = image.shape
    if (w, h) != (res.width, res.height):
        print(
            f"error: result is {res.width}x{res.height} but image is {w}x{h}",
            file=sys.stderr,
        )
        return EXIT_RENDER
    _draw_overlay(image, res, args.out)
    print(f"overlay -> {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pidgraph",
                                description="P&ID sheet digitization engine")
    sub = p.add_subparsers(dest="command", required=True)

    px = sub.add_parser("extract", help="digitize sheets into result JSON")
    px.add_argument("images", nargs="+", metavar="IMAGE")
    px.add_argument("--text-json", help="ingested text detections (replaces fallback blobs)")
    px.add_argument("--symbols-json", help="ingested symbol detections (replaces matcher)")
    px.add_argument("--config", help="pipeline config JSON")
    px.add_argument("--out", help="output file (single image) or directory")
    px.add_argument("--overlay", help="also write an overlay PNG here")
    px.add_argument("--jobs", type=int, default=1)
    px.add_argument("--grammar")
    px.add_argument("--kernel", type=int, help="junction/probe kernel side")
    px.add_argument("--rdp-epsilon", type=float, dest="rdp_epsilon")
    px.add_argument("--hough-votes", type=int)
    px.add_argument("--hough-min-line-length", type=float)
    px.add_argument("--hough-max-line-gap", type=float)
    px.add_argument("--tag-max-dist", type=float)
    px.add_argument("--code-max-dist", type=float)
    px.add_argument("--symbol-max-gap", type=float)
    px.add_argument("--template-dir")
    px.set_defaults(func=cmd_extract)

    pt = sub.add_parser("tile", help="cut a sheet into annotation patches")
    pt.add_argument("image")
    pt.add_argument("--out", required=True)
    pt.add_argument("--patch-size", type=int, default=400)
    pt.add_argument("--stride", type=int, default=None)
    pt.add_argument("--boundary-dilation", type=int, default=3)
    pt.add_argument("--augment", action="store_true")
    pt.add_argument("--seed", type=int, default=0)
    pt.set_defaults(func=cmd_tile)

    ps = sub.add_parser("synth", help="generate a synthetic corpus")
    ps.add_argument("--spec", help="sheet spec JSON (defaults used when omitted)")
    ps.add_argument("--seed-start", type=int, default=0)
    ps.add_argument("--seed-end", type=int, default=50)
    ps.add_argument("--out", required=True)
    ps.add_argument("--jobs", type=int, default=1)
    ps.set_defaults(func=cmd_synth)

    pe = sub.add_parser("eval", help="score a result against ground truth")
    pe.add_argument("prediction")
    pe.add_argument("ground_truth")
    pe.add_argument("--iou", type=float, default=0.5)
    pe.add_argument("--json", help="also write metrics JSON here")
    pe.set_defaults(func=cmd_eval)

    pq = sub.add_parser("query", help="print outlet-to-inlet paths")
    pq.add_argument("result")
    group = pq.add_mutually_exclusive_group(required=True)
    group.add_argument("--outlet", type=int)
    group.add_argument("--all", action="store_true")
    pq.set_defaults(func=cmd_query)

    po = sub.add_parser("overlay", help="draw a color-coded result overlay")
    po.add_argument("image")
    po.add_argument("result")
    po.add_argument("out")
    po.set_defaults(func=cmd_overlay)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
