"""End-to-end sheet extraction in the fixed stage order.

Order matters and mirrors the detection design: binarize, erase text
regions (ingested or fallback-detected) before tag detection, erase tag
boxes before skeletonizing for line detection, then junctions, symbols,
associations, and the pruned flow forest.
"""

from __future__ import annotations

from typing import List, Optional, Sequence

from . import codes as codes_mod
from . import flow, lines, raster, symbols as symbols_mod, tags as tags_mod
from .codes import TextRegion
from .config import PipelineConfig
from .result import Report, Result
from .symbols import SymbolDetection
from .tags import TagKind


def extract_sheet(
    image: raster.GrayImage,
    config: PipelineConfig = PipelineConfig(),
    text_regions: Optional[Sequence[TextRegion]] = None,
    symbol_detections: Optional[Sequence[SymbolDetection]] = None,
) -> Result:
    """Run the full digitization pipeline over one grayscale sheet.

    text_regions / symbol_detections are externally ingested detections;
    when omitted, the classical fallbacks (blob detector, template matcher)
    stand in.
    """
    height, width = image.shape
    report = Report()

    binary = raster.binarize(image)

    if text_regions is None:
        text_regions = codes_mod.detect_text_blobs(
            binary,
            min_area=config.blob_min_area,
            max_area=config.blob_max_area,
            max_height=config.blob_max_height,
            merge_gap=config.blob_merge_gap,
        )
    grammar = codes_mod.CodeGrammar(config.grammar)
    code_list, skipped = codes_mod.filter_codes(text_regions, grammar)
    for idx in skipped:
        report.warnings.append(f"text region {idx}: no transcription, kept for erasure only")

    # all text boxes are erased, validated code or not: any text ink would
    # confuse the geometric detectors downstream
    no_text = raster.erase_regions(binary, [r.bbox for r in text_regions])

    candidates = tags_mod.detect_tags(no_text, config.rdp_epsilon_frac)
    tag_list: List[tags_mod.Tag] = []
    apex_kind = TagKind.OUTLET if config.apex_attachment_is_outlet else TagKind.INLET
    for cand in candidates:
        try:
            tag_list.append(
                tags_mod.classify_tag(
                    no_text, cand, config.tag_probe_kernel, apex_attachment_kind=apex_kind
                )
            )
        except (tags_mod.OrientationError, tags_mod.UnclassifiedTagError) as exc:
            report.warnings.append(f"tag candidate dropped: {exc}")

    no_tags = raster.erase_regions(no_text, [t.bbox for t in tag_list])
    skeleton = raster.skeletonize(no_tags)
    segment_list = lines.detect_segments(
        skeleton,
        config.hough_params(),
        angle_tol=config.merge_angle_tol,
        gap_tol=config.merge_gap_tol,
        offset_tol=config.merge_offset_tol,
    )
    junction_list = [
        lines.validate_intersection(skeleton, cand, config.junction_kernel)
        for cand in lines.compute_intersections(segment_list)
    ]

    if symbol_detections is None:
        if config.template_dir:
            library = symbols_mod.load_template_library(config.template_dir)
        else:
            library = symbols_mod.builtin_template_library()
        symbol_list = symbols_mod.match_templates(
            no_tags, library, config.template_threshold, config.template_nms_iou
        )
    else:
        symbol_list = list(symbol_detections)

    tag_assoc, tag_un = flow.associate_tags(tag_list, segment_list, config.tag_max_dist)
    code_assoc, code_un = flow.associate_codes(code_list, segment_list, config.code_max_dist)
    sym_assoc, sym_un = flow.associate_symbols(symbol_list, segment_list, config.symbol_max_gap)
    report.unassociated = (
        [{"type": "tag", "id": i} for i in tag_un]
        + [{"type": "code", "id": i} for i in code_un]
        + [{"type": "symbol", "id": i} for i in sym_un]
    )

    forest = flow.prune_forest(
        flow.build_forest(tag_list, tag_assoc, junction_list, segment_list)
    )
    report.dropped_trees = list(forest.dropped)
    report.warnings.extend(forest.warnings)

    return Result(
        width=width,
        height=height,
        codes=code_list,
        tags=tag_list,
        segments=segment_list,
        junctions=junction_list,
        symbols=symbol_list,
        associations=tag_assoc + code_assoc + sym_assoc,
        forest=forest,
        report=report,
    )
