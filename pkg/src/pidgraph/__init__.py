"""pidgraph: P&ID sheet digitization into a queryable flow forest.

Raster sheets go in; pipeline codes, inlet/outlet tags, line segments,
junctions, and symbols come out, associated to each other and structured
as outlet-rooted trees that answer connectivity queries. A deterministic
synthetic-sheet generator and an evaluation harness round out the package.
"""

from .codes import CodeGrammar, PipelineCode, TextRegion, detect_text_blobs, filter_codes, ingest_text_regions, validate_code
from .config import PipelineConfig, load_config
from .flow import (
    Association,
    FlowForest,
    FlowTree,
    NodeKind,
    associate_codes,
    associate_symbols,
    associate_tags,
    build_forest,
    prune_forest,
    query_paths,
)
from .geometry import BBox, Point, Polyline, iou, simplify_rdp
from .lines import HoughParams, Junction, Segment, compute_intersections, detect_segments, merge_collinear, validate_intersection
from .metrics import Metrics, evaluate, percent, prf_from_confusion
from .pipeline import extract_sheet
from .raster import (
    BinaryImage,
    Component,
    GrayImage,
    binarize,
    connected_components,
    dilate,
    erase_regions,
    erode,
    load_image,
    otsu_threshold,
    skeletonize,
)
from .result import Result, load_result, save_result
from .symbols import (
    AnnotationConfig,
    SymbolDetection,
    SymbolTemplate,
    augment_patches,
    builtin_template_library,
    export_mask_boundaries,
    ingest_symbol_detections,
    match_templates,
    tile_sheet,
)
from .synth import GenerationError, NoiseSpec, SheetSpec, corpus, generate_sheet
from .tags import Direction, Tag, TagKind, classify_tag, detect_tags, extract_contours, orient_tag

__version__ = "0.1.0"
