"""The pid-graph/1 result document: typed container plus JSON round-trip.

Serialization is fully deterministic: section and key order are fixed and
every real is rounded to two decimals, so identical extractions produce
byte-identical files.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List

from .codes import PipelineCode, SchemaError
from .flow import Association, FlowForest, FlowTree, NodeKey, NodeKind
from .geometry import BBox, Point
from .lines import Junction, Segment
from .symbols import SymbolDetection
from .tags import Direction, Tag, TagKind

SCHEMA = "pid-graph/1"


@dataclass
class Report:
    unassociated: List[dict] = field(default_factory=list)
    dropped_trees: List[str] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)


@dataclass
class Result:
    width: int
    height: int
    codes: List[PipelineCode] = field(default_factory=list)
    tags: List[Tag] = field(default_factory=list)
    segments: List[Segment] = field(default_factory=list)
    junctions: List[Junction] = field(default_factory=list)
    symbols: List[SymbolDetection] = field(default_factory=list)
    associations: List[Association] = field(default_factory=list)
    forest: FlowForest = field(default_factory=FlowForest)
    report: Report = field(default_factory=Report)
    ground_truth: bool = False


def _r2(x: float) -> float:
    return round(float(x), 2)


def _point(p: Point) -> List[float]:
    return [_r2(p.x), _r2(p.y)]


def _node_dict(tree: FlowTree, node: NodeKey) -> dict:
    return {
        "kind": node[0].value,
        "ref": node[1],
        "children": [_node_dict(tree, k) for k in tree.children.get(node, ())],
    }


def result_to_dict(res: Result) -> dict:
    doc = {
        "schema": SCHEMA,
        "image": {"width": res.width, "height": res.height},
        "codes": [
            {"id": i, "text": c.text, "bbox": c.bbox.as_list()}
            for i, c in enumerate(res.codes)
        ],
        "tags": [
            {
                "id": i,
                "kind": t.kind.value if t.kind else None,
                "direction": t.direction.value if t.direction else None,
                "bbox": t.bbox.as_list(),
                "vertices": [_point(v) for v in t.vertices],
                "emerge_point": _point(t.emerge_point) if t.emerge_point else None,
            }
            for i, t in enumerate(res.tags)
        ],
        "segments": [
            {"id": s.id, "p": _point(s.p), "q": _point(s.q)} for s in res.segments
        ],
        "junctions": [
            {
                "id": i,
                "at": _point(j.at),
                "segments": list(j.segments),
                "arm_count": j.arm_count,
                "valid": j.valid,
            }
            for i, j in enumerate(res.junctions)
        ],
        "symbols": [
            {"id": i, "class": s.cls, "bbox": s.bbox.as_list(), "score": _r2(s.score)}
            for i, s in enumerate(res.symbols)
        ],
        "associations": [
            {
                "component": {"type": a.component_type, "id": a.component_id},
                "line_id": a.line_id,
                "distance": _r2(a.distance),
            }
            for a in res.associations
        ],
        "forest": {
            "trees": [
                {"root_tag": t.root[1], "structure": _node_dict(t, t.root)}
                for t in res.forest.trees
            ]
        },
        "report": {
            "unassociated": res.report.unassociated,
            "dropped_trees": res.report.dropped_trees,
            "warnings": res.report.warnings,
        },
    }
    if res.ground_truth:
        doc["ground_truth"] = True
    return doc


def dumps_result(res: Result) -> str:
    return json.dumps(result_to_dict(res), indent=2) + "\n"


def save_result(res: Result, path) -> None:
    Path(path).write_text(dumps_result(res))


def _parse_point(raw) -> Point:
    return Point(float(raw[0]), float(raw[1]))


def _parse_tree(raw: dict) -> FlowTree:
    children: Dict[NodeKey, tuple] = {}

    def walk(node_raw: dict) -> NodeKey:
        key: NodeKey = (NodeKind(node_raw["kind"]), int(node_raw["ref"]))
        kids = tuple(walk(k) for k in node_raw.get("children", []))
        children[key] = kids
        return key

    root = walk(raw["structure"])
    return FlowTree(root=root, children=children)


def result_from_dict(doc: dict, source: str = "<dict>") -> Result:
    if not isinstance(doc, dict) or doc.get("schema") != SCHEMA:
        raise SchemaError(f"{source}: not a {SCHEMA} document")
    try:
        image = doc.get("image", {})
        res = Result(
            width=int(image.get("width", 0)),
            height=int(image.get("height", 0)),
            ground_truth=bool(doc.get("ground_truth", False)),
        )
        res.codes = [
            PipelineCode(text=c["text"], bbox=BBox(*(int(v) for v in c["bbox"])))
            for c in doc.get("codes", [])
        ]
        for t in doc.get("tags", []):
            res.tags.append(
                Tag(
                    vertices=tuple(_parse_point(v) for v in t["vertices"]),
                    bbox=BBox(*(int(v) for v in t["bbox"])),
                    direction=Direction(t["direction"]) if t.get("direction") else None,
                    kind=TagKind(t["kind"]) if t.get("kind") else None,
                    emerge_point=_parse_point(t["emerge_point"]) if t.get("emerge_point") else None,
                )
            )
        res.segments = [
            Segment(id=int(s["id"]), p=_parse_point(s["p"]), q=_parse_point(s["q"]))
            for s in doc.get("segments", [])
        ]
        res.junctions = [
            Junction(
                at=_parse_point(j["at"]),
                segments=(int(j["segments"][0]), int(j["segments"][1])),
                arm_count=j.get("arm_count"),
                valid=j.get("valid"),
            )
            for j in doc.get("junctions", [])
        ]
        res.symbols = [
            SymbolDetection(
                cls=s["class"], bbox=BBox(*(int(v) for v in s["bbox"])), score=float(s["score"])
            )
            for s in doc.get("symbols", [])
        ]
        res.associations = [
            Association(
                component_type=a["component"]["type"],
                component_id=int(a["component"]["id"]),
                line_id=int(a["line_id"]),
                distance=float(a["distance"]),
            )
            for a in doc.get("associations", [])
        ]
        forest = FlowForest()
        for t in doc.get("forest", {}).get("trees", []):
            forest.trees.append(_parse_tree(t))
        report_raw = doc.get("report", {})
        res.report = Report(
            unassociated=list(report_raw.get("unassociated", [])),
            dropped_trees=list(report_raw.get("dropped_trees", [])),
            warnings=list(report_raw.get("warnings", [])),
        )
        forest.warnings = list(res.report.warnings)
        forest.dropped = list(res.report.dropped_trees)
        res.forest = forest
        return res
    except SchemaError:
        raise
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise SchemaError(f"{source}: malformed result document ({exc})") from exc


def load_result(path) -> Result:
    return result_from_dict(json.loads(Path(path).read_text()), source=str(path))
