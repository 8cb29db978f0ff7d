"""Detection and association evaluation between two result documents.

Accuracy rows follow the successful/total convention with percentages
rounded half-up to one decimal; symbol detections additionally produce an
11x11 confusion matrix (rows = actual, columns = predicted) with standard
per-class precision (column-normalized), recall (row-normalized) and F1.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from typing import Dict, List, Optional, Sequence, Tuple

from .flow import NodeKind
from .geometry import iou
from .lines import Segment
from .result import Result
from .symbols import SYMBOL_CLASSES
from .tags import TagKind

SEGMENT_ENDPOINT_TOL = 3.0


def percent(successful: int, total: int) -> float:
    """successful/total as a percentage, rounded half-up to one decimal."""
    if total == 0:
        return 0.0
    raw = Decimal(successful) / Decimal(total) * 100
    return float(raw.quantize(Decimal("0.1"), rounding=ROUND_HALF_UP))


@dataclass
class ComponentScore:
    successful: int = 0
    total: int = 0
    predicted: int = 0

    @property
    def accuracy(self) -> float:
        return percent(self.successful, self.total)

    @property
    def recall(self) -> float:
        return self.successful / self.total if self.total else 0.0

    @property
    def precision(self) -> float:
        return self.successful / self.predicted if self.predicted else 0.0


@dataclass
class Metrics:
    rows: Dict[str, ComponentScore] = field(default_factory=dict)
    confusion: List[List[int]] = field(
        default_factory=lambda: [[0] * len(SYMBOL_CLASSES) for _ in SYMBOL_CLASSES]
    )
    per_class: Dict[str, Tuple[float, float, float]] = field(default_factory=dict)
    forest_equal: Optional[bool] = None

    def to_dict(self) -> dict:
        return {
            "schema": "pid-eval/1",
            "rows": {
                name: {
                    "successful": s.successful,
                    "total": s.total,
                    "predicted": s.predicted,
                    "accuracy_percent": s.accuracy,
                    "precision": round(s.precision, 6),
                    "recall": round(s.recall, 6),
                }
                for name, s in self.rows.items()
            },
            "confusion": {
                "labels": list(SYMBOL_CLASSES),
                "matrix": [list(r) for r in self.confusion],
            },
            "per_class": {
                cls: {"precision": round(p, 6), "recall": round(r, 6), "f1": round(f, 6)}
                for cls, (p, r, f) in self.per_class.items()
            },
            "forest_equal": self.forest_equal,
        }


def prf_from_confusion(
    matrix: Sequence[Sequence[int]], labels: Sequence[str] = SYMBOL_CLASSES
) -> Dict[str, Tuple[float, float, float]]:
    """Per-class (precision, recall, f1) under the standard convention:
    precision = diagonal / column sum, recall = diagonal / row sum."""
    n = len(labels)
    out = {}
    for i, cls in enumerate(labels):
        diag = matrix[i][i]
        row_sum = sum(matrix[i])
        col_sum = sum(matrix[r][i] for r in range(n))
        prec = diag / col_sum if col_sum else 0.0
        rec = diag / row_sum if row_sum else 0.0
        f1 = 2 * prec * rec / (prec + rec) if (prec + rec) else 0.0
        out[cls] = (prec, rec, f1)
    return out


def _greedy_box_matches(preds, gts, threshold: float) -> List[Tuple[int, int, float]]:
    """Greedy IoU matching: (pred_idx, gt_idx, iou), best overlaps first."""
    scored = []
    for pi, p in enumerate(preds):
        for gi, g in enumerate(gts):
            v = iou(p.bbox, g.bbox)
            if v >= threshold:
                scored.append((v, pi, gi))
    scored.sort(key=lambda t: (-t[0], t[1], t[2]))
    used_p, used_g = set(), set()
    matches = []
    for v, pi, gi in scored:
        if pi in used_p or gi in used_g:
            continue
        used_p.add(pi)
        used_g.add(gi)
        matches.append((pi, gi, v))
    return matches


def segments_match(a: Segment, b: Segment, tol: float = SEGMENT_ENDPOINT_TOL) -> bool:
    return (a.p.dist(b.p) <= tol and a.q.dist(b.q) <= tol) or (
        a.p.dist(b.q) <= tol and a.q.dist(b.p) <= tol
    )


def _match_segments(preds, gts, tol: float) -> Dict[int, int]:
    """pred segment id -> gt segment id, closest endpoints first."""
    scored = []
    for p in preds:
        for g in gts:
            d = min(p.p.dist(g.p) + p.q.dist(g.q), p.p.dist(g.q) + p.q.dist(g.p))
            if segments_match(p, g, tol):
                scored.append((d, p.id, g.id))
    scored.sort()
    used_p, used_g = set(), set()
    mapping = {}
    for _, pid, gid in scored:
        if pid in used_p or gid in used_g:
            continue
        used_p.add(pid)
        used_g.add(gid)
        mapping[pid] = gid
    return mapping


def _canonical_forest(res: Result, tag_map: Dict[int, int], line_map: Dict[int, int]):
    """Forest as {gt outlet id: frozenset of edges in gt ids}; None if any
    node fails to translate."""
    canon = {}
    for tree in res.forest.trees:
        edges = set()

        def translate(node):
            kind, ref = node
            if kind is NodeKind.LINE:
                return ("line", line_map.get(ref))
            return (kind.value, tag_map.get(ref))

        root = translate(tree.root)
        if root[1] is None:
            return None
        for parent, kids in tree.children.items():
            tp = translate(parent)
            if tp[1] is None:
                return None
            for k in kids:
                tk = translate(k)
                if tk[1] is None:
                    return None
                edges.add((tp, tk))
        canon[root[1]] = frozenset(edges)
    return canon


def evaluate(
    pred: Result,
    gt: Result,
    iou_threshold: float = 0.5,
    segment_tol: float = SEGMENT_ENDPOINT_TOL,
) -> Metrics:
    """Score a predicted result document against ground truth."""
    m = Metrics()

    code_matches = [
        (pi, gi)
        for pi, gi, _ in _greedy_box_matches(pred.codes, gt.codes, iou_threshold)
        if pred.codes[pi].text == gt.codes[gi].text
    ]
    m.rows["code_detection"] = ComponentScore(
        successful=len(code_matches), total=len(gt.codes), predicted=len(pred.codes)
    )

    seg_map = _match_segments(pred.segments, gt.segments, segment_tol)
    m.rows["pipeline_detection"] = ComponentScore(
        successful=len(seg_map), total=len(gt.segments), predicted=len(pred.segments)
    )

    tag_matches = [
        (pi, gi)
        for pi, gi, _ in _greedy_box_matches(pred.tags, gt.tags, iou_threshold)
        if pred.tags[pi].kind == gt.tags[gi].kind
    ]
    tag_map = {pi: gi for pi, gi in tag_matches}
    for kind, row in ((TagKind.OUTLET, "outlet_detection"), (TagKind.INLET, "inlet_detection")):
        m.rows[row] = ComponentScore(
            successful=sum(1 for _, gi in tag_matches if gt.tags[gi].kind == kind),
            total=sum(1 for t in gt.tags if t.kind == kind),
            predicted=sum(1 for t in pred.tags if t.kind == kind),
        )

    sym_matches = _greedy_box_matches(pred.symbols, gt.symbols, iou_threshold)
    cls_index = {c: i for i, c in enumerate(SYMBOL_CLASSES)}
    for pi, gi, _ in sym_matches:
        m.confusion[cls_index[gt.symbols[gi].cls]][cls_index[pred.symbols[pi].cls]] += 1
    m.per_class = prf_from_confusion(m.confusion)
    m.rows["symbol_detection"] = ComponentScore(
        successful=sum(
            1 for pi, gi, _ in sym_matches if pred.symbols[pi].cls == gt.symbols[gi].cls
        ),
        total=len(gt.symbols),
        predicted=len(pred.symbols),
    )

    code_map = {pi: gi for pi, gi in code_matches}
    gt_assoc = {
        "code": {(a.component_id, a.line_id) for a in gt.associations if a.component_type == "code"},
        "tag": {(a.component_id, a.line_id) for a in gt.associations if a.component_type == "tag"},
    }

    def assoc_hits(kind_filter) -> int:
        hits = 0
        for a in pred.associations:
            if a.component_type == "code":
                if kind_filter is not None:
                    continue
                cid, lid = code_map.get(a.component_id), seg_map.get(a.line_id)
                if cid is not None and lid is not None and (cid, lid) in gt_assoc["code"]:
                    hits += 1
            elif a.component_type == "tag":
                if kind_filter is None or pred.tags[a.component_id].kind != kind_filter:
                    continue
                cid, lid = tag_map.get(a.component_id), seg_map.get(a.line_id)
                if cid is not None and lid is not None and (cid, lid) in gt_assoc["tag"]:
                    hits += 1
        return hits

    def assoc_totals(component_type, kind_filter=None) -> Tuple[int, int]:
        def count(res: Result, tags_list) -> int:
            n = 0
            for a in res.associations:
                if a.component_type != component_type:
                    continue
                if kind_filter is not None and tags_list[a.component_id].kind != kind_filter:
                    continue
                n += 1
            return n

        return count(gt, gt.tags), count(pred, pred.tags)

    total, predicted = assoc_totals("code")
    m.rows["code_association"] = ComponentScore(assoc_hits(None), total, predicted)
    for kind, row in ((TagKind.OUTLET, "outlet_association"), (TagKind.INLET, "inlet_association")):
        total, predicted = assoc_totals("tag", kind)
        m.rows[row] = ComponentScore(assoc_hits(kind), total, predicted)

    pred_canon = _canonical_forest(pred, tag_map, seg_map)
    gt_canon = _canonical_forest(
        gt, {i: i for i in range(len(gt.tags))}, {s.id: s.id for s in gt.segments}
    )
    m.forest_equal = pred_canon is not None and pred_canon == gt_canon
    return m


ROW_TITLES = {
    "code_detection": "Pipeline-Code Detection",
    "pipeline_detection": "Pipeline Detection",
    "outlet_detection": "Outlet Detection",
    "inlet_detection": "Inlet Detection",
    "symbol_detection": "Symbol Detection",
    "code_association": "Pipeline Code Association",
    "outlet_association": "Outlet Association",
    "inlet_association": "Inlet Association",
}


def format_metrics(m: Metrics) -> str:
    out = []
    for name, score in m.rows.items():
        title = ROW_TITLES.get(name, name)
        pct = f"{score.accuracy:.1f}%".replace(".0%", "%")
        out.append(f"{title:28s} {score.successful:4d} / {score.total:<4d} {pct}")
    if any(any(r) for r in m.confusion):
        out.append("")
        out.append(f"{'Class':10s} {'Precision':>9s} {'Recall':>9s} {'F1':>9s}")
        for cls in SYMBOL_CLASSES:
            p, r, f = m.per_class[cls]
            out.append(f"{cls:10s} {p:9.3f} {r:9.3f} {f:9.3f}")
    if m.forest_equal is not None:
        out.append("")
        out.append(f"Forest equals ground truth: {'yes' if m.forest_equal else 'no'}")
    return "\n".join(out)
