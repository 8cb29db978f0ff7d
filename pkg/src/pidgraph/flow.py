"""Association of detected components to pipelines and the flow forest.

Tags, codes, and symbols are each tied to their nearest pipeline segment
under the rules below; outlets then root one tree each over the
line-adjacency graph induced by valid junctions, inlets hang off their
associated lines as leaves, and pruning drops everything that leads to no
inlet. Trees may share line and inlet nodes but every root is unique.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Sequence, Set, Tuple

from .codes import PipelineCode
from .geometry import (
    closest_point_on_segment,
    point_segment_distance,
    segment_bbox_distance,
)
from .lines import Junction, Segment
from .symbols import SymbolDetection
from .tags import Direction, Tag, TagKind

DEFAULT_TAG_MAX_DIST = 30.0
DEFAULT_CODE_MAX_DIST = 30.0
DEFAULT_SYMBOL_MAX_GAP = 20.0


class NodeKind(str, Enum):
    OUTLET_ROOT = "outlet-root"
    LINE = "line"
    INLET_LEAF = "inlet-leaf"


NodeKey = Tuple[NodeKind, int]


@dataclass(frozen=True)
class Association:
    component_type: str           # "tag" | "code" | "symbol"
    component_id: int
    line_id: int
    distance: float

    def __post_init__(self):
        if self.distance < 0:
            raise ValueError("association distance must be >= 0")
        if self.component_type not in ("tag", "code", "symbol"):
            raise ValueError(f"unknown component type {self.component_type!r}")


@dataclass
class FlowTree:
    root: NodeKey
    children: Dict[NodeKey, Tuple[NodeKey, ...]]

    def nodes(self) -> Set[NodeKey]:
        seen = {self.root}
        for parent, kids in self.children.items():
            seen.add(parent)
            seen.update(kids)
        return seen

    def leaves(self) -> List[NodeKey]:
        return [n for n in self.nodes() if not self.children.get(n)]

    def height(self) -> int:
        def depth(node: NodeKey) -> int:
            kids = self.children.get(node, ())
            return 1 + (max(depth(k) for k in kids) if kids else 0)

        return depth(self.root)


@dataclass
class FlowForest:
    trees: List[FlowTree] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)
    dropped: List[str] = field(default_factory=list)

    def shared_nodes(self) -> Set[NodeKey]:
        counts: Dict[NodeKey, int] = {}
        for t in self.trees:
            for n in t.nodes():
                counts[n] = counts.get(n, 0) + 1
        return {n for n, c in counts.items() if c > 1}

    def tree_for_outlet(self, outlet_id: int) -> Optional[FlowTree]:
        for t in self.trees:
            if t.root == (NodeKind.OUTLET_ROOT, outlet_id):
                return t
        return None


class OutletNotFoundError(KeyError):
    pass


def _attachment_side(tag: Tag) -> Direction:
    cx = (tag.bbox.x0 + tag.bbox.x1) / 2.0
    return Direction.RIGHT if tag.emerge_point.x > cx else Direction.LEFT


def associate_tags(
    tags: Sequence[Tag],
    segments: Sequence[Segment],
    max_dist: float = DEFAULT_TAG_MAX_DIST,
) -> Tuple[List[Association], List[int]]:
    """Nearest segment from each tag's emerge point, on its attachment side.

    Only segments whose closest point lies in the half-plane the pipeline
    leaves through (1 px of slack) are considered. Returns (associations,
    indices of unassociated tags).
    """
    assoc = []
    unassoc = []
    for i, tag in enumerate(tags):
        if tag.emerge_point is None or tag.kind is None:
            unassoc.append(i)
            continue
        side = _attachment_side(tag)
        sign = 1.0 if side is Direction.RIGHT else -1.0
        best = None
        for seg in sorted(segments, key=lambda s: s.id):
            cp = closest_point_on_segment(tag.emerge_point, seg.p, seg.q)
            if sign * (cp.x - tag.emerge_point.x) < -1.0:
                continue
            d = tag.emerge_point.dist(cp)
            if d <= max_dist and (best is None or d < best[0]):
                best = (d, seg.id)
        if best is None:
            unassoc.append(i)
        else:
            assoc.append(Association("tag", i, best[1], best[0]))
    return assoc, unassoc


def associate_codes(
    codes: Sequence[PipelineCode],
    segments: Sequence[Segment],
    max_dist: float = DEFAULT_CODE_MAX_DIST,
) -> Tuple[List[Association], List[int]]:
    """Nearest segment by min corner-to-segment distance; ties to smaller id."""
    assoc = []
    unassoc = []
    for i, code in enumerate(codes):
        best = None
        for seg in sorted(segments, key=lambda s: s.id):
            d = min(point_segment_distance(c, seg.p, seg.q) for c in code.bbox.corners())
            if d <= max_dist and (best is None or d < best[0]):
                best = (d, seg.id)
        if best is None:
            unassoc.append(i)
        else:
            assoc.append(Association("code", i, best[1], best[0]))
    return assoc, unassoc


def associate_symbols(
    symbols: Sequence[SymbolDetection],
    segments: Sequence[Segment],
    max_gap: float = DEFAULT_SYMBOL_MAX_GAP,
) -> Tuple[List[Association], List[int]]:
    """Nearest segment by bbox-center distance, gated on actual separation.

    The nearest candidate is accepted only when the segment passes within
    max_gap of the symbol's box; a separated symbol stays unassociated.
    """
    assoc = []
    unassoc = []
    for i, sym in enumerate(symbols):
        center = sym.bbox.center
        best = None
        for seg in sorted(segments, key=lambda s: s.id):
            d = point_segment_distance(center, seg.p, seg.q)
            if best is None or d < best[0]:
                best = (d, seg)
        if best is None:
            unassoc.append(i)
            continue
        d, seg = best
        if segment_bbox_distance(seg.p, seg.q, sym.bbox) <= max_gap:
            assoc.append(Association("symbol", i, seg.id, d))
        else:
            unassoc.append(i)
    return assoc, unassoc


def line_adjacency(junctions: Sequence[Junction]) -> Dict[int, List[int]]:
    """Line-id adjacency from valid junctions, neighbor lists sorted."""
    adj: Dict[int, Set[int]] = {}
    for j in junctions:
        if not j.valid:
            continue
        a, b = j.segments
        adj.setdefault(a, set()).add(b)
        adj.setdefault(b, set()).add(a)
    return {k: sorted(v) for k, v in sorted(adj.items())}


def build_forest(
    tags: Sequence[Tag],
    tag_associations: Sequence[Association],
    junctions: Sequence[Junction],
    segments: Sequence[Segment],
) -> FlowForest:
    """One tree per associated outlet, grown breadth-first over valid junctions.

    Each tree keeps its own visited set, so lines shared between outlets
    appear in several trees while no tree revisits a node; within a tree the
    first-discovered parent wins and later re-encounters are recorded as
    warnings. Inlet leaves hang off their associated line wherever that line
    appears. Outlets with no associated line are reported and skipped.
    """
    tag_line: Dict[int, Association] = {a.component_id: a for a in tag_associations}
    adj = line_adjacency(junctions)
    known_lines = {s.id for s in segments}

    inlets_on_line: Dict[int, List[int]] = {}
    for i, tag in enumerate(tags):
        if tag.kind is TagKind.INLET and i in tag_line:
            inlets_on_line.setdefault(tag_line[i].line_id, []).append(i)
    for v in inlets_on_line.values():
        v.sort()

    forest = FlowForest()
    for i, tag in enumerate(tags):
        if tag.kind is not TagKind.OUTLET:
            continue
        if i not in tag_line:
            forest.dropped.append(f"outlet tag {i}: no associated pipeline, tree omitted")
            continue
        root: NodeKey = (NodeKind.OUTLET_ROOT, i)
        first_line = tag_line[i].line_id
        children: Dict[NodeKey, List[NodeKey]] = {root: [(NodeKind.LINE, first_line)]}
        visited = {first_line}
        parent: Dict[int, Optional[int]] = {first_line: None}
        extra_edges: Set[Tuple[int, int]] = set()
        queue = deque([first_line])
        while queue:
            line = queue.popleft()
            node: NodeKey = (NodeKind.LINE, line)
            kids: List[NodeKey] = []
            for nbr in adj.get(line, []):
                if nbr not in known_lines:
                    continue
                if nbr in visited:
                    if parent.get(line) != nbr:
                        extra_edges.add((min(line, nbr), max(line, nbr)))
                    continue
                visited.add(nbr)
                parent[nbr] = line
                kids.append((NodeKind.LINE, nbr))
                queue.append(nbr)
            for inlet in inlets_on_line.get(line, []):
                kids.append((NodeKind.INLET_LEAF, inlet))
            children[node] = kids
        for a, b in sorted(extra_edges):
            forest.warnings.append(
                f"outlet tag {i}: alternate junction between lines {a} and {b} "
                f"ignored (first-discovered parent kept)"
            )
        forest.trees.append(
            FlowTree(root=root, children={k: tuple(v) for k, v in children.items()})
        )
    return forest


def prune_forest(forest: FlowForest) -> FlowForest:
    """Drop every node that leads to no inlet; report trees pruned away.

    Idempotent: a clean forest passes through unchanged.
    """
    out = FlowForest(warnings=list(forest.warnings), dropped=list(forest.dropped))
    for tree in forest.trees:
        keeps: Dict[NodeKey, bool] = {}

        def leads_to_inlet(node: NodeKey) -> bool:
            if node in keeps:
                return keeps[node]
            if node[0] is NodeKind.INLET_LEAF:
                keeps[node] = True
                return True
            result = any(leads_to_inlet(k) for k in tree.children.get(node, ()))
            keeps[node] = result
            return result

        if not leads_to_inlet(tree.root):
            out.dropped.append(f"outlet tag {tree.root[1]}: tree reaches no inlet, dropped")
            continue
        pruned = {
            node: tuple(k for k in kids if leads_to_inlet(k))
            for node, kids in tree.children.items()
            if leads_to_inlet(node)
        }
        out.trees.append(FlowTree(root=tree.root, children=pruned))
    return out


def query_paths(forest: FlowForest, outlet_id: int) -> List[List[NodeKey]]:
    """All root-to-inlet node paths of the outlet's tree."""
    tree = forest.tree_for_outlet(outlet_id)
    if tree is None:
        raise OutletNotFoundError(f"no tree rooted at outlet tag {outlet_id}")
    paths: List[List[NodeKey]] = []

    def walk(node: NodeKey, trail: List[NodeKey]) -> None:
        trail = trail + [node]
        kids = tree.children.get(node, ())
        if node[0] is NodeKind.INLET_LEAF:
            paths.append(trail)
            return
        for k in kids:
            walk(k, trail)

    walk(tree.root, [])
    return paths


def reachable_inlets(forest: FlowForest, outlet_id: int) -> Set[int]:
    """Inlet tag ids reachable from the outlet (post-prune convenience)."""
    return {p[-1][1] for p in query_paths(forest, outlet_id)}


def check_forest_invariants(forest: FlowForest, pruned: bool = True) -> None:
    """Assert the structural contract; raises AssertionError on violation."""
    roots = [t.root for t in forest.trees]
    assert len(set(roots)) == len(roots), "duplicate outlet roots in forest"
    for tree in forest.trees:
        assert tree.root[0] is NodeKind.OUTLET_ROOT, "root must be an outlet"
        root_kids = tree.children.get(tree.root, ())
        assert len(root_kids) == 1, "root must have exactly one child"
        assert tree.height() >= 2, "tree height must be >= 2"
        for node, kids in tree.children.items():
            assert node[0] is not NodeKind.INLET_LEAF or not kids, "inlet leaves have no children"
        if pruned:
            for leaf in tree.leaves():
                assert leaf[0] is NodeKind.INLET_LEAF, f"non-inlet leaf {leaf} after pruning"
