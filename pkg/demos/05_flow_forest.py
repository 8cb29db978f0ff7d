"""Association rules and the outlet-rooted flow forest.

Builds the canonical example (one outlet, two crossed branch lines, two
inlets), prunes a dead branch, and answers connectivity queries.
"""

from pidgraph import flow
from pidgraph.flow import Association, NodeKind
from pidgraph.geometry import BBox, Point
from pidgraph.lines import Junction, Segment
from pidgraph.tags import Direction, Tag, TagKind


def pentagon(kind, emerge_x, emerge_y, attach_side):
    if attach_side == "right":
        x1, x0 = int(emerge_x), int(emerge_x) - 89
    else:
        x0, x1 = int(emerge_x), int(emerge_x) + 89
    y0 = int(emerge_y - 14.5)
    verts = tuple(
        Point(float(px), float(py))
        for px, py in [(x0, y0), (x0 + 59, y0), (x1, y0 + 15), (x0 + 59, y0 + 29), (x0, y0 + 29)]
    )
    return Tag(verts, BBox(x0, y0, x1, y0 + 29), Direction.RIGHT, kind,
               Point(float(emerge_x), float(emerge_y)))


# lines: L1 trunk; L2, L3 branches crossing it; L4 a spur leading nowhere
segments = [
    Segment(1, Point(100, 100), Point(600, 100)),
    Segment(2, Point(300, 50), Point(300, 300)),
    Segment(3, Point(500, 50), Point(500, 300)),
    Segment(4, Point(200, 50), Point(200, 180)),
]
junctions = [
    Junction(Point(300, 100), (1, 2), arm_count=4, valid=True),
    Junction(Point(500, 100), (1, 3), arm_count=4, valid=True),
    Junction(Point(200, 100), (1, 4), arm_count=4, valid=True),
]
tags = [
    pentagon(TagKind.OUTLET, 95, 100.5, "right"),
    pentagon(TagKind.INLET, 305, 300.5, "left"),
    pentagon(TagKind.INLET, 505, 300.5, "left"),
]

assoc, unassociated = flow.associate_tags(tags, segments)
print("tag associations:")
for a in assoc:
    print(f"  {tags[a.component_id].kind.value} {a.component_id} -> line {a.line_id} "
          f"({a.distance:.1f} px)")

forest = flow.build_forest(tags, assoc, junctions, segments)
print(f"\nbuilt {len(forest.trees)} tree(s); nodes:",
      sorted((k.value, r) for k, r in forest.trees[0].nodes()))

pruned = flow.prune_forest(forest)
gone = forest.trees[0].nodes() - pruned.trees[0].nodes()
print(f"pruning removed: {sorted((k.value, r) for k, r in gone)}  (the dead spur)")

for path in flow.query_paths(pruned, 0):
    pretty = " -> ".join(
        f"{'outlet' if k is NodeKind.OUTLET_ROOT else 'inlet' if k is NodeKind.INLET_LEAF else 'line'} {r}"
        for k, r in path
    )
    print("path:", pretty)

print("inlets reachable from outlet 0:", sorted(flow.reachable_inlets(pruned, 0)))
