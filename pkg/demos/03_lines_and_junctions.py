"""Line detection and junction validation.

Hough segments over the skeleton, collinear merging, pairwise
intersections, and the 21-px kernel test that separates real crossings
from lines that merely pass over a gap.
"""

import numpy as np

from pidgraph import draw, lines, raster, synth

# --- full sheet -----------------------------------------------------------
sheet, gt = synth.generate_sheet(synth.SheetSpec(), seed=2)
binary = raster.binarize(sheet)
erased = raster.erase_regions(binary, [c.bbox for c in gt.codes])
erased = raster.erase_regions(erased, [t.bbox for t in gt.tags])
skeleton = raster.skeletonize(erased)

segments = lines.detect_segments(skeleton)
print(f"{len(segments)} segments ({len(gt.segments)} in ground truth)")
for s in segments:
    print(f"  line {s.id}: ({s.p.x:.0f},{s.p.y:.0f}) -> ({s.q.x:.0f},{s.q.y:.0f})")

candidates = lines.compute_intersections(segments)
validated = [lines.validate_intersection(skeleton, c) for c in candidates]
print(f"{len(validated)} candidate junctions, "
      f"{sum(1 for j in validated if j.valid)} valid")

# --- the invalid-junction case on a hand-built image ----------------------
img = np.zeros((101, 101), bool)
draw.hline(img, 50, 5, 95, 1)          # continuous line
draw.vline(img, 50, 5, 33, 1)          # broken line: 34 px gap at the middle
draw.vline(img, 50, 67, 95, 1)
cand = lines.Junction(at=lines.Point(50, 50), segments=(0, 1))
checked = lines.validate_intersection(img, cand)
print(f"\nbroken crossing: arm count {checked.arm_count} -> valid {checked.valid}")

draw.vline(img, 50, 33, 67, 1)         # close the gap: now a true cross
checked = lines.validate_intersection(img, cand)
print(f"closed crossing: arm count {checked.arm_count} -> valid {checked.valid}")

# --- collinear merging bridges skeletonization breaks ----------------------
frag_a = lines.Segment(0, lines.Point(10, 40), lines.Point(100, 40))
frag_b = lines.Segment(1, lines.Point(103, 40), lines.Point(200, 40))
merged = lines.merge_collinear([frag_a, frag_b])
print(f"\nmerged {2} fragments into {len(merged)}: "
      f"({merged[0].p.x:.0f},{merged[0].p.y:.0f}) -> ({merged[0].q.x:.0f},{merged[0].q.y:.0f})")
