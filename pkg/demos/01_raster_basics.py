"""Raster substrate walkthrough: binarize, skeletonize, components, erasure.

Generates a synthetic sheet, then shows each preprocessing stage and saves
the intermediate images under demos/output/.
"""

from pathlib import Path

import numpy as np
from PIL import Image

from pidgraph import raster, synth

out = Path(__file__).parent / "output"
out.mkdir(exist_ok=True)

# a deterministic synthetic sheet stands in for a scanned drawing
sheet, gt = synth.generate_sheet(synth.SheetSpec(), seed=0)
Image.fromarray(sheet).save(out / "01_sheet.png")

# global Otsu-style threshold; dark ink becomes foreground
threshold = raster.otsu_threshold(sheet)
binary = raster.binarize(sheet)
print(f"threshold {threshold}, ink pixels {binary.sum()}")

# connected components partition the ink exactly
components = raster.connected_components(binary)
print(f"{len(components)} components; largest {max(c.pixel_count for c in components)} px")
assert sum(c.pixel_count for c in components) == binary.sum()

# erasing the code boxes removes exactly their ink
no_text = raster.erase_regions(binary, [c.bbox for c in gt.codes])
print(f"after code erasure: {no_text.sum()} ink pixels")

# thinning reduces every stroke to single-pixel width
skeleton = raster.skeletonize(no_text)
two_by_two = (
    skeleton[:-1, :-1] & skeleton[:-1, 1:] & skeleton[1:, :-1] & skeleton[1:, 1:]
).any()
print(f"skeleton: {skeleton.sum()} px, 2x2 blocks present: {two_by_two}")

Image.fromarray(raster.render_binary(binary)).save(out / "01_binary.png")
Image.fromarray(raster.render_binary(skeleton)).save(out / "01_skeleton.png")

# dilation grows ink by a square kernel (used for annotation boundaries)
dot = np.zeros((9, 9), bool)
dot[4, 4] = True
print(f"single pixel dilated by 3x3 -> {raster.dilate(dot, 3).sum()} px block")
