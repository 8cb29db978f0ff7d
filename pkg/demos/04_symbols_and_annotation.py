"""Symbol detection and the annotation tooling.

Template matching with the built-in 11-class mask library, then the
patch-preparation utilities: tiling, boundary export, augmentation.
"""

from pathlib import Path

import numpy as np
from PIL import Image

from pidgraph import raster, symbols, synth

out = Path(__file__).parent / "output"
out.mkdir(exist_ok=True)

# --- the built-in library --------------------------------------------------
library = symbols.builtin_template_library()
print("template classes:", ", ".join(t.cls for t in library))
symbols.save_template_library(library, out / "templates")

# --- matching on a sheet with six planted symbols ---------------------------
spec = synth.SheetSpec(symbols=(("Bl-V", 2), ("Gb-V", 2), ("Ck-V", 2)))
sheet, gt = synth.generate_sheet(spec, seed=3)
binary = raster.binarize(sheet)
erased = raster.erase_regions(binary, [c.bbox for c in gt.codes])
erased = raster.erase_regions(erased, [t.bbox for t in gt.tags])

detections = symbols.match_templates(erased, library, threshold=0.8)
print(f"\n{len(detections)} detections for {len(gt.symbols)} planted symbols")
for d in detections:
    print(f"  {d.cls:8s} score {d.score:.2f} at {d.bbox.as_list()}")

# --- tiling and boundary annotation -----------------------------------------
cfg = symbols.AnnotationConfig(patch_size=400)
patches = symbols.tile_sheet(sheet, cfg)
print(f"\nsheet tiles into {len(patches)} patches of {cfg.patch_size}px")

mask = np.zeros((60, 60), bool)
mask[15:45, 15:45] = True
boundary = symbols.export_mask_boundaries(mask, cfg)
print(f"filled 30x30 mask -> boundary annotation of {boundary.sum()} px")
Image.fromarray(np.where(boundary, 255, 0).astype(np.uint8)).save(out / "04_boundary.png")

# --- deterministic augmentation ---------------------------------------------
first = symbols.Patch(image=patches[0].image, offset_x=0, offset_y=0)
augmented = symbols.augment_patches([first], cfg, seed=7)
again = symbols.augment_patches([first], cfg, seed=7)
identical = all(np.array_equal(a.image, b.image) for a, b in zip(augmented, again))
print(f"augmented 1 patch into {len(augmented)}; double run identical: {identical}")
symbols.write_patches(augmented[:3], out / "patches")
