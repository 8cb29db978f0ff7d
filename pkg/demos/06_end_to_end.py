"""Whole pipeline on a small synthetic corpus, scored against ground truth.

Equivalent CLI session:
    pidgraph synth --seed-start 0 --seed-end 5 --out corpus
    pidgraph extract corpus/sheet_0000.png --text-json ... --out pred.json
    pidgraph eval pred.json corpus/sheet_0000.json --iou 0.7
"""

from pathlib import Path

from PIL import Image

from pidgraph import metrics, pipeline, synth
from pidgraph.codes import TextRegion
from pidgraph.result import save_result

out = Path(__file__).parent / "output"
out.mkdir(exist_ok=True)

spec = synth.SheetSpec()   # 2 outlets, 4 inlets, 8 lines, 4 symbols
totals = {}
forests_equal = 0
n = 5
for seed in range(n):
    sheet, gt = synth.generate_sheet(spec, seed)
    # transcribed text regions stand in for the external text detector + OCR
    text = [TextRegion(bbox=c.bbox, transcription=c.text, confidence=1.0) for c in gt.codes]
    result = pipeline.extract_sheet(sheet, text_regions=text)   # symbols via matcher
    scored = metrics.evaluate(result, gt, iou_threshold=0.7)
    forests_equal += bool(scored.forest_equal)
    for name, row in scored.rows.items():
        s, t = totals.get(name, (0, 0))
        totals[name] = (s + row.successful, t + row.total)
    if seed == 0:
        Image.fromarray(sheet).save(out / "06_sheet.png")
        save_result(result, out / "06_result.json")

print(f"{n} sheets extracted; forests equal to truth on {forests_equal}/{n}")
for name, (s, t) in totals.items():
    print(f"  {name:22s} {s}/{t} = {metrics.percent(s, t)}%")
print(f"first sheet's result JSON -> {out / '06_result.json'}")
