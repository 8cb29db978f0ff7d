"""Pipeline codes and pentagon tags: grammar filtering, shape detection.

Shows the code grammar in action, the fallback word-blob detector, and the
pentagon tag chain (contour -> RDP -> orientation -> inlet/outlet probe).
"""

from pathlib import Path

from pidgraph import codes, raster, synth, tags

out = Path(__file__).parent / "output"
out.mkdir(exist_ok=True)

# --- the code grammar: N digit, A alpha, everything else literal ---------
grammar = codes.CodeGrammar()  # the default plant format
for text in ('6"-PP1234567-12345A-AB', "ABC-123", '66"-PP1234567-12345A-AB'):
    print(f"{text!r:30} valid: {codes.validate_code(text, grammar)}")

# --- fallback blob detector on a rendered sheet --------------------------
spec = synth.SheetSpec(width=1000, height=900, outlet_count=5, inlet_count=5, symbols=())
sheet, gt = synth.generate_sheet(spec, seed=0)
binary = raster.binarize(sheet)
regions = codes.detect_text_blobs(binary)
print(f"\nblob detector found {len(regions)} word regions "
      f"({len(gt.codes)} codes on the sheet); transcriptions come from OCR upstream")

# transcribed regions (here: ground truth standing in for OCR) get filtered
transcribed = [
    codes.TextRegion(bbox=c.bbox, transcription=c.text, confidence=1.0) for c in gt.codes
] + [codes.TextRegion(bbox=regions[0].bbox, transcription="SIDE NOTE 42")]
kept, skipped = codes.filter_codes(transcribed, grammar)
print(f"filter_codes kept {len(kept)} of {len(transcribed)} regions")

# --- pentagon tags --------------------------------------------------------
sheet2, gt2 = synth.generate_sheet(synth.SheetSpec(), seed=1)
binary2 = raster.binarize(sheet2)
no_text = raster.erase_regions(binary2, [c.bbox for c in gt2.codes])

candidates = tags.detect_tags(no_text)
print(f"\n{len(candidates)} five-vertex wide-box candidates")
for cand in candidates:
    classified = tags.classify_tag(no_text, cand)
    print(
        f"  bbox {classified.bbox.as_list()} points {classified.direction.value:5s} "
        f"-> {classified.kind.value:6s} emerge {classified.emerge_point.as_tuple()}"
    )
