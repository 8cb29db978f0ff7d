import json

import pytest
from PIL import Image

from pidgraph import synth
from pidgraph.result import save_result


@pytest.fixture(scope="session")
def sheet_dir(tmp_path_factory):
    """One rendered default sheet with ground truth and detection files."""
    root = tmp_path_factory.mktemp("sheet")
    image, gt = synth.generate_sheet(synth.SheetSpec(), 0)
    Image.fromarray(image).save(root / "sheet.png")
    save_result(gt, root / "gt.json")
    text = [
        {"bbox": c.bbox.as_list(), "text": c.text, "confidence": 1.0} for c in gt.codes
    ]
    (root / "text.json").write_text(json.dumps(text))
    syms = [
        {"class": s.cls, "bbox": s.bbox.as_list(), "score": s.score} for s in gt.symbols
    ]
    (root / "symbols.json").write_text(json.dumps(syms))
    return root
