import json

import numpy as np
import pytest

from pidgraph import codes, raster, synth
from pidgraph.codes import CodeGrammar, SchemaError, TextRegion
from pidgraph.geometry import BBox, iou

DEFAULT = CodeGrammar()


class TestValidateCode:
    def test_paper_format_instance(self):
        assert codes.validate_code('6"-PP1234567-12345A-AB', DEFAULT)

    def test_wrong_shape_rejected(self):
        assert not codes.validate_code("ABC-123", DEFAULT)

    def test_length_mismatch_rejected(self):
        assert not codes.validate_code('66"-PP1234567-12345A-AB', DEFAULT)

    def test_alpha_accepts_both_cases(self):
        assert codes.validate_code('6"-pp1234567-12345a-ab', DEFAULT)

    def test_digit_is_strict(self):
        assert not codes.validate_code('A"-PP1234567-12345A-AB', DEFAULT)
        assert not codes.validate_code('6"-PP123456A-12345A-AB', DEFAULT)

    def test_whitespace_trimmed_equivalence(self):
        text = '6"-PP1234567-12345A-AB'
        assert codes.validate_code(f"  {text} \n", DEFAULT) == codes.validate_code(text, DEFAULT)

    def test_custom_grammar(self):
        g = CodeGrammar("NN-AA")
        assert codes.validate_code("12-xy", g)
        assert not codes.validate_code("1x-xy", g)

    def test_literal_must_match(self):
        assert not codes.validate_code('6"_PP1234567-12345A-AB', DEFAULT)

    def test_empty_grammar_rejected(self):
        with pytest.raises(ValueError):
            CodeGrammar("")


class TestIngest:
    def write(self, tmp_path, payload):
        p = tmp_path / "dets.json"
        p.write_text(json.dumps(payload))
        return p

    def test_three_records(self, tmp_path):
        p = self.write(tmp_path, [
            {"bbox": [0, 0, 10, 5], "text": "A", "confidence": 0.9},
            {"bbox": [20, 0, 40, 5], "text": None, "confidence": None},
            {"bbox": [50, 0, 70, 5], "text": "B"},
        ])
        regions = codes.ingest_text_regions(p)
        assert len(regions) == 3
        assert regions[0].transcription == "A"
        assert regions[1].transcription is None

    def test_empty_list(self, tmp_path):
        assert codes.ingest_text_regions(self.write(tmp_path, [])) == []

    def test_inverted_bbox_names_record(self, tmp_path):
        p = self.write(tmp_path, [
            {"bbox": [0, 0, 10, 5], "text": "A"},
            {"bbox": [30, 0, 10, 5], "text": "B"},
        ])
        with pytest.raises(SchemaError, match="record 1"):
            codes.ingest_text_regions(p)

    def test_out_of_bounds_rejected_when_bounds_given(self, tmp_path):
        p = self.write(tmp_path, [{"bbox": [0, 0, 120, 5], "text": "A"}])
        with pytest.raises(SchemaError, match="record 0"):
            codes.ingest_text_regions(p, bounds=(100, 100))

    def test_not_a_list(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text(json.dumps({"x": 1}))
        with pytest.raises(SchemaError):
            codes.ingest_text_regions(p)

    def test_bad_confidence(self, tmp_path):
        p = self.write(tmp_path, [{"bbox": [0, 0, 5, 5], "text": "A", "confidence": 1.5}])
        with pytest.raises(SchemaError):
            codes.ingest_text_regions(p)


class TestFilterCodes:
    def test_two_valid_one_invalid(self):
        regions = [
            TextRegion(BBox(0, 0, 9, 9), '6"-PP1234567-12345A-AB'),
            TextRegion(BBox(0, 20, 9, 29), "NOT A CODE"),
            TextRegion(BBox(0, 40, 9, 49), '8"-QQ7654321-54321Z-ZY'),
        ]
        out, skipped = codes.filter_codes(regions, DEFAULT)
        assert [c.bbox.y0 for c in out] == [0, 40]
        assert skipped == []

    def test_empty_input(self):
        assert codes.filter_codes([], DEFAULT) == ([], [])

    def test_untranscribed_reported_not_coded(self):
        regions = [TextRegion(BBox(0, 0, 9, 9)), TextRegion(BBox(0, 20, 9, 29), '6"-PP1234567-12345A-AB')]
        out, skipped = codes.filter_codes(regions, DEFAULT)
        assert len(out) == 1 and skipped == [0]

    def test_output_subset_and_all_valid(self):
        rng = np.random.default_rng(4)
        regions = []
        for i in range(30):
            if rng.random() < 0.5:
                text = '6"-PP1234567-12345A-AB'
            else:
                text = "JUNK-" + str(i)
            regions.append(TextRegion(BBox(0, i * 10, 9, i * 10 + 9), text))
        out, _ = codes.filter_codes(regions, DEFAULT)
        bboxes = {(r.bbox.x0, r.bbox.y0) for r in regions}
        for c in out:
            assert codes.validate_code(c.text, DEFAULT)
            assert (c.bbox.x0, c.bbox.y0) in bboxes
        valid_in = sum(1 for r in regions if r.transcription and codes.validate_code(r.transcription, DEFAULT))
        assert len(out) == valid_in  # no false negatives at this stage


class TestDetectTextBlobs:
    def test_blank_image(self):
        assert codes.detect_text_blobs(np.zeros((50, 50), bool)) == []

    def test_long_line_fails_gates(self):
        img = np.zeros((60, 600), bool)
        img[30, 40:540] = True  # 500 px line
        assert codes.detect_text_blobs(img) == []

    def test_vertical_and_diagonal_lines_fail_gates(self):
        img = np.zeros((300, 300), bool)
        img[20:280, 40] = True
        for i in range(200):
            img[30 + i, 60 + i] = True
        assert codes.detect_text_blobs(img) == []

    def test_five_rendered_codes_recovered(self):
        spec = synth.SheetSpec(
            width=1000, height=900, outlet_count=5, inlet_count=5, symbols=()
        )
        sheet, gt = synth.generate_sheet(spec, 0)
        regions = codes.detect_text_blobs(raster.binarize(sheet))
        assert len(regions) == 5
        for code in gt.codes:
            best = max(iou(code.bbox, r.bbox) for r in regions)
            assert best >= 0.5
        for r in regions:
            assert r.transcription is None

    def test_regions_distinct_and_in_bounds(self):
        spec = synth.SheetSpec(width=1000, height=900, outlet_count=5, inlet_count=5, symbols=())
        sheet, _ = synth.generate_sheet(spec, 1)
        binary = raster.binarize(sheet)
        regions = codes.detect_text_blobs(binary)
        seen = set()
        h, w = binary.shape
        for r in regions:
            key = tuple(r.bbox.as_list())
            assert key not in seen
            seen.add(key)
            assert 0 <= r.bbox.x0 <= r.bbox.x1 < w
            assert 0 <= r.bbox.y0 <= r.bbox.y1 < h
