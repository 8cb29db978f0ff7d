import json

import pytest

from pidgraph import synth
from pidgraph.codes import SchemaError
from pidgraph.result import (
    SCHEMA,
    dumps_result,
    load_result,
    result_from_dict,
    result_to_dict,
    save_result,
)


class TestRoundTrip:
    def test_serialize_parse_serialize_is_stable(self):
        _, gt = synth.generate_sheet(synth.SheetSpec(), 0)
        text1 = dumps_result(gt)
        back = result_from_dict(json.loads(text1))
        text2 = dumps_result(back)
        assert text1 == text2

    def test_schema_field_present(self):
        _, gt = synth.generate_sheet(synth.SheetSpec(), 0)
        doc = result_to_dict(gt)
        assert doc["schema"] == SCHEMA
        assert doc["ground_truth"] is True
        assert set(doc) >= {
            "codes", "tags", "segments", "junctions", "symbols",
            "associations", "forest", "report", "image",
        }

    def test_file_roundtrip(self, tmp_path):
        _, gt = synth.generate_sheet(synth.SheetSpec(), 1)
        save_result(gt, tmp_path / "r.json")
        back = load_result(tmp_path / "r.json")
        assert result_to_dict(back) == result_to_dict(gt)

    def test_forest_nodes_cross_reference_sections(self):
        _, gt = synth.generate_sheet(synth.SheetSpec(), 2)
        doc = result_to_dict(gt)
        tag_ids = {t["id"] for t in doc["tags"]}
        seg_ids = {s["id"] for s in doc["segments"]}

        def walk(node):
            if node["kind"] == "line":
                assert node["ref"] in seg_ids
            else:
                assert node["ref"] in tag_ids
            for child in node["children"]:
                walk(child)

        assert doc["forest"]["trees"]
        for tree in doc["forest"]["trees"]:
            walk(tree["structure"])

    def test_floats_have_fixed_precision(self):
        _, gt = synth.generate_sheet(synth.SheetSpec(), 0)
        text = dumps_result(gt)
        for token in text.replace(",", " ").replace("]", " ").split():
            if "." in token and token.replace(".", "").replace("-", "").isdigit():
                assert len(token.split(".")[1]) <= 2, token


class TestSchemaErrors:
    def test_wrong_schema_rejected(self):
        with pytest.raises(SchemaError):
            result_from_dict({"schema": "something-else/1"})

    def test_malformed_document_rejected(self):
        with pytest.raises(SchemaError):
            result_from_dict({"schema": SCHEMA, "segments": [{"id": 0}]})
