import json

import numpy as np
from PIL import Image

from pidgraph.cli import main
from pidgraph.result import load_result


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


class TestExtract:
    def test_full_sheet(self, sheet_dir, tmp_path, capsys):
        out = tmp_path / "pred.json"
        code, _, _ = run(
            capsys, "extract", sheet_dir / "sheet.png",
            "--text-json", sheet_dir / "text.json",
            "--symbols-json", sheet_dir / "symbols.json",
            "--out", out,
        )
        assert code == 0
        res = load_result(out)
        assert len(res.tags) == 6 and len(res.forest.trees) == 2

    def test_blank_sheet_empty_sections_exit_zero(self, tmp_path, capsys):
        img = tmp_path / "blank.png"
        Image.fromarray(np.full((300, 400), 255, np.uint8)).save(img)
        out = tmp_path / "pred.json"
        code, _, _ = run(capsys, "extract", img, "--out", out)
        assert code == 0
        res = load_result(out)
        assert res.codes == [] and res.tags == [] and res.segments == []
        assert res.forest.trees == []

    def test_deterministic_result_bytes(self, sheet_dir, tmp_path, capsys):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        for out in (a, b):
            code, _, _ = run(
                capsys, "extract", sheet_dir / "sheet.png",
                "--text-json", sheet_dir / "text.json",
                "--symbols-json", sheet_dir / "symbols.json",
                "--out", out,
            )
            assert code == 0
        assert a.read_bytes() == b.read_bytes()

    def test_unreadable_input_exit_2(self, tmp_path, capsys):
        code, _, err = run(capsys, "extract", tmp_path / "missing.png")
        assert code == 2

    def test_bad_text_json_exit_3_names_record(self, sheet_dir, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps([{"bbox": [50, 10, 10, 20], "text": "X"}]))
        code, _, err = run(
            capsys, "extract", sheet_dir / "sheet.png", "--text-json", bad,
            "--out", tmp_path / "pred.json",
        )
        assert code == 3
        assert "record 0" in err

    def test_config_file_and_env(self, sheet_dir, tmp_path, capsys, monkeypatch):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"tag_max_dist": 45.0}))
        monkeypatch.setenv("PID_GRAPH_CONFIG", str(cfg))
        code, _, _ = run(
            capsys, "extract", sheet_dir / "sheet.png",
            "--text-json", sheet_dir / "text.json",
            "--out", tmp_path / "pred.json",
        )
        assert code == 0

    def test_jobs_multi_image(self, sheet_dir, tmp_path, capsys):
        code, out, _ = run(
            capsys, "extract", sheet_dir / "sheet.png", sheet_dir / "sheet.png",
            "--text-json", sheet_dir / "text.json",
            "--out", tmp_path / "outdir", "--jobs", 2,
        )
        assert code == 0
        assert (tmp_path / "outdir" / "sheet.result.json").exists()


class TestSynthAndTile:
    def test_synth_corpus(self, tmp_path, capsys):
        code, out, _ = run(
            capsys, "synth", "--seed-start", 0, "--seed-end", 2, "--out", tmp_path / "c"
        )
        assert code == 0
        manifest = json.loads((tmp_path / "c" / "manifest.json").read_text())
        assert len(manifest["sheets"]) == 2

    def test_tile_writes_patches(self, sheet_dir, tmp_path, capsys):
        code, _, _ = run(
            capsys, "tile", sheet_dir / "sheet.png", "--out", tmp_path / "patches",
            "--patch-size", 400,
        )
        assert code == 0
        manifest = json.loads((tmp_path / "patches" / "manifest.json").read_text())
        assert len(manifest) == 6  # 1000x700 at 400 -> 3x2 grid
        assert (tmp_path / "patches" / manifest[0]["file"]).exists()


class TestEval:
    def test_gt_vs_gt_prints_100(self, sheet_dir, tmp_path, capsys):
        code, out, _ = run(
            capsys, "eval", sheet_dir / "gt.json", sheet_dir / "gt.json",
            "--json", tmp_path / "m.json",
        )
        assert code == 0
        assert "Outlet Detection" in out and "100%" in out
        doc = json.loads((tmp_path / "m.json").read_text())
        assert doc["rows"]["outlet_detection"]["accuracy_percent"] == 100.0

    def test_schema_mismatch_exit_3(self, sheet_dir, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"schema": "nope/9"}))
        code, _, _ = run(capsys, "eval", bad, sheet_dir / "gt.json")
        assert code == 3


class TestQuery:
    def test_all_paths(self, sheet_dir, capsys):
        code, out, _ = run(capsys, "query", sheet_dir / "gt.json", "--all")
        assert code == 0
        lines = [l for l in out.splitlines() if l.startswith("outlet")]
        assert len(lines) == 4  # 2 trees x 2 inlets
        assert all("inlet" in l for l in lines)

    def test_single_outlet(self, sheet_dir, capsys):
        code, out, _ = run(capsys, "query", sheet_dir / "gt.json", "--outlet", 0)
        assert code == 0 and "outlet 0" in out

    def test_unknown_outlet_exit_4(self, sheet_dir, capsys):
        code, _, _ = run(capsys, "query", sheet_dir / "gt.json", "--outlet", 42)
        assert code == 4

    def test_all_on_empty_forest_exit_zero(self, tmp_path, capsys):
        img = tmp_path / "blank.png"
        Image.fromarray(np.full((200, 300), 255, np.uint8)).save(img)
        pred = tmp_path / "pred.json"
        assert main(["extract", str(img), "--out", str(pred)]) == 0
        capsys.readouterr()
        code, out, _ = run(capsys, "query", pred, "--all")
        assert code == 0 and out.strip() == ""


class TestOverlay:
    def test_overlay_written_with_same_dims(self, sheet_dir, tmp_path, capsys):
        out_png = tmp_path / "overlay.png"
        code, _, _ = run(capsys, "overlay", sheet_dir / "sheet.png", sheet_dir / "gt.json", out_png)
        assert code == 0
        with Image.open(out_png) as im:
            assert im.size == (1000, 700)

    def test_empty_result_visually_identical_copy(self, tmp_path, capsys):
        img = tmp_path / "blank.png"
        arr = np.full((100, 150), 255, np.uint8)
        Image.fromarray(arr).save(img)
        pred = tmp_path / "pred.json"
        assert main(["extract", str(img), "--out", str(pred)]) == 0
        out_png = tmp_path / "ov.png"
        code, _, _ = run(capsys, "overlay", img, pred, out_png)
        assert code == 0
        with Image.open(out_png) as im:
            assert np.array_equal(np.asarray(im.convert("L")), arr)

    def test_dimension_mismatch_exit_5(self, sheet_dir, tmp_path, capsys):
        img = tmp_path / "small.png"
        Image.fromarray(np.full((50, 60), 255, np.uint8)).save(img)
        code, _, err = run(capsys, "overlay", img, sheet_dir / "gt.json", tmp_path / "o.png")
        assert code == 5
