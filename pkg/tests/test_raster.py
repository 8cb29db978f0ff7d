import numpy as np
import pytest
from scipy import ndimage

from pidgraph import raster
from pidgraph.geometry import BBox


def exhaustive_otsu(gray):
    """Oracle: sweep every threshold, maximize inter-class variance."""
    vals = gray.ravel().astype(float)
    best_t, best_var = 0, -1.0
    for t in range(1, 256):
        lo = vals[vals < t]
        hi = vals[vals >= t]
        if len(lo) == 0 or len(hi) == 0:
            continue
        w0, w1 = len(lo) / len(vals), len(hi) / len(vals)
        var = w0 * w1 * (lo.mean() - hi.mean()) ** 2
        if var > best_var + 1e-12:
            best_var, best_t = var, t
    return best_t


class TestBinarize:
    def test_uniform_white_is_all_background(self):
        img = np.full((20, 30), 255, np.uint8)
        assert not raster.binarize(img).any()

    def test_uniform_black_is_all_foreground(self):
        img = np.zeros((20, 30), np.uint8)
        assert raster.binarize(img).all()

    def test_bimodal_splits_at_class_boundary(self):
        img = np.full((10, 20), 200, np.uint8)
        img[:, :10] = 50
        out = raster.binarize(img)
        assert out[:, :10].all() and not out[:, 10:].any()
        # threshold agrees with the exhaustive-sweep oracle partition
        t = raster.otsu_threshold(img)
        t_oracle = exhaustive_otsu(img)
        assert (img < t).sum() == (img < t_oracle).sum()

    def test_threshold_matches_sweep_oracle_on_random_images(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            img = rng.integers(0, 256, size=(16, 16)).astype(np.uint8)
            assert raster.otsu_threshold(img) == exhaustive_otsu(img)

    def test_idempotent_through_rendering(self):
        rng = np.random.default_rng(3)
        img = rng.integers(0, 256, size=(24, 24)).astype(np.uint8)
        once = raster.binarize(img)
        again = raster.binarize(raster.render_binary(once))
        assert np.array_equal(once, again)

    def test_zero_area_rejected(self):
        with pytest.raises(raster.DimensionError):
            raster.binarize(np.zeros((0, 5), np.uint8))


def no_2x2_block(img):
    return not (img[:-1, :-1] & img[:-1, 1:] & img[1:, :-1] & img[1:, 1:]).any()


class TestSkeletonize:
    def test_1px_line_unchanged(self):
        img = np.zeros((10, 40), bool)
        img[5, 3:36] = True
        out = raster.skeletonize(img)
        assert np.array_equal(out, img)

    def test_thick_bar_reduces_to_centerline(self):
        img = np.zeros((40, 120), bool)
        img[18:23, 10:110] = True  # 5 px thick, 100 px long
        out = raster.skeletonize(img)
        assert no_2x2_block(out)
        assert ndimage.label(out, raster.STRUCT_8)[1] == 1
        ys, xs = np.nonzero(out)
        assert abs(xs.min() - 10) <= 2 and abs(xs.max() - 109) <= 2
        assert len(np.unique(ys)) == 1  # straight centerline

    def test_empty_image(self):
        img = np.zeros((5, 5), bool)
        assert not raster.skeletonize(img).any()

    def test_width_one_and_connectivity_on_random_blobs(self):
        rng = np.random.default_rng(11)
        for _ in range(25):
            img = np.zeros((60, 60), bool)
            for _ in range(5):
                y, x = rng.integers(4, 50, 2)
                h, w = rng.integers(4, 14, 2)
                img[y : y + h, x : x + w] = True
            out = raster.skeletonize(img)
            assert no_2x2_block(out)
            assert ndimage.label(out, raster.STRUCT_8)[1] == ndimage.label(img, raster.STRUCT_8)[1]
            assert (out & ~img).sum() == 0  # skeleton stays inside the ink


class TestEraseRegions:
    def test_whole_image_box_empties(self):
        img = np.ones((10, 12), bool)
        out = raster.erase_regions(img, [BBox(0, 0, 11, 9)])
        assert not out.any()

    def test_empty_box_list_is_identity(self):
        rng = np.random.default_rng(0)
        img = rng.random((8, 8)) < 0.5
        assert np.array_equal(raster.erase_regions(img, []), img)

    def test_disjoint_box_drops_exact_pixel_count(self):
        rng = np.random.default_rng(1)
        img = rng.random((20, 20)) < 0.4
        box = BBox(3, 4, 8, 9)
        before_inside = img[4:10, 3:9].sum()
        out = raster.erase_regions(img, [box])
        assert img.sum() - out.sum() == before_inside
        assert not out[4:10, 3:9].any()

    def test_never_increases_ink_and_order_irrelevant(self):
        rng = np.random.default_rng(2)
        img = rng.random((30, 30)) < 0.5
        boxes = [BBox(1, 1, 5, 5), BBox(10, 12, 20, 18), BBox(24, 2, 29, 8)]
        a = raster.erase_regions(img, boxes)
        b = raster.erase_regions(img, boxes[::-1])
        assert np.array_equal(a, b)
        assert a.sum() <= img.sum()

    def test_boxes_clipped_to_bounds(self):
        img = np.ones((10, 10), bool)
        out = raster.erase_regions(img, [BBox(-5, -5, 3, 3)])
        assert not out[:4, :4].any() and out[5:, 5:].all()


class TestConnectedComponents:
    def test_two_disjoint_squares(self):
        img = np.zeros((20, 20), bool)
        img[2:6, 2:6] = True
        img[10:15, 10:15] = True
        comps = raster.connected_components(img)
        assert len(comps) == 2
        assert {c.pixel_count for c in comps} == {16, 25}

    def test_empty_image(self):
        assert raster.connected_components(np.zeros((5, 5), bool)) == []

    def test_diagonal_touch_is_one_component(self):
        img = np.zeros((4, 4), bool)
        img[1, 1] = img[2, 2] = True
        assert len(raster.connected_components(img)) == 1

    def test_partition_is_exact(self):
        rng = np.random.default_rng(5)
        img = rng.random((40, 40)) < 0.3
        comps = raster.connected_components(img)
        assert sum(c.pixel_count for c in comps) == img.sum()
        for c in comps:
            sub = img[c.bbox.y0 : c.bbox.y1 + 1, c.bbox.x0 : c.bbox.x1 + 1]
            assert sub.any()

    def test_ids_sequential(self):
        rng = np.random.default_rng(6)
        img = rng.random((30, 30)) < 0.2
        comps = raster.connected_components(img)
        assert [c.id for c in comps] == list(range(len(comps)))


def dilate_oracle(img, k):
    """Oracle: union of all kernel-offset shifts (Minkowski sum)."""
    half = k // 2
    out = np.zeros_like(img)
    h, w = img.shape
    for dy in range(-half, half + 1):
        for dx in range(-half, half + 1):
            src = img[
                max(0, -dy) : h - max(0, dy),
                max(0, -dx) : w - max(0, dx),
            ]
            out[max(0, dy) : h - max(0, -dy), max(0, dx) : w - max(0, -dx)] |= src
    return out


class TestDilate:
    def test_single_pixel_becomes_block(self):
        img = np.zeros((9, 9), bool)
        img[4, 4] = True
        out = raster.dilate(img, 3)
        assert out.sum() == 9 and out[3:6, 3:6].all()

    def test_empty_stays_empty(self):
        assert not raster.dilate(np.zeros((5, 5), bool), 3).any()

    def test_line_thickens(self):
        img = np.zeros((11, 30), bool)
        img[5, 4:26] = True
        out = raster.dilate(img, 3)
        assert np.array_equal(out, dilate_oracle(img, 3))
        assert out[4:7, 5:25].all()

    def test_matches_oracle_on_random_inputs(self):
        rng = np.random.default_rng(9)
        for k in (1, 3, 5):
            img = rng.random((25, 25)) < 0.2
            assert np.array_equal(raster.dilate(img, k), dilate_oracle(img, k))

    def test_monotone(self):
        rng = np.random.default_rng(10)
        img = rng.random((20, 20)) < 0.3
        out = raster.dilate(img, 5)
        assert not (img & ~out).any()

    def test_even_kernel_rejected(self):
        with pytest.raises(ValueError):
            raster.dilate(np.zeros((5, 5), bool), 4)


class TestLoadImage:
    def test_png_roundtrip_gray(self, tmp_path):
        from PIL import Image

        arr = np.arange(200, dtype=np.uint8).reshape(10, 20)
        Image.fromarray(arr).save(tmp_path / "g.png")
        assert np.array_equal(raster.load_image(tmp_path / "g.png"), arr)

    def test_rgb_luma_conversion(self, tmp_path):
        from PIL import Image

        rgb = np.zeros((4, 4, 3), np.uint8)
        rgb[..., 0] = 100
        rgb[..., 1] = 50
        rgb[..., 2] = 200
        Image.fromarray(rgb).save(tmp_path / "c.png")
        expected = round(0.299 * 100 + 0.587 * 50 + 0.114 * 200)
        assert (raster.load_image(tmp_path / "c.png") == expected).all()

    def test_jpeg_accepted(self, tmp_path):
        from PIL import Image

        arr = np.full((16, 16), 128, np.uint8)
        Image.fromarray(arr).save(tmp_path / "g.jpg")
        out = raster.load_image(tmp_path / "g.jpg")
        assert out.shape == (16, 16)
