import random

import pytest

from wordgrid.errors import ValidationError
from wordgrid.geometry import (
    frame_scan_dedup,
    iou,
    merge_patch_detections,
    split_into_patches,
)
from wordgrid.model import WordBox


def box(i, x0, y0, x1, y1):
    return WordBox(id=i, x_min=x0, y_min=y0, x_max=x1, y_max=y1)


class TestSplitIntoPatches:
    def test_wide_image_stride_positions(self):
        layout = split_into_patches(1024, 512, 512, 0.5)
        xs = sorted({p[0] for p in layout.patches})
        assert xs == [0, 256, 512]
        assert all(p[1] == 0 for p in layout.patches)
        assert len(layout.patches) == 3

    def test_image_equals_patch(self):
        layout = split_into_patches(512, 512, 512, 0.5)
        assert layout.patches == [(0.0, 0.0, 512.0, 512.0)]

    def test_last_patch_clamped_to_edge(self):
        layout = split_into_patches(600, 512, 512, 0.5)
        xs = sorted({p[0] for p in layout.patches})
        assert xs == [0, 88]
        assert max(p[2] for p in layout.patches) == 600

    def test_small_image_single_clamped_patch(self):
        layout = split_into_patches(300, 200, 512, 0.5)
        assert layout.patches == [(0.0, 0.0, 300.0, 200.0)]

    def test_full_coverage(self):
        rng = random.Random(0)
        for _ in range(50):
            w = rng.randint(1, 2000)
            h = rng.randint(1, 2000)
            layout = split_into_patches(w, h, 512, 0.5)
            # greedily verify every point of a sample lattice is covered
            for px in range(0, w, 37):
                for py in range(0, h, 37):
                    assert any(
                        x0 <= px < x1 and y0 <= py < y1 for x0, y0, x1, y1 in layout.patches
                    ), (w, h, px, py)

    def test_invalid_inputs(self):
        with pytest.raises(ValidationError):
            split_into_patches(0, 10)
        with pytest.raises(ValidationError):
            split_into_patches(10, 10, 512, 1.0)


class TestMergePatchDetections:
    def test_exact_duplicate_collapsed(self):
        patch_a = (0.0, 0.0, 512.0, 512.0)
        patch_b = (256.0, 0.0, 768.0, 512.0)
        word_a = box(0, 300, 10, 350, 30)          # image coords via patch_a
        word_b = box(0, 44, 10, 94, 30)            # same region via patch_b
        merged = merge_patch_detections([(patch_a, [word_a]), (patch_b, [word_b])])
        assert len(merged) == 1

    def test_disjoint_words_kept(self):
        patch_a = (0.0, 0.0, 512.0, 512.0)
        patch_b = (256.0, 0.0, 768.0, 512.0)
        merged = merge_patch_detections(
            [(patch_a, [box(0, 10, 10, 60, 30)]), (patch_b, [box(0, 400, 10, 460, 30)])]
        )
        assert len(merged) == 2
        assert [w.id for w in merged] == [0, 1]

    def test_high_iou_keeps_larger(self):
        # (0,0,100,20) vs (0,0,100,21): IoU = 2000/2100 ~ 0.952
        a = box(0, 0, 0, 100, 20)
        b = box(1, 0, 0, 100, 21)
        assert iou(a.bounds, b.bounds) == pytest.approx(2000 / 2100)
        merged = merge_patch_detections([((0.0, 0.0, 512.0, 512.0), [a, b])])
        assert len(merged) == 1
        assert merged[0].y_max == 21

    def test_box_outside_patch_rejected(self):
        with pytest.raises(ValidationError):
            merge_patch_detections([((0.0, 0.0, 100.0, 100.0), [box(0, 50, 50, 150, 80)])])

    def test_never_invents_boxes(self):
        patch = (100.0, 200.0, 612.0, 712.0)
        originals = [box(i, 10 * i, 5, 10 * i + 8, 25) for i in range(5)]
        merged = merge_patch_detections([(patch, originals)])
        translated = {(w.x_min + 100, w.y_min + 200, w.x_max + 100, w.y_max + 200) for w in originals}
        assert all(w.bounds in translated for w in merged)


class TestFrameScanDedup:
    def test_spurious_double_row_box_removed(self):
        # one oversized box swallowing two correct single-row boxes
        big = box(0, 0, 0, 100, 44)
        row1 = box(1, 0, 0, 100, 18)
        row2 = box(2, 0, 26, 100, 44)
        result = frame_scan_dedup([big, row1, row2], frame_size=16)
        assert [w.id for w in result] == [1, 2]

    def test_non_overlapping_unchanged(self):
        boxes = [box(0, 0, 0, 40, 20), box(1, 60, 0, 100, 20), box(2, 0, 40, 40, 60)]
        assert frame_scan_dedup(boxes) == boxes

    def test_single_box_unchanged(self):
        boxes = [box(0, 5, 5, 50, 25)]
        assert frame_scan_dedup(boxes) == boxes

    def test_slightly_overlapping_neighbors_survive(self):
        a = box(0, 0, 0, 50, 20)
        b = box(1, 45, 0, 100, 20)
        assert frame_scan_dedup([a, b]) == [a, b]

    def test_idempotent(self):
        rng = random.Random(1)
        for _ in range(25):
            boxes = []
            for i in range(rng.randint(1, 12)):
                x0 = rng.uniform(0, 300)
                y0 = rng.uniform(0, 120)
                boxes.append(box(i, x0, y0, x0 + rng.uniform(5, 120), y0 + rng.uniform(5, 40)))
            once = frame_scan_dedup(boxes)
            assert frame_scan_dedup(once) == once

    def test_output_subset_preserving_order(self):
        rng = random.Random(2)
        for _ in range(25):
            boxes = []
            for i in range(rng.randint(1, 10)):
                x0 = rng.uniform(0, 200)
                y0 = rng.uniform(0, 80)
                boxes.append(box(i, x0, y0, x0 + rng.uniform(5, 90), y0 + rng.uniform(5, 30)))
            result = frame_scan_dedup(boxes)
            ids = [w.id for w in result]
            assert ids == sorted(ids)
            assert set(ids) <= {w.id for w in boxes}
