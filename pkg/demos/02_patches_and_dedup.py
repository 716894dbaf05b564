"""
Patch tiling and detection cleanup
==================================

Text detectors run on square patches with 50% overlap, so the same word is
often found twice and patch seams can produce oversized boxes swallowing
two lines at once. This script shows the tiling geometry, duplicate
merging, and the frame-scan rule that removes the oversized boxes.
"""

from wordgrid import WordBox, frame_scan_dedup, merge_patch_detections, split_into_patches

# Tiling a 1280 x 700 page image with the default 512px / 50% setup.
layout = split_into_patches(1280, 700)
print(f"{len(layout.patches)} patches; first row of patches:")
for patch in layout.patches[:4]:
    print("  ", patch)

# The same word seen by two overlapping patches, in patch-local coordinates.
patch_a = layout.patches[0]
patch_b = layout.patches[1]  # starts at x=256
word_in_a = WordBox(id=0, x_min=300, y_min=40, x_max=360, y_max=62, text="total")
word_in_b = WordBox(id=0, x_min=44, y_min=40, x_max=104, y_max=62, text="total")

merged = merge_patch_detections([(patch_a, [word_in_a]), (patch_b, [word_in_b])])
print(f"\nmerged detections: {len(merged)} box(es) at {merged[0].bounds}")

# A spurious detection spanning two text rows, plus the two correct boxes.
spurious = WordBox(id=0, x_min=10, y_min=10, x_max=200, y_max=64, text=None)
row1 = WordBox(id=1, x_min=10, y_min=10, x_max=200, y_max=32, text="first line")
row2 = WordBox(id=2, x_min=10, y_min=42, x_max=200, y_max=64, text="second line")

cleaned = frame_scan_dedup([spurious, row1, row2], frame_size=16)
print(f"\nafter frame scan: kept ids {[w.id for w in cleaned]} (the big box is gone)")
