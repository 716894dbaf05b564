"""Patch tiling and deduplication of word boxes detected on overlapping patches.

Detection runs on square patches with fractional overlap; the boxes coming
back per patch are translated to image coordinates, exact duplicates are
collapsed, and oversized boxes that swallow several real words are removed
by a small-frame scan.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .errors import ValidationError
from .model import Rect, WordBox

DEFAULT_PATCH_SIZE = 512
DEFAULT_OVERLAP = 0.5
DEFAULT_DEDUP_IOU = 0.9
DEFAULT_FRAME_SIZE = 16


def rect_area(r: Rect) -> float:
    return max(0.0, r[2] - r[0]) * max(0.0, r[3] - r[1])


def rect_intersection(a: Rect, b: Rect) -> Rect:
    return (max(a[0], b[0]), max(a[1], b[1]), min(a[2], b[2]), min(a[3], b[3]))


def intersection_area(a: Rect, b: Rect) -> float:
    x0, y0, x1, y1 = rect_intersection(a, b)
    if x1 <= x0 or y1 <= y0:
        return 0.0
    return (x1 - x0) * (y1 - y0)


def iou(a: Rect, b: Rect) -> float:
    inter = intersection_area(a, b)
    if inter <= 0.0:
        return 0.0
    return inter / (rect_area(a) + rect_area(b) - inter)


def rect_contains(outer: Rect, inner: Rect) -> bool:
    return (
        outer[0] <= inner[0]
        and outer[1] <= inner[1]
        and outer[2] >= inner[2]
        and outer[3] >= inner[3]
    )


@dataclass(frozen=True)
class PatchLayout:
    """Square patches covering an image, adjacent ones overlapping by a fixed fraction."""

    patch_size: int
    overlap_fraction: float
    patches: list[Rect]


def _axis_positions(extent: int, patch: int, stride: int) -> list[int]:
    positions = [0]
    while positions[-1] + patch < extent:
        nxt = positions[-1] + stride
        if nxt + patch >= extent:
            nxt = max(extent - patch, 0)
        if nxt == positions[-1]:
            break
        positions.append(nxt)
    return positions


def split_into_patches(
    image_width: int,
    image_height: int,
    patch_size: int = DEFAULT_PATCH_SIZE,
    overlap_fraction: float = DEFAULT_OVERLAP,
) -> PatchLayout:
    """Tile an image with overlapping square patches.

    Patches advance by ``patch_size * (1 - overlap_fraction)`` and the last
    patch per axis is clamped so it ends exactly at the image edge. Images
    smaller than the patch yield a single patch clamped to the image.
    """
    if image_width < 1 or image_height < 1:
        raise ValidationError(f"image must be at least 1x1, got {image_width}x{image_height}")
    if not (0.0 < overlap_fraction < 1.0):
        raise ValidationError(f"overlap_fraction must be in (0, 1), got {overlap_fraction}")
    if patch_size < 1:
        raise ValidationError(f"patch_size must be >= 1, got {patch_size}")

    stride = max(1, round(patch_size * (1.0 - overlap_fraction)))
    xs = _axis_positions(image_width, patch_size, stride)
    ys = _axis_positions(image_height, patch_size, stride)
    patches = [
        (
            float(x),
            float(y),
            float(min(x + patch_size, image_width)),
            float(min(y + patch_size, image_height)),
        )
        for y in ys
        for x in xs
    ]
    return PatchLayout(patch_size=patch_size, overlap_fraction=overlap_fraction, patches=patches)


def merge_patch_detections(
    per_patch_boxes: Sequence[tuple[Rect, Sequence[WordBox]]],
    dedup_iou: float = DEFAULT_DEDUP_IOU,
) -> list[WordBox]:
    """Translate per-patch boxes to image coordinates and collapse duplicates.

    Two boxes with IoU >= ``dedup_iou`` count as the same detection; the
    larger-area one is retained. Output order follows first occurrence and
    ids are reassigned 0..k-1.
    """
    kept: list[WordBox] = []
    for patch, boxes in per_patch_boxes:
        px0, py0, px1, py1 = patch
        pw, ph = px1 - px0, py1 - py0
        for box in boxes:
            if box.x_min < 0 or box.y_min < 0 or box.x_max > pw or box.y_max > ph:
                raise ValidationError(
                    f"word {box.id} lies outside its patch {patch}: {box.bounds}"
                )
            moved = WordBox(
                id=box.id,
                x_min=box.x_min + px0,
                y_min=box.y_min + py0,
                x_max=box.x_max + px0,
                y_max=box.y_max + py0,
                text=box.text,
            )
            for i, existing in enumerate(kept):
                if iou(existing.bounds, moved.bounds) >= dedup_iou:
                    if moved.area > existing.area:
                        kept[i] = moved
                    break
            else:
                kept.append(moved)
    return [
        WordBox(id=i, x_min=b.x_min, y_min=b.y_min, x_max=b.x_max, y_max=b.y_max, text=b.text)
        for i, b in enumerate(kept)
    ]


def _frames_touching(a: Rect, b: Rect, frame_size: int) -> list[Rect]:
    """Frames of the global frame lattice that intersect both rectangles."""
    x0, y0, x1, y1 = rect_intersection(a, b)
    if x1 <= x0 or y1 <= y0:
        return []
    fx0 = int(x0 // frame_size)
    fy0 = int(y0 // frame_size)
    fx1 = int((x1 - 1e-9) // frame_size)
    fy1 = int((y1 - 1e-9) // frame_size)
    return [
        (
            fx * frame_size,
            fy * frame_size,
            (fx + 1) * frame_size,
            (fy + 1) * frame_size,
        )
        for fy in range(fy0, fy1 + 1)
        for fx in range(fx0, fx1 + 1)
    ]


def frame_scan_dedup(boxes: Sequence[WordBox], frame_size: int = DEFAULT_FRAME_SIZE) -> list[WordBox]:
    """Remove the biggest box wherever several boxes cover one frame.

    The image is scanned in ``frame_size`` square windows; a window fully
    covered by two or more boxes marks redundancy (a spurious detection
    swallowing real words), and the largest-area such box is dropped.
    The frame must be smaller than a typical word for coverage to register.
    Removal iterates until no window triggers; survivor order is preserved.
    """
    if frame_size < 1:
        raise ValidationError(f"frame_size must be >= 1, got {frame_size}")
    current = list(boxes)
    while True:
        doomed: set[int] = set()
        for i in range(len(current)):
            for j in range(i + 1, len(current)):
                a, b = current[i], current[j]
                if a.id in doomed or b.id in doomed:
                    continue
                for frame in _frames_touching(a.bounds, b.bounds, frame_size):
                    covering = [
                        w
                        for w in current
                        if w.id not in doomed and rect_contains(w.bounds, frame)
                    ]
                    if len(covering) >= 2:
                        biggest = max(covering, key=lambda w: (w.area, w.id))
                        doomed.add(biggest.id)
                        break
        if not doomed:
            return current
        current = [w for w in current if w.id not in doomed]
