"""Candidate word-pair generation via immediate left/top neighbor selection.

Each word proposes at most ``n`` left neighbors (words its own band can see
to the left) and ``m`` top neighbors, so the pair count is bounded by
``(m + n) * len(words)`` and generation stays linear in the word count. A
banded spatial index provides the fast path; the naive quadratic scan is
kept behind a flag as the correctness oracle.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Sequence

from .model import WordBox

LEFT = "left"
TOP = "top"

DEFAULT_BAND_OVERLAP = 0.25
DEFAULT_EDGE_SLACK = 0.2


@dataclass(frozen=True)
class PairGenConfig:
    """Per-word neighbor budgets; defaults follow the tuned value of 3."""

    m: int = 3  # top-neighbor budget
    n: int = 3  # left-neighbor budget
    band_overlap: float = DEFAULT_BAND_OVERLAP
    edge_slack: float = DEFAULT_EDGE_SLACK

    def __post_init__(self) -> None:
        if self.m < 1 or self.n < 1:
            raise ValueError(f"budgets must be >= 1, got m={self.m}, n={self.n}")


@dataclass(frozen=True)
class WordPair:
    """Ordered candidate pair: anchor ``a`` with neighbor ``b`` to its left/top."""

    a: int
    b: int
    direction: str  # LEFT | TOP


def _v_overlap(a: WordBox, b: WordBox) -> float:
    return min(a.y_max, b.y_max) - max(a.y_min, b.y_min)


def _h_overlap(a: WordBox, b: WordBox) -> float:
    return min(a.x_max, b.x_max) - max(a.x_min, b.x_min)


def _left_candidate(anchor: WordBox, w: WordBox, band_overlap: float, edge_slack: float) -> bool:
    if w.id == anchor.id:
        return False
    overlap = _v_overlap(anchor, w)
    if overlap < band_overlap * min(anchor.height, w.height):
        return False
    if w.x_max > anchor.x_min + edge_slack * anchor.width:
        return False
    return w.center_x <= anchor.center_x


def _top_candidate(anchor: WordBox, w: WordBox, band_overlap: float, edge_slack: float) -> bool:
    if w.id == anchor.id:
        return False
    overlap = _h_overlap(anchor, w)
    if overlap < band_overlap * min(anchor.width, w.width):
        return False
    if w.y_max > anchor.y_min + edge_slack * anchor.height:
        return False
    return w.center_y <= anchor.center_y


def left_neighbors(
    anchor: WordBox,
    words: Iterable[WordBox],
    n: int,
    band_overlap: float = DEFAULT_BAND_OVERLAP,
    edge_slack: float = DEFAULT_EDGE_SLACK,
) -> list[WordBox]:
    """Up to ``n`` words visible to the anchor's left, nearest gap first.

    Visibility needs vertical-extent overlap of at least ``band_overlap`` of
    the shorter box and the candidate's right edge at or left of the anchor's
    left edge (plus a slack of ``edge_slack`` of the anchor width, admitting
    slight overlaps from skew). Gap ties break by lower id.
    """
    found = [w for w in words if _left_candidate(anchor, w, band_overlap, edge_slack)]
    found.sort(key=lambda w: (anchor.x_min - w.x_max, w.id))
    return found[:n]


def top_neighbors(
    anchor: WordBox,
    words: Iterable[WordBox],
    m: int,
    band_overlap: float = DEFAULT_BAND_OVERLAP,
    edge_slack: float = DEFAULT_EDGE_SLACK,
) -> list[WordBox]:
    """Mirror of :func:`left_neighbors` with the axes swapped."""
    found = [w for w in words if _top_candidate(anchor, w, band_overlap, edge_slack)]
    found.sort(key=lambda w: (anchor.y_min - w.y_max, w.id))
    return found[:m]


class _BandIndex:
    """Buckets words by coordinate bands so neighbor queries stay local."""

    def __init__(self, words: Sequence[WordBox]) -> None:
        heights = sorted(w.height for w in words)
        widths = sorted(w.width for w in words)
        self.band_h = max(1.0, heights[len(heights) // 2]) if heights else 1.0
        self.band_w = max(1.0, widths[len(widths) // 2]) if widths else 1.0
        self.by_row: dict[int, list[WordBox]] = defaultdict(list)
        self.by_col: dict[int, list[WordBox]] = defaultdict(list)
        for w in words:
            for band in range(int(w.y_min // self.band_h), int(w.y_max // self.band_h) + 1):
                self.by_row[band].append(w)
            for band in range(int(w.x_min // self.band_w), int(w.x_max // self.band_w) + 1):
                self.by_col[band].append(w)

    def row_mates(self, anchor: WordBox) -> list[WordBox]:
        out: dict[int, WordBox] = {}
        for band in range(int(anchor.y_min // self.band_h), int(anchor.y_max // self.band_h) + 1):
            for w in self.by_row.get(band, ()):
                out[w.id] = w
        return list(out.values())

    def col_mates(self, anchor: WordBox) -> list[WordBox]:
        out: dict[int, WordBox] = {}
        for band in range(int(anchor.x_min // self.band_w), int(anchor.x_max // self.band_w) + 1):
            for w in self.by_col.get(band, ()):
                out[w.id] = w
        return list(out.values())


def generate_pairs(
    words: Sequence[WordBox],
    config: PairGenConfig = PairGenConfig(),
    naive: bool = False,
) -> list[WordPair]:
    """Candidate pairs for every word: its left and top neighbors.

    Symmetric duplicates in the same direction are emitted once, keeping the
    instance whose neighbor precedes the anchor in reading order; since both
    instances can only arise when the relevant centers tie, precedence falls
    to the lower-id neighbor. Output is sorted by (anchor id, direction,
    neighbor rank) and never exceeds ``(m + n) * len(words)`` pairs.
    """
    if not words:
        return []
    index = None if naive else _BandIndex(words)

    chosen: dict[tuple[str, frozenset[int]], tuple[int, str, int, int]] = {}
    anchors = sorted(words, key=lambda w: w.id)
    for anchor in anchors:
        left_pool = words if naive else index.row_mates(anchor)
        top_pool = words if naive else index.col_mates(anchor)
        for direction, neighbors in (
            (LEFT, left_neighbors(anchor, left_pool, config.n, config.band_overlap, config.edge_slack)),
            (TOP, top_neighbors(anchor, top_pool, config.m, config.band_overlap, config.edge_slack)),
        ):
            for rank, nb in enumerate(neighbors):
                key = (direction, frozenset((anchor.id, nb.id)))
                entry = (anchor.id, direction, rank, nb.id)
                if key not in chosen or nb.id < anchor.id:
                    chosen[key] = entry

    ordered = sorted(chosen.values())
    return [WordPair(a=a, b=b, direction=d) for a, d, _, b in ordered]
