"""Pairwise spatial association of words: the 4-label contract and classifiers.

Three classifier routes share one output shape:

* :func:`oracle_classify` reads labels straight from ground truth (confidence
  1.0); it exists so downstream reconstruction can be tested in isolation.
* :class:`HeuristicClassifier` is a non-learned geometric baseline.
* :class:`RemoteClassifier` renders pair images and defers to a service over
  the JSON/HTTP wire protocol.
"""

from __future__ import annotations

import base64
import io
import json
import random
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence, Union

import requests
from PIL import Image, ImageDraw

from .errors import ProtocolError, TransportError, UnassignedWordError, ValidationError
from .ingest import assign_words_to_cells
from .model import GroundTruthTable, WordBox
from .pairgen import DEFAULT_BAND_OVERLAP, PairGenConfig, WordPair, generate_pairs

PAIR_IMAGE_SIZE = 224
HIGHLIGHT_COLOR = (255, 0, 0)


class RelationLabel(str, Enum):
    SAME_ROW = "same_row"
    SAME_COLUMN = "same_column"
    SAME_CELL = "same_cell"
    NONE = "none"


WIRE_LABELS = {label.value: label for label in RelationLabel}


@dataclass(frozen=True)
class LabeledPair:
    pair: WordPair
    label: RelationLabel
    confidence: float = 1.0


def _require_assignment(truth: GroundTruthTable, word_id: int) -> int:
    if not truth.word_cells:
        raise UnassignedWordError("ground truth has no word-to-cell assignment")
    try:
        return truth.word_cells[word_id]
    except KeyError:
        raise UnassignedWordError(f"word {word_id} has no cell assignment") from None


def oracle_classify(pair: WordPair, truth: GroundTruthTable) -> RelationLabel:
    """Label a pair from ground truth.

    SameCell when both words map to one cell; otherwise SameRow / SameColumn
    when the two cells' row / column index sets intersect (a spanning cell's
    set covers every slot it occupies); NoRelation otherwise.
    """
    cell_a = _require_assignment(truth, pair.a)
    cell_b = _require_assignment(truth, pair.b)
    if cell_a == cell_b:
        return RelationLabel.SAME_CELL
    if truth.grid.cell_rows(cell_a) & truth.grid.cell_rows(cell_b):
        return RelationLabel.SAME_ROW
    if truth.grid.cell_cols(cell_a) & truth.grid.cell_cols(cell_b):
        return RelationLabel.SAME_COLUMN
    return RelationLabel.NONE


def label_pairs_oracle(
    pairs: Iterable[WordPair], truth: GroundTruthTable
) -> list[LabeledPair]:
    return [LabeledPair(pair=p, label=oracle_classify(p, truth), confidence=1.0) for p in pairs]


class HeuristicClassifier:
    """Geometric baseline: extent overlap for row/column, gap for same-cell.

    Thresholds: row/column need extent overlap of at least ``row_overlap`` /
    ``col_overlap`` of the shorter box (matching the proposal band, so every
    candidate the pair generator saw as a neighbor is recognized); same-cell
    needs an edge gap below ``cell_gap_factor`` x the table's median word
    height on one axis plus alignment on the other.
    """

    def __init__(
        self,
        words: Sequence[WordBox],
        row_overlap: float = DEFAULT_BAND_OVERLAP,
        col_overlap: float = DEFAULT_BAND_OVERLAP,
        cell_gap_factor: float = 0.6,
    ) -> None:
        self._by_id = {w.id: w for w in words}
        heights = sorted(w.height for w in words)
        self.median_height = heights[len(heights) // 2] if heights else 1.0
        self.row_overlap = row_overlap
        self.col_overlap = col_overlap
        self.cell_gap = cell_gap_factor * self.median_height

    def classify(self, pair: WordPair) -> LabeledPair:
        a = self._by_id[pair.a]
        b = self._by_id[pair.b]
        v_ratio = max(0.0, min(a.y_max, b.y_max) - max(a.y_min, b.y_min)) / min(a.height, b.height)
        h_ratio = max(0.0, min(a.x_max, b.x_max) - max(a.x_min, b.x_min)) / min(a.width, b.width)
        v_ratio = min(1.0, v_ratio)
        h_ratio = min(1.0, h_ratio)
        h_gap = max(b.x_min - a.x_max, a.x_min - b.x_max)
        v_gap = max(b.y_min - a.y_max, a.y_min - b.y_max)

        if v_ratio >= self.row_overlap and h_gap <= self.cell_gap:
            return LabeledPair(pair, RelationLabel.SAME_CELL, v_ratio)
        if h_ratio >= self.col_overlap and v_gap <= self.cell_gap:
            return LabeledPair(pair, RelationLabel.SAME_CELL, h_ratio)
        if v_ratio >= self.row_overlap:
            return LabeledPair(pair, RelationLabel.SAME_ROW, v_ratio)
        if h_ratio >= self.col_overlap:
            return LabeledPair(pair, RelationLabel.SAME_COLUMN, h_ratio)
        return LabeledPair(pair, RelationLabel.NONE, 1.0 - max(v_ratio, h_ratio))


def heuristic_classify(
    pair: WordPair, all_words: Sequence[WordBox], **thresholds
) -> LabeledPair:
    """One-shot form of :class:`HeuristicClassifier` for a single pair."""
    return HeuristicClassifier(all_words, **thresholds).classify(pair)


def _words_by_id(words: Union[Sequence[WordBox], Mapping[int, WordBox]]) -> Mapping[int, WordBox]:
    if isinstance(words, Mapping):
        return words
    return {w.id: w for w in words}


def render_pair_image(
    table_image: Image.Image,
    pair: WordPair,
    words: Union[Sequence[WordBox], Mapping[int, WordBox]],
    canvas_size: int = PAIR_IMAGE_SIZE,
) -> Image.Image:
    """Render the table into a square canvas with the pair as solid red boxes.

    The table is scaled preserving aspect ratio and centered with padding, so
    relative spatial layout is undistorted; the two word regions are filled
    solid, fully occluding any glyphs beneath. Identical inputs produce
    byte-identical output.
    """
    by_id = _words_by_id(words)
    box_a = by_id[pair.a]
    box_b = by_id[pair.b]
    width, height = table_image.size
    for box in (box_a, box_b):
        if box.x_min < 0 or box.y_min < 0 or box.x_max > width or box.y_max > height:
            raise ValidationError(f"word {box.id} lies outside the table image")

    scale = canvas_size / max(width, height)
    new_w = max(1, round(width * scale))
    new_h = max(1, round(height * scale))
    offset_x = (canvas_size - new_w) // 2
    offset_y = (canvas_size - new_h) // 2

    canvas = Image.new("RGB", (canvas_size, canvas_size), "white")
    canvas.paste(table_image.convert("RGB").resize((new_w, new_h), Image.BILINEAR), (offset_x, offset_y))

    draw = ImageDraw.Draw(canvas)
    for box in (box_a, box_b):
        x0 = offset_x + round(box.x_min * scale)
        y0 = offset_y + round(box.y_min * scale)
        x1 = offset_x + max(round(box.x_max * scale) - 1, round(box.x_min * scale))
        y1 = offset_y + max(round(box.y_max * scale) - 1, round(box.y_min * scale))
        draw.rectangle((x0, y0, x1, y1), fill=HIGHLIGHT_COLOR)
    return canvas


def encode_pair_image(image: Image.Image) -> str:
    buf = io.BytesIO()
    image.save(buf, format="PNG")
    return base64.b64encode(buf.getvalue()).decode("ascii")


class RemoteClassifier:
    """Client for the pair-classification wire protocol.

    ``POST {endpoint}/classify`` with ``{"pairs": [{"image_png_base64": ...}]}``
    answers ``{"labels": [{"label": ..., "confidence": ...}]}`` in request
    order; ``GET {endpoint}/healthz`` reports service status.
    """

    def __init__(
        self,
        endpoint: str,
        timeout: float = 30.0,
        batch_size: int = 32,
        session: Optional[requests.Session] = None,
    ) -> None:
        self.endpoint = endpoint.rstrip("/")
        self.timeout = timeout
        self.batch_size = batch_size
        self.session = session or requests.Session()

    def health(self) -> dict:
        try:
            resp = self.session.get(f"{self.endpoint}/healthz", timeout=self.timeout)
        except requests.RequestException as exc:
            raise TransportError(f"health check failed: {exc}") from exc
        if resp.status_code != 200:
            raise TransportError(f"health check returned HTTP {resp.status_code}")
        try:
            return resp.json()
        except ValueError as exc:
            raise ProtocolError(f"health response is not JSON: {exc}") from exc

    def classify_images(self, images: Sequence[Image.Image]) -> list[tuple[RelationLabel, float]]:
        """Classify rendered pair images, preserving order across batches."""
        out: list[tuple[RelationLabel, float]] = []
        for start in range(0, len(images), self.batch_size):
            batch = images[start : start + self.batch_size]
            payload = {"pairs": [{"image_png_base64": encode_pair_image(img)} for img in batch]}
            try:
                resp = self.session.post(
                    f"{self.endpoint}/classify", json=payload, timeout=self.timeout
                )
            except requests.RequestException as exc:
                raise TransportError(f"classify request failed: {exc}") from exc
            if resp.status_code != 200:
                raise TransportError(f"classify returned HTTP {resp.status_code}")
            try:
                body = resp.json()
            except ValueError as exc:
                raise ProtocolError(f"classify response is not JSON: {exc}") from exc
            labels = body.get("labels") if isinstance(body, dict) else None
            if not isinstance(labels, list):
                raise ProtocolError("classify response missing 'labels' array")
            if len(labels) != len(batch):
                raise ProtocolError(
                    f"classify returned {len(labels)} labels for a batch of {len(batch)}"
                )
            for item in labels:
                if not isinstance(item, dict) or "label" not in item:
                    raise ProtocolError(f"malformed label entry: {item!r}")
                name = item["label"]
                if name not in WIRE_LABELS:
                    raise ProtocolError(f"unknown label string: {name!r}")
                confidence = item.get("confidence", 1.0)
                if not isinstance(confidence, (int, float)):
                    raise ProtocolError(f"malformed confidence: {confidence!r}")
                out.append((WIRE_LABELS[name], float(confidence)))
        return out

    def classify_pairs(
        self,
        pairs: Sequence[WordPair],
        table_image: Image.Image,
        words: Union[Sequence[WordBox], Mapping[int, WordBox]],
    ) -> list[LabeledPair]:
        if not pairs:
            raise ValidationError("classify_pairs needs a nonempty batch")
        images = [render_pair_image(table_image, p, words) for p in pairs]
        results = self.classify_images(images)
        return [
            LabeledPair(pair=p, label=label, confidence=conf)
            for p, (label, conf) in zip(pairs, results)
        ]


def remote_classify(
    pairs: Sequence[WordPair],
    table_image: Image.Image,
    words: Union[Sequence[WordBox], Mapping[int, WordBox]],
    endpoint: str,
    **client_kwargs,
) -> list[LabeledPair]:
    """One-shot remote classification of a pair batch (order preserved)."""
    return RemoteClassifier(endpoint, **client_kwargs).classify_pairs(pairs, table_image, words)


@dataclass
class ExportSummary:
    """What an export run produced: record counts plus skipped-table warnings."""

    records: int = 0
    by_label: Counter = field(default_factory=Counter)
    hard: int = 0
    simple: int = 0
    skipped_tables: int = 0
    manifest_path: str = ""


def _is_hard(
    labeled: LabeledPair,
    truth: GroundTruthTable,
    words_by_id: Mapping[int, WordBox],
    median_height: float,
    cell_gap_factor: float,
    none_gap_factor: float,
) -> bool:
    a = words_by_id[labeled.pair.a]
    b = words_by_id[labeled.pair.b]
    gap = max(b.x_min - a.x_max, a.x_min - b.x_max, b.y_min - a.y_max, a.y_min - b.y_max)
    if labeled.label in (RelationLabel.SAME_ROW, RelationLabel.SAME_COLUMN):
        ca = truth.word_cells[labeled.pair.a]
        cb = truth.word_cells[labeled.pair.b]
        if labeled.label is RelationLabel.SAME_ROW:
            return truth.grid.cell_rows(ca) != truth.grid.cell_rows(cb)
        return truth.grid.cell_cols(ca) != truth.grid.cell_cols(cb)
    if labeled.label is RelationLabel.SAME_CELL:
        return gap > cell_gap_factor * median_height
    return gap < none_gap_factor * median_height


def _nearby_unproposed_pairs(
    words: Sequence[WordBox], proposed: Sequence[WordPair], per_word: int
) -> list[WordPair]:
    """Nearest word pairs the neighbor rule skipped (diagonal-ish contacts).

    These are the classifier's unrelated-but-close cases; without them the
    exported classes never include the fourth label on clean corpora.
    """
    seen = {frozenset((p.a, p.b)) for p in proposed}
    out: list[WordPair] = []
    for anchor in words:
        ranked = sorted(
            (w for w in words if w.id != anchor.id),
            key=lambda w: (abs(w.center_x - anchor.center_x) + abs(w.center_y - anchor.center_y), w.id),
        )
        added = 0
        for w in ranked:
            if added >= per_word:
                break
            key = frozenset((anchor.id, w.id))
            if key in seen:
                continue
            seen.add(key)
            if abs(w.center_x - anchor.center_x) >= abs(w.center_y - anchor.center_y):
                a, b = (anchor, w) if w.center_x <= anchor.center_x else (w, anchor)
                out.append(WordPair(a=a.id, b=b.id, direction="left"))
            else:
                a, b = (anchor, w) if w.center_y <= anchor.center_y else (w, anchor)
                out.append(WordPair(a=a.id, b=b.id, direction="top"))
            added += 1
    return out


def export_training_pairs(
    truth_tables: Sequence[GroundTruthTable],
    images: Mapping[str, Union[Image.Image, str, Path]],
    out_dir: Union[str, Path],
    balance: float = 0.5,
    seed: int = 0,
    pair_config: PairGenConfig = PairGenConfig(),
    hard_cell_gap_factor: float = 1.0,
    hard_none_gap_factor: float = 2.0,
    negatives_per_word: int = 2,
) -> ExportSummary:
    """Render labeled pair images and write a JSONL manifest.

    ``balance`` is the fraction of hard cases in the output (span-crossing
    row/column pairs, far-apart same-cell pairs, near-miss unrelated pairs);
    the rest are simple cases, sampled to the requested proportion. Tables
    without word boxes or without an image are skipped and counted.
    """
    if not (0.0 <= balance <= 1.0):
        raise ValidationError(f"balance must be in [0, 1], got {balance}")
    out_path = Path(out_dir)
    image_dir = out_path / "images"
    image_dir.mkdir(parents=True, exist_ok=True)

    summary = ExportSummary()
    hard_pool: list[tuple[GroundTruthTable, Image.Image, LabeledPair]] = []
    simple_pool: list[tuple[GroundTruthTable, Image.Image, LabeledPair]] = []

    for table in truth_tables:
        words = table.word_boxes
        if not words or table.table_id not in images:
            summary.skipped_tables += 1
            continue
        if table.word_cells is None:
            table.word_cells = assign_words_to_cells(words, table)
        image = images[table.table_id]
        if not isinstance(image, Image.Image):
            image = Image.open(image)

        by_id = {w.id: w for w in words}
        heights = sorted(w.height for w in words)
        median_height = heights[len(heights) // 2]
        pairs = generate_pairs(words, pair_config)
        pairs = pairs + _nearby_unproposed_pairs(words, pairs, negatives_per_word)
        for pair in pairs:
            if pair.a not in table.word_cells or pair.b not in table.word_cells:
                continue
            labeled = LabeledPair(pair, oracle_classify(pair, table), 1.0)
            bucket = (
                hard_pool
                if _is_hard(labeled, table, by_id, median_height, hard_cell_gap_factor, hard_none_gap_factor)
                else simple_pool
            )
            bucket.append((table, image, labeled))

    rng = random.Random(seed)
    if balance >= 1.0:
        take_hard, take_simple = len(hard_pool), 0
    elif balance <= 0.0:
        take_hard, take_simple = 0, len(simple_pool)
    else:
        total = min(int(len(hard_pool) / balance), int(len(simple_pool) / (1.0 - balance)))
        take_hard = min(len(hard_pool), round(balance * total))
        take_simple = min(len(simple_pool), total - take_hard)
    selected = [(item, True) for item in rng.sample(hard_pool, take_hard)]
    selected += [(item, False) for item in rng.sample(simple_pool, take_simple)]
    selected.sort(key=lambda s: (s[0][0].table_id, s[0][2].pair.a, s[0][2].pair.b, s[0][2].pair.direction))

    manifest_path = out_path / "manifest.jsonl"
    with manifest_path.open("w", encoding="utf-8") as fh:
        for (table, image, labeled), is_hard in selected:
            name = f"{table.table_id or 'table'}_{labeled.pair.a}_{labeled.pair.b}_{labeled.pair.direction}.png"
            rendered = render_pair_image(image, labeled.pair, table.word_boxes)
            rendered.save(image_dir / name)
            fh.write(
                json.dumps(
                    {
                        "image": str(Path("images") / name),
                        "label": labeled.label.value,
                        "table_id": table.table_id,
                        "a": labeled.pair.a,
                        "b": labeled.pair.b,
                        "hard": is_hard,
                    }
                )
                + "\n"
            )
            summary.records += 1
            summary.by_label[labeled.label.value] += 1
            if is_hard:
                summary.hard += 1
            else:
                summary.simple += 1
    summary.manifest_path = str(manifest_path)
    return summary
