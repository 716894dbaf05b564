"""Adjacency-relation precision/recall/F1 between predicted and true structure.

Cell content is first replaced by unique IDs shared across prediction and
ground truth (matched by normalized text, disambiguated by box overlap), so
OCR noise cannot leak into the structural score. Each non-blank cell then
links to its nearest non-blank neighbor to the right and below -- blanks are
skipped, never link endpoints -- and the two relation sets are compared.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Mapping, Optional, Union

from .geometry import intersection_area
from .model import CellGrid, CellId, GroundTruthTable, Rect

HORIZONTAL = "horizontal"
VERTICAL = "vertical"

_WS = re.compile(r"\s+")


def normalize_text(text: str) -> str:
    return _WS.sub(" ", text).strip().casefold()


@dataclass(frozen=True)
class AdjacencyRelation:
    """Directed nearest-neighbor link between two non-blank cells."""

    from_cell: int
    to_cell: int
    direction: str  # HORIZONTAL | VERTICAL


@dataclass
class TableScore:
    table_id: str
    n_gt: int
    n_pred: int
    n_correct: int
    precision: float
    recall: float
    f1: float
    flags: list[str] = field(default_factory=list)


@dataclass
class EvalReport:
    """Counts and ratios; ``tables`` carries the per-table breakdown."""

    n_gt: int = 0
    n_pred: int = 0
    n_correct: int = 0
    precision: float = 0.0
    recall: float = 0.0
    f1: float = 0.0
    flags: list[str] = field(default_factory=list)
    tables: list[TableScore] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "n_gt": self.n_gt,
            "n_pred": self.n_pred,
            "n_correct": self.n_correct,
            "flags": self.flags,
            "tables": [
                {
                    "table_id": t.table_id,
                    "precision": t.precision,
                    "recall": t.recall,
                    "f1": t.f1,
                    "n_gt": t.n_gt,
                    "n_pred": t.n_pred,
                    "n_correct": t.n_correct,
                    "flags": t.flags,
                }
                for t in self.tables
            ],
        }

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)

    def format_text(self) -> str:
        lines = [
            f"{'table':<28} {'P':>7} {'R':>7} {'F1':>7} {'gt':>5} {'pred':>5} {'ok':>5}",
        ]
        for t in self.tables:
            mark = f"  [{','.join(t.flags)}]" if t.flags else ""
            lines.append(
                f"{t.table_id[:28]:<28} {t.precision:7.4f} {t.recall:7.4f} "
                f"{t.f1:7.4f} {t.n_gt:5d} {t.n_pred:5d} {t.n_correct:5d}{mark}"
            )
        lines.append(
            f"{'TOTAL (micro)':<28} {self.precision:7.4f} {self.recall:7.4f} "
            f"{self.f1:7.4f} {self.n_gt:5d} {self.n_pred:5d} {self.n_correct:5d}"
        )
        return "\n".join(lines)


def _ratios(n_correct: int, n_pred: int, n_gt: int) -> tuple[float, float, float, list[str]]:
    flags = []
    if n_pred > 0:
        precision = n_correct / n_pred
    else:
        precision, flags = 0.0, flags + ["no_predicted_relations"]
    if n_gt > 0:
        recall = n_correct / n_gt
    else:
        recall, flags = 0.0, flags + ["no_ground_truth_relations"]
    f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    return precision, recall, f1, flags


def assign_content_ids(
    pred_grid: CellGrid,
    pred_texts: Mapping[CellId, str],
    truth_grid: CellGrid,
    truth_texts: Mapping[CellId, str],
    pred_boxes: Optional[Mapping[CellId, Rect]] = None,
    truth_boxes: Optional[Mapping[CellId, Rect]] = None,
) -> tuple[dict[CellId, int], dict[CellId, int]]:
    """Give every ground-truth cell a unique content ID and match predictions.

    Matching is by normalized-text equality; among several candidates the
    greatest box overlap wins when geometry is available, reading order
    otherwise. Unmatched predicted cells get fresh IDs that match nothing.
    """
    truth_ids: dict[CellId, int] = {}
    by_text: dict[str, list[CellId]] = {}
    next_id = 0
    for cid in truth_grid.cell_ids():
        truth_ids[cid] = next_id
        by_text.setdefault(normalize_text(truth_texts.get(cid, "")), []).append(cid)
        next_id += 1

    pred_ids: dict[CellId, int] = {}
    taken: set[CellId] = set()
    for cid in pred_grid.cell_ids():
        candidates = [
            t for t in by_text.get(normalize_text(pred_texts.get(cid, "")), []) if t not in taken
        ]
        chosen: Optional[CellId] = None
        if candidates:
            if (
                len(candidates) > 1
                and pred_boxes
                and truth_boxes
                and cid in pred_boxes
                and all(t in truth_boxes for t in candidates)
            ):
                chosen = max(
                    candidates,
                    key=lambda t: (intersection_area(pred_boxes[cid], truth_boxes[t]), -t),
                )
            else:
                chosen = candidates[0]
        if chosen is None:
            pred_ids[cid] = next_id
            next_id += 1
        else:
            taken.add(chosen)
            pred_ids[cid] = truth_ids[chosen]
    return pred_ids, truth_ids


def grid_to_adjacency(grid: CellGrid, ids: Mapping[CellId, int]) -> set[AdjacencyRelation]:
    """Nearest-neighbor links rightward and downward, skipping blanks.

    Duplicate links from spanning cells collapse; no link touches a blank.
    """
    relations: set[AdjacencyRelation] = set()
    for cid, r0, c0, rs, cs in grid.iter_cells():
        for r in range(r0, r0 + rs):
            for c in range(c0 + cs, grid.cols):
                other = grid.slots[r][c]
                if other is not None:
                    relations.add(AdjacencyRelation(ids[cid], ids[other], HORIZONTAL))
                    break
        for c in range(c0, c0 + cs):
            for r in range(r0 + rs, grid.rows):
                other = grid.slots[r][c]
                if other is not None:
                    relations.add(AdjacencyRelation(ids[cid], ids[other], VERTICAL))
                    break
    return relations


def score(
    pred_relations: set[AdjacencyRelation],
    gt_relations: set[AdjacencyRelation],
    table_id: str = "",
) -> EvalReport:
    """Compare relation sets: N_c = |pred ∩ gt|, P = N_c/N_p, R = N_c/N."""
    n_correct = len(pred_relations & gt_relations)
    n_pred = len(pred_relations)
    n_gt = len(gt_relations)
    precision, recall, f1, flags = _ratios(n_correct, n_pred, n_gt)
    table = TableScore(table_id, n_gt, n_pred, n_correct, precision, recall, f1, flags)
    return EvalReport(
        n_gt=n_gt,
        n_pred=n_pred,
        n_correct=n_correct,
        precision=precision,
        recall=recall,
        f1=f1,
        flags=list(flags),
        tables=[table],
    )


TableLike = Union[GroundTruthTable, tuple[CellGrid, Mapping[CellId, str]]]


def _as_grid_texts(table: TableLike) -> tuple[CellGrid, Mapping[CellId, str], Optional[Mapping[CellId, Rect]]]:
    if isinstance(table, GroundTruthTable):
        return table.grid, table.cell_texts, table.cell_boxes or None
    grid, texts = table
    return grid, texts, None


def table_relations(
    pred: TableLike, truth: TableLike
) -> tuple[set[AdjacencyRelation], set[AdjacencyRelation]]:
    """Content-ID substitution plus adjacency extraction for one table pair."""
    pred_grid, pred_texts, pred_boxes = _as_grid_texts(pred)
    truth_grid, truth_texts, truth_boxes = _as_grid_texts(truth)
    pred_ids, truth_ids = assign_content_ids(
        pred_grid, pred_texts, truth_grid, truth_texts, pred_boxes, truth_boxes
    )
    return grid_to_adjacency(pred_grid, pred_ids), grid_to_adjacency(truth_grid, truth_ids)


def evaluate_table(pred: TableLike, truth: TableLike, table_id: str = "") -> EvalReport:
    pred_rel, gt_rel = table_relations(pred, truth)
    return score(pred_rel, gt_rel, table_id=table_id)


def evaluate_corpus(
    pred_tables: Mapping[str, Optional[TableLike]],
    truth_tables: Mapping[str, TableLike],
) -> EvalReport:
    """Micro-averaged report over a corpus, with a per-table breakdown.

    A truth table without a prediction counts as zero predicted relations
    and is flagged in the breakdown.
    """
    report = EvalReport()
    for table_id in truth_tables:
        truth = truth_tables[table_id]
        pred = pred_tables.get(table_id)
        if pred is None:
            truth_grid, truth_texts, _ = _as_grid_texts(truth)
            truth_ids = {cid: i for i, cid in enumerate(truth_grid.cell_ids())}
            gt_rel = grid_to_adjacency(truth_grid, truth_ids)
            p, r, f1, flags = _ratios(0, 0, len(gt_rel))
            entry = TableScore(
                table_id, len(gt_rel), 0, 0, p, r, f1, flags + ["missing_prediction"]
            )
        else:
            single = evaluate_table(pred, truth, table_id=table_id)
            entry = single.tables[0]
        report.tables.append(entry)
        report.n_gt += entry.n_gt
        report.n_pred += entry.n_pred
        report.n_correct += entry.n_correct

    if not truth_tables:
        report.flags.append("empty_corpus")
    precision, recall, f1, flags = _ratios(report.n_correct, report.n_pred, report.n_gt)
    report.precision, report.recall, report.f1 = precision, recall, f1
    report.flags.extend(flags)
    return report
