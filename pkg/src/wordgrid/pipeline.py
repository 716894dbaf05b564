"""End-to-end per-table reconstruction wiring the stages together.

The single-shot path and the stage-wise path (pairs file -> labels file ->
reconstruction) run the same code, so both produce byte-identical HTML for
identical inputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

from PIL import Image

from .errors import TransportError, ValidationError
from .ingest import assign_words_to_cells
from .model import CellGrid, GroundTruthTable, WordBox
from .pairgen import PairGenConfig, WordPair, generate_pairs
from .relations import (
    HeuristicClassifier,
    LabeledPair,
    RemoteClassifier,
    label_pairs_oracle,
)
from .structure import Cell, emit_html, resolve_structure, structure_to_json

ORACLE = "oracle"
HEURISTIC = "heuristic"
REMOTE = "remote"

FALLBACK_FAIL = "fail"
FALLBACK_HEURISTIC = "heuristic"


@dataclass
class PipelineConfig:
    classifier: str = HEURISTIC
    remote_endpoint: Optional[str] = None
    fallback: str = FALLBACK_FAIL
    pair_m: int = 3
    pair_n: int = 3
    patch_size: int = 512
    overlap: float = 0.5
    frame_size: int = 16
    repair: bool = False
    workers: int = 1

    def __post_init__(self) -> None:
        if self.classifier not in (ORACLE, HEURISTIC, REMOTE):
            raise ValidationError(f"unknown classifier {self.classifier!r}")
        if self.fallback not in (FALLBACK_FAIL, FALLBACK_HEURISTIC):
            raise ValidationError(f"unknown fallback policy {self.fallback!r}")
        if self.classifier == REMOTE and not self.remote_endpoint:
            raise ValidationError("classifier 'remote' requires remote_endpoint")

    @property
    def pair_config(self) -> PairGenConfig:
        return PairGenConfig(m=self.pair_m, n=self.pair_n)


@dataclass
class ReconstructionResult:
    cells: list[Cell]
    grid: CellGrid
    texts: dict[int, str]
    html: str
    structure: dict = field(default_factory=dict)


def _truth_for_words(truth: GroundTruthTable, words: Sequence[WordBox]) -> GroundTruthTable:
    """Ground truth whose word_cells covers exactly these words.

    Reuses the table's own assignment when the words are its word boxes;
    otherwise assigns by maximal cell-box overlap (external detections).
    """
    if truth.word_cells and truth.word_boxes:
        own = {w.id: w.bounds for w in truth.word_boxes}
        if all(w.id in truth.word_cells and own.get(w.id) == w.bounds for w in words):
            return truth
    return replace(truth, word_boxes=list(words), word_cells=assign_words_to_cells(words, truth))


def classify_pairs(
    words: Sequence[WordBox],
    pairs: Sequence[WordPair],
    config: PipelineConfig,
    truth: Optional[GroundTruthTable] = None,
    image: Optional[Image.Image] = None,
) -> list[LabeledPair]:
    """Label candidate pairs with the configured classifier route."""
    if config.classifier == ORACLE:
        if truth is None:
            raise ValidationError("oracle classifier requires ground truth")
        return label_pairs_oracle(pairs, _truth_for_words(truth, words))
    if config.classifier == HEURISTIC:
        clf = HeuristicClassifier(words)
        return [clf.classify(p) for p in pairs]
    if image is None:
        raise ValidationError("remote classifier requires the table image")
    try:
        client = RemoteClassifier(config.remote_endpoint)
        if not pairs:
            return []
        return client.classify_pairs(pairs, image, words)
    except TransportError:
        if config.fallback == FALLBACK_HEURISTIC:
            clf = HeuristicClassifier(words)
            return [clf.classify(p) for p in pairs]
        raise


def reconstruct_from_labels(
    words: Sequence[WordBox],
    labeled: Sequence[LabeledPair],
    config: PipelineConfig = PipelineConfig(),
) -> ReconstructionResult:
    cells, grid = resolve_structure(words, labeled, repair=config.repair)
    texts = {cell.id: cell.text for cell in cells}
    html = emit_html(grid, texts)
    return ReconstructionResult(
        cells=cells,
        grid=grid,
        texts=texts,
        html=html,
        structure=structure_to_json(grid, texts),
    )


def reconstruct_table(
    words: Sequence[WordBox],
    config: PipelineConfig = PipelineConfig(),
    truth: Optional[GroundTruthTable] = None,
    image: Optional[Image.Image] = None,
) -> ReconstructionResult:
    """Pairs, labels, cells, grid, HTML in one call."""
    pairs = generate_pairs(words, config.pair_config)
    labeled = classify_pairs(words, pairs, config, truth=truth, image=image)
    return reconstruct_from_labels(words, labeled, config)
