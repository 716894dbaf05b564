"""Table structure recovery from word bounding boxes.

Pipeline: word boxes -> candidate neighbor pairs -> pairwise spatial
relation labels (same row / same column / same cell / none) -> cell merge,
row/column graphs, span resolution -> slot grid -> HTML. Evaluation uses
nearest-neighbor adjacency relations between non-blank cells.
"""

from .errors import (
    ParseError,
    PlacementConflictError,
    ProtocolError,
    StructureConflictError,
    StructureError,
    TransportError,
    UnassignedWordError,
    ValidationError,
    WordGridError,
)
from .evaluate import (
    AdjacencyRelation,
    EvalReport,
    assign_content_ids,
    evaluate_corpus,
    evaluate_table,
    grid_to_adjacency,
    score,
)
from .geometry import (
    PatchLayout,
    frame_scan_dedup,
    merge_patch_detections,
    split_into_patches,
)
from .ingest import (
    assign_words_to_cells,
    format_pubtabnet_record,
    load_word_detections,
    parse_html_table,
    parse_html_with_texts,
    parse_icdar_document,
    parse_icdar_table,
    parse_pubtabnet_record,
)
from .model import CellGrid, GroundTruthTable, WordBox
from .pairgen import PairGenConfig, WordPair, generate_pairs, left_neighbors, top_neighbors
from .pipeline import (
    PipelineConfig,
    ReconstructionResult,
    classify_pairs,
    reconstruct_from_labels,
    reconstruct_table,
)
from .relations import (
    HeuristicClassifier,
    LabeledPair,
    RelationLabel,
    RemoteClassifier,
    export_training_pairs,
    heuristic_classify,
    oracle_classify,
    remote_classify,
    render_pair_image,
)
from .structure import (
    Cell,
    SpanAssignment,
    StructureGraph,
    build_axis_graph,
    build_grid,
    compute_spans,
    emit_html,
    merge_cells,
    repair_graph,
    resolve_structure,
    span_assignment,
)

__version__ = "0.1.0"

__all__ = [
    "AdjacencyRelation",
    "Cell",
    "CellGrid",
    "EvalReport",
    "GroundTruthTable",
    "HeuristicClassifier",
    "LabeledPair",
    "PairGenConfig",
    "ParseError",
    "PatchLayout",
    "PipelineConfig",
    "PlacementConflictError",
    "ProtocolError",
    "ReconstructionResult",
    "RelationLabel",
    "RemoteClassifier",
    "SpanAssignment",
    "StructureConflictError",
    "StructureError",
    "StructureGraph",
    "TransportError",
    "UnassignedWordError",
    "ValidationError",
    "WordBox",
    "WordGridError",
    "WordPair",
    "assign_content_ids",
    "assign_words_to_cells",
    "build_axis_graph",
    "build_grid",
    "classify_pairs",
    "compute_spans",
    "emit_html",
    "evaluate_corpus",
    "evaluate_table",
    "export_training_pairs",
    "format_pubtabnet_record",
    "frame_scan_dedup",
    "generate_pairs",
    "grid_to_adjacency",
    "heuristic_classify",
    "left_neighbors",
    "load_word_detections",
    "merge_cells",
    "merge_patch_detections",
    "oracle_classify",
    "parse_html_table",
    "parse_html_with_texts",
    "parse_icdar_document",
    "parse_icdar_table",
    "parse_pubtabnet_record",
    "reconstruct_from_labels",
    "reconstruct_table",
    "remote_classify",
    "render_pair_image",
    "repair_graph",
    "resolve_structure",
    "score",
    "span_assignment",
    "split_into_patches",
    "top_neighbors",
]
