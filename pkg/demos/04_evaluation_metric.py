"""
The adjacency-relation metric
=============================

Structure accuracy is scored by comparing nearest-neighbor links between
non-blank cells, horizontally and vertically, after cell content has been
replaced by unique IDs (matched by normalized text, so OCR noise in the
comparison pipeline cannot help or hurt). Blank cells never carry links;
neighbors are found by skipping them.
"""

from wordgrid import CellGrid, evaluate_table, grid_to_adjacency, score
from wordgrid.evaluate import table_relations

# A 1x3 row whose middle cell is blank: the outer cells still link.
row = CellGrid([[0, None, 1]])
relations = grid_to_adjacency(row, {0: 0, 1: 1})
print("blank-skipping:", sorted((r.from_cell, r.to_cell, r.direction) for r in relations))

# Spanning cells link once per distinct neighbor.
spanned = CellGrid([[0, 0], [1, 2]])
relations = grid_to_adjacency(spanned, {0: 0, 1: 1, 2: 2})
print("spanning cell: ", sorted((r.from_cell, r.to_cell, r.direction) for r in relations))

# Scoring: drop one of five relations -> precision stays 1, recall drops.
truth_grid = CellGrid([[0, 1, 2], [3, 4, 5]])
truth_texts = {i: f"t{i}" for i in range(6)}
pred_grid = CellGrid([[0, 1], [3, 4]])  # prediction lost the last column
pred_texts = {i: truth_texts[i] for i in (0, 1, 3, 4)}

report = evaluate_table((pred_grid, pred_texts), (truth_grid, truth_texts))
print(f"\nlost column: P={report.precision:.3f} R={report.recall:.3f} F1={report.f1:.3f}")

pred_rel, gt_rel = table_relations((pred_grid, pred_texts), (truth_grid, truth_texts))
print("missing relations:", sorted((r.from_cell, r.to_cell, r.direction) for r in gt_rel - pred_rel))

# Identity scores perfectly, including the degenerate empty case flagging.
print("\nidentity:", score(gt_rel, set(gt_rel)).f1)
empty = score(set(), set())
print("empty-vs-empty flags:", empty.flags)
