"""
Candidate pair generation
=========================

Comparing every word with every other word is quadratic; only the
immediate left and top neighbors matter for structure. Each word proposes
at most n left and m top neighbors (default 3 each), so the number of
pairs is bounded by (m+n) * w and grows linearly with the word count.
"""

from wordgrid import PairGenConfig, generate_pairs, left_neighbors, top_neighbors
from wordgrid.synth import table_from_layout

table = table_from_layout(
    [[f"r{r}c{c}" for c in range(4)] for r in range(4)],
    words_per_cell=1,
    table_id="grid-4x4",
)
words = table.word_boxes

# Per-word neighbor queries: nearest gap first.
anchor = words[-1]  # bottom-right word
print("anchor:", anchor.text, anchor.bounds)
print("left neighbors:", [w.text for w in left_neighbors(anchor, words, 3)])
print("top neighbors: ", [w.text for w in top_neighbors(anchor, words, 3)])

# Full candidate set and the budget.
config = PairGenConfig(m=3, n=3)
pairs = generate_pairs(words, config)
bound = (config.m + config.n) * len(words)
print(f"\n{len(pairs)} pairs for {len(words)} words (bound {bound})")

# Linearity: doubling the table roughly doubles the pair count.
for rows in (4, 8, 16):
    big = table_from_layout(
        [[f"r{r}c{c}" for c in range(8)] for r in range(rows)], words_per_cell=1
    )
    n_pairs = len(generate_pairs(big.word_boxes, config))
    print(f"w={len(big.word_boxes):4d} -> pairs={n_pairs:5d} (ratio {n_pairs/len(big.word_boxes):.2f})")
