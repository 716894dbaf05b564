"""Synthetic table corpora: random grids realized as grid-aligned word boxes.

Every generated table carries full ground truth (grid, cell texts, cell
boxes, word boxes with word-to-cell assignment), so it can drive the oracle
classifier, the heuristic classifier, training-data export and the metric,
all without any real dataset. Word texts are globally unique tokens, which
makes content-ID matching during evaluation unambiguous.

Spanning cells receive one word per covered sub-row and sub-column so that
each covered row and column has pairable evidence, mirroring real tables
where a spanned header's text stretches across its extent.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Optional

from PIL import Image, ImageDraw

from .evaluate import grid_to_adjacency
from .model import CellGrid, GroundTruthTable, WordBox
from .structure import reading_order


@dataclass(frozen=True)
class SynthConfig:
    min_rows: int = 2
    max_rows: int = 8
    min_cols: int = 2
    max_cols: int = 8
    max_span: int = 3
    span_prob: float = 0.15
    blank_fraction: float = 0.2
    max_words_per_cell: int = 3
    word_height: int = 20
    line_gap: int = 6
    word_gap: int = 6
    row_gutter: int = 18
    col_gutter: int = 24
    cell_pad: int = 4
    margin: int = 12
    min_word_width: int = 18
    max_word_width: int = 48
    min_col_width: int = 56


PLAIN = SynthConfig(span_prob=0.0, blank_fraction=0.0)


def _claim_cells(
    rng: random.Random, m: int, n: int, cfg: SynthConfig, spans: bool
) -> list[tuple[int, int, int, int, int]]:
    """Tile the m x n grid with cells: (cid, row, col, row_span, col_span)."""
    taken = [[False] * n for _ in range(m)]
    cells = []
    cid = 0
    for r in range(m):
        for c in range(n):
            if taken[r][c]:
                continue
            rs = cs = 1
            if spans and rng.random() < cfg.span_prob:
                run = 0
                while c + run < n and not taken[r][c + run]:
                    run += 1
                cs = rng.randint(1, min(cfg.max_span, run))
                rs = rng.randint(1, min(cfg.max_span, m - r))
                while rs > 1 and any(
                    taken[rr][cc] for rr in range(r, r + rs) for cc in range(c, c + cs)
                ):
                    rs -= 1
                # a single cell must never swallow the whole table
                if rs == m and cs == n:
                    cs = n - 1 if n > 1 else cs
                    if rs == m and cs == n:
                        rs = m - 1
            for rr in range(r, r + rs):
                for cc in range(c, c + cs):
                    taken[rr][cc] = True
            cells.append((cid, r, c, rs, cs))
            cid += 1
    return cells


def _drop_blanks(
    rng: random.Random,
    cells: list[tuple[int, int, int, int, int]],
    m: int,
    n: int,
    cfg: SynthConfig,
) -> list[tuple[int, int, int, int, int]]:
    """Randomly blank up to blank_fraction of slots, keeping the table evaluable."""
    budget = int(cfg.blank_fraction * m * n)
    if budget <= 0:
        return cells
    target = rng.randint(0, budget)
    blanked = 0
    candidates = list(cells)
    rng.shuffle(candidates)
    removed: set[int] = set()
    for cid, r, c, rs, cs in candidates:
        size = rs * cs
        if blanked + size > target:
            continue
        trial = [cell for cell in cells if cell[0] != cid and cell[0] not in removed]
        if len(trial) < 2:
            continue
        grid = CellGrid.from_cells(m, n, trial)
        if not grid_to_adjacency(grid, {t[0]: t[0] for t in trial}):
            continue
        removed.add(cid)
        blanked += size
    return [cell for cell in cells if cell[0] not in removed]


def _columns_anchored(cells: list[tuple[int, int, int, int, int]], n: int) -> bool:
    """Every column must hold at least one plain (colspan-1) cell.

    A column occupied only by multi-column spans and blanks is unobservable
    from word geometry: no word starts or ends in it, and the pair budget
    cannot be relied on to relate the spans crossing it. Such layouts are
    resampled rather than generated.
    """
    anchored = [False] * n
    for _, _, c, _, cs in cells:
        if cs == 1:
            anchored[c] = True
    return all(anchored)


def make_table(
    rng: random.Random,
    cfg: SynthConfig = SynthConfig(),
    spans: bool = True,
    blanks: bool = True,
    table_id: str = "",
    word_counter: Optional[list[int]] = None,
) -> GroundTruthTable:
    """One random table with word boxes aligned on a row/column lattice."""
    m = rng.randint(cfg.min_rows, cfg.max_rows)
    n = rng.randint(cfg.min_cols, cfg.max_cols)
    for _ in range(100):
        cells = _claim_cells(rng, m, n, cfg, spans)
        if blanks:
            cells = _drop_blanks(rng, cells, m, n, cfg)
        if _columns_anchored(cells, n):
            break
    return realize_table(rng, m, n, cells, cfg, table_id=table_id, word_counter=word_counter)


def table_from_layout(
    layout: list[list[Optional[str]]],
    cfg: SynthConfig = SynthConfig(),
    seed: int = 0,
    table_id: str = "",
    words_per_cell: Optional[int] = None,
) -> GroundTruthTable:
    """Deterministic table from a slot layout of cell keys (None = blank).

    Equal keys must form the usual contiguous rectangles; geometry follows
    the generator's lattice conventions, so hand-built structures get
    realistic word boxes without hand-placing pixels.
    """
    m, n = len(layout), len(layout[0])
    order: dict[str, int] = {}
    rects: dict[str, tuple[int, int, int, int]] = {}
    for r, row in enumerate(layout):
        for c, key in enumerate(row):
            if key is None:
                continue
            if key not in order:
                order[key] = len(order)
                rects[key] = (r, c, r, c)
            else:
                r0, c0, r1, c1 = rects[key]
                rects[key] = (min(r0, r), min(c0, c), max(r1, r), max(c1, c))
    cells = [
        (cid, rects[key][0], rects[key][1], rects[key][2] - rects[key][0] + 1, rects[key][3] - rects[key][1] + 1)
        for key, cid in order.items()
    ]
    return realize_table(
        random.Random(seed), m, n, cells, cfg, table_id=table_id, words_per_cell=words_per_cell
    )


def realize_table(
    rng: random.Random,
    m: int,
    n: int,
    cells: list[tuple[int, int, int, int, int]],
    cfg: SynthConfig = SynthConfig(),
    table_id: str = "",
    word_counter: Optional[list[int]] = None,
    words_per_cell: Optional[int] = None,
) -> GroundTruthTable:
    """Lay out the given cell claims as word boxes on the pixel lattice."""
    grid = CellGrid.from_cells(m, n, cells)

    # Word plan. Span-1 cells hold 1-3 words packed two per line; a spanning
    # cell holds one word per covered sub-row, each stretched over the cell's
    # full width (the look of real spanned headers), which both connects the
    # words vertically and overlaps every covered column.
    counter = word_counter if word_counter is not None else [0]
    WIDE = -1
    plan: dict[tuple[int, int], list[tuple[int, int, str]]] = {}  # (row,col) -> (width, cid, text)
    spanning: dict[tuple[int, int], int] = {}  # (row, col) -> colspan for wide words
    for cid, r, c, rs, cs in cells:
        if rs > 1 or cs > 1:
            for i in range(rs):
                text = f"t{counter[0]}"
                counter[0] += 1
                plan[(r + i, c)] = [(WIDE, cid, text)]
                spanning[(r + i, c)] = cs
        else:
            k = words_per_cell if words_per_cell is not None else rng.randint(1, cfg.max_words_per_cell)
            for _ in range(k):
                width = rng.randint(cfg.min_word_width, cfg.max_word_width)
                text = f"t{counter[0]}"
                counter[0] += 1
                plan.setdefault((r, c), []).append((width, cid, text))

    # per-row line counts and per-column widths implied by span-1 content
    lines_in_row = [1] * m
    col_need = [cfg.min_col_width] * n
    for (r, c), group in plan.items():
        lines_in_row[r] = max(lines_in_row[r], (len(group) + 1) // 2)
        if (r, c) in spanning:
            continue
        for start in range(0, len(group), 2):
            line = group[start : start + 2]
            need = sum(w for w, _, _ in line) + cfg.word_gap * (len(line) - 1) + 2 * cfg.cell_pad
            col_need[c] = max(col_need[c], need)

    col_x = [0] * n
    x = cfg.margin
    for c in range(n):
        col_x[c] = x
        x += col_need[c] + cfg.col_gutter
    row_y = [0] * m
    row_h = [0] * m
    y = cfg.margin
    for r in range(m):
        row_y[r] = y
        row_h[r] = 2 * cfg.cell_pad + lines_in_row[r] * cfg.word_height + (lines_in_row[r] - 1) * cfg.line_gap
        y += row_h[r] + cfg.row_gutter

    words: list[WordBox] = []
    word_cells: dict[int, int] = {}
    next_word_id = 0
    for r in range(m):
        for c in range(n):
            group = plan.get((r, c))
            if not group:
                continue
            for i, (width, cid, text) in enumerate(group):
                if width == WIDE:
                    cs = spanning[(r, c)]
                    width = (
                        col_x[c + cs - 1] + col_need[c + cs - 1] - col_x[c] - 2 * cfg.cell_pad
                    )
                line, pos = divmod(i, 2)
                wx = col_x[c] + cfg.cell_pad
                if pos == 1:
                    wx += group[i - 1][0] + cfg.word_gap
                wy = row_y[r] + cfg.cell_pad + line * (cfg.word_height + cfg.line_gap)
                word = WordBox(
                    id=next_word_id,
                    x_min=float(wx),
                    y_min=float(wy),
                    x_max=float(wx + width),
                    y_max=float(wy + cfg.word_height),
                    text=text,
                )
                words.append(word)
                word_cells[word.id] = cid
                next_word_id += 1

    cell_texts = {}
    cell_boxes = {}
    members: dict[int, list[WordBox]] = {}
    for w in words:
        members.setdefault(word_cells[w.id], []).append(w)
    for cid, r, c, rs, cs in cells:
        ordered = reading_order(members[cid])
        cell_texts[cid] = " ".join(w.text for w in ordered)
        cell_boxes[cid] = (
            float(col_x[c]),
            float(row_y[r]),
            float(col_x[c + cs - 1] + col_need[c + cs - 1]),
            float(row_y[r + rs - 1] + row_h[r + rs - 1]),
        )

    table = GroundTruthTable(
        grid=grid,
        cell_texts=cell_texts,
        cell_boxes=cell_boxes,
        word_boxes=words,
        word_cells=word_cells,
        table_id=table_id,
    )
    table.validate()
    return table


def make_corpus(
    seed: int,
    count: int,
    cfg: SynthConfig = SynthConfig(),
    spans: bool = True,
    blanks: bool = True,
) -> list[GroundTruthTable]:
    rng = random.Random(seed)
    return [
        make_table(rng, cfg, spans=spans, blanks=blanks, table_id=f"synth-{seed}-{i:04d}")
        for i in range(count)
    ]


def table_extent(table: GroundTruthTable, margin: int = 12) -> tuple[int, int]:
    words = table.word_boxes or []
    if not words:
        return (margin * 2, margin * 2)
    return (
        int(max(w.x_max for w in words)) + margin,
        int(max(w.y_max for w in words)) + margin,
    )


def render_table_image(table: GroundTruthTable, margin: int = 12) -> Image.Image:
    """Word boxes as dark blocks on white; the look of a rasterized table."""
    width, height = table_extent(table, margin)
    image = Image.new("RGB", (width, height), "white")
    draw = ImageDraw.Draw(image)
    for w in table.word_boxes or []:
        draw.rectangle((w.x_min, w.y_min, w.x_max - 1, w.y_max - 1), fill=(70, 70, 70))
    return image


def random_grid(rng: random.Random, cfg: SynthConfig = SynthConfig(), blanks: bool = True) -> CellGrid:
    """A random valid CellGrid (for structure-only property tests)."""
    m = rng.randint(cfg.min_rows, cfg.max_rows)
    n = rng.randint(cfg.min_cols, cfg.max_cols)
    cells = _claim_cells(rng, m, n, cfg, spans=True)
    if blanks:
        cells = _drop_blanks(rng, cells, m, n, cfg)
    return CellGrid.from_cells(m, n, cells)
