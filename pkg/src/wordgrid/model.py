"""Core data model: word boxes, cell grids, ground-truth tables.

A table's canonical structure is a :class:`CellGrid`: an m×n matrix of slots
where each slot holds a cell id or is blank, and every cell id covers a
contiguous axis-aligned rectangle of slots (its rowspan×colspan block).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence

from .errors import StructureError, ValidationError

CellId = int
Slot = Optional[CellId]
Rect = tuple[float, float, float, float]


@dataclass(frozen=True)
class WordBox:
    """An axis-aligned text region; the atomic input unit.

    Coordinates are pixels with y increasing downwards. ``text`` is the
    optional transcript; structure recovery never depends on it.
    """

    id: int
    x_min: float
    y_min: float
    x_max: float
    y_max: float
    text: Optional[str] = None

    def __post_init__(self) -> None:
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise ValidationError(
                f"word {self.id}: degenerate box "
                f"({self.x_min}, {self.y_min}, {self.x_max}, {self.y_max})"
            )

    @property
    def width(self) -> float:
        return self.x_max - self.x_min

    @property
    def height(self) -> float:
        return self.y_max - self.y_min

    @property
    def center_x(self) -> float:
        return (self.x_min + self.x_max) / 2.0

    @property
    def center_y(self) -> float:
        return (self.y_min + self.y_max) / 2.0

    @property
    def area(self) -> float:
        return self.width * self.height

    @property
    def bounds(self) -> Rect:
        return (self.x_min, self.y_min, self.x_max, self.y_max)


def check_unique_ids(words: Sequence[WordBox]) -> None:
    seen: set[int] = set()
    for w in words:
        if w.id in seen:
            raise ValidationError(f"duplicate word id {w.id}")
        seen.add(w.id)


@dataclass
class CellGrid:
    """m×n slot matrix; a spanning cell repeats its id over its block."""

    slots: list[list[Slot]]

    @property
    def rows(self) -> int:
        return len(self.slots)

    @property
    def cols(self) -> int:
        return len(self.slots[0]) if self.slots else 0

    @classmethod
    def from_cells(
        cls,
        rows: int,
        cols: int,
        cells: Sequence[tuple[CellId, int, int, int, int]],
    ) -> "CellGrid":
        """Build a grid from (id, row, col, row_span, col_span) tuples."""
        if rows < 1 or cols < 1:
            raise StructureError(f"grid must be at least 1x1, got {rows}x{cols}")
        slots: list[list[Slot]] = [[None] * cols for _ in range(rows)]
        for cid, r, c, rs, cs in cells:
            if rs < 1 or cs < 1:
                raise StructureError(f"cell {cid}: spans must be >= 1")
            if r < 0 or c < 0 or r + rs > rows or c + cs > cols:
                raise StructureError(f"cell {cid}: block out of bounds")
            for rr in range(r, r + rs):
                for cc in range(c, c + cs):
                    if slots[rr][cc] is not None:
                        raise StructureError(
                            f"cells {slots[rr][cc]} and {cid} both claim slot ({rr}, {cc})"
                        )
                    slots[rr][cc] = cid
        grid = cls(slots)
        grid.validate()
        return grid

    def validate(self) -> None:
        """Check shape and the contiguous-rectangle invariant for every cell."""
        if not self.slots or not self.slots[0]:
            raise StructureError("grid must be at least 1x1")
        n = len(self.slots[0])
        for i, row in enumerate(self.slots):
            if len(row) != n:
                raise StructureError(f"ragged grid: row {i} has {len(row)} slots, expected {n}")
        for cid, (r0, c0, r1, c1) in self._extents().items():
            count = sum(
                1 for row in self.slots for s in row if s == cid
            )
            if count != (r1 - r0) * (c1 - c0):
                raise StructureError(f"cell {cid} does not cover a full rectangle")
            for rr in range(r0, r1):
                for cc in range(c0, c1):
                    if self.slots[rr][cc] != cid:
                        raise StructureError(f"cell {cid} does not cover a full rectangle")

    def _extents(self) -> dict[CellId, tuple[int, int, int, int]]:
        ext: dict[CellId, tuple[int, int, int, int]] = {}
        for r, row in enumerate(self.slots):
            for c, cid in enumerate(row):
                if cid is None:
                    continue
                if cid not in ext:
                    ext[cid] = (r, c, r + 1, c + 1)
                else:
                    r0, c0, r1, c1 = ext[cid]
                    ext[cid] = (min(r0, r), min(c0, c), max(r1, r + 1), max(c1, c + 1))
        return ext

    def cell_ids(self) -> list[CellId]:
        """Cell ids in reading order of first occurrence."""
        out: list[CellId] = []
        seen: set[CellId] = set()
        for row in self.slots:
            for cid in row:
                if cid is not None and cid not in seen:
                    seen.add(cid)
                    out.append(cid)
        return out

    def cell_rect(self, cid: CellId) -> tuple[int, int, int, int]:
        """(row0, col0, row1, col1) with exclusive upper bounds."""
        ext = self._extents()
        if cid not in ext:
            raise KeyError(f"cell {cid} not in grid")
        return ext[cid]

    def cell_rows(self, cid: CellId) -> set[int]:
        r0, _, r1, _ = self.cell_rect(cid)
        return set(range(r0, r1))

    def cell_cols(self, cid: CellId) -> set[int]:
        _, c0, _, c1 = self.cell_rect(cid)
        return set(range(c0, c1))

    def is_blank(self, r: int, c: int) -> bool:
        return self.slots[r][c] is None

    def iter_cells(self) -> Iterator[tuple[CellId, int, int, int, int]]:
        """Yield (id, row, col, row_span, col_span) in reading order."""
        ext = self._extents()
        for cid in self.cell_ids():
            r0, c0, r1, c1 = ext[cid]
            yield cid, r0, c0, r1 - r0, c1 - c0

    def renumbered(self) -> "CellGrid":
        """Canonical form: ids relabeled 0.. in reading order of first occurrence."""
        mapping = {cid: i for i, cid in enumerate(self.cell_ids())}
        return CellGrid(
            [[None if s is None else mapping[s] for s in row] for row in self.slots]
        )

    def same_structure(self, other: "CellGrid") -> bool:
        """Equality up to cell-id renaming."""
        return self.renumbered().slots == other.renumbered().slots

    def without_blank_lines(self) -> "CellGrid":
        """Drop fully blank rows and columns (they carry no content structure)."""
        rows = [r for r in range(self.rows) if any(s is not None for s in self.slots[r])]
        cols = [c for c in range(self.cols) if any(self.slots[r][c] is not None for r in range(self.rows))]
        if not rows or not cols:
            return CellGrid([[None]])
        return CellGrid([[self.slots[r][c] for c in cols] for r in rows])


@dataclass
class GroundTruthTable:
    """Carrier for dataset annotations: grid plus per-cell content and geometry.

    ``word_cells`` maps word id -> cell id when word-level assignment is
    known; otherwise it can be derived from ``cell_boxes`` by maximal overlap
    (see :func:`wordgrid.ingest.assign_words_to_cells`).
    """

    grid: CellGrid
    cell_texts: dict[CellId, str]
    cell_boxes: dict[CellId, Rect] = field(default_factory=dict)
    word_boxes: Optional[list[WordBox]] = None
    word_cells: Optional[dict[int, CellId]] = None
    table_id: str = ""

    def validate(self) -> None:
        self.grid.validate()
        known = set(self.grid.cell_ids())
        for cid in self.cell_texts:
            if cid not in known:
                raise StructureError(f"cell_texts references unknown cell {cid}")
        for cid in self.cell_boxes:
            if cid not in known:
                raise StructureError(f"cell_boxes references unknown cell {cid}")
        if self.word_boxes is not None:
            check_unique_ids(self.word_boxes)
        if self.word_cells:
            word_ids = {w.id for w in self.word_boxes or []}
            for wid, cid in self.word_cells.items():
                if cid not in known:
                    raise StructureError(f"word {wid} assigned to unknown cell {cid}")
                if self.word_boxes is not None and wid not in word_ids:
                    raise StructureError(f"word_cells references unknown word {wid}")
