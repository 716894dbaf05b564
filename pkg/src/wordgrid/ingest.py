"""Loaders for word detections, annotation records and HTML tables.

All parsers land in the same data model (:class:`~wordgrid.model.CellGrid`
plus per-cell text/geometry). A td whose content is empty parses as a blank
slot -- a missing datum -- except when the whole table is content-free, in
which case every td is kept as an anonymous cell (structure-only token
streams carry their content out of band).
"""

from __future__ import annotations

import html as html_lib
import io
import json
import re
from dataclasses import dataclass
from html.parser import HTMLParser
from pathlib import Path
from typing import Iterable, Optional, Union
from xml.etree import ElementTree

from .errors import ParseError, StructureError, ValidationError
from .geometry import intersection_area, rect_area
from .model import CellGrid, CellId, GroundTruthTable, Rect, WordBox

_TAG_RE = re.compile(r"<[^>]*>")
_COLSPAN_RE = re.compile(r'colspan="?(\d+)"?')
_ROWSPAN_RE = re.compile(r'rowspan="?(\d+)"?')


@dataclass
class _Td:
    rowspan: int
    colspan: int
    text: str
    bbox: Optional[Rect] = None


def _fill_grid(
    row_specs: list[list[_Td]],
) -> tuple[CellGrid, dict[CellId, str], dict[CellId, Rect], list[Optional[CellId]]]:
    """Expand td specs into a slot matrix (left-to-right, top-to-bottom).

    Returns the grid, per-cell texts and boxes, and the td-order -> cell-id
    mapping (None entries are blanks).
    """
    m = len(row_specs)
    if m == 0 or all(not r for r in row_specs):
        raise StructureError("table has no cells")

    all_tds = [td for row in row_specs for td in row]
    any_text = any(td.text.strip() for td in all_tds)

    claims: dict[tuple[int, int], int] = {}
    td_index = 0
    for r, row in enumerate(row_specs):
        c = 0
        for td in row:
            while (r, c) in claims:
                c += 1
            rowspan = min(td.rowspan, m - r)
            for rr in range(r, r + rowspan):
                for cc in range(c, c + td.colspan):
                    if (rr, cc) in claims:
                        raise StructureError(
                            f"overlapping span claims at slot ({rr}, {cc})"
                        )
                    claims[(rr, cc)] = td_index
            c += td.colspan
            td_index += 1

    n = max(cc for _, cc in claims) + 1
    for r in range(m):
        for c in range(n):
            if (r, c) not in claims:
                raise StructureError(f"ragged rows: slot ({r}, {c}) is unclaimed")

    td_to_cell: list[Optional[CellId]] = []
    texts: dict[CellId, str] = {}
    boxes: dict[CellId, Rect] = {}
    next_id = 0
    for td in all_tds:
        text = td.text.strip()
        if text or not any_text:
            td_to_cell.append(next_id)
            texts[next_id] = text
            if td.bbox is not None:
                boxes[next_id] = td.bbox
            next_id += 1
        else:
            td_to_cell.append(None)

    slots: list[list[Optional[CellId]]] = [[None] * n for _ in range(m)]
    for (r, c), idx in claims.items():
        slots[r][c] = td_to_cell[idx]
    grid = CellGrid(slots)
    grid.validate()
    return grid, texts, boxes, td_to_cell


class _TableHTMLParser(HTMLParser):
    def __init__(self) -> None:
        super().__init__(convert_charrefs=True)
        self.tables_seen = 0
        self.rows: list[list[_Td]] = []
        self._in_table = False
        self._current_row: Optional[list[_Td]] = None
        self._current_td: Optional[_Td] = None
        self._text_parts: list[str] = []

    def handle_starttag(self, tag, attrs):
        tag = tag.lower()
        if tag == "table":
            self.tables_seen += 1
            if self.tables_seen > 1:
                raise ParseError("expected exactly one table element")
            self._in_table = True
        elif tag == "tr" and self._in_table:
            self._current_row = []
        elif tag in ("td", "th") and self._current_row is not None:
            spans = {}
            for name, value in attrs:
                if name in ("rowspan", "colspan"):
                    try:
                        spans[name] = int(value)
                    except (TypeError, ValueError):
                        raise ParseError(f"{name} attribute is not an integer: {value!r}")
                    if spans[name] < 1:
                        raise ParseError(f"{name} attribute must be positive: {value!r}")
            self._current_td = _Td(
                rowspan=spans.get("rowspan", 1),
                colspan=spans.get("colspan", 1),
                text="",
            )
            self._text_parts = []

    def handle_endtag(self, tag):
        tag = tag.lower()
        if tag in ("td", "th") and self._current_td is not None:
            self._current_td.text = "".join(self._text_parts)
            self._current_row.append(self._current_td)
            self._current_td = None
        elif tag == "tr" and self._current_row is not None:
            self.rows.append(self._current_row)
            self._current_row = None
        elif tag == "table":
            self._in_table = False

    def handle_data(self, data):
        if self._current_td is not None:
            self._text_parts.append(data)


def parse_html_with_texts(html: str) -> tuple[CellGrid, dict[CellId, str]]:
    """Parse one HTML table into a grid plus per-cell texts."""
    parser = _TableHTMLParser()
    try:
        parser.feed(html)
        parser.close()
    except ParseError:
        raise
    except Exception as exc:
        raise ParseError(f"malformed HTML: {exc}") from exc
    if parser.tables_seen != 1:
        raise ParseError("expected exactly one table element")
    grid, texts, _, _ = _fill_grid(parser.rows)
    return grid, texts


def parse_html_table(html: str) -> CellGrid:
    """Parse one HTML table element into its CellGrid."""
    grid, _ = parse_html_with_texts(html)
    return grid


def _pubtabnet_cell_text(tokens: list) -> str:
    raw = "".join(str(t) for t in tokens)
    return html_lib.unescape(_TAG_RE.sub("", raw)).strip()


def parse_pubtabnet_record(record: Union[str, bytes, dict]) -> GroundTruthTable:
    """Parse one annotation record (HTML token stream + per-cell content/bbox)."""
    if isinstance(record, (str, bytes)):
        try:
            record = json.loads(record)
        except json.JSONDecodeError as exc:
            raise ParseError(f"record is not valid JSON: {exc}") from exc
    if not isinstance(record, dict):
        raise ParseError("record must be a JSON object")

    html_part = record.get("html")
    if not isinstance(html_part, dict):
        raise ParseError("record missing field 'html'")
    structure = html_part.get("structure")
    if not isinstance(structure, dict) or not isinstance(structure.get("tokens"), list):
        raise ParseError("record missing field 'html.structure.tokens'")
    cells = html_part.get("cells")
    if not isinstance(cells, list):
        raise ParseError("record missing field 'html.cells'")

    rows: list[list[_Td]] = []
    current_row: Optional[list[_Td]] = None
    cell_idx = 0
    tokens = structure["tokens"]
    i = 0
    while i < len(tokens):
        token = tokens[i]
        if token == "<tr>":
            current_row = []
        elif token == "</tr>":
            if current_row is not None:
                rows.append(current_row)
                current_row = None
        elif token == "<td>" or token == "<td":
            attr_text = ""
            j = i
            if token == "<td":
                j = i + 1
                while j < len(tokens) and not str(tokens[j]).endswith(">"):
                    attr_text += str(tokens[j])
                    j += 1
                if j < len(tokens):
                    attr_text += str(tokens[j])
            if current_row is None:
                raise StructureError("td token outside a table row")
            colspan = int(m.group(1)) if (m := _COLSPAN_RE.search(attr_text)) else 1
            rowspan = int(m.group(1)) if (m := _ROWSPAN_RE.search(attr_text)) else 1
            if cell_idx >= len(cells):
                raise ParseError(
                    f"html.cells has {len(cells)} entries but the token stream has more td's"
                )
            cell = cells[cell_idx]
            if not isinstance(cell, dict) or not isinstance(cell.get("tokens"), list):
                raise ParseError(f"html.cells[{cell_idx}] missing field 'tokens'")
            bbox = cell.get("bbox")
            rect: Optional[Rect] = None
            if bbox is not None:
                if (
                    not isinstance(bbox, (list, tuple))
                    or len(bbox) != 4
                    or not all(isinstance(v, (int, float)) for v in bbox)
                ):
                    raise ParseError(f"html.cells[{cell_idx}] has malformed 'bbox'")
                rect = (float(bbox[0]), float(bbox[1]), float(bbox[2]), float(bbox[3]))
            current_row.append(
                _Td(
                    rowspan=rowspan,
                    colspan=colspan,
                    text=_pubtabnet_cell_text(cell["tokens"]),
                    bbox=rect,
                )
            )
            cell_idx += 1
            i = j
        i += 1

    if cell_idx != len(cells):
        raise ParseError(
            f"html.cells has {len(cells)} entries but the token stream uses {cell_idx}"
        )

    grid, texts, boxes, _ = _fill_grid(rows)
    table = GroundTruthTable(
        grid=grid,
        cell_texts=texts,
        cell_boxes=boxes,
        table_id=str(record.get("filename", "")),
    )
    table.validate()
    return table


def _icdar_tables(root: ElementTree.Element) -> list[ElementTree.Element]:
    if root.tag == "table":
        return [root]
    return list(root.iter("table"))


def _parse_icdar_cells(table_el: ElementTree.Element, table_id: str) -> GroundTruthTable:
    cell_els = list(table_el.iter("cell"))
    if not cell_els:
        raise StructureError(f"table {table_id!r} has no cells")

    entries = []
    for el in cell_els:
        try:
            r0 = int(el.get("start-row"))
            c0 = int(el.get("start-col"))
        except (TypeError, ValueError):
            raise ParseError(f"cell in table {table_id!r} lacks start-row/start-col")
        r1 = int(el.get("end-row", r0))
        c1 = int(el.get("end-col", c0))
        if r0 < 0 or c0 < 0 or r1 < r0 or c1 < c0:
            raise StructureError(
                f"cell in table {table_id!r} has invalid index range "
                f"rows {r0}..{r1} cols {c0}..{c1}"
            )
        content_el = el.find("content")
        text = (content_el.text or "") if content_el is not None else ""
        bb = el.find("bounding-box")
        rect: Optional[Rect] = None
        if bb is not None:
            try:
                rect = (
                    float(bb.get("x1")),
                    float(bb.get("y1")),
                    float(bb.get("x2")),
                    float(bb.get("y2")),
                )
            except (TypeError, ValueError):
                raise ParseError(f"cell in table {table_id!r} has malformed bounding-box")
        entries.append((r0, c0, r1, c1, text.strip(), rect))

    any_text = any(e[4] for e in entries)
    rows = max(e[2] for e in entries) + 1
    cols = max(e[3] for e in entries) + 1
    slots: list[list[Optional[CellId]]] = [[None] * cols for _ in range(rows)]
    claimed: set[tuple[int, int]] = set()
    texts: dict[CellId, str] = {}
    boxes: dict[CellId, Rect] = {}
    next_id = 0
    for r0, c0, r1, c1, text, rect in entries:
        cid: Optional[CellId] = None
        if text or not any_text:
            cid = next_id
            texts[cid] = text
            if rect is not None:
                boxes[cid] = rect
            next_id += 1
        for rr in range(r0, r1 + 1):
            for cc in range(c0, c1 + 1):
                if (rr, cc) in claimed:
                    raise StructureError(
                        f"table {table_id!r}: overlapping cells at slot ({rr}, {cc})"
                    )
                claimed.add((rr, cc))
                slots[rr][cc] = cid

    grid = CellGrid(slots)
    grid.validate()
    table = GroundTruthTable(grid=grid, cell_texts=texts, cell_boxes=boxes, table_id=table_id)
    table.validate()
    return table


def parse_icdar_document(xml: str) -> list[GroundTruthTable]:
    """Parse a region-XML document that may hold several tables."""
    try:
        root = ElementTree.fromstring(xml)
    except ElementTree.ParseError as exc:
        raise ParseError(f"malformed XML: {exc}") from exc
    tables = _icdar_tables(root)
    if not tables:
        raise StructureError("document contains no table element")
    doc_name = root.get("filename", "")
    out = []
    for i, el in enumerate(tables):
        tid = el.get("id", str(i))
        label = f"{doc_name}#{tid}" if doc_name else tid
        out.append(_parse_icdar_cells(el, label))
    return out


def parse_icdar_table(xml: str) -> GroundTruthTable:
    """Parse a region-XML snippet describing exactly one table."""
    tables = parse_icdar_document(xml)
    if len(tables) != 1:
        raise ParseError(f"expected exactly one table, found {len(tables)}")
    return tables[0]


def load_word_detections(
    source: Union[str, Path, io.TextIOBase, Iterable[str]],
) -> list[WordBox]:
    """Load word boxes from JSON-lines, assigning fresh ids in file order.

    Each line is ``{"id": int, "bbox": [x_min, y_min, x_max, y_max],
    "text": string|null}``; the stored id is informational only.
    """
    if isinstance(source, (str, Path)):
        lines: Iterable[str] = Path(source).read_text(encoding="utf-8").splitlines()
    elif isinstance(source, io.TextIOBase):
        lines = source.read().splitlines()
    else:
        lines = source

    words: list[WordBox] = []
    index = 0
    for raw in lines:
        line = raw.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"entry {index}: not valid JSON: {exc}") from exc
        bbox = obj.get("bbox") if isinstance(obj, dict) else None
        if not isinstance(bbox, (list, tuple)) or len(bbox) != 4:
            raise ValidationError(f"entry {index}: bbox must be a list of 4 numbers")
        if not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in bbox):
            raise ValidationError(f"entry {index}: bbox has non-numeric coordinates")
        text = obj.get("text")
        if text is not None and not isinstance(text, str):
            raise ValidationError(f"entry {index}: text must be a string or null")
        try:
            words.append(
                WordBox(
                    id=index,
                    x_min=float(bbox[0]),
                    y_min=float(bbox[1]),
                    x_max=float(bbox[2]),
                    y_max=float(bbox[3]),
                    text=text,
                )
            )
        except ValidationError as exc:
            raise ValidationError(f"entry {index}: {exc}") from exc
        index += 1
    return words


def format_pubtabnet_record(table: GroundTruthTable) -> dict:
    """Inverse of :func:`parse_pubtabnet_record`: emit the annotation schema.

    Blank slots become content-free td entries; spanning cells carry their
    attributes as split td tokens, matching the public token stream idiom.
    """
    grid = table.grid
    anchors: dict[tuple[int, int], tuple[CellId, int, int]] = {}
    covered: set[tuple[int, int]] = set()
    for cid, r, c, rs, cs in grid.iter_cells():
        anchors[(r, c)] = (cid, rs, cs)
        covered.update((rr, cc) for rr in range(r, r + rs) for cc in range(c, c + cs))

    tokens: list[str] = []
    cells: list[dict] = []
    for r in range(grid.rows):
        tokens.append("<tr>")
        for c in range(grid.cols):
            if (r, c) in anchors:
                cid, rs, cs = anchors[(r, c)]
                if rs > 1 or cs > 1:
                    tokens.append("<td")
                    if rs > 1:
                        tokens.append(f' rowspan="{rs}"')
                    if cs > 1:
                        tokens.append(f' colspan="{cs}"')
                    tokens.append(">")
                else:
                    tokens.append("<td>")
                tokens.append("</td>")
                entry: dict = {"tokens": [table.cell_texts.get(cid, "")]}
                if cid in table.cell_boxes:
                    entry["bbox"] = list(table.cell_boxes[cid])
                cells.append(entry)
            elif (r, c) not in covered:
                tokens.extend(("<td>", "</td>"))
                cells.append({"tokens": []})
        tokens.append("</tr>")

    return {
        "filename": table.table_id or "table.png",
        "split": "val",
        "html": {"structure": {"tokens": tokens}, "cells": cells},
    }


def assign_words_to_cells(
    words: Iterable[WordBox], table: GroundTruthTable
) -> dict[int, CellId]:
    """Assign each word to the cell whose box overlaps it most.

    Ties break toward the smaller cell box. Words overlapping no cell box are
    left unassigned (absent from the result).
    """
    assignment: dict[int, CellId] = {}
    boxes = table.cell_boxes
    for word in words:
        best: Optional[CellId] = None
        best_key: Optional[tuple[float, float]] = None
        for cid, rect in boxes.items():
            overlap = intersection_area(word.bounds, rect)
            if overlap <= 0.0:
                continue
            key = (-overlap, rect_area(rect))
            if best_key is None or key < best_key:
                best_key = key
                best = cid
        if best is not None:
            assignment[word.id] = best
    return assignment
