"""Resolve labeled word pairs into cells, spans, a slot grid, and HTML.

Same-cell pairs merge words into cells (connected components). Same-row /
same-column pairs become two directed graphs whose edges point left-to-right
and top-to-bottom. Each cell then receives a slot interval per axis from a
difference-constraint solve: order edges keep left/above cells strictly
first, opposite-axis edges force interval intersection (which is where
spans emerge -- a header aligned with cells in two columns must stretch
over both), and gutter-projection bands pin cells whose relational evidence
was eaten by blank regions. :func:`compute_spans` additionally provides the
single-graph span estimator (sum over children reachable only via the
direct edge, leaves 1) for callers that have no geometry at hand.
"""

from __future__ import annotations

import html as html_lib
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .errors import PlacementConflictError, StructureConflictError, StructureError
from .model import CellGrid, CellId, Rect, WordBox
from .relations import LabeledPair, RelationLabel

ROW_AXIS = "row"
COLUMN_AXIS = "column"


@dataclass
class Cell:
    """A maximal group of words connected by same-cell relations."""

    id: CellId
    words: list[WordBox]
    bbox: Rect
    text: str

    @property
    def member_words(self) -> set[int]:
        return {w.id for w in self.words}

    @property
    def center(self) -> tuple[float, float]:
        return ((self.bbox[0] + self.bbox[2]) / 2.0, (self.bbox[1] + self.bbox[3]) / 2.0)


@dataclass
class StructureGraph:
    """Directed relation graph over cells for one axis.

    A row-axis edge (u, v) says u and v share a row with u left of v; a
    column-axis edge says they share a column with u above v.
    """

    axis: str
    nodes: list[CellId]
    edges: set[tuple[CellId, CellId]] = field(default_factory=set)
    confidences: dict[tuple[CellId, CellId], float] = field(default_factory=dict)

    def children(self, u: CellId) -> list[CellId]:
        return sorted(v for (a, v) in self.edges if a == u)

    def adjacency(self) -> dict[CellId, list[CellId]]:
        adj: dict[CellId, list[CellId]] = {u: [] for u in self.nodes}
        for u, v in sorted(self.edges):
            adj[u].append(v)
        return adj


@dataclass
class SpanAssignment:
    row_span: dict[CellId, int]
    col_span: dict[CellId, int]


class _UnionFind:
    def __init__(self, items: Iterable[int]) -> None:
        self.parent = {i: i for i in items}

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def reading_order(words: Sequence[WordBox]) -> list[WordBox]:
    """Order words into lines (by vertical overlap) top-to-bottom, then left-to-right."""
    remaining = sorted(words, key=lambda w: (w.y_min, w.x_min, w.id))
    lines: list[list[WordBox]] = []
    for w in remaining:
        placed = False
        for line in lines:
            y0 = min(x.y_min for x in line)
            y1 = max(x.y_max for x in line)
            overlap = min(y1, w.y_max) - max(y0, w.y_min)
            if overlap >= 0.5 * min(w.height, y1 - y0):
                line.append(w)
                placed = True
                break
        if not placed:
            lines.append([w])
    lines.sort(key=lambda line: min(x.y_min for x in line))
    out: list[WordBox] = []
    for line in lines:
        out.extend(sorted(line, key=lambda w: (w.x_min, w.id)))
    return out


def merge_cells(words: Sequence[WordBox], labeled: Sequence[LabeledPair]) -> list[Cell]:
    """Cells are the connected components of the same-cell relation."""
    if not words:
        return []
    by_id = {w.id: w for w in words}
    uf = _UnionFind(by_id)
    for lp in labeled:
        if lp.label is RelationLabel.SAME_CELL:
            uf.union(lp.pair.a, lp.pair.b)

    groups: dict[int, list[WordBox]] = {}
    for w in words:
        groups.setdefault(uf.find(w.id), []).append(w)

    cells = []
    for members in groups.values():
        ordered = reading_order(members)
        bbox = (
            min(w.x_min for w in members),
            min(w.y_min for w in members),
            max(w.x_max for w in members),
            max(w.y_max for w in members),
        )
        text = " ".join(w.text for w in ordered if w.text).strip()
        cells.append((bbox, ordered, text))
    cells.sort(key=lambda c: (c[0][1], c[0][0]))
    return [
        Cell(id=i, words=ordered, bbox=bbox, text=text)
        for i, (bbox, ordered, text) in enumerate(cells)
    ]


def _find_cycle(
    nodes: Sequence[CellId], adj: dict[CellId, list[CellId]]
) -> Optional[list[tuple[CellId, CellId]]]:
    WHITE, GRAY, BLACK = 0, 1, 2
    color = {u: WHITE for u in nodes}
    parent: dict[CellId, CellId] = {}
    for start in sorted(nodes):
        if color[start] != WHITE:
            continue
        color[start] = GRAY
        stack = [(start, iter(adj.get(start, ())))]
        while stack:
            u, it = stack[-1]
            v = next(it, None)
            if v is None:
                color[u] = BLACK
                stack.pop()
                continue
            if color[v] == WHITE:
                color[v] = GRAY
                parent[v] = u
                stack.append((v, iter(adj.get(v, ()))))
            elif color[v] == GRAY:
                cycle = [(u, v)]
                x = u
                while x != v:
                    cycle.append((parent[x], x))
                    x = parent[x]
                cycle.reverse()
                return cycle
    return None


def build_axis_graph(
    cells: Sequence[Cell],
    labeled: Sequence[LabeledPair],
    axis: str,
    verify: bool = True,
) -> StructureGraph:
    """Directed graph from same-row / same-column labels, oriented by centers.

    Self-loops (both words in one cell) are dropped and duplicate edges
    collapse to the strongest supporting confidence. A tie in centers cannot
    be oriented and raises; with ``verify`` (default) a cycle raises a
    conflict carrying the offending edges.
    """
    if axis not in (ROW_AXIS, COLUMN_AXIS):
        raise ValueError(f"axis must be 'row' or 'column', got {axis!r}")
    wanted = RelationLabel.SAME_ROW if axis == ROW_AXIS else RelationLabel.SAME_COLUMN
    cell_of: dict[int, Cell] = {}
    for cell in cells:
        for wid in cell.member_words:
            cell_of[wid] = cell

    graph = StructureGraph(axis=axis, nodes=[c.id for c in cells])
    for lp in labeled:
        if lp.label is not wanted:
            continue
        cu = cell_of[lp.pair.a]
        cv = cell_of[lp.pair.b]
        if cu.id == cv.id:
            continue
        ku = cu.center[0] if axis == ROW_AXIS else cu.center[1]
        kv = cv.center[0] if axis == ROW_AXIS else cv.center[1]
        if ku == kv:
            raise StructureConflictError(
                f"cells {cu.id} and {cv.id} tie on {axis} order; relations are contradictory"
            )
        edge = (cu.id, cv.id) if ku < kv else (cv.id, cu.id)
        graph.edges.add(edge)
        graph.confidences[edge] = max(graph.confidences.get(edge, 0.0), lp.confidence)

    if verify:
        cycle = _find_cycle(graph.nodes, graph.adjacency())
        if cycle is not None:
            raise StructureConflictError(
                f"{axis} relations form a cycle: {cycle}", cycle=cycle
            )
    return graph


def repair_graph(graph: StructureGraph, max_drops: Optional[int] = None) -> tuple[StructureGraph, list[tuple[CellId, CellId]]]:
    """Break cycles by dropping the lowest-confidence edge of each, bounded."""
    limit = len(graph.edges) if max_drops is None else max_drops
    edges = set(graph.edges)
    confidences = dict(graph.confidences)
    dropped: list[tuple[CellId, CellId]] = []
    while True:
        adj: dict[CellId, list[CellId]] = {u: [] for u in graph.nodes}
        for u, v in sorted(edges):
            adj[u].append(v)
        cycle = _find_cycle(graph.nodes, adj)
        if cycle is None:
            break
        if len(dropped) >= limit:
            raise StructureConflictError(
                f"{graph.axis} relations still cyclic after {limit} repairs", cycle=cycle
            )
        victim = min(cycle, key=lambda e: (confidences.get(e, 0.0), e))
        edges.discard(victim)
        confidences.pop(victim, None)
        dropped.append(victim)
    return StructureGraph(graph.axis, list(graph.nodes), edges, confidences), dropped


def _topological_order(nodes: Sequence[CellId], adj: dict[CellId, list[CellId]]) -> list[CellId]:
    indegree = {u: 0 for u in nodes}
    for u in nodes:
        for v in adj.get(u, ()):
            indegree[v] += 1
    ready = sorted(u for u in nodes if indegree[u] == 0)
    order: list[CellId] = []
    while ready:
        u = ready.pop(0)
        order.append(u)
        for v in adj.get(u, ()):
            indegree[v] -= 1
            if indegree[v] == 0:
                ready.append(v)
        ready.sort()
    if len(order) != len(nodes):
        raise StructureConflictError("graph is cyclic; cannot order nodes")
    return order


def compute_spans(graph: StructureGraph) -> dict[CellId, int]:
    """Span per node: sum of spans of children reachable only via the direct edge.

    A child also reachable through another child would be double counted and
    is excluded. Nodes without children get span 1.
    """
    adj = graph.adjacency()
    order = _topological_order(graph.nodes, adj)
    descendants: dict[CellId, set[CellId]] = {u: set() for u in graph.nodes}
    span: dict[CellId, int] = {}
    for u in reversed(order):
        children = adj.get(u, [])
        for v in children:
            descendants[u].add(v)
            descendants[u] |= descendants[v]
        direct = [
            v
            for v in children
            if not any(v in descendants[w] for w in children if w != v)
        ]
        span[u] = sum(span[v] for v in direct) if direct else 1
    return span


def _projection_bands(intervals: list[tuple[float, float]], merge_gap: float) -> list[tuple[float, float]]:
    if not intervals:
        return []
    intervals.sort()
    bands = [list(intervals[0])]
    for start, end in intervals[1:]:
        if start - bands[-1][1] < merge_gap:
            bands[-1][1] = max(bands[-1][1], end)
        else:
            bands.append([start, end])
    return [(b[0], b[1]) for b in bands]


def _band_floor(position: float, bands: list[tuple[float, float]]) -> int:
    """Index of the band containing ``position``, or the count of bands left of it."""
    count = 0
    for start, end in bands:
        if end < position:
            count += 1
        elif start <= position:
            return count
        else:
            break
    return count


def _band_last(position: float, bands: list[tuple[float, float]]) -> int:
    """Index of the last band starting before ``position`` (0 when none)."""
    count = sum(1 for start, _ in bands if start < position)
    return max(0, count - 1)


def _band_containing(position: float, bands: list[tuple[float, float]]) -> Optional[int]:
    for k, (start, end) in enumerate(bands):
        if start <= position <= end and end > start:
            return k
    return None


def _line_segments(
    cells: Sequence[Cell], y_bands: list[tuple[float, float]], merge_gap: float
) -> list[tuple[float, float, int]]:
    """Per-line cell-content segments: x-runs of words separated by gutters.

    Words on one line belonging to one cell sit closer than ``merge_gap``;
    distinct cells are separated by at least a column gutter, so clustering
    per-line word intervals yields one segment per cell per line.
    """
    per_line: dict[int, list[tuple[float, float]]] = {}
    for c in cells:
        for w in c.words:
            line = _band_floor((w.y_min + w.y_max) / 2.0, y_bands)
            per_line.setdefault(line, []).append((w.x_min, w.x_max))
    segments: list[tuple[float, float, int]] = []
    for line, intervals in per_line.items():
        for x0, x1 in _projection_bands(intervals, merge_gap):
            segments.append((x0, x1, line))
    return segments


def _x_bands(cells: Sequence[Cell], y_bands: list[tuple[float, float]], merge_gap: float) -> list[tuple[float, float]]:
    """Column bands that survive column-spanning content.

    A segment covering several columns is recognized structurally: at least
    two disjoint segments of some other line fit inside its extent. Such
    spanning segments are kept out of the projection (they would merge their
    sub-columns' bands), but their left edges still mark column starts, so
    any left edge falling outside every band becomes a zero-width anchor.
    Finally, a gutter wide enough to hold a column hides one whose every
    occupant spans or is blank; phantom anchors keep the slot arithmetic
    honest there (overcounting only adds blank, relation-free columns).
    """
    segments = _line_segments(cells, y_bands, merge_gap)
    by_line: dict[int, list[tuple[float, float]]] = {}
    for x0, x1, line in segments:
        by_line.setdefault(line, []).append((x0, x1))
    gaps: list[tuple[float, float, int]] = []  # inter-segment gutter runs per line
    for line, per in by_line.items():
        per.sort()
        for (_, prev_end), (next_start, _) in zip(per, per[1:]):
            gaps.append((prev_end, next_start, line))

    spanning: list[tuple[float, float, int]] = []
    plain: list[tuple[float, float, int]] = []
    for seg in segments:
        x0, x1, line = seg
        crosses_gutter = any(
            g_line != line
            and min(g1, x1 - merge_gap) - max(g0, x0 + merge_gap) >= merge_gap
            for g0, g1, g_line in gaps
        )
        (spanning if crosses_gutter else plain).append(seg)

    # Spanning content above single-cell rows can bridge a gutter no line
    # ever witnesses. Peeling the widest segments while that strictly
    # reveals more bands cannot split a real column (all of a column's
    # segments share their left edge), so the maximum is safe to take.
    plain.sort(key=lambda seg: seg[0] - seg[1])
    bands = _projection_bands([(x0, x1) for x0, x1, _ in plain], merge_gap)
    peeled = 0
    for k in range(1, len(plain)):
        candidate = _projection_bands([(x0, x1) for x0, x1, _ in plain[k:]], merge_gap)
        if len(candidate) > len(bands):
            bands = candidate
            peeled = k
    spanning.extend(plain[:peeled])

    anchors: list[float] = []
    for x0, _, _ in spanning:
        if _band_containing(x0, bands) is None and all(abs(x0 - a) >= merge_gap for a in anchors):
            anchors.append(x0)

    out = list(bands) + [(a, a) for a in anchors]
    out.sort()
    return out


_START = 0
_END = 1

# A constraint (src_kind, src_id, dst_kind, dst_id, w) demands
# var[dst] >= var[src] + w, where each cell owns a start and an end variable.
_Constraint = tuple[int, CellId, int, CellId, int]


def _order_constraints(edges: Iterable[tuple[CellId, CellId]]) -> list[_Constraint]:
    """u strictly before v: start_v >= end_u + 1."""
    return [(_END, u, _START, v, 1) for u, v in edges]


def _align_constraints(edges: Iterable[tuple[CellId, CellId]]) -> list[_Constraint]:
    """u and v overlap: end_u >= start_v and end_v >= start_u."""
    out: list[_Constraint] = []
    for u, v in edges:
        out.append((_START, v, _END, u, 0))
        out.append((_START, u, _END, v, 0))
    return out


def _solve_intervals(
    cells: Sequence[Cell],
    constraints: list[_Constraint],
    start_lb: dict[CellId, int],
    end_lb: dict[CellId, int],
    axis: str,
) -> dict[CellId, tuple[int, int]]:
    """Minimal slot intervals per cell satisfying the difference constraints.

    Longest-path relaxation from the geometric lower bounds yields the least
    solution; failure to stabilize means the relations admit no grid layout.
    """
    start = {c.id: max(0, start_lb.get(c.id, 0)) for c in cells}
    end = {c.id: max(start[c.id], end_lb.get(c.id, 0)) for c in cells}
    var = (start, end)

    for _ in range(2 * len(start) + 2):
        changed = False
        for u in start:
            if end[u] < start[u]:
                end[u] = start[u]
                changed = True
        for src_kind, src, dst_kind, dst, w in constraints:
            candidate = var[src_kind][src] + w
            if var[dst_kind][dst] < candidate:
                var[dst_kind][dst] = candidate
                changed = True
        if not changed:
            return {u: (start[u], end[u]) for u in start}
    raise StructureConflictError(
        f"{axis} relations admit no grid layout (conflicting constraints)"
    )


def _band_constraints(
    cells: Sequence[Cell],
    bands: list[tuple[float, float]],
    lo_coord: int,
    hi_coord: int,
) -> list[_Constraint]:
    """Tie cells to their gutter bands through per-band representative cells.

    A cell lying entirely inside one band anchors it: the band is a single
    grid line (column/row), so the anchor's interval is pinned to one slot,
    consecutive anchors are ordered, every cell starting in a band starts at
    its anchor's slot, and every cell ending in a band ends there. This
    couples geometric membership into the solve in solved-index space, where
    relations may have inserted lines the projection cannot see.
    """
    reps: dict[int, CellId] = {}
    for c in sorted(cells, key=lambda c: c.id):
        lo = _band_containing(c.bbox[lo_coord], bands)
        hi = _band_containing(c.bbox[hi_coord], bands)
        if lo is not None and lo == hi:
            reps.setdefault(lo, c.id)

    out: list[_Constraint] = []
    for k, rep in reps.items():
        out.append((_END, rep, _START, rep, 0))  # anchors occupy one slot
    ordered = sorted(reps.items())
    for (ka, a), (kb, b) in zip(ordered, ordered[1:]):
        out.append((_START, a, _START, b, kb - ka))

    for c in cells:
        lo = _band_containing(c.bbox[lo_coord], bands)
        hi = _band_containing(c.bbox[hi_coord], bands)
        if lo is not None and lo in reps and reps[lo] != c.id:
            rep = reps[lo]
            out.append((_START, rep, _START, c.id, 0))
            out.append((_START, c.id, _START, rep, 0))
        if hi is not None and hi in reps and reps[hi] != c.id:
            rep = reps[hi]
            out.append((_START, rep, _END, c.id, 0))
            out.append((_END, c.id, _START, rep, 0))
    return out


def build_grid(
    cells: Sequence[Cell],
    row_graph: StructureGraph,
    col_graph: StructureGraph,
) -> CellGrid:
    """Materialize the slot matrix from the axis graphs and cell geometry.

    Per axis, each cell gets a slot interval: order edges of the same axis
    keep left/above cells first, align edges of the opposite axis force
    interval intersection (which is where spans emerge), and gutter bands
    projected from word boxes pin cells whose relational evidence was eaten
    by blank regions. Every cell then claims its resulting rectangle; a
    doubly-claimed slot raises a placement conflict.
    """
    if not cells:
        raise StructureError("no cells to place")
    heights = sorted(w.height for c in cells for w in c.words)
    merge_gap = 0.6 * (heights[len(heights) // 2] if heights else 1.0)

    def solve(axis, order_edges, align_edges, bands, lo_coord, hi_coord):
        relational = _order_constraints(order_edges) + _align_constraints(align_edges)
        start_lb = {c.id: _band_floor(c.bbox[lo_coord], bands) for c in cells}
        end_lb = {c.id: _band_last(c.bbox[hi_coord], bands) for c in cells}
        geometric = _band_constraints(cells, bands, lo_coord, hi_coord)
        # When geometry contradicts the relations (noisy input), shed it in
        # stages: band ties first, then the plain index bounds.
        try:
            return _solve_intervals(cells, relational + geometric, start_lb, end_lb, axis)
        except StructureConflictError:
            pass
        try:
            return _solve_intervals(cells, relational, start_lb, end_lb, axis)
        except StructureConflictError:
            return _solve_intervals(cells, relational, {}, {}, axis)

    # Vertical bands come from all words: a word never crosses a line gutter.
    y_bands = _projection_bands([(w.y_min, w.y_max) for c in cells for w in c.words], merge_gap)
    rows = solve("row", col_graph.edges, row_graph.edges, y_bands, 1, 3)

    x_bands = _x_bands(cells, y_bands, merge_gap)
    cols = solve("column", row_graph.edges, col_graph.edges, x_bands, 0, 2)

    n_rows = max(r1 for _, r1 in rows.values()) + 1
    n_cols = max(c1 for _, c1 in cols.values()) + 1
    slots: list[list[Optional[CellId]]] = [[None] * n_cols for _ in range(n_rows)]
    for cell in sorted(cells, key=lambda c: c.id):
        r0, r1 = rows[cell.id]
        c0, c1 = cols[cell.id]
        for r in range(r0, r1 + 1):
            for c in range(c0, c1 + 1):
                if slots[r][c] is not None:
                    raise PlacementConflictError(
                        f"cells {slots[r][c]} and {cell.id} both claim slot ({r}, {c})"
                    )
                slots[r][c] = cell.id
    grid = CellGrid(slots)
    grid.validate()
    return grid


def span_assignment(grid: CellGrid) -> SpanAssignment:
    """Spans as realized by a grid (for dumps and downstream consumers)."""
    row_span: dict[CellId, int] = {}
    col_span: dict[CellId, int] = {}
    for cid, _, _, rs, cs in grid.iter_cells():
        row_span[cid] = rs
        col_span[cid] = cs
    return SpanAssignment(row_span=row_span, col_span=col_span)


def resolve_structure(
    words: Sequence[WordBox],
    labeled: Sequence[LabeledPair],
    repair: bool = False,
) -> tuple[list[Cell], CellGrid]:
    """Full resolution: merge cells, build graphs, place the grid."""
    cells = merge_cells(words, labeled)
    row_graph = build_axis_graph(cells, labeled, ROW_AXIS, verify=not repair)
    col_graph = build_axis_graph(cells, labeled, COLUMN_AXIS, verify=not repair)
    if repair:
        row_graph, _ = repair_graph(row_graph)
        col_graph, _ = repair_graph(col_graph)
    grid = build_grid(cells, row_graph, col_graph)
    return cells, grid


def emit_html(grid: CellGrid, texts: dict[CellId, str]) -> str:
    """Normalized HTML: lowercase tags, double-quoted attributes, no whitespace.

    A td is emitted at the top-left slot of each cell with rowspan/colspan
    attributes only when greater than 1; blank slots not covered by any span
    emit an empty td.
    """
    grid.validate()
    anchors = {}
    for cid, r, c, rs, cs in grid.iter_cells():
        anchors[(r, c)] = (cid, rs, cs)
    covered = {
        (r, c)
        for cid, r0, c0, rs, cs in grid.iter_cells()
        for r in range(r0, r0 + rs)
        for c in range(c0, c0 + cs)
    }

    parts = ["<table>"]
    for r in range(grid.rows):
        parts.append("<tr>")
        for c in range(grid.cols):
            if (r, c) in anchors:
                cid, rs, cs = anchors[(r, c)]
                attrs = ""
                if rs > 1:
                    attrs += f' rowspan="{rs}"'
                if cs > 1:
                    attrs += f' colspan="{cs}"'
                text = html_lib.escape(texts.get(cid, ""), quote=False)
                parts.append(f"<td{attrs}>{text}</td>")
            elif (r, c) not in covered:
                parts.append("<td></td>")
        parts.append("</tr>")
    parts.append("</table>")
    return "".join(parts)


def structure_to_json(grid: CellGrid, texts: dict[CellId, str]) -> dict:
    """Loss-free structure dump: shape plus per-cell placement and text."""
    return {
        "rows": grid.rows,
        "cols": grid.cols,
        "cells": [
            {
                "id": cid,
                "row": r,
                "col": c,
                "row_span": rs,
                "col_span": cs,
                "text": texts.get(cid, ""),
            }
            for cid, r, c, rs, cs in grid.iter_cells()
        ],
    }
