import pytest

from wordgrid.errors import StructureError, ValidationError
from wordgrid.model import CellGrid, GroundTruthTable, WordBox


class TestWordBox:
    def test_basic_properties(self):
        w = WordBox(id=1, x_min=10, y_min=20, x_max=30, y_max=40, text="hi")
        assert w.width == 20
        assert w.height == 20
        assert w.center_x == 20
        assert w.center_y == 30
        assert w.bounds == (10, 20, 30, 40)

    @pytest.mark.parametrize("bounds", [(10, 0, 10, 5), (10, 0, 5, 5), (0, 10, 5, 10), (0, 10, 5, 4)])
    def test_degenerate_box_rejected(self, bounds):
        x0, y0, x1, y1 = bounds
        with pytest.raises(ValidationError):
            WordBox(id=0, x_min=x0, y_min=y0, x_max=x1, y_max=y1)


class TestCellGrid:
    def test_from_cells_plain(self):
        grid = CellGrid.from_cells(2, 2, [(0, 0, 0, 1, 1), (1, 0, 1, 1, 1), (2, 1, 0, 1, 1), (3, 1, 1, 1, 1)])
        assert grid.rows == 2 and grid.cols == 2
        assert grid.cell_ids() == [0, 1, 2, 3]

    def test_from_cells_span_and_blank(self):
        grid = CellGrid.from_cells(2, 2, [(7, 0, 0, 1, 2), (8, 1, 0, 1, 1)])
        assert grid.slots == [[7, 7], [8, None]]
        assert grid.cell_rect(7) == (0, 0, 1, 2)
        assert grid.cell_rows(7) == {0}
        assert grid.cell_cols(7) == {0, 1}
        assert grid.is_blank(1, 1)

    def test_overlapping_claims_rejected(self):
        with pytest.raises(StructureError):
            CellGrid.from_cells(2, 2, [(0, 0, 0, 2, 2), (1, 1, 1, 1, 1)])

    def test_non_rectangular_cell_rejected(self):
        grid = CellGrid([[0, 0], [0, None]])
        with pytest.raises(StructureError):
            grid.validate()

    def test_ragged_rows_rejected(self):
        with pytest.raises(StructureError):
            CellGrid([[0, 1], [2]]).validate()

    def test_empty_grid_rejected(self):
        with pytest.raises(StructureError):
            CellGrid([]).validate()

    def test_same_structure_up_to_renaming(self):
        a = CellGrid([[5, 5], [6, 7]])
        b = CellGrid([[0, 0], [1, 2]])
        c = CellGrid([[0, 1], [2, 2]])
        assert a.same_structure(b)
        assert not a.same_structure(c)

    def test_renumbered_reading_order(self):
        grid = CellGrid([[9, 9, 4], [7, 1, 4]])
        assert grid.renumbered().slots == [[0, 0, 1], [2, 3, 1]]

    def test_without_blank_lines(self):
        grid = CellGrid([[None, None], [0, 1], [None, None]])
        assert grid.without_blank_lines().slots == [[0, 1]]


class TestGroundTruthTable:
    def test_validate_catches_unknown_cell(self):
        grid = CellGrid([[0, 1]])
        table = GroundTruthTable(grid=grid, cell_texts={0: "a", 5: "x"})
        with pytest.raises(StructureError):
            table.validate()

    def test_validate_catches_bad_word_assignment(self):
        grid = CellGrid([[0, 1]])
        words = [WordBox(id=0, x_min=0, y_min=0, x_max=5, y_max=5)]
        table = GroundTruthTable(
            grid=grid, cell_texts={0: "a", 1: "b"}, word_boxes=words, word_cells={0: 9}
        )
        with pytest.raises(StructureError):
            table.validate()
