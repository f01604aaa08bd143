"""Conversions between logical location, data matrix and markup sequence."""

import html
from typing import Dict, List, Optional, Tuple

from ..errors import GeometryError, OverlapError, TableModelError
from .model import (
    EMPTY,
    MERGED,
    Anchor,
    LogicalCell,
    LogicalTable,
    MarkupTree,
    MatrixEntry,
    TableMatrix,
)
from .parser import parse_markup


def escape_content(text: str) -> str:
    """Escape <, > and &; every other character passes through."""
    return html.escape(text, quote=False)


def _td(rowspan: int, colspan: int, content: str, unit_spans: bool = True) -> str:
    attrs = ""
    if unit_spans or rowspan != 1:
        attrs += f" rowspan={rowspan}"
    if unit_spans or colspan != 1:
        attrs += f" colspan={colspan}"
    return f"<td{attrs}>{escape_content(content)}</td>"


def logical_to_matrix(table: LogicalTable) -> TableMatrix:
    """
    Place every cell of a logical table into a data matrix.

    The anchor goes to (start_row, start_col); all other covered positions are
    marked merged; positions no cell claims stay empty.
    """
    for cell in table.cells:
        cell.validate()

    n_rows, n_cols = table.shape
    grid: List[List[MatrixEntry]] = [[EMPTY] * n_cols for _ in range(n_rows)]
    owner: Dict[Tuple[int, int], LogicalCell] = {}

    for cell in table.cells:
        for row, col in cell.positions():
            if (row, col) in owner:
                raise OverlapError(
                    f"cells {owner[(row, col)].as_tuple()} and {cell.as_tuple()} both claim ({row}, {col})"
                )
            owner[(row, col)] = cell
            if row == cell.start_row and col == cell.start_col:
                grid[row][col] = Anchor(cell.rowspan, cell.colspan, cell.content)
            else:
                grid[row][col] = MERGED

    return TableMatrix(rows=grid)


def matrix_to_markup(matrix: TableMatrix) -> str:
    """Serialize a data matrix row by row; merged entries are skipped."""
    parts = ["<table>"]
    for row in matrix.rows:
        parts.append("<tr>")
        for entry in row:
            if entry == MERGED:
                continue
            if isinstance(entry, Anchor):
                parts.append(_td(entry.rowspan, entry.colspan, entry.content))
            else:
                # unclaimed position keeps the grid geometry
                parts.append(_td(1, 1, ""))
        parts.append("</tr>")
    parts.append("</table>")
    return "".join(parts)


def logical_to_markup(table: LogicalTable) -> str:
    return matrix_to_markup(logical_to_matrix(table))


def serialize(tree: MarkupTree, unit_spans: bool = True) -> str:
    """Serialize a markup tree; unit_spans=False drops rowspan/colspan of 1."""
    parts = ["<table>"]
    for row in tree.rows:
        parts.append("<tr>")
        parts.extend(_td(td.rowspan, td.colspan, td.content, unit_spans) for td in row.children)
        parts.append("</tr>")
    parts.append("</table>")
    return "".join(parts)


def normalize_markup(text: str, lenient: bool = True) -> str:
    """Reparse and emit attribute-free simple cells."""
    return serialize(parse_markup(text, lenient=lenient), unit_spans=False)


def markup_to_logical(tree: MarkupTree, table_id: str = "") -> LogicalTable:
    """
    Resolve spans of a markup tree into logical locations.

    Each td takes the leftmost free column of its row; positions covered by
    earlier rowspans are skipped.
    """
    occupied: Dict[Tuple[int, int], bool] = {}
    cells: List[LogicalCell] = []
    n_rows = len(tree.rows)

    for row_index, row in enumerate(tree.rows):
        col = 0
        for td in row.children:
            while occupied.get((row_index, col)):
                col += 1
            end_row = row_index + td.rowspan - 1
            end_col = col + td.colspan - 1
            if end_row >= n_rows:
                raise GeometryError(
                    f"rowspan {td.rowspan} at row {row_index} overflows the {n_rows}-row table"
                )
            for r in range(row_index, end_row + 1):
                for c in range(col, end_col + 1):
                    if occupied.get((r, c)):
                        raise GeometryError(f"span collision at ({r}, {c})")
                    occupied[(r, c)] = True
            cells.append(LogicalCell(row_index, end_row, col, end_col, td.content))
            col = end_col + 1

    return LogicalTable(cells=tuple(cells), id=table_id).sorted()


def normalize_table(table: LogicalTable) -> LogicalTable:
    """Fill uncovered grid positions with empty 1x1 cells, row-major order."""
    covered = {pos for cell in table.cells for pos in cell.positions()}
    n_rows, n_cols = table.shape
    fillers = [
        LogicalCell(r, r, c, c, "")
        for r in range(n_rows)
        for c in range(n_cols)
        if (r, c) not in covered
    ]
    return LogicalTable(cells=tuple(table.cells) + tuple(fillers), id=table.id).sorted()


def markup_tree_of(table: LogicalTable) -> MarkupTree:
    return parse_markup(logical_to_markup(table))


def tree_from_markup(text: Optional[str], lenient: bool = True) -> Optional[MarkupTree]:
    """Parse markup, returning None when no table can be recovered."""
    if not text or not text.strip():
        return None
    try:
        return parse_markup(text, lenient=lenient)
    except TableModelError:
        return None


def markup_size(text: Optional[str]) -> Optional[Tuple[int, int]]:
    """(rows, cols) of the logical table a markup string resolves to, or None."""
    tree = tree_from_markup(text)
    if tree is None:
        return None
    try:
        return markup_to_logical(tree).shape
    except TableModelError:
        return None
