"""Draw a LogicalTable as a bordered table image."""

from dataclasses import dataclass

import cv2
import numpy as np

from ..table.convert import normalize_table
from ..table.model import LogicalTable
from .image import TableImage


@dataclass(frozen=True)
class RenderStyle:
    cell_width: int = 96
    cell_height: int = 36
    margin: int = 24
    line_thickness: int = 1
    font_scale: float = 0.45
    ink: int = 0
    background: int = 255
    borders: bool = True


def render_table(table: LogicalTable, style: RenderStyle = RenderStyle(), image_id: str = "") -> TableImage:
    """
    Rasterize a table: one box per anchor cell, text left-aligned in the box.

    Args:
        table: Layout to draw; uncovered positions are drawn as empty cells
        style: Geometry and colors
        image_id: Id of the returned image (defaults to the table id)

    Returns:
        Grayscale TableImage with a single "render" provenance entry
    """
    table = normalize_table(table)
    rows, cols = max(1, table.n_rows), max(1, table.n_cols)
    height = 2 * style.margin + rows * style.cell_height
    width = 2 * style.margin + cols * style.cell_width
    canvas = np.full((height, width), style.background, dtype=np.uint8)

    for cell in table.cells:
        x0 = style.margin + cell.start_col * style.cell_width
        y0 = style.margin + cell.start_row * style.cell_height
        x1 = style.margin + (cell.end_col + 1) * style.cell_width
        y1 = style.margin + (cell.end_row + 1) * style.cell_height
        if style.borders:
            cv2.rectangle(canvas, (x0, y0), (x1, y1), style.ink, style.line_thickness, lineType=cv2.LINE_8)
        if cell.content:
            baseline = y0 + (y1 - y0) // 2 + 5
            cv2.putText(canvas, cell.content, (x0 + 6, baseline), cv2.FONT_HERSHEY_SIMPLEX,
                        style.font_scale, style.ink, 1, lineType=cv2.LINE_8)

    image = TableImage(pixels=canvas, id=image_id or table.id)
    return image.derive(canvas, "render", rows=rows, cols=cols, cell_width=style.cell_width,
                        cell_height=style.cell_height, line_thickness=style.line_thickness)
