"""Random table layouts for property tests and synthetic corpora."""

import random
from typing import List, Optional

from .model import LogicalCell, LogicalTable

WORDS = (
    "Total", "Mean", "Model", "Score", "Year", "Group", "Value", "Count",
    "Rate", "Item", "Dose", "Age", "Cost", "Size", "Gain", "Loss",
)


def random_logical_table(
    rng: random.Random,
    max_rows: int = 10,
    max_cols: int = 10,
    merge_prob: float = 0.2,
    table_id: str = "",
    words: Optional[List[str]] = None,
) -> LogicalTable:
    """
    Tile a random grid with non-overlapping cells.

    Every grid position is covered, so the result is already normalized.
    """
    n_rows = rng.randint(1, max_rows)
    n_cols = rng.randint(1, max_cols)
    vocabulary = list(words or WORDS)
    taken = [[False] * n_cols for _ in range(n_rows)]
    cells: List[LogicalCell] = []

    for r in range(n_rows):
        for c in range(n_cols):
            if taken[r][c]:
                continue
            height, width = 1, 1
            if rng.random() < merge_prob:
                height = rng.randint(1, min(3, n_rows - r))
                width = rng.randint(1, min(3, n_cols - c))
                # shrink until the rectangle is free
                while any(taken[rr][cc] for rr in range(r, r + height) for cc in range(c, c + width)):
                    if width > 1:
                        width -= 1
                    else:
                        height -= 1
            for rr in range(r, r + height):
                for cc in range(c, c + width):
                    taken[rr][cc] = True
            content = f"{rng.choice(vocabulary)} {rng.randint(0, 999)}" if rng.random() > 0.1 else ""
            cells.append(LogicalCell(r, r + height - 1, c, c + width - 1, content))

    return LogicalTable(cells=tuple(cells), id=table_id)
