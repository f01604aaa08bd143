"""Table data representations: logical cells, data matrix and markup tree."""

from dataclasses import dataclass, field
from typing import List, Optional, Tuple, Union

from ..errors import CellIndexError


@dataclass(frozen=True)
class LogicalCell:
    """A cell given by its logical location (0-based, inclusive ends)."""
    start_row: int
    end_row: int
    start_col: int
    end_col: int
    content: str = ""

    @property
    def rowspan(self) -> int:
        return 1 + self.end_row - self.start_row

    @property
    def colspan(self) -> int:
        return 1 + self.end_col - self.start_col

    @property
    def is_merged(self) -> bool:
        return self.rowspan > 1 or self.colspan > 1

    def positions(self):
        """Yield every (row, col) the cell covers, anchor first."""
        for row in range(self.start_row, self.end_row + 1):
            for col in range(self.start_col, self.end_col + 1):
                yield row, col

    def validate(self) -> None:
        if min(self.start_row, self.end_row, self.start_col, self.end_col) < 0:
            raise CellIndexError(f"negative index in cell {self.as_tuple()}")
        if self.start_row > self.end_row or self.start_col > self.end_col:
            raise CellIndexError(f"start after end in cell {self.as_tuple()}")

    def as_tuple(self) -> Tuple[int, int, int, int, str]:
        return (self.start_row, self.end_row, self.start_col, self.end_col, self.content)

    def to_dict(self) -> dict:
        return {
            "start_row": self.start_row,
            "end_row": self.end_row,
            "start_col": self.start_col,
            "end_col": self.end_col,
            "content": self.content,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "LogicalCell":
        return cls(
            start_row=int(data["start_row"]),
            end_row=int(data["end_row"]),
            start_col=int(data["start_col"]),
            end_col=int(data["end_col"]),
            content=str(data.get("content") or ""),
        )


@dataclass(frozen=True)
class LogicalTable:
    """Ordered cell list of one sample."""
    cells: Tuple[LogicalCell, ...]
    id: str = ""

    def __post_init__(self):
        object.__setattr__(self, "cells", tuple(self.cells))

    @property
    def n_rows(self) -> int:
        return 1 + max((c.end_row for c in self.cells), default=-1)

    @property
    def n_cols(self) -> int:
        return 1 + max((c.end_col for c in self.cells), default=-1)

    @property
    def shape(self) -> Tuple[int, int]:
        return self.n_rows, self.n_cols

    def sorted(self) -> "LogicalTable":
        """Row-major ordering by (start_row, start_col)."""
        return LogicalTable(
            cells=tuple(sorted(self.cells, key=lambda c: (c.start_row, c.start_col))),
            id=self.id,
        )

    def cell_at(self, row: int, col: int) -> Optional[LogicalCell]:
        """Cell covering (row, col); merged positions resolve to their anchor."""
        for cell in self.cells:
            if cell.start_row <= row <= cell.end_row and cell.start_col <= col <= cell.end_col:
                return cell
        return None


@dataclass(frozen=True)
class Anchor:
    """Top-left entry of a cell in the data matrix."""
    rowspan: int
    colspan: int
    content: str = ""


@dataclass(frozen=True)
class Merged:
    """Position covered by an anchor elsewhere in the matrix."""


@dataclass(frozen=True)
class Empty:
    """Position not claimed by any cell."""


MatrixEntry = Union[Anchor, Merged, Empty]
MERGED = Merged()
EMPTY = Empty()


@dataclass(frozen=True)
class TableMatrix:
    """Grid of matrix entries, (max_row + 1) x (max_col + 1)."""
    rows: Tuple[Tuple[MatrixEntry, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(tuple(r) for r in self.rows))

    @property
    def shape(self) -> Tuple[int, int]:
        return len(self.rows), (len(self.rows[0]) if self.rows else 0)

    def count(self, kind: type) -> int:
        return sum(isinstance(entry, kind) for row in self.rows for entry in row)


TABLE_TAGS = ("table", "tr", "td")


@dataclass(frozen=True)
class MarkupNode:
    """Node of a markup tree; td nodes are leaves carrying spans and text."""
    tag: str
    children: Tuple["MarkupNode", ...] = ()
    rowspan: int = 1
    colspan: int = 1
    content: str = ""

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))

    def size(self) -> int:
        return 1 + sum(child.size() for child in self.children)

    def iter_nodes(self):
        yield self
        for child in self.children:
            yield from child.iter_nodes()

    def without_content(self) -> "MarkupNode":
        return MarkupNode(
            tag=self.tag,
            children=tuple(c.without_content() for c in self.children),
            rowspan=self.rowspan,
            colspan=self.colspan,
            content="",
        )


@dataclass(frozen=True)
class MarkupTree:
    """Rooted table -> tr -> td tree plus the parser's diagnostics."""
    root: MarkupNode
    warnings: Tuple[str, ...] = field(default=(), compare=False)
    repairs: Tuple[str, ...] = field(default=(), compare=False)

    @property
    def rows(self) -> Tuple[MarkupNode, ...]:
        return self.root.children

    def size(self) -> int:
        return self.root.size()

    def cell_count(self) -> int:
        return sum(len(row.children) for row in self.rows)

    @classmethod
    def from_rows(cls, rows: List[List[Tuple[int, int, str]]]) -> "MarkupTree":
        """Build a tree from rows of (rowspan, colspan, content) triples."""
        return cls(
            root=MarkupNode(
                "table",
                tuple(
                    MarkupNode("tr", tuple(MarkupNode("td", (), rs, cs, text) for rs, cs, text in row))
                    for row in rows
                ),
            )
        )
