"""Table data model and logical/matrix/markup conversions."""

from .convert import (
    logical_to_markup,
    logical_to_matrix,
    markup_size,
    markup_to_logical,
    matrix_to_markup,
    normalize_markup,
    normalize_table,
    serialize,
    tree_from_markup,
)
from .model import (
    EMPTY,
    MERGED,
    Anchor,
    Empty,
    LogicalCell,
    LogicalTable,
    MarkupNode,
    MarkupTree,
    Merged,
    TableMatrix,
)
from .parser import parse_markup
