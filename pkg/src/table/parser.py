"""Markup parser for the table/tr/td subset used by TEDS."""

import logging
from html.parser import HTMLParser
from typing import List, Optional

from ..errors import EmptyError, ParseError
from .model import MarkupNode, MarkupTree

logger = logging.getLogger(__name__)

WRAPPER_TAGS = {"thead", "tbody", "tfoot"}
CELL_TAGS = {"td", "th"}
SPAN_ATTRS = ("rowspan", "colspan")


class _CellBuilder:
    def __init__(self, rowspan: int, colspan: int):
        self.rowspan = rowspan
        self.colspan = colspan
        self.text: List[str] = []

    def build(self, strip: bool) -> MarkupNode:
        content = "".join(self.text)
        return MarkupNode("td", (), self.rowspan, self.colspan, content.strip() if strip else content)


class TableMarkupParser(HTMLParser):
    """Event-driven parser building a normalized MarkupTree.

    Strict mode raises ParseError on the first structural problem; lenient
    mode repairs it (auto-open or auto-close) and records a repair event.
    """

    def __init__(self, lenient: bool = False, strip_content: bool = False):
        super().__init__(convert_charrefs=True)
        self.lenient = lenient
        self.strip_content = strip_content
        self.warnings: List[str] = []
        self.repairs: List[str] = []
        self.rows: List[List[MarkupNode]] = []
        self._row: Optional[List[MarkupNode]] = None
        self._cell: Optional[_CellBuilder] = None
        self._table_seen = False
        self._in_table = False
        self._done = False

    # Structural helpers

    def _problem(self, message: str) -> None:
        if not self.lenient:
            raise ParseError(message)
        self.repairs.append(message)

    def _close_cell(self) -> None:
        self._row.append(self._cell.build(self.strip_content))
        self._cell = None

    def _close_row(self) -> None:
        self.rows.append(self._row)
        self._row = None

    def _span(self, name: str, value: Optional[str]) -> int:
        try:
            span = int(str(value).strip().strip("\"'"))
        except ValueError:
            span = 0
        if span < 1:
            self._problem(f"invalid {name}={value!r}, using 1")
            return 1
        return span

    # HTMLParser callbacks

    def handle_starttag(self, tag, attrs):
        if self._done:
            return
        if tag == "table":
            if self._in_table:
                self.warnings.append("nested <table> dropped")
                return
            self._table_seen = True
            self._in_table = True
            return
        if not self._in_table or tag in WRAPPER_TAGS:
            return

        if tag == "tr":
            if self._cell is not None:
                self._problem("<tr> opened inside an open <td>; closing the cell")
                self._close_cell()
            if self._row is not None:
                self._problem("<tr> opened inside an open <tr>; closing the row")
                self._close_row()
            self._row = []
        elif tag in CELL_TAGS:
            if tag == "th":
                self.warnings.append("<th> read as <td>")
            if self._cell is not None:
                self._problem("<td> opened inside an open <td>; closing the cell")
                self._close_cell()
            if self._row is None:
                self._problem("<td> outside <tr>; opening a row")
                self._row = []
            spans = {"rowspan": 1, "colspan": 1}
            for name, value in attrs:
                if name in SPAN_ATTRS:
                    spans[name] = self._span(name, value)
                else:
                    self.warnings.append(f"attribute {name!r} on <{tag}> dropped")
            self._cell = _CellBuilder(spans["rowspan"], spans["colspan"])
        else:
            self.warnings.append(f"tag <{tag}> dropped")

    def handle_startendtag(self, tag, attrs):
        self.handle_starttag(tag, attrs)
        if tag in CELL_TAGS and self._cell is not None:
            self._close_cell()

    def handle_endtag(self, tag):
        if self._done or not self._in_table or tag in WRAPPER_TAGS:
            return
        if tag in CELL_TAGS:
            if self._cell is None:
                self._problem(f"stray </{tag}> ignored")
                return
            self._close_cell()
        elif tag == "tr":
            if self._row is None:
                self._problem("stray </tr> ignored")
                return
            if self._cell is not None:
                self._problem("</tr> closes an open <td>")
                self._close_cell()
            self._close_row()
        elif tag == "table":
            self._finish("</table>")
        else:
            self.warnings.append(f"tag </{tag}> dropped")

    def handle_data(self, data):
        if self._done or not self._in_table:
            return
        if self._cell is not None:
            self._cell.text.append(data)
        elif data.strip():
            self.warnings.append(f"text outside cells dropped: {data.strip()[:20]!r}")

    def _finish(self, where: str) -> None:
        if self._cell is not None:
            self._problem(f"{where} closes an open <td>")
            self._close_cell()
        if self._row is not None:
            self._problem(f"{where} closes an open <tr>")
            self._close_row()
        self._in_table = False
        self._done = True

    def tree(self) -> MarkupTree:
        self.close()
        if not self._table_seen:
            raise EmptyError("no <table> element found")
        if not self._done:
            self._finish("end of input")
        root = MarkupNode("table", tuple(MarkupNode("tr", tuple(row)) for row in self.rows))
        return MarkupTree(root=root, warnings=tuple(self.warnings), repairs=tuple(self.repairs))


def parse_markup(text: str, lenient: bool = False, strip_content: bool = False) -> MarkupTree:
    """
    Parse a markup sequence into a MarkupTree.

    Args:
        text: Serialized table markup
        lenient: Repair unbalanced tags instead of raising
        strip_content: Trim whitespace around cell text

    Returns:
        Normalized MarkupTree with warnings and repair events attached
    """
    if not text or not text.strip():
        raise EmptyError("empty markup")

    parser = TableMarkupParser(lenient=lenient, strip_content=strip_content)
    parser.feed(text)
    tree = parser.tree()

    if tree.warnings:
        logger.debug("markup parsed with %d warnings", len(tree.warnings))
    if tree.repairs:
        logger.debug("markup repaired %d times", len(tree.repairs))
    return tree
