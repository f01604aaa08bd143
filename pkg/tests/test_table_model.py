"""Tests for the logical/matrix/markup table representations."""

import json
import random

import pytest

from src.errors import CellIndexError, EmptyError, OverlapError, ParseError
from src.table.convert import (
    logical_to_markup,
    logical_to_matrix,
    markup_size,
    markup_to_logical,
    matrix_to_markup,
    normalize_markup,
    normalize_table,
    tree_from_markup,
)
from src.table.io import GroundTruth, read_ground_truth, read_markup_records, write_ground_truth
from src.table.model import EMPTY, MERGED, Anchor, LogicalCell, LogicalTable, MarkupTree, TableMatrix
from src.table.parser import parse_markup
from src.table.synthetic import random_logical_table


def table_of(*cells, table_id=""):
    return LogicalTable(cells=tuple(LogicalCell(*c) for c in cells), id=table_id)


def test_matrix_of_spanning_header(example_table):
    matrix = logical_to_matrix(example_table)
    assert matrix.rows == (
        (Anchor(1, 2, "A"), MERGED),
        (Anchor(1, 1, "B"), Anchor(1, 1, "C")),
    )


def test_matrix_single_cell():
    matrix = logical_to_matrix(table_of((0, 0, 0, 0, "x")))
    assert matrix.rows == ((Anchor(1, 1, "x"),),)


def test_matrix_marks_uncovered_positions_empty():
    matrix = logical_to_matrix(table_of((0, 1, 0, 0, "A"), (0, 0, 1, 1, "B")))
    assert matrix.rows == (
        (Anchor(2, 1, "A"), Anchor(1, 1, "B")),
        (MERGED, EMPTY),
    )
    assert matrix.count(type(EMPTY)) == 1


def test_overlapping_cells_are_rejected():
    with pytest.raises(OverlapError):
        logical_to_matrix(table_of((0, 1, 0, 1, "big"), (1, 1, 1, 1, "clash")))


def test_negative_index_is_rejected():
    with pytest.raises(CellIndexError):
        logical_to_matrix(table_of((0, 0, -1, 0, "x")))
    # also usable as a plain IndexError
    with pytest.raises(IndexError):
        LogicalCell(2, 1, 0, 0).validate()


def test_markup_of_matrix(example_table):
    assert matrix_to_markup(logical_to_matrix(example_table)) == (
        "<table><tr><td rowspan=1 colspan=2>A</td></tr>"
        "<tr><td rowspan=1 colspan=1>B</td><td rowspan=1 colspan=1>C</td></tr></table>"
    )


def test_markup_trivial_cells():
    assert matrix_to_markup(TableMatrix(rows=((Anchor(1, 1, "x"),),))) == (
        "<table><tr><td rowspan=1 colspan=1>x</td></tr></table>"
    )
    assert matrix_to_markup(TableMatrix(rows=((Anchor(1, 1, ""),),))) == (
        "<table><tr><td rowspan=1 colspan=1></td></tr></table>"
    )


def test_markup_escapes_content():
    markup = logical_to_markup(table_of((0, 0, 0, 0, "a<b & c")))
    assert "a&lt;b &amp; c" in markup
    back = markup_to_logical(parse_markup(markup))
    assert back.cells[0].content == "a<b & c"


def test_parse_minimal_table():
    tree = parse_markup("<table><tr><td>a</td></tr></table>")
    assert tree == MarkupTree.from_rows([[(1, 1, "a")]])
    assert tree.size() == 3


def test_parse_colspan_attribute():
    tree = parse_markup('<table><tr><td colspan="2">a</td></tr></table>')
    td = tree.rows[0].children[0]
    assert (td.rowspan, td.colspan) == (1, 2)


def test_lenient_parse_repairs_unclosed_cell():
    broken = "<table><tr><td>a</tr></table>"
    tree = parse_markup(broken, lenient=True)
    assert tree == parse_markup("<table><tr><td>a</td></tr></table>")
    assert len(tree.repairs) == 1

    with pytest.raises(ParseError):
        parse_markup(broken)


def test_parse_flattens_wrappers_and_headers():
    tree = parse_markup("<table><thead><tr><th>h</th></tr></thead><tbody><tr><td>v</td></tr></tbody></table>")
    assert tree == MarkupTree.from_rows([[(1, 1, "h")], [(1, 1, "v")]])
    assert any("<th>" in warning for warning in tree.warnings)


def test_parse_without_table():
    with pytest.raises(EmptyError):
        parse_markup("")
    with pytest.raises(EmptyError):
        parse_markup("<div>no table here</div>")
    assert tree_from_markup("just prose") is None


def test_markup_to_logical_resolves_rowspan():
    tree = parse_markup("<table><tr><td rowspan=2>A</td><td>B</td></tr><tr><td>C</td></tr></table>")
    assert markup_to_logical(tree).cells == (
        LogicalCell(0, 1, 0, 0, "A"),
        LogicalCell(0, 0, 1, 1, "B"),
        LogicalCell(1, 1, 1, 1, "C"),
    )


def test_markup_to_logical_single_cell():
    tree = parse_markup("<table><tr><td>x</td></tr></table>")
    assert markup_to_logical(tree).cells == (LogicalCell(0, 0, 0, 0, "x"),)


def test_round_trip_fixture(example_table):
    tree = parse_markup(logical_to_markup(example_table))
    assert markup_to_logical(tree, example_table.id) == example_table


def test_round_trip_random_layouts():
    """logical -> matrix -> markup -> tree -> logical is the identity."""
    rng = random.Random(7)
    for index in range(500):
        table = random_logical_table(rng, table_id=f"t{index}")
        back = markup_to_logical(parse_markup(logical_to_markup(table)), table.id)
        assert back == table.sorted(), f"layout {index} did not survive the round trip"


def test_normalize_table_fills_gaps():
    table = normalize_table(table_of((0, 0, 0, 0, "x"), (1, 1, 1, 1, "y")))
    assert [c.as_tuple() for c in table.cells] == [
        (0, 0, 0, 0, "x"),
        (0, 0, 1, 1, ""),
        (1, 1, 0, 0, ""),
        (1, 1, 1, 1, "y"),
    ]


def test_normalize_markup_drops_unit_spans():
    assert normalize_markup("<table><tr><td rowspan=1 colspan=2>A</td></tr></table>") == (
        "<table><tr><td colspan=2>A</td></tr></table>"
    )


def test_ground_truth_file_round_trip(tmp_path, example_table):
    samples = [GroundTruth(id="example", image_path="images/example.png", table=example_table, traits="ruled")]
    path = tmp_path / "gold.jsonl"
    write_ground_truth(samples, path)
    with open(path, "a", encoding="utf-8") as f:
        f.write("{not json\n")
        f.write('{"id": "no-cells", "image_path": "x.png"}\n')

    loaded, skipped = read_ground_truth(path)
    assert skipped == 2
    assert len(loaded) == 1
    assert loaded[0].table == example_table
    assert loaded[0].traits == "ruled"
    assert loaded[0].image_path == str(tmp_path / "images" / "example.png")
    assert loaded[0].missing_image
    assert loaded[0].gold_markup == logical_to_markup(example_table)


def test_colspan_alone_sets_the_table_width():
    table = table_of((0, 0, 0, 1, "A"), table_id="wide")
    markup = logical_to_markup(table)
    assert markup == "<table><tr><td rowspan=1 colspan=2>A</td></tr></table>"
    assert markup_to_logical(parse_markup(markup), "wide") == table


def test_markup_size():
    assert markup_size("<table><tr><td colspan=3>a</td></tr><tr><td>b</td></tr></table>") == (2, 3)
    assert markup_size("<table><tr><td rowspan=3>a</td></tr></table>") is None
    assert markup_size("no table here") is None
    assert markup_size(None) is None


def test_read_markup_records(tmp_path, example_table):
    path = tmp_path / "markup.jsonl"
    canonical = GroundTruth(id="canonical", image_path="c.png", table=example_table).to_dict()
    path.write_text("\n".join([
        '{"id": "plain", "markup": "<table><tr><td>a</td></tr></table>"}',
        '{"id": "blank", "markup": null}',
        json.dumps(canonical),
        '{"markup": "<table></table>"}',
        "{oops",
    ]) + "\n")

    records, skipped = read_markup_records(path)
    assert skipped == 2
    assert records == {
        "plain": "<table><tr><td>a</td></tr></table>",
        "blank": "",
        "canonical": logical_to_markup(example_table),
    }
