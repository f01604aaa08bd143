"""Tests for the tree edit distance, TEDS and the task metrics."""

import random
from functools import lru_cache

import pytest

from src.errors import DegenerateError
from src.metrics.scores import exact_accuracy, f1_counts, micro_f1, normalize_text
from src.metrics.teds import CostModel, TedsMode, content_distance, teds, teds_markup, tree_edit_distance
from src.table.convert import markup_tree_of
from src.table.model import LogicalCell, LogicalTable, MarkupNode, MarkupTree
from src.table.parser import parse_markup
from src.table.synthetic import random_logical_table

MINIMAL = "<table><tr><td>a</td></tr></table>"


def naive_distance(a: MarkupTree, b: MarkupTree, cost: CostModel) -> float:
    """Exhaustive forest edit distance on rightmost roots, memoized."""

    @lru_cache(maxsize=None)
    def forest(f, g):
        if not f and not g:
            return 0.0
        if not f:
            return float(sum(node.size() for node in g))
        if not g:
            return float(sum(node.size() for node in f))
        v, w = f[-1], g[-1]
        return min(
            forest(f[:-1] + v.children, g) + 1.0,
            forest(f, g[:-1] + w.children) + 1.0,
            forest(v.children, w.children) + forest(f[:-1], g[:-1]) + cost.substitute(v, w),
        )

    return forest((a.root,), (b.root,))


def test_identical_trees():
    tree = parse_markup(MINIMAL)
    assert tree_edit_distance(tree, tree) == 0.0
    assert teds(tree, tree).value == 1.0


def test_table_only_tree_needs_two_insertions():
    bare = MarkupNode("table")
    tree = parse_markup(MINIMAL)
    assert tree_edit_distance(bare, tree) == pytest.approx(2.0)

    score = teds(bare, tree)
    assert score.value == pytest.approx(1 - 2 / 3)
    assert (score.size_a, score.size_b) == (1, 3)


def test_content_substitution_is_normalized_levenshtein():
    a = parse_markup("<table><tr><td>abc</td></tr></table>")
    b = parse_markup("<table><tr><td>abd</td></tr></table>")
    assert tree_edit_distance(a, b) == pytest.approx(1 / 3)
    assert content_distance("", "") == 0.0


def test_struct_mode_ignores_content():
    a = parse_markup("<table><tr><td>left</td><td>x</td></tr></table>")
    b = parse_markup("<table><tr><td>right</td><td>x</td></tr></table>")
    assert teds(a, b, TedsMode.STRUCT).value == 1.0
    assert teds(a, b, TedsMode.FULL).value < 1.0


def test_span_mismatch_costs_one():
    a = parse_markup("<table><tr><td colspan=2>x</td></tr></table>")
    b = parse_markup("<table><tr><td>x</td></tr></table>")
    assert tree_edit_distance(a, b, CostModel(mode=TedsMode.STRUCT)) == pytest.approx(1.0)


def test_missing_prediction_scores_zero():
    gold = parse_markup(MINIMAL)
    assert teds(None, gold).value == 0.0
    assert teds_markup("I cannot see a table.", MINIMAL).value == 0.0
    with pytest.raises(DegenerateError):
        teds(None, None)


def test_distance_matches_exhaustive_oracle():
    rng = random.Random(11)
    words = ["a", "ab", "b", ""]
    for mode in (TedsMode.FULL, TedsMode.STRUCT):
        cost = CostModel(mode=mode)
        for _ in range(100):
            a = markup_tree_of(random_logical_table(rng, 3, 3, merge_prob=0.3, words=words))
            b = markup_tree_of(random_logical_table(rng, 3, 3, merge_prob=0.3, words=words))
            assert tree_edit_distance(a, b, cost) == pytest.approx(naive_distance(a, b, cost))


def test_teds_is_symmetric_and_bounded():
    rng = random.Random(5)
    for _ in range(100):
        a = markup_tree_of(random_logical_table(rng, 4, 4))
        b = markup_tree_of(random_logical_table(rng, 4, 4))
        forward, backward = teds(a, b), teds(b, a)
        assert forward.value == pytest.approx(backward.value)
        assert 0.0 <= forward.value <= 1.0


def test_micro_f1():
    assert micro_f1(["a", "b", "c"], ["a", "b", "c"]) == 1.0
    assert micro_f1(["a", "b"], ["a", "b", "c"]) == pytest.approx(0.8)
    assert micro_f1([], ["a"]) == 0.0


def test_f1_matches_duplicates_as_multisets():
    counts = f1_counts(["x", "x", "y"], ["x", "y", "y"])
    assert (counts.tp, counts.fp, counts.fn) == (2, 1, 1)


def test_exact_accuracy():
    assert exact_accuracy((4, 5), (4, 5)) == 1
    assert exact_accuracy((4, 5), (5, 5)) == 0
    assert exact_accuracy(" Total ", "Total") == 1
    assert exact_accuracy(None, "Total") == 0


def test_normalize_text():
    assert normalize_text("  Mean \n\t 42 ") == "Mean 42"
    assert normalize_text("MEAN", casefold=True) == "mean"


def test_every_tree_matches_itself():
    rng = random.Random(21)
    for index in range(60):
        tree = markup_tree_of(random_logical_table(rng, 6, 6, table_id=f"t{index}"))
        assert teds(tree, tree).value == 1.0


def test_struct_mode_is_invariant_to_content_rewrites():
    rng = random.Random(8)
    for _ in range(50):
        table = random_logical_table(rng, 5, 5)
        rewritten = LogicalTable(
            cells=tuple(LogicalCell(*cell.as_tuple()[:4], rng.choice(["", "x", "Total 9"])) for cell in table.cells),
            id=table.id,
        )
        assert teds(markup_tree_of(table), markup_tree_of(rewritten), TedsMode.STRUCT).value == 1.0


def rewrite_contents(table: LogicalTable, rng: random.Random) -> LogicalTable:
    return LogicalTable(
        cells=tuple(LogicalCell(*cell.as_tuple()[:4], rng.choice(["", "x", "Total 9", "ünïcode"])) for cell in table.cells),
        id=table.id,
    )


def test_struct_score_ignores_content_rewrites_of_either_tree():
    rng = random.Random(17)
    for _ in range(100):
        a = random_logical_table(rng, 5, 5, merge_prob=0.3)
        b = random_logical_table(rng, 5, 5, merge_prob=0.3)
        expected = teds(markup_tree_of(a), markup_tree_of(b), TedsMode.STRUCT).value
        for left, right in ((rewrite_contents(a, rng), b), (a, rewrite_contents(b, rng)),
                            (rewrite_contents(a, rng), rewrite_contents(b, rng))):
            assert teds(markup_tree_of(left), markup_tree_of(right), TedsMode.STRUCT).value == pytest.approx(expected)
