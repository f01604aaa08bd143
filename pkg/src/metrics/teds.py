"""Tree edit distance over markup trees and the TEDS / TEDS-Struct scores."""

from dataclasses import dataclass
from enum import Enum
from typing import Optional, Union

import Levenshtein
from zss import distance as zss_distance

from ..errors import DegenerateError
from ..table.convert import tree_from_markup
from ..table.model import MarkupNode, MarkupTree


class TedsMode(str, Enum):
    FULL = "full"
    STRUCT = "struct"


@dataclass(frozen=True)
class CostModel:
    """Unit insert/delete costs and the table-aware substitution rule."""
    mode: TedsMode = TedsMode.FULL
    insert_cost: float = 1.0
    delete_cost: float = 1.0

    def insert(self, node: MarkupNode) -> float:
        return self.insert_cost

    def delete(self, node: MarkupNode) -> float:
        return self.delete_cost

    def substitute(self, a: MarkupNode, b: MarkupNode) -> float:
        if a.tag != b.tag:
            return 1.0
        if a.tag != "td":
            return 0.0
        if a.rowspan != b.rowspan or a.colspan != b.colspan:
            return 1.0
        if self.mode is TedsMode.STRUCT:
            return 0.0
        return content_distance(a.content, b.content)


@dataclass(frozen=True)
class TedsScore:
    value: float
    edit_distance: float
    size_a: int
    size_b: int

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "edit_distance": self.edit_distance,
            "size_a": self.size_a,
            "size_b": self.size_b,
        }


TreeLike = Union[MarkupTree, MarkupNode]


def content_distance(a: str, b: str) -> float:
    """Levenshtein distance normalized by the longer string; 0 for two empties."""
    longest = max(len(a), len(b))
    if longest == 0:
        return 0.0
    return Levenshtein.distance(a, b) / longest


def _root(tree: TreeLike) -> MarkupNode:
    return tree.root if isinstance(tree, MarkupTree) else tree


def _children(node: MarkupNode):
    return list(node.children)


def tree_edit_distance(a: TreeLike, b: TreeLike, cost: Optional[CostModel] = None) -> float:
    """Zhang-Shasha edit distance between two ordered labeled trees."""
    cost = cost or CostModel()
    return float(
        zss_distance(
            _root(a),
            _root(b),
            get_children=_children,
            insert_cost=cost.insert,
            remove_cost=cost.delete,
            update_cost=cost.substitute,
        )
    )


def teds(
    pred: Optional[TreeLike],
    gold: Optional[TreeLike],
    mode: TedsMode = TedsMode.FULL,
) -> TedsScore:
    """
    Tree-edit-distance-based similarity.

    Args:
        pred: Predicted tree, None when nothing was recognized
        gold: Ground-truth tree
        mode: FULL compares cell text, STRUCT ignores it

    Returns:
        TedsScore with value 1 - distance / max(|pred|, |gold|)
    """
    mode = TedsMode(mode)
    if pred is None and gold is None:
        raise DegenerateError("both trees are empty")

    size_a = _root(pred).size() if pred is not None else 0
    size_b = _root(gold).size() if gold is not None else 0

    if pred is None or gold is None:
        # every node of the other tree has to be inserted
        return TedsScore(0.0, float(max(size_a, size_b)), size_a, size_b)

    distance = tree_edit_distance(pred, gold, CostModel(mode=mode))
    value = 1.0 - distance / max(size_a, size_b)
    return TedsScore(min(1.0, max(0.0, value)), distance, size_a, size_b)


def teds_markup(pred_text: Optional[str], gold_text: str, mode: TedsMode = TedsMode.FULL) -> TedsScore:
    """TEDS between two markup strings; an unparseable prediction scores 0."""
    return teds(tree_from_markup(pred_text), tree_from_markup(gold_text), mode)
