"""ACC and micro-F1 scorers for the hierarchical recognition tasks."""

import re
import unicodedata
from collections import Counter
from dataclasses import dataclass
from typing import Any, Iterable

_WHITESPACE = re.compile(r"\s+")


def normalize_text(text: Any, casefold: bool = False) -> str:
    """Trim, collapse whitespace runs to one space, NFC-normalize."""
    value = unicodedata.normalize("NFC", str(text))
    value = _WHITESPACE.sub(" ", value).strip()
    return value.casefold() if casefold else value


@dataclass(frozen=True)
class F1Counts:
    tp: int = 0
    fp: int = 0
    fn: int = 0

    @property
    def precision(self) -> float:
        return self.tp / (self.tp + self.fp) if self.tp + self.fp else 0.0

    @property
    def recall(self) -> float:
        return self.tp / (self.tp + self.fn) if self.tp + self.fn else 0.0

    @property
    def f1(self) -> float:
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if p + r else 0.0

    def __add__(self, other: "F1Counts") -> "F1Counts":
        return F1Counts(self.tp + other.tp, self.fp + other.fp, self.fn + other.fn)


def f1_counts(pred_items: Iterable[str], gold_items: Iterable[str], casefold: bool = False) -> F1Counts:
    """Multiset matching: each gold item consumes at most one equal prediction."""
    pred = Counter(normalize_text(p, casefold) for p in pred_items)
    gold = Counter(normalize_text(g, casefold) for g in gold_items)
    tp = sum((pred & gold).values())
    return F1Counts(tp=tp, fp=sum(pred.values()) - tp, fn=sum(gold.values()) - tp)


def micro_f1(pred_items: Iterable[str], gold_items: Iterable[str], casefold: bool = False) -> float:
    return f1_counts(pred_items, gold_items, casefold).f1


def exact_accuracy(pred: Any, gold: Any, casefold: bool = False) -> int:
    """1 iff the normalized answers are equal; tuples compare element-wise."""
    if pred is None:
        return 0
    if isinstance(gold, (tuple, list)):
        if not isinstance(pred, (tuple, list)) or len(pred) != len(gold):
            return 0
        return int(all(exact_accuracy(p, g, casefold) for p, g in zip(pred, gold)))
    if isinstance(gold, str) or isinstance(pred, str):
        return int(normalize_text(pred, casefold) == normalize_text(gold, casefold))
    return int(pred == gold)
