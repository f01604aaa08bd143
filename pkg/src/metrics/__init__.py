"""TEDS / TEDS-Struct and the ACC / micro-F1 task metrics."""

from .scores import F1Counts, exact_accuracy, f1_counts, micro_f1, normalize_text
from .teds import CostModel, TedsMode, TedsScore, content_distance, teds, teds_markup, tree_edit_distance
