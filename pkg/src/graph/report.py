"""Per-sample run reports and the batch summary."""

from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

SIZE_BUCKETS = (("<=20", 0, 20), ("21-50", 21, 50), ("51-100", 51, 100), (">100", 101, None))


def size_bucket(cell_count: int) -> str:
    for name, low, high in SIZE_BUCKETS:
        if cell_count >= low and (high is None or cell_count <= high):
            return name
    return SIZE_BUCKETS[0][0]


@dataclass
class RunReport:
    """Everything one sample produced, minus wall-clock timing."""
    sample_id: str
    mode: str = "ngtr"
    neighbor_id: Optional[str] = None
    neighbor_similarity: Optional[float] = None
    candidates: List[Dict[str, Any]] = field(default_factory=list)
    chosen_plan: Optional[Dict[str, Any]] = None
    executed_plan: Optional[Dict[str, Any]] = None
    verdicts: List[Dict[str, Any]] = field(default_factory=list)
    final_markup: str = ""
    teds: Optional[float] = None
    teds_struct: Optional[float] = None
    gold_cells: Optional[int] = None
    calls: List[Dict[str, Any]] = field(default_factory=list)
    flags: List[str] = field(default_factory=list)
    notes: List[str] = field(default_factory=list)
    error: Optional[Dict[str, str]] = None

    @property
    def success(self) -> bool:
        return self.error is None

    @property
    def tools_invoked(self) -> List[str]:
        """Tools applied to the test image (accepted or not)."""
        if not self.executed_plan:
            return []
        return list(dict.fromkeys(self.executed_plan.get("steps", [])))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "sample_id": self.sample_id,
            "mode": self.mode,
            "neighbor_id": self.neighbor_id,
            "neighbor_similarity": self.neighbor_similarity,
            "candidates": self.candidates,
            "chosen_plan": self.chosen_plan,
            "executed_plan": self.executed_plan,
            "verdicts": self.verdicts,
            "final_markup": self.final_markup,
            "teds": self.teds,
            "teds_struct": self.teds_struct,
            "gold_cells": self.gold_cells,
            "calls": self.calls,
            "flags": self.flags,
            "notes": self.notes,
            "error": self.error,
        }


def _mean(values: List[float]) -> Optional[float]:
    return sum(values) / len(values) if values else None


def summarize(reports: List[RunReport], store_size: Optional[int] = None, mode: str = "ngtr",
              ablation: Optional[str] = None) -> Dict[str, Any]:
    """
    Aggregate reports.

    Tool usage rate of a tool = samples that invoked it / samples that invoked
    any tool. Errored samples count with zero scores.
    """
    scored = [r for r in reports if r.teds is not None]
    with_tools = [r for r in reports if r.tools_invoked]
    usage = Counter(tool for r in with_tools for tool in r.tools_invoked)

    buckets: Dict[str, Dict[str, Any]] = {}
    for name, _, _ in SIZE_BUCKETS:
        members = [r for r in scored if r.gold_cells is not None and size_bucket(r.gold_cells) == name]
        buckets[name] = {"count": len(members), "mean_teds": _mean([r.teds for r in members])}

    flags = Counter(flag for r in reports for flag in r.flags)
    return {
        "mode": mode,
        "ablation": ablation,
        "samples": len(reports),
        "succeeded": sum(1 for r in reports if r.success),
        "errors": sum(1 for r in reports if not r.success),
        "scored": len(scored),
        "mean_teds": _mean([r.teds for r in scored]),
        "mean_teds_struct": _mean([r.teds_struct for r in scored]),
        "samples_with_tools": len(with_tools),
        "tool_usage": {tool: usage[tool] / len(with_tools) for tool in sorted(usage)},
        "size_buckets": buckets,
        "flags": dict(sorted(flags.items())),
        "store_size": store_size,
    }
