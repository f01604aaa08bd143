"""Tool plans and reflection verdicts passed between the pipeline agents."""

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Optional, Tuple


class PlanOrigin(str, Enum):
    MODEL_GENERATED = "ModelGenerated"
    EMPTY = "Empty"
    MANUAL = "Manual"


@dataclass(frozen=True)
class ToolPlan:
    """An ordered tool-id sequence with no two identical consecutive steps."""
    steps: Tuple[str, ...] = ()
    origin: PlanOrigin = PlanOrigin.MODEL_GENERATED

    def __post_init__(self):
        steps = tuple(self.steps)
        for previous, current in zip(steps, steps[1:]):
            if previous == current:
                raise ValueError(f"consecutive duplicate step {current!r} in plan {steps}")
        object.__setattr__(self, "steps", steps)

    @classmethod
    def empty(cls) -> "ToolPlan":
        return cls(steps=(), origin=PlanOrigin.EMPTY)

    @classmethod
    def manual(cls, steps: Iterable[str]) -> "ToolPlan":
        return cls(steps=tuple(steps), origin=PlanOrigin.MANUAL)

    def __len__(self) -> int:
        return len(self.steps)

    def to_dict(self) -> dict:
        return {"steps": list(self.steps), "origin": self.origin.value}


@dataclass(frozen=True)
class ReflectionVerdict:
    step_index: int
    gamma: int
    tool: str = ""
    response_digest: Optional[str] = None
    note: str = ""

    def __post_init__(self):
        if self.gamma not in (0, 1):
            raise ValueError(f"gamma must be 0 or 1, got {self.gamma}")

    @property
    def accepted(self) -> bool:
        return self.gamma == 1

    def to_dict(self) -> dict:
        return {
            "step_index": self.step_index,
            "tool": self.tool,
            "gamma": self.gamma,
            "response_digest": self.response_digest,
            "note": self.note,
        }
