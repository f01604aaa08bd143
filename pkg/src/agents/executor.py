"""Plan execution agent: applies a tool plan to an image."""

import logging
from dataclasses import dataclass
from typing import Optional

from ..errors import ToolError
from ..tools.image import TableImage
from ..tools.toolkit import Toolkit
from .plans import ToolPlan

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ExecutionResult:
    image: TableImage
    completed_steps: int
    error: Optional[str] = None

    @property
    def success(self) -> bool:
        return self.error is None


class ExecutorAgent:
    """Agent that runs tool plans without reflection."""

    def __init__(self, toolkit: Optional[Toolkit] = None):
        self.name = "ExecutorAgent"
        self.toolkit = toolkit or Toolkit()

    def apply_step(self, image: TableImage, tool_id: str) -> TableImage:
        return self.toolkit.apply(tool_id, image)

    def execute_plan(self, image: TableImage, plan: ToolPlan) -> ExecutionResult:
        """
        Apply each tool of the plan in order.

        Args:
            image: Input image
            plan: Tool plan; the empty plan returns the input unchanged

        Returns:
            ExecutionResult; a failing tool stops the plan and the last good
            image is returned with the error
        """
        current = image
        for index, tool_id in enumerate(plan.steps):
            try:
                current = self.apply_step(current, tool_id)
            except (ToolError, ValueError) as e:
                logger.warning("step %d (%s) of plan failed on %s: %s", index, tool_id, image.id, e)
                return ExecutionResult(current, index, f"{tool_id}: {type(e).__name__}: {e}")
        return ExecutionResult(current, len(plan.steps))
