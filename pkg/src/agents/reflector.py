"""Reflection agent: keeps a tool's output only when the model judges it better."""

import logging
from typing import List, Optional, Tuple

from ..config import PipelineConfig
from ..errors import BudgetExceededError, GatewayError, ToolError
from ..gateway.client import GatewaySession
from ..gateway.parsers import parse_reflection_response
from ..gateway.prompts import PromptRegistry, TemplateId, default_registry
from ..gateway.request import Sampling
from ..tools.image import TableImage
from .executor import ExecutorAgent
from .plans import ReflectionVerdict, ToolPlan

logger = logging.getLogger(__name__)


class ReflectorAgent:
    """Agent that executes a plan step by step behind a reflection gate."""

    def __init__(
        self,
        executor: ExecutorAgent,
        config: PipelineConfig = PipelineConfig(),
        registry: Optional[PromptRegistry] = None,
    ):
        self.name = "ReflectorAgent"
        self.executor = executor
        self.config = config
        self.registry = registry or default_registry()

    def reflect(self, before: TableImage, after: TableImage, step_index: int, tool: str,
                session: GatewaySession) -> ReflectionVerdict:
        request = self.registry.request(
            TemplateId.REFLECTION,
            images=[before, after],
            bindings={"tool_name": tool},
            sampling=Sampling(temperature=self.config.recognition_temperature, top_p=self.config.top_p),
        )
        return parse_reflection_response(session.complete(request), step_index, tool)

    def reflective_execute(
        self, image: TableImage, plan: ToolPlan, session: GatewaySession
    ) -> Tuple[TableImage, List[ReflectionVerdict]]:
        """
        Apply the plan, keeping each step only when reflection accepts it.

        Args:
            image: Test image
            plan: Plan to execute
            session: Gateway session of the current sample

        Returns:
            Tuple of the final image and one verdict per step
        """
        current = image
        verdicts: List[ReflectionVerdict] = []

        for index, tool in enumerate(plan.steps):
            try:
                candidate = self.executor.apply_step(current, tool)
            except (ToolError, ValueError) as e:
                logger.warning("step %d (%s) failed on %s: %s", index, tool, image.id, e)
                verdicts.append(ReflectionVerdict(index, 0, tool, note=f"tool-error: {type(e).__name__}"))
                continue

            if not self.config.reflection_enabled:
                verdicts.append(ReflectionVerdict(index, 1, tool, note="auto-accept"))
                current = candidate
                continue

            try:
                verdict = self.reflect(current, candidate, index, tool, session)
            except BudgetExceededError:
                raise
            except GatewayError as e:
                logger.warning("reflection call for step %d failed: %s", index, e)
                verdict = ReflectionVerdict(index, 0, tool, note=f"gateway-error: {type(e).__name__}")

            verdicts.append(verdict)
            if verdict.accepted:
                current = candidate

        return current, verdicts
