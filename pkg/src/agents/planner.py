"""Planning agent: proposes candidate tool plans from a neighbor's traits."""

import logging
from typing import List, Optional

from ..config import PipelineConfig
from ..gateway.client import GatewaySession
from ..gateway.parsers import parse_plans_response
from ..gateway.prompts import PromptRegistry, TemplateId, default_registry
from ..gateway.request import Sampling
from ..retrieval.store import NeighborRecord
from ..tools.image import TableImage
from ..tools.toolkit import Toolkit
from .plans import ToolPlan

logger = logging.getLogger(__name__)


class PlannerAgent:
    """Agent that generates N candidate plans of at most L tools."""

    def __init__(
        self,
        toolkit: Optional[Toolkit] = None,
        config: PipelineConfig = PipelineConfig(),
        registry: Optional[PromptRegistry] = None,
    ):
        self.name = "PlannerAgent"
        self.toolkit = toolkit or Toolkit()
        self.config = config
        self.registry = registry or default_registry()

    def tool_descriptions(self) -> str:
        return "\n".join(descriptor.prompt_line() for descriptor in self.toolkit.descriptors)

    def generate_plans(self, test: TableImage, neighbor: NeighborRecord, session: GatewaySession) -> List[ToolPlan]:
        """
        Ask the model for candidate plans.

        Args:
            test: Test image
            neighbor: Retrieved neighbor whose traits go into the prompt
            session: Gateway session of the current sample

        Returns:
            Sanitized plans in generation order, at least the empty plan
        """
        request = self.registry.request(
            TemplateId.PLAN_GENERATION,
            images=[test],
            bindings={
                "tool_descriptions": self.tool_descriptions(),
                "neighbor_traits": neighbor.traits or "none recorded",
                "L": self.config.max_plan_length,
                "N": self.config.n_plans,
            },
            sampling=Sampling(temperature=self.config.plan_temperature, top_p=self.config.top_p),
        )
        raw = session.complete(request)
        plans = parse_plans_response(raw, self.config.max_plan_length, self.config.n_plans, self.toolkit.tool_ids)
        logger.debug("generated %d plan(s) for %s: %s", len(plans), test.id, [p.steps for p in plans])
        return plans
