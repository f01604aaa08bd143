"""Experience agent: scores candidate plans on the labeled neighbor image."""

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

from ..metrics.teds import TedsMode, TedsScore, teds_markup
from ..tools.image import TableImage
from .executor import ExecutorAgent
from .plans import ToolPlan
from .recognizer import RecognizerAgent

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PlanScore:
    index: int
    plan: ToolPlan
    score: TedsScore
    error: Optional[str] = None

    @property
    def teds(self) -> float:
        return self.score.value

    def to_dict(self) -> dict:
        record = {"index": self.index, "plan": self.plan.to_dict(), "teds": self.teds}
        if self.error:
            record["error"] = self.error
        return record


def select_plan(scoreboard: Sequence[PlanScore]) -> PlanScore:
    """Highest TEDS; ties go to generation order, then to the shorter plan."""
    if not scoreboard:
        raise ValueError("cannot select from an empty scoreboard")
    return min(scoreboard, key=lambda entry: (-entry.teds, entry.index, len(entry.plan)))


class ExperienceAgent:
    """Agent that transfers the best plan found on the neighbor to the test image."""

    def __init__(self, executor: ExecutorAgent, recognizer: RecognizerAgent):
        self.name = "ExperienceAgent"
        self.executor = executor
        self.recognizer = recognizer

    def score_plan(self, index: int, plan: ToolPlan, neighbor_image: TableImage, gold_markup: str, session) -> PlanScore:
        execution = self.executor.execute_plan(neighbor_image, plan)
        result = self.recognizer.recognize(execution.image, session)
        score = teds_markup(result.markup or None, gold_markup, TedsMode.FULL)
        error = result.error or execution.error
        return PlanScore(index, plan, score, error)

    def learn_experience(
        self,
        plans: Sequence[ToolPlan],
        neighbor_image: TableImage,
        gold_markup: str,
        session,
    ) -> Tuple[ToolPlan, List[PlanScore]]:
        """
        Run every plan on the neighbor and score its recognition against the gold markup.

        Args:
            plans: Candidate plans in generation order
            neighbor_image: The neighbor's image
            gold_markup: The neighbor's ground-truth markup
            session: Gateway session of the current sample

        Returns:
            Tuple of the chosen plan and the full scoreboard
        """
        scoreboard = [
            self.score_plan(index, plan, neighbor_image, gold_markup, session)
            for index, plan in enumerate(plans)
        ]
        best = select_plan(scoreboard)
        logger.debug("experience on %s: %s -> plan %d", neighbor_image.id,
                     [round(entry.teds, 4) for entry in scoreboard], best.index)
        return best.plan, scoreboard
