"""LangGraph workflow running one sample through the NGTR pipeline."""

import logging
import operator
import time
from pathlib import Path
from typing import Annotated, Any, Dict, List, Optional, Tuple, TypedDict

from langgraph.graph import END, StateGraph

from ..agents.executor import ExecutorAgent
from ..agents.experience import ExperienceAgent
from ..agents.plans import ReflectionVerdict, ToolPlan
from ..agents.planner import PlannerAgent
from ..agents.recognizer import RecognizerAgent
from ..agents.reflector import ReflectorAgent
from ..config import PipelineConfig, RetrievalConfig
from ..errors import NGTRError
from ..gateway.client import Gateway, GatewaySession
from ..gateway.prompts import PromptRegistry, default_registry
from ..metrics.teds import TedsMode, teds_markup
from ..retrieval.store import NeighborRecord, NeighborStore, retrieve
from ..table.convert import tree_from_markup
from ..tools.image import TableImage
from ..tools.toolkit import Toolkit
from .report import RunReport

logger = logging.getLogger(__name__)


def _merge(left: Dict[str, float], right: Dict[str, float]) -> Dict[str, float]:
    return {**(left or {}), **(right or {})}


class SampleState(TypedDict, total=False):
    """State shared across the nodes of one sample."""
    # Inputs
    sample_id: str
    test_image: TableImage
    gold_markup: Optional[str]
    session: GatewaySession

    # Retrieval
    neighbor: NeighborRecord
    neighbor_similarity: float

    # Planning and experience
    plans: List[ToolPlan]
    scoreboard: List[Any]
    chosen_plan: ToolPlan
    executed_plan: ToolPlan

    # Execution and recognition
    verdicts: List[ReflectionVerdict]
    final_image: TableImage
    markup: str
    teds: Optional[float]
    teds_struct: Optional[float]

    # Workflow control
    flags: Annotated[List[str], operator.add]
    notes: Annotated[List[str], operator.add]
    timing: Annotated[Dict[str, float], _merge]
    error: Optional[Dict[str, str]]


class NGTRWorkflow:
    """retrieve -> plan -> experience -> reflect -> recognize -> score."""

    def __init__(
        self,
        store: Optional[NeighborStore],
        gateway: Gateway,
        toolkit: Optional[Toolkit] = None,
        config: PipelineConfig = PipelineConfig(),
        retrieval: RetrievalConfig = RetrievalConfig(),
        registry: Optional[PromptRegistry] = None,
    ):
        self.store = store
        self.gateway = gateway
        self.config = config
        self.retrieval = retrieval
        self.toolkit = toolkit or Toolkit()
        registry = registry or default_registry()

        self.executor = ExecutorAgent(self.toolkit)
        self.recognizer = RecognizerAgent(config, registry)
        self.planner = PlannerAgent(self.toolkit, config, registry)
        self.experience = ExperienceAgent(self.executor, self.recognizer)
        self.reflector = ReflectorAgent(self.executor, config, registry)

        self.workflow = self._build_workflow()

    def _build_workflow(self):
        """Build the LangGraph workflow."""
        workflow = StateGraph(SampleState)

        workflow.add_node("retrieve", self.retrieve_node)
        workflow.add_node("plan", self.plan_node)
        workflow.add_node("experience", self.experience_node)
        workflow.add_node("reflect", self.reflect_node)
        workflow.add_node("recognize", self.recognize_node)
        workflow.add_node("score", self.score_node)

        workflow.set_entry_point("retrieve")

        # Direct mode skips straight to recognition
        workflow.add_conditional_edges("retrieve", self._after_retrieve,
                                       {"plan": "plan", "recognize": "recognize", END: END})
        workflow.add_conditional_edges("plan", self._after_plan,
                                       {"experience": "experience", "reflect": "reflect", END: END})
        workflow.add_conditional_edges("experience", self._unless_error("reflect"), {"reflect": "reflect", END: END})
        workflow.add_conditional_edges("reflect", self._unless_error("recognize"), {"recognize": "recognize", END: END})
        workflow.add_conditional_edges("recognize", self._unless_error("score"), {"score": "score", END: END})
        workflow.add_edge("score", END)

        return workflow.compile()

    # Routing

    @staticmethod
    def _unless_error(next_node: str):
        def route(state: SampleState) -> str:
            return END if state.get("error") else next_node
        return route

    def _after_retrieve(self, state: SampleState) -> str:
        if state.get("error"):
            return END
        return "recognize" if self.config.mode == "direct" else "plan"

    def _after_plan(self, state: SampleState) -> str:
        if state.get("error"):
            return END
        return "experience" if self.config.experience_enabled else "reflect"

    @staticmethod
    def _failure(stage: str, error: Exception) -> Dict[str, Any]:
        logger.warning("stage %s failed: %s: %s", stage, type(error).__name__, error)
        return {"error": {"stage": stage, "error_type": type(error).__name__, "message": str(error)}}

    # Nodes

    def retrieve_node(self, state: SampleState) -> Dict[str, Any]:
        """Node: Find the most similar labeled neighbor."""
        if self.config.mode == "direct":
            return {"final_image": state["test_image"]}
        started = time.perf_counter()
        try:
            if self.store is None:
                raise NGTRError("no neighbor store configured")
            (neighbor, score), = retrieve(state["test_image"], self.store, k=1, config=self.retrieval)
        except NGTRError as e:
            return self._failure("retrieve", e)
        return {
            "neighbor": neighbor,
            "neighbor_similarity": score,
            "timing": {"retrieve": time.perf_counter() - started},
        }

    def plan_node(self, state: SampleState) -> Dict[str, Any]:
        """Node: Generate candidate plans."""
        started = time.perf_counter()
        try:
            plans = self.planner.generate_plans(state["test_image"], state["neighbor"], state["session"])
        except NGTRError as e:
            return self._failure("plan", e)
        update: Dict[str, Any] = {"plans": plans, "timing": {"plan": time.perf_counter() - started}}
        if not self.config.experience_enabled:
            update["chosen_plan"] = plans[0]
            update["executed_plan"] = plans[0]
        return update

    def experience_node(self, state: SampleState) -> Dict[str, Any]:
        """Node: Score each plan on the neighbor and keep the best."""
        started = time.perf_counter()
        neighbor = state["neighbor"]
        try:
            neighbor_image = TableImage.load(Path(neighbor.image_path), image_id=neighbor.id)
            chosen, scoreboard = self.experience.learn_experience(
                state["plans"], neighbor_image, neighbor.gold_markup, state["session"]
            )
        except (NGTRError, FileNotFoundError, ValueError) as e:
            return self._failure("experience", e)

        update: Dict[str, Any] = {
            "chosen_plan": chosen,
            "executed_plan": chosen,
            "scoreboard": scoreboard,
            "timing": {"experience": time.perf_counter() - started},
        }
        if all(entry.teds == 0.0 for entry in scoreboard):
            update["flags"] = ["experience_all_zero"]
            if self.config.zero_score_fallback:
                update["executed_plan"] = ToolPlan.empty()
                update["notes"] = ["every plan scored 0 on the neighbor, recognizing the raw image"]
        return update

    def reflect_node(self, state: SampleState) -> Dict[str, Any]:
        """Node: Execute the plan on the test image behind the reflection gate."""
        started = time.perf_counter()
        try:
            image, verdicts = self.reflector.reflective_execute(
                state["test_image"], state["executed_plan"], state["session"]
            )
        except NGTRError as e:
            return self._failure("reflect", e)
        return {
            "final_image": image,
            "verdicts": verdicts,
            "timing": {"reflect": time.perf_counter() - started},
        }

    def recognize_node(self, state: SampleState) -> Dict[str, Any]:
        """Node: Recognize the final image."""
        started = time.perf_counter()
        try:
            result = self.recognizer.recognize(state["final_image"], state["session"])
        except NGTRError as e:
            return self._failure("recognize", e)
        update: Dict[str, Any] = {"markup": result.markup, "timing": {"recognize": time.perf_counter() - started}}
        if result.error:
            update["notes"] = [result.error]
        return update

    def score_node(self, state: SampleState) -> Dict[str, Any]:
        """Node: Score the prediction against the gold markup, when there is one."""
        gold = state.get("gold_markup")
        if not gold or tree_from_markup(gold) is None:
            return {}
        prediction = state.get("markup") or None
        return {
            "teds": teds_markup(prediction, gold, TedsMode.FULL).value,
            "teds_struct": teds_markup(prediction, gold, TedsMode.STRUCT).value,
        }

    # Driver

    def run_sample(self, test: TableImage, gold_markup: Optional[str] = None,
                   sample_id: Optional[str] = None) -> Tuple[RunReport, Dict[str, float]]:
        """
        Run the workflow on one test image.

        Args:
            test: Test image
            gold_markup: Ground truth for scoring, if known
            sample_id: Report id, defaults to the image id

        Returns:
            Tuple of the RunReport and per-stage timings in seconds
        """
        session = GatewaySession(self.gateway, budget=1 if self.config.mode == "direct" else self.config.budget)
        initial: SampleState = {
            "sample_id": sample_id or test.id,
            "test_image": test,
            "gold_markup": gold_markup,
            "session": session,
            "flags": [],
            "notes": [],
            "timing": {},
            "error": None,
        }
        final_state = self.workflow.invoke(initial)
        return build_report(final_state, self.config.mode), dict(final_state.get("timing") or {})


def build_report(state: Dict[str, Any], mode: str = "ngtr") -> RunReport:
    """Flatten a final workflow state into a RunReport."""
    gold = state.get("gold_markup")
    gold_tree = tree_from_markup(gold) if gold else None
    neighbor = state.get("neighbor")
    chosen = state.get("chosen_plan")
    executed = state.get("executed_plan")
    session = state.get("session")

    report = RunReport(
        sample_id=state["sample_id"],
        mode=mode,
        neighbor_id=neighbor.id if neighbor is not None else None,
        neighbor_similarity=state.get("neighbor_similarity"),
        candidates=[entry.to_dict() for entry in state.get("scoreboard") or []]
        or [{"index": i, "plan": p.to_dict(), "teds": None} for i, p in enumerate(state.get("plans") or [])],
        chosen_plan=chosen.to_dict() if chosen is not None else None,
        executed_plan=executed.to_dict() if executed is not None else None,
        verdicts=[v.to_dict() for v in state.get("verdicts") or []],
        final_markup=state.get("markup") or "",
        teds=state.get("teds"),
        teds_struct=state.get("teds_struct"),
        gold_cells=gold_tree.cell_count() if gold_tree is not None else None,
        calls=[record.to_dict() for record in session.records] if session is not None else [],
        flags=list(state.get("flags") or []),
        notes=list(state.get("notes") or []),
        error=state.get("error"),
    )
    if report.error is not None and gold_tree is not None:
        report.teds, report.teds_struct = 0.0, 0.0
    return report
