"""Tests for the pipeline agents and the LangGraph workflow."""

import json
import random

import numpy as np
import pytest

from src.agents.executor import ExecutorAgent
from src.agents.experience import ExperienceAgent, PlanScore, select_plan
from src.agents.plans import ToolPlan
from src.agents.recognizer import RecognizerAgent
from src.agents.reflector import ReflectorAgent
from src.bench.synthetic import ORACLE_PLANS, OracleResponder
from src.config import PipelineConfig, RunConfig
from src.gateway.client import Gateway, GatewaySession
from src.gateway.mock import ScriptedMock
from src.graph.runner import REPORTS, SUMMARY, run_corpus
from src.graph.workflow import NGTRWorkflow
from src.metrics.teds import TedsScore
from src.retrieval.store import NeighborStore, load_store
from src.table.convert import logical_to_markup
from src.table.io import GroundTruth, read_ground_truth
from src.tools.image import TableImage
from src.tools.toolkit import upscale

TABLE = "<table><tr><td>a</td></tr></table>"


def session_of(mock: ScriptedMock, budget=None) -> GatewaySession:
    return GatewaySession(Gateway(mock, max_retries=0), budget=budget)


def oracle_gateway(corpus) -> Gateway:
    return Gateway(ScriptedMock(responder=OracleResponder(corpus.tables)), max_retries=0)


def test_select_plan_matches_brute_force():
    rng = random.Random(2)
    for _ in range(200):
        board = []
        for index in range(rng.randint(1, 5)):
            plan = ToolPlan(tuple(rng.sample(["Upscale", "Binarize", "NoiseReduce"], rng.randint(0, 3))))
            value = rng.choice([0.0, 0.5, 0.75, 1.0])
            board.append(PlanScore(index, plan, TedsScore(value, 0.0, 1, 1)))
        best = max(entry.teds for entry in board)
        expected = next(entry for entry in board if entry.teds == best)
        assert select_plan(board) is expected


def test_select_plan_rejects_empty_board():
    with pytest.raises(ValueError):
        select_plan([])


def test_empty_plan_is_identity(grid):
    image = grid(text=True)
    result = ExecutorAgent().execute_plan(image, ToolPlan.empty())
    assert result.image is image
    assert result.success and result.completed_steps == 0


def test_execute_plan_in_order(grid):
    image = grid(text=True)
    result = ExecutorAgent().execute_plan(image, ToolPlan.manual(["Upscale", "Binarize"]))
    assert (result.image.height, result.image.width) == (2 * image.height, 2 * image.width)
    assert set(np.unique(result.image.pixels)) <= {0, 255}
    assert result.image.tool_names()[-2:] == ("Upscale", "Binarize")


def test_plans_reject_consecutive_duplicates():
    with pytest.raises(ValueError):
        ToolPlan(("Upscale", "Upscale"))


def test_reflection_rejecting_everything_keeps_input(grid):
    image = grid(text=True)
    reflector = ReflectorAgent(ExecutorAgent())
    session = session_of(ScriptedMock(by_template={"Reflection": "ANSWER: IMAGE_1"}))
    final, verdicts = reflector.reflective_execute(image, ToolPlan.manual(["Binarize", "Upscale"]), session)
    assert final.digest() == image.digest()
    assert [v.gamma for v in verdicts] == [0, 0]


def test_reflection_accepting_everything_equals_plain_execution(grid):
    image = grid(text=True)
    plan = ToolPlan.manual(["Upscale", "Binarize", "NoiseReduce"])
    executor = ExecutorAgent()
    session = session_of(ScriptedMock(by_template={"Reflection": "IMAGE_2"}))
    final, verdicts = ReflectorAgent(executor).reflective_execute(image, plan, session)
    assert np.array_equal(final.pixels, executor.execute_plan(image, plan).image.pixels)
    assert all(v.accepted for v in verdicts)
    assert session.calls == 3


def test_reflection_keeps_only_accepted_step(grid):
    image = grid(text=True)
    plan = ToolPlan.manual(["Binarize", "Upscale", "NoiseReduce"])
    session = session_of(ScriptedMock(by_template={"Reflection": ["IMAGE_1", "IMAGE_2", "IMAGE_1"]}))
    final, verdicts = ReflectorAgent(ExecutorAgent()).reflective_execute(image, plan, session)
    assert np.array_equal(final.pixels, upscale(image, 2.0).pixels)
    assert [(v.step_index, v.tool, v.gamma) for v in verdicts] == [
        (0, "Binarize", 0), (1, "Upscale", 1), (2, "NoiseReduce", 0),
    ]


def test_reflection_disabled_auto_accepts(grid):
    image = grid()
    reflector = ReflectorAgent(ExecutorAgent(), PipelineConfig(reflection_enabled=False))
    session = session_of(ScriptedMock())
    _, verdicts = reflector.reflective_execute(image, ToolPlan.manual(["Upscale"]), session)
    assert verdicts[0].gamma == 1 and verdicts[0].note == "auto-accept"
    assert session.calls == 0


def test_recognizer_without_table(grid):
    session = session_of(ScriptedMock(default="Sorry, I only see a picture of a cat."))
    result = RecognizerAgent().recognize(grid(), session)
    assert result.markup == ""
    assert result.error == "NoTableError"


def test_recognizer_chain_of_thought_template(grid):
    mock = ScriptedMock(by_template={"RecognizeCoT": TABLE})
    result = RecognizerAgent(PipelineConfig(chain_of_thought=True)).recognize(grid(), session_of(mock))
    assert result.success
    assert mock.templates_called() == ["RecognizeCoT"]


def test_experience_picks_plan_that_recognizes_neighbor(mini_corpus):
    neighbor_id = "train-000"
    table = mini_corpus.tables[neighbor_id]
    neighbor = TableImage.load(mini_corpus.store.parent / "images" / f"{neighbor_id}.png")
    plans = [ToolPlan(tuple(steps)) for steps in ORACLE_PLANS]

    agent = ExperienceAgent(ExecutorAgent(), RecognizerAgent())
    session = session_of(ScriptedMock(responder=OracleResponder(mini_corpus.tables)))
    chosen, scoreboard = agent.learn_experience(plans, neighbor, logical_to_markup(table), session)

    assert chosen == plans[1]
    assert scoreboard[1].teds == 1.0
    assert all(entry.teds < 1.0 for i, entry in enumerate(scoreboard) if i != 1)


def test_full_pipeline_with_oracle(mini_corpus):
    store = load_store(mini_corpus.store)
    samples, _ = read_ground_truth(mini_corpus.test)
    workflow = NGTRWorkflow(store, oracle_gateway(mini_corpus))
    image = TableImage.load(samples[0].image_path, image_id=samples[0].id)

    report, timing = workflow.run_sample(image, samples[0].gold_markup)
    assert report.success
    assert report.neighbor_id.startswith("train-")
    assert report.chosen_plan["steps"] == ORACLE_PLANS[1]
    assert [c["index"] for c in report.candidates] == [0, 1, 2]
    assert report.teds == 1.0
    assert report.verdicts[0]["tool"] == "Upscale" and report.verdicts[0]["gamma"] == 1
    assert len(report.calls) <= PipelineConfig().budget
    assert "latency_ms" not in json.dumps(report.to_dict())
    assert set(timing) >= {"retrieve", "plan", "experience", "reflect", "recognize"}


def test_without_experience_the_first_plan_runs(mini_corpus):
    store = load_store(mini_corpus.store)
    samples, _ = read_ground_truth(mini_corpus.test)
    workflow = NGTRWorkflow(store, oracle_gateway(mini_corpus), config=PipelineConfig(experience_enabled=False))
    report, _ = workflow.run_sample(TableImage.load(samples[0].image_path, image_id=samples[0].id),
                                    samples[0].gold_markup)
    assert report.chosen_plan["steps"] == ORACLE_PLANS[0]
    assert all(c["teds"] is None for c in report.candidates)
    assert report.teds < 1.0


def test_without_reflection_every_step_is_accepted(mini_corpus):
    store = load_store(mini_corpus.store)
    samples, _ = read_ground_truth(mini_corpus.test)
    workflow = NGTRWorkflow(store, oracle_gateway(mini_corpus), config=PipelineConfig(reflection_enabled=False))
    report, _ = workflow.run_sample(TableImage.load(samples[0].image_path, image_id=samples[0].id),
                                    samples[0].gold_markup)
    assert [v["note"] for v in report.verdicts] == ["auto-accept", "auto-accept"]
    assert "Reflection" not in [call["template_id"] for call in report.calls]


def test_direct_mode_makes_one_call(grid):
    mock = ScriptedMock(default=TABLE)
    workflow = NGTRWorkflow(None, Gateway(mock), config=PipelineConfig(mode="direct"))
    report, _ = workflow.run_sample(grid(), TABLE)
    assert report.success
    assert report.neighbor_id is None
    assert mock.templates_called() == ["RecognizeSimple"]
    assert report.teds == 1.0


def test_empty_store_reports_retrieval_error(grid):
    workflow = NGTRWorkflow(NeighborStore(), Gateway(ScriptedMock(default=TABLE)))
    report, _ = workflow.run_sample(grid(text=True), TABLE)
    assert report.error["stage"] == "retrieve"
    assert report.error["error_type"] == "EmptyStoreError"
    assert report.teds == 0.0
    assert report.calls == []


def test_all_zero_experience_falls_back_to_raw_image(mini_corpus):
    store = load_store(mini_corpus.store)
    samples, _ = read_ground_truth(mini_corpus.test)
    mock = ScriptedMock(by_template={
        "PlanGeneration": json.dumps(ORACLE_PLANS),
        "RecognizeSimple": "There is no table here.",
        "Reflection": "IMAGE_2",
    })
    workflow = NGTRWorkflow(store, Gateway(mock))
    report, _ = workflow.run_sample(TableImage.load(samples[0].image_path, image_id=samples[0].id),
                                    samples[0].gold_markup)
    assert report.flags == ["experience_all_zero"]
    assert report.executed_plan["steps"] == []
    assert report.chosen_plan["steps"] == ORACLE_PLANS[0]
    assert report.verdicts == []
    assert report.teds == 0.0
    assert "NoTableError" in report.notes


def test_reports_are_byte_identical_across_runs(ten_sample_corpus, tmp_path):
    store = load_store(ten_sample_corpus.store)
    samples, _ = read_ground_truth(ten_sample_corpus.test)
    assert len(samples) == 10
    outputs = []
    for attempt in ("first", "second"):
        workflow = NGTRWorkflow(store, oracle_gateway(ten_sample_corpus))
        run_corpus(samples, workflow, RunConfig(workers=2), output_dir=tmp_path / attempt)
        outputs.append((tmp_path / attempt / REPORTS).read_bytes())
    assert outputs[0] == outputs[1]
    assert [json.loads(line)["sample_id"] for line in outputs[0].splitlines()] == [s.id for s in samples]


def test_recorded_script_replays(ten_sample_corpus, tmp_path):
    store = load_store(ten_sample_corpus.store)
    samples, _ = read_ground_truth(ten_sample_corpus.test)
    gateway = Gateway(ScriptedMock.from_jsonl(ten_sample_corpus.script), max_retries=0)
    result = run_corpus(samples, NGTRWorkflow(store, gateway), RunConfig(workers=2), output_dir=tmp_path)

    summary = json.loads((tmp_path / SUMMARY).read_text())
    assert summary["errors"] == 0
    assert summary["mean_teds"] == pytest.approx(1.0)
    assert summary["tool_usage"]["Upscale"] == 1.0
    assert result.succeeded == len(samples)


def test_missing_image_becomes_load_error(mini_corpus, tmp_path):
    samples, _ = read_ground_truth(mini_corpus.test)
    broken = GroundTruth(id="ghost", image_path=str(tmp_path / "ghost.png"), table=samples[0].table)
    workflow = NGTRWorkflow(load_store(mini_corpus.store), oracle_gateway(mini_corpus))
    result = run_corpus([broken] + samples, workflow, RunConfig(workers=1))
    assert result.reports[0].error["stage"] == "load"
    assert result.reports[0].teds == 0.0
    assert result.summary["errors"] == 1
    assert result.summary["succeeded"] == len(samples)
