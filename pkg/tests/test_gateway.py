"""Tests for prompts, the scripted mock, the gateway and the response parsers."""

import json

import numpy as np
import pytest

from src.agents.plans import PlanOrigin
from src.config import ModelEndpoint
from src.errors import (
    AuthError,
    BudgetExceededError,
    NoTableError,
    PromptRenderError,
    RateLimitError,
    ScriptMissError,
    TransportError,
)
from src.gateway.backends import HttpChatCompletions, error_for_status
from src.gateway.client import Gateway, GatewaySession
from src.gateway.mock import ScriptedMock
from src.gateway.parsers import (
    extract_table_span,
    parse_markup_response,
    parse_plans_response,
    parse_reflection_response,
)
from src.gateway.prompts import TemplateId, default_registry
from src.tools.image import TableImage
from src.tools.toolkit import Toolkit

TOOLS = sorted(Toolkit().tool_ids)
TABLE = "<table><tr><td>a</td></tr></table>"


def image(value: int = 200) -> TableImage:
    return TableImage(pixels=np.full((32, 48), value, dtype=np.uint8), id=f"img{value}")


def recognize(img=None):
    return default_registry().request(TemplateId.RECOGNIZE_SIMPLE, [img or image()])


def test_registry_holds_every_template():
    registry = default_registry()
    for template_id in TemplateId:
        assert registry.get(template_id).user


def test_unbound_placeholder_fails():
    with pytest.raises(PromptRenderError):
        default_registry().request(TemplateId.IRDR, [image()])
    request = default_registry().request(TemplateId.IRDR, [image()], {"row_index": 2})
    assert "row 2" in request.user_text


def test_fingerprint_is_stable():
    registry = default_registry()
    first = registry.request(TemplateId.IRDR, [image()], {"row_index": 1})
    again = registry.request(TemplateId.IRDR, [image()], {"row_index": 1})
    assert first.fingerprint == again.fingerprint
    assert registry.request(TemplateId.IRDR, [image()], {"row_index": 2}).fingerprint != first.fingerprint
    assert registry.request(TemplateId.IRDR, [image(10)], {"row_index": 1}).fingerprint != first.fingerprint


def test_retries_until_success():
    delays = []
    mock = ScriptedMock(by_template={"RecognizeSimple": [{"error": "transport"}, {"error": "transport"}, TABLE]})
    gateway = Gateway(mock, max_retries=3, sleep=delays.append)
    completion = gateway.complete(recognize())
    assert completion.text == TABLE
    assert completion.attempts == 3
    assert completion.retries == 2
    assert delays == [0.5, 1.0]


def test_gives_up_after_max_retries():
    delays = []
    mock = ScriptedMock(by_template={"RecognizeSimple": {"error": "transport"}})
    gateway = Gateway(mock, max_retries=2, sleep=delays.append)
    with pytest.raises(TransportError) as info:
        gateway.complete(recognize())
    assert info.value.attempts == 3
    assert delays == [0.5, 1.0]


def test_rate_limit_is_retried_and_auth_is_not():
    delays = []
    mock = ScriptedMock(by_template={"RecognizeSimple": [{"error": "rate_limit"}, TABLE]})
    assert Gateway(mock, sleep=delays.append).complete(recognize()).attempts == 2

    mock = ScriptedMock(by_template={"RecognizeSimple": {"error": "auth"}})
    with pytest.raises(AuthError):
        Gateway(mock, sleep=delays.append).complete(recognize())
    assert len(mock.calls) == 1


def test_backoff_is_capped():
    gateway = Gateway(ScriptedMock(default=TABLE), backoff=0.5, backoff_max=2.0)
    assert [gateway.delay(n) for n in range(1, 6)] == [0.5, 1.0, 2.0, 2.0, 2.0]


def test_session_enforces_budget():
    mock = ScriptedMock(default=TABLE)
    session = GatewaySession(Gateway(mock), budget=2)
    session.complete(recognize())
    session.complete(recognize())
    with pytest.raises(BudgetExceededError):
        session.complete(recognize())
    assert len(mock.calls) == 2
    assert session.calls == 2
    assert all(record.response_digest for record in session.records)


def test_session_records_failed_calls():
    mock = ScriptedMock(by_template={"RecognizeSimple": {"error": "auth"}})
    session = GatewaySession(Gateway(mock))
    with pytest.raises(AuthError):
        session.complete(recognize())
    record = session.records[0]
    assert record.error == "AuthError"
    assert record.response_digest is None
    assert "latency_ms" not in record.to_dict()


def test_mock_lookup_order_and_miss():
    request = recognize()
    mock = ScriptedMock(
        by_fingerprint={request.fingerprint: "exact"},
        by_template={"RecognizeSimple": "queued"},
        default="fallback",
    )
    assert mock.send(request)[0] == "exact"
    assert mock.send(recognize(image(7)))[0] == "queued"
    assert mock.send(default_registry().request(TemplateId.VTSD, [image()]))[0] == "fallback"

    with pytest.raises(ScriptMissError):
        ScriptedMock().send(request)


def test_mock_script_file(tmp_path):
    request = recognize()
    path = tmp_path / "script.jsonl"
    path.write_text(
        json.dumps({"fingerprint": request.fingerprint, "response_text": TABLE}) + "\n"
        + json.dumps({"template_id": "VTSD", "responses": ["ANSWER: rows=1, cols=1"]}) + "\n",
        encoding="utf-8",
    )
    mock = ScriptedMock.from_jsonl(path)
    assert mock.send(request)[0] == TABLE
    assert mock.send(default_registry().request(TemplateId.VTSD, [image()]))[0] == "ANSWER: rows=1, cols=1"


def test_recorded_calls_replay(tmp_path):
    live = ScriptedMock(default="<table><tr><td>x</td></tr></table>")
    first = Gateway(live).complete(recognize()).text
    assert live.dump(tmp_path / "recorded.jsonl") == 1

    replay = ScriptedMock.from_jsonl(tmp_path / "recorded.jsonl")
    assert Gateway(replay).complete(recognize()).text == first


def test_error_for_status():
    assert error_for_status(200) is None
    assert isinstance(error_for_status(429), RateLimitError)
    assert isinstance(error_for_status(401), AuthError)
    assert isinstance(error_for_status(503), TransportError)
    assert not error_for_status(400).retryable


class FakeResponse:
    def __init__(self, status_code, body):
        self.status_code = status_code
        self.body = body
        self.text = json.dumps(body)

    def json(self):
        return self.body


class FakeSession:
    def __init__(self, response):
        self.response = response
        self.posted = []

    def post(self, url, headers=None, json=None, timeout=None):
        self.posted.append((url, headers, json))
        return self.response


def test_http_backend_payload_and_reply():
    body = {"choices": [{"message": {"content": TABLE}}], "usage": {"prompt_tokens": 12, "completion_tokens": 5}}
    session = FakeSession(FakeResponse(200, body))
    backend = HttpChatCompletions(ModelEndpoint(provider="http", api_key_env=""), session=session)

    text, usage = backend.send(recognize())
    assert text == TABLE
    assert usage == {"prompt_tokens": 12, "completion_tokens": 5}

    url, headers, payload = session.posted[0]
    assert url == "https://api.openai.com/v1/chat/completions"
    assert "Authorization" not in headers
    parts = payload["messages"][-1]["content"]
    assert parts[1]["image_url"]["url"].startswith("data:image/png;base64,")
    assert payload["temperature"] == 0.0 and payload["top_p"] == 0.2


def test_http_backend_maps_status():
    session = FakeSession(FakeResponse(429, {"error": "slow down"}))
    backend = HttpChatCompletions(ModelEndpoint(provider="http"), session=session)
    with pytest.raises(RateLimitError):
        backend.send(recognize())


def test_markup_from_fenced_response():
    raw = "Here is the table:\n```html\n<table><tr><td> a </td></tr></table>\n```\nDone."
    assert parse_markup_response(raw) == "<table><tr><td rowspan=1 colspan=1>a</td></tr></table>"


def test_markup_from_prose_span():
    raw = "The table reads <table><tr><td>1</td><td>2</td></tr></table> and nothing else."
    assert extract_table_span(raw) == "<table><tr><td>1</td><td>2</td></tr></table>"


def test_markup_missing_table():
    with pytest.raises(NoTableError):
        parse_markup_response("I could not find a table in this image.")


def test_plans_from_json():
    raw = '[["BorderEnhance", "Upscale"], ["Binarize"], ["NoiseReduce", "Upscale"]]'
    plans = parse_plans_response(raw, max_length=4, n_plans=3, known_tools=TOOLS)
    assert [p.steps for p in plans] == [("BorderEnhance", "Upscale"), ("Binarize",), ("NoiseReduce", "Upscale")]
    assert all(p.origin is PlanOrigin.MODEL_GENERATED for p in plans)


def test_plans_drop_unknown_tools():
    plans = parse_plans_response('[["MagicTool", "Upscale"], ["MagicTool"]]', 4, 3, TOOLS)
    assert [p.steps for p in plans] == [("Upscale",)]


def test_plans_are_truncated_and_capped():
    long_plans = [
        ["Upscale", "Binarize", "NoiseReduce", "BorderEnhance", "DetectCrop", "Upscale"],
        ["Binarize", "Upscale", "NoiseReduce", "BorderEnhance", "DetectCrop", "Binarize"],
        ["NoiseReduce", "Upscale", "Binarize", "BorderEnhance", "DetectCrop", "Upscale"],
        ["DetectCrop", "Upscale", "Binarize", "NoiseReduce", "BorderEnhance", "Upscale"],
        ["BorderEnhance", "Upscale", "Binarize", "NoiseReduce", "DetectCrop", "Upscale"],
    ]
    plans = parse_plans_response(json.dumps(long_plans), max_length=4, n_plans=3, known_tools=TOOLS)
    assert len(plans) == 3
    assert all(len(plan) == 4 for plan in plans)
    assert plans[0].steps == ("Upscale", "Binarize", "NoiseReduce", "BorderEnhance")


def test_plans_collapse_repeats():
    plans = parse_plans_response('[["Upscale", "Upscale", "Binarize"]]', 4, 3, TOOLS)
    assert plans[0].steps == ("Upscale", "Binarize")


def test_garbage_plans_fall_back_to_empty():
    plans = parse_plans_response("I would sharpen the image first.", 4, 3, TOOLS)
    assert len(plans) == 1
    assert plans[0].steps == ()
    assert plans[0].origin is PlanOrigin.EMPTY


def test_plans_one_per_line():
    raw = "1. BorderEnhance -> Upscale\n2. Binarize, NoiseReduce\n"
    plans = parse_plans_response(raw, 4, 3, TOOLS)
    assert [p.steps for p in plans] == [("BorderEnhance", "Upscale"), ("Binarize", "NoiseReduce")]


def test_reflection_choices():
    accepted = parse_reflection_response("The second one is clearer.\nANSWER: IMAGE_2", step_index=1, tool="Upscale")
    assert (accepted.gamma, accepted.step_index, accepted.tool) == (1, 1, "Upscale")
    assert parse_reflection_response("IMAGE_1").gamma == 0

    unsure = parse_reflection_response("Both look fine to me.")
    assert unsure.gamma == 0
    assert unsure.note == "parse-warning"
