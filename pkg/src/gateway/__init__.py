"""Vision-language model gateway, prompt templates and response parsers."""

from .backends import GroqChat, HttpChatCompletions, RecordingBackend, dump_script, error_for_status
from .client import Gateway, GatewaySession, complete, make_backend
from .mock import ScriptedMock
from .parsers import extract_table_span, parse_markup_response, parse_plans_response, parse_reflection_response
from .prompts import PromptRegistry, PromptTemplate, TemplateId, default_registry
from .request import CallRecord, Completion, Sampling, VisionRequest, text_digest
