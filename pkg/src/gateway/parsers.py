"""Turn raw model text into markup, tool plans and reflection verdicts."""

import json
import logging
import re
from typing import Iterable, List, Optional, Sequence

from ..agents.plans import PlanOrigin, ReflectionVerdict, ToolPlan
from ..errors import NoTableError, TableModelError
from ..table.convert import serialize
from ..table.parser import parse_markup
from ..tools.toolkit import resolve_tool_id
from .request import text_digest

logger = logging.getLogger(__name__)

_FENCE = re.compile(r"```[a-zA-Z0-9_-]*\s*\n?(.*?)```", re.DOTALL)
_TABLE_SPAN = re.compile(r"<table\b.*?</table\s*>", re.IGNORECASE | re.DOTALL)
_TABLE_OPEN = re.compile(r"<table\b", re.IGNORECASE)
_PLAN_SEPARATORS = re.compile(r"->|→|=>|>|,|;|\+")
_PLAN_PREFIX = re.compile(r"^\s*(?:[-*•]|\d+[.):]|plan\s*\d*\s*[:.)-]?)\s*", re.IGNORECASE)
_IMAGE_CHOICE = re.compile(r"image[\s_-]*([12])\b", re.IGNORECASE)
_ANSWER_LINE = re.compile(r"^\s*answer\s*:(.*)$", re.IGNORECASE | re.MULTILINE)


def strip_fences(raw: str) -> str:
    """Contents of the first fenced block holding a table, else the raw text."""
    for block in _FENCE.findall(raw):
        if _TABLE_OPEN.search(block):
            return block
    return raw


def extract_table_span(raw: str) -> str:
    """
    The first <table>...</table> span of a response.

    An unterminated table runs to the end of the text; the lenient parser
    closes it.

    Raises:
        NoTableError: no table opening tag at all
    """
    text = strip_fences(raw or "")
    match = _TABLE_SPAN.search(text)
    if match:
        return match.group(0)
    opening = _TABLE_OPEN.search(text)
    if opening:
        return text[opening.start():]
    raise NoTableError("response contains no <table> element")


def parse_markup_response(raw: str) -> str:
    """
    Extract and normalize the table markup of a recognition response.

    Returns:
        Serialized markup with explicit spans and trimmed cell text
    """
    span = extract_table_span(raw)
    try:
        tree = parse_markup(span, lenient=True, strip_content=True)
    except TableModelError as e:
        raise NoTableError(f"table span does not parse: {e}") from e
    if tree.warnings or tree.repairs:
        logger.debug("markup repaired: %d repair(s), %d warning(s)", len(tree.repairs), len(tree.warnings))
    return serialize(tree)


def _json_plans(raw: str) -> Optional[list]:
    start, end = raw.find("["), raw.rfind("]")
    if start < 0 or end <= start:
        return None
    try:
        value = json.loads(raw[start:end + 1])
    except json.JSONDecodeError:
        return None
    if isinstance(value, dict):
        value = value.get("plans")
    if not isinstance(value, list):
        return None
    if all(isinstance(item, str) for item in value):
        # a single flat plan
        return [value]
    return [item if isinstance(item, list) else [item] for item in value]


def _line_plans(raw: str) -> List[List[str]]:
    plans = []
    for line in raw.splitlines():
        line = _PLAN_PREFIX.sub("", line).strip().strip("[]")
        if not line:
            continue
        tokens = [t.strip().strip("\"'` ") for t in _PLAN_SEPARATORS.split(line)]
        plans.append([t for t in tokens if t])
    return plans


def sanitize_plan(steps: Iterable, max_length: int, known_tools: Sequence[str]) -> List[str]:
    """Drop unknown ids, collapse consecutive duplicates, truncate to max_length."""
    known = set(known_tools)
    resolved = []
    for step in steps:
        tool = resolve_tool_id(str(step))
        if tool is None or tool.value not in known:
            logger.debug("dropping unknown tool %r", step)
            continue
        if resolved and resolved[-1] == tool.value:
            continue
        resolved.append(tool.value)
    return resolved[:max_length]


def parse_plans_response(raw: str, max_length: int, n_plans: int, known_tools: Sequence[str]) -> List[ToolPlan]:
    """
    Parse a plan-generation response.

    Args:
        raw: Model text, a JSON list of tool-id lists or one plan per line
        max_length: L, the longest allowed plan
        n_plans: N, the most plans returned
        known_tools: Tool ids the toolkit offers

    Returns:
        Between 1 and N distinct plans; [empty plan] when nothing parses
    """
    candidates = _json_plans(raw or "")
    if candidates is None:
        candidates = _line_plans(raw or "")

    plans: List[ToolPlan] = []
    seen = set()
    for candidate in candidates:
        steps = sanitize_plan(candidate, max_length, known_tools)
        if not steps and candidate:
            # nothing usable survived; an explicit [] is kept as a plan
            continue
        key = tuple(steps)
        if key in seen:
            continue
        seen.add(key)
        plans.append(ToolPlan(steps=key, origin=PlanOrigin.MODEL_GENERATED))
        if len(plans) == n_plans:
            break

    if not plans:
        logger.warning("no usable plan in response %s, falling back to the empty plan", text_digest(raw or "")[:12])
        return [ToolPlan.empty()]
    return plans


def parse_reflection_response(raw: str, step_index: int = 0, tool: str = "") -> ReflectionVerdict:
    """
    Map the model's image choice to gamma.

    IMAGE_2 (the processed image) accepts; IMAGE_1 or anything ambiguous
    rejects with a note.
    """
    text = raw or ""
    answer = _ANSWER_LINE.findall(text)
    scope = answer[-1] if answer else text
    choices = {match for match in _IMAGE_CHOICE.findall(scope)}
    digest = text_digest(text)

    if choices == {"2"}:
        return ReflectionVerdict(step_index, 1, tool, digest)
    if choices == {"1"}:
        return ReflectionVerdict(step_index, 0, tool, digest)

    logger.warning("unparseable reflection response %s, rejecting step %d", digest[:12], step_index)
    return ReflectionVerdict(step_index, 0, tool, digest, note="parse-warning")
