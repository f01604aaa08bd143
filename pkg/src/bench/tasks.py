"""Hierarchical recognition tasks: generation from a gold table and scoring."""

import hashlib
import json
import logging
import random
import re
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Iterable, List, Optional

from ..errors import BenchError, CCRUnavailable
from ..metrics.scores import exact_accuracy, micro_f1
from ..table.model import LogicalTable

logger = logging.getLogger(__name__)


class TaskKind(str, Enum):
    VTSD = "VTSD"
    IRDR = "IRDR"
    ICDR = "ICDR"
    MCD = "MCD"
    CCR = "CCR"
    ICR = "ICR"

    @property
    def metric(self) -> str:
        return "F1" if self in (TaskKind.IRDR, TaskKind.ICDR, TaskKind.MCD) else "ACC"


@dataclass(frozen=True)
class HierTask:
    kind: TaskKind
    sample_id: str
    params: Dict[str, Any] = field(default_factory=dict)
    gold: Any = None

    @property
    def bindings(self) -> Dict[str, Any]:
        """Prompt placeholders of the task's template."""
        if self.kind is TaskKind.IRDR:
            return {"row_index": self.params["row_index"]}
        if self.kind is TaskKind.ICDR:
            return {"col_index": self.params["col_index"]}
        if self.kind is TaskKind.CCR:
            return {"cell_content": self.params["cell_content"]}
        if self.kind is TaskKind.ICR:
            return {"cell_location": f"row={self.params['row_index']}, col={self.params['col_index']}"}
        return {}

    def to_dict(self) -> dict:
        gold = list(self.gold) if isinstance(self.gold, (tuple, list)) else self.gold
        return {"kind": self.kind.value, "sample_id": self.sample_id, "params": dict(self.params), "gold": gold}


@dataclass(frozen=True)
class TaskResult:
    task: HierTask
    response_digest: Optional[str]
    parsed: Any
    score: float
    parse_failed: bool = False
    error: Optional[str] = None

    @property
    def metric_kind(self) -> str:
        return self.task.kind.metric

    def to_dict(self) -> dict:
        parsed = list(self.parsed) if isinstance(self.parsed, (tuple, list)) else self.parsed
        record = dict(self.task.to_dict(), parsed=parsed, score=self.score, metric=self.metric_kind,
                      response_digest=self.response_digest, parse_failed=self.parse_failed)
        if self.error:
            record["error"] = self.error
        return record


def _rng(seed: int, table_id: str) -> random.Random:
    digest = hashlib.sha256(f"{seed}:{table_id}".encode("utf-8")).digest()
    return random.Random(int.from_bytes(digest[:8], "big"))


def row_contents(table: LogicalTable, row: int) -> List[str]:
    return [c.content for c in sorted(table.cells, key=lambda c: c.start_col) if c.start_row == row]


def column_contents(table: LogicalTable, col: int) -> List[str]:
    return [c.content for c in sorted(table.cells, key=lambda c: c.start_row) if c.start_col == col]


def merged_contents(table: LogicalTable) -> List[str]:
    return [c.content for c in table.sorted().cells if c.is_merged]


def content_at(table: LogicalTable, row: int, col: int) -> str:
    cell = table.cell_at(row, col)
    return cell.content if cell is not None else ""


def unique_content_cells(table: LogicalTable):
    counts = Counter(c.content for c in table.cells if c.content.strip())
    return [c for c in table.sorted().cells if c.content.strip() and counts[c.content] == 1]


def derive_gold(task: HierTask, table: LogicalTable) -> Any:
    """Recompute a task's gold answer from the table."""
    if task.kind is TaskKind.VTSD:
        return table.shape
    if task.kind is TaskKind.IRDR:
        return row_contents(table, task.params["row_index"])
    if task.kind is TaskKind.ICDR:
        return column_contents(table, task.params["col_index"])
    if task.kind is TaskKind.MCD:
        return merged_contents(table)
    if task.kind is TaskKind.CCR:
        matches = [c for c in table.cells if c.content == task.params["cell_content"]]
        if len(matches) != 1:
            raise CCRUnavailable(f"content {task.params['cell_content']!r} is not unique")
        return (matches[0].start_row, matches[0].start_col)
    return content_at(table, task.params["row_index"], task.params["col_index"])


def generate_tasks(
    gold: LogicalTable,
    kinds: Iterable,
    seed: int = 0,
    indices_per_table: int = 1,
    notes: Optional[List[str]] = None,
) -> List[HierTask]:
    """
    Derive the hierarchical tasks of one gold table.

    Args:
        gold: Ground-truth table
        kinds: Task kinds to generate
        seed: Random seed; with the table id it fixes every sampled index
        indices_per_table: Row/column/location draws for IRDR, ICDR and ICR
        notes: Receives a note for every skipped task

    Returns:
        Tasks in the order of TaskKind
    """
    wanted = {TaskKind(k) for k in kinds}
    rng = _rng(seed, gold.id)
    n_rows, n_cols = gold.shape
    tasks: List[HierTask] = []

    for kind in TaskKind:
        if kind not in wanted:
            continue
        if kind is TaskKind.VTSD:
            tasks.append(HierTask(kind, gold.id, {}, (n_rows, n_cols)))
        elif kind is TaskKind.MCD:
            tasks.append(HierTask(kind, gold.id, {}, merged_contents(gold)))
        elif kind is TaskKind.IRDR and n_rows:
            for row in sorted(rng.sample(range(n_rows), min(indices_per_table, n_rows))):
                tasks.append(HierTask(kind, gold.id, {"row_index": row}, row_contents(gold, row)))
        elif kind is TaskKind.ICDR and n_cols:
            for col in sorted(rng.sample(range(n_cols), min(indices_per_table, n_cols))):
                tasks.append(HierTask(kind, gold.id, {"col_index": col}, column_contents(gold, col)))
        elif kind is TaskKind.CCR:
            candidates = unique_content_cells(gold)
            if not candidates:
                message = f"{gold.id}: CCRUnavailable, no cell has unique content"
                logger.info(message)
                if notes is not None:
                    notes.append(message)
                continue
            cell = rng.choice(candidates)
            tasks.append(HierTask(kind, gold.id, {"cell_content": cell.content}, (cell.start_row, cell.start_col)))
        elif kind is TaskKind.ICR and n_rows and n_cols:
            for _ in range(indices_per_table):
                row, col = rng.randrange(n_rows), rng.randrange(n_cols)
                tasks.append(HierTask(kind, gold.id, {"row_index": row, "col_index": col},
                                      content_at(gold, row, col)))

    for task in tasks:
        if _canonical(derive_gold(task, gold)) != _canonical(task.gold):
            raise BenchError(f"{task.kind.value} gold for {gold.id} is inconsistent with the table")
    return tasks


def _canonical(answer: Any) -> Any:
    return tuple(answer) if isinstance(answer, (tuple, list)) else answer


# Response parsing

_ANSWER = re.compile(r"^\s*\**answer\**\s*:\s*(.*)$", re.IGNORECASE | re.MULTILINE)
_SIZE = re.compile(r"rows?\s*[=:]?\s*(\d+)\D{0,20}?col(?:umn)?s?\s*[=:]?\s*(\d+)", re.IGNORECASE)
_LOCATION = re.compile(r"row\s*[=:]?\s*(\d+)\D{0,20}?col(?:umn)?\s*[=:]?\s*(\d+)", re.IGNORECASE)
_LIST = re.compile(r"\[.*\]", re.DOTALL)


def _answer_scope(response: str) -> str:
    answers = _ANSWER.findall(response)
    return answers[-1] if answers else response


def _parse_list(scope: str) -> Optional[List[str]]:
    match = _LIST.search(scope)
    if not match:
        return None
    try:
        value = json.loads(match.group(0))
    except json.JSONDecodeError:
        return None
    if not isinstance(value, list):
        return None
    return ["" if item is None else str(item) for item in value]


def parse_answer(kind: TaskKind, response: str) -> Any:
    """Parsed answer per the task's answer-line schema, or None."""
    if not response or not response.strip():
        return None
    scope = _answer_scope(response)

    if kind is TaskKind.VTSD:
        matches = _SIZE.findall(scope)
        return (int(matches[-1][0]), int(matches[-1][1])) if matches else None
    if kind is TaskKind.CCR:
        matches = _LOCATION.findall(scope)
        return (int(matches[-1][0]), int(matches[-1][1])) if matches else None
    if kind in (TaskKind.IRDR, TaskKind.ICDR, TaskKind.MCD):
        parsed = _parse_list(scope)
        if parsed is None and scope is not response:
            parsed = _parse_list(response)
        return parsed

    # ICR
    if scope is response:
        lines = [line for line in response.strip().splitlines() if line.strip()]
        if len(lines) != 1:
            return None
        scope = lines[0]
    value = scope.strip()
    if len(value) >= 2 and value[0] == value[-1] and value[0] in "\"'":
        value = value[1:-1]
    return value


def score_task(
    task: HierTask,
    response: str,
    response_digest: Optional[str] = None,
    casefold: bool = False,
) -> TaskResult:
    """
    Score one response.

    ACC kinds score 0 or 1; F1 kinds score micro-F1 over content lists, with
    an empty prediction for an empty gold list counting as fully correct.
    """
    parsed = parse_answer(task.kind, response)
    if parsed is None:
        return TaskResult(task, response_digest, None, 0.0, parse_failed=True)

    if task.kind.metric == "F1":
        gold = list(task.gold)
        score = 1.0 if not gold and not parsed else micro_f1(parsed, gold, casefold)
    else:
        score = float(exact_accuracy(parsed, task.gold, casefold))
    return TaskResult(task, response_digest, parsed, score)
