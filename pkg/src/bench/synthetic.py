"""Synthetic mini-corpus: rendered random tables plus a replayable mock script."""

import json
import logging
import random
import re
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Dict, Optional

import numpy as np

from ..config import PipelineConfig, RunConfig
from ..gateway.client import Gateway
from ..gateway.mock import ScriptedMock
from ..gateway.prompts import TemplateId
from ..gateway.request import VisionRequest
from ..retrieval.store import build_store, save_store
from ..table.convert import logical_to_markup
from ..table.io import GroundTruth, write_ground_truth
from ..table.model import LogicalTable
from ..table.synthetic import random_logical_table
from ..tools.degrade import degrade
from ..tools.render import render_table
from .tasks import column_contents, content_at, merged_contents, row_contents

logger = logging.getLogger(__name__)

ORACLE_PLANS = [["Binarize"], ["Upscale", "BorderEnhance"], ["NoiseReduce"]]
_LOCATION = re.compile(r"row=(\d+), col=(\d+)")


def _truncated_markup(table: LogicalTable) -> Optional[str]:
    """The table without its last row, as a weak recognizer would read it."""
    last = table.n_rows - 1
    cells = tuple(c for c in table.cells if c.end_row < last)
    if not cells:
        return None
    return logical_to_markup(LogicalTable(cells=cells, id=table.id))


class OracleResponder:
    """
    Deterministic stand-in for a model that knows every table.

    Recognition is exact only on upscaled images and drops the last row
    otherwise; reflection accepts a step that enlarges the image or raises
    its contrast.
    """

    def __init__(self, tables: Dict[str, LogicalTable]):
        self.tables = tables

    def __call__(self, request: VisionRequest) -> Optional[str]:
        image = request.images[0]
        table = self.tables.get(image.id)
        template = TemplateId(request.template_id)

        if template is TemplateId.PLAN_GENERATION:
            return json.dumps(ORACLE_PLANS)
        if template is TemplateId.REFLECTION:
            before, after = request.images
            larger = after.height * after.width > before.height * before.width
            crisper = float(np.std(after.gray())) >= float(np.std(before.gray()))
            return "IMAGE_2" if larger or crisper else "IMAGE_1"
        if table is None:
            return None

        if template in (TemplateId.RECOGNIZE_SIMPLE, TemplateId.RECOGNIZE_COT):
            if "Upscale" in image.tool_names():
                return "```html\n" + logical_to_markup(table) + "\n```"
            return _truncated_markup(table) or "I cannot see a table."
        if template is TemplateId.VTSD:
            return f"The table is {table.n_rows} by {table.n_cols}.\nANSWER: rows={table.n_rows}, cols={table.n_cols}"
        if template is TemplateId.IRDR:
            return "ANSWER: " + json.dumps(row_contents(table, int(request.bindings["row_index"])))
        if template is TemplateId.ICDR:
            return "ANSWER: " + json.dumps(column_contents(table, int(request.bindings["col_index"])))
        if template is TemplateId.MCD:
            return "ANSWER: " + json.dumps(merged_contents(table))
        if template is TemplateId.CCR:
            cell = next(c for c in table.sorted().cells if c.content == request.bindings["cell_content"])
            return f"ANSWER: row={cell.start_row}, col={cell.start_col}"
        if template is TemplateId.ICR:
            row, col = (int(v) for v in _LOCATION.search(str(request.bindings["cell_location"])).groups())
            return "ANSWER: " + content_at(table, row, col)
        return None


@dataclass
class SyntheticCorpus:
    train: Path
    test: Path
    store: Path
    script: Optional[Path]
    tables: Dict[str, LogicalTable]


def _table(rng: random.Random, table_id: str, min_side: int = 3, max_side: int = 7) -> LogicalTable:
    while True:
        table = random_logical_table(rng, max_rows=max_side, max_cols=max_side, merge_prob=0.15, table_id=table_id)
        if table.n_rows >= min_side and table.n_cols >= min_side:
            return table


def synthesize_corpus(
    out_dir: Path,
    n_train: int = 10,
    n_test: int = 10,
    seed: int = 0,
    record_script: bool = True,
) -> SyntheticCorpus:
    """
    Render a train split (neighbor store) and a mildly degraded test split.

    Args:
        out_dir: Output directory; images go to out_dir/images
        n_train: Training samples
        n_test: Test samples; every other one is blurred
        seed: Layout and content seed
        record_script: Also run the pipeline and the benchmark against the
            oracle and write the replayable script.jsonl

    Returns:
        SyntheticCorpus with the written paths
    """
    out_dir = Path(out_dir)
    images = out_dir / "images"
    images.mkdir(parents=True, exist_ok=True)
    rng = random.Random(seed)

    tables: Dict[str, LogicalTable] = {}
    splits = {"train": [], "test": []}
    for split, count in (("train", n_train), ("test", n_test)):
        for index in range(count):
            sample_id = f"{split}-{index:03d}"
            table = _table(rng, sample_id)
            image = render_table(table, image_id=sample_id)
            if split == "test" and index % 2 == 1:
                image = degrade(image, "Blur", seed=seed)
            path = image.save(images / f"{sample_id}.png")
            tables[sample_id] = table
            splits[split].append(GroundTruth(id=sample_id, image_path=f"images/{path.name}", table=table))

    train_path, test_path = out_dir / "train.jsonl", out_dir / "test.jsonl"
    write_ground_truth(splits["train"], train_path)
    write_ground_truth(splits["test"], test_path)

    store_dir = out_dir / "store"
    store, _ = build_store(_resolved(splits["train"], out_dir))
    save_store(store, store_dir)

    script_path = None
    if record_script:
        script_path = out_dir / "script.jsonl"
        record_oracle_script(_resolved(splits["test"], out_dir), store, tables, script_path)

    logger.info("synthesized %d train and %d test sample(s) in %s", n_train, n_test, out_dir)
    return SyntheticCorpus(train_path, test_path, store_dir, script_path, tables)


def _resolved(samples, base: Path):
    return [replace(s, image_path=str(base / s.image_path)) for s in samples]


def record_oracle_script(samples, store, tables: Dict[str, LogicalTable], path: Path) -> int:
    """Run every pipeline variant and the benchmark against the oracle, then dump the replies."""
    from .runner import BenchmarkRunner
    from ..graph.runner import run_corpus
    from ..graph.workflow import NGTRWorkflow

    mock = ScriptedMock(responder=OracleResponder(tables))
    gateway = Gateway(mock, max_retries=0)
    variants = [
        PipelineConfig(),
        PipelineConfig(experience_enabled=False),
        PipelineConfig(reflection_enabled=False),
        PipelineConfig(mode="direct"),
    ]
    for pipeline in variants:
        workflow = NGTRWorkflow(store, gateway, config=pipeline)
        run_corpus(samples, workflow, RunConfig(pipeline=pipeline, workers=1))
    BenchmarkRunner(gateway).run(samples)
    return mock.dump(path)
