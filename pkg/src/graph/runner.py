"""Batch runner: samples through the workflow on a bounded worker pool."""

import json
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

from ..config import RunConfig
from ..errors import NGTRError
from ..table.io import GroundTruth
from ..tools.image import TableImage
from .report import RunReport, summarize
from .workflow import NGTRWorkflow

logger = logging.getLogger(__name__)

REPORTS = "reports.jsonl"
SUMMARY = "summary.json"
TIMING = "timing.jsonl"
CONFIG = "config.json"


@dataclass
class BatchResult:
    reports: List[RunReport]
    summary: Dict[str, Any]
    output_dir: Optional[Path] = None

    @property
    def succeeded(self) -> int:
        return self.summary["succeeded"]


def _run_one(workflow: NGTRWorkflow, sample: GroundTruth) -> Tuple[RunReport, Dict[str, float]]:
    started = time.perf_counter()
    try:
        image = TableImage.load(Path(sample.image_path), image_id=sample.id)
    except (FileNotFoundError, ValueError) as e:
        report = RunReport(sample_id=sample.id, mode=workflow.config.mode,
                           error={"stage": "load", "error_type": type(e).__name__, "message": str(e)},
                           teds=0.0, teds_struct=0.0)
        return report, {}

    try:
        report, timing = workflow.run_sample(image, sample.gold_markup, sample.id)
    except Exception as e:
        # one broken sample never aborts the batch
        logger.exception("sample %s crashed", sample.id)
        stage = "pipeline" if isinstance(e, NGTRError) else "internal"
        report = RunReport(sample_id=sample.id, mode=workflow.config.mode,
                           error={"stage": stage, "error_type": type(e).__name__, "message": str(e)},
                           teds=0.0, teds_struct=0.0)
        timing = {}
    timing["total"] = time.perf_counter() - started
    return report, timing


def run_corpus(
    samples: Sequence[GroundTruth],
    workflow: NGTRWorkflow,
    config: RunConfig,
    output_dir: Optional[Path] = None,
    ablation: Optional[str] = None,
) -> BatchResult:
    """
    Run every sample and write the batch outputs.

    Args:
        samples: Test samples with gold tables
        workflow: Configured NGTRWorkflow
        config: Effective run configuration (echoed into config.json)
        output_dir: Where reports.jsonl, summary.json, timing.jsonl and
            config.json go; nothing is written when None
        ablation: Label recorded in the summary

    Returns:
        BatchResult with reports in input order
    """
    samples = list(samples)[: config.limit] if config.limit is not None else list(samples)
    logger.info("running %d sample(s) with %d worker(s)", len(samples), config.workers)

    with ThreadPoolExecutor(max_workers=max(1, config.workers)) as pool:
        results = list(pool.map(lambda sample: _run_one(workflow, sample), samples))

    reports = [report for report, _ in results]
    store_size = len(workflow.store) if workflow.store is not None else None
    summary = summarize(reports, store_size=store_size, mode=workflow.config.mode, ablation=ablation)

    if output_dir is not None:
        output_dir = Path(output_dir)
        write_outputs(output_dir, results, summary, config)
    return BatchResult(reports=reports, summary=summary, output_dir=output_dir)


def write_outputs(output_dir: Path, results, summary: Dict[str, Any], config: RunConfig) -> None:
    """Reports are written in input order through one appender."""
    output_dir.mkdir(parents=True, exist_ok=True)
    with open(output_dir / REPORTS, "w", encoding="utf-8") as f:
        for report, _ in results:
            f.write(json.dumps(report.to_dict(), ensure_ascii=False, sort_keys=True) + "\n")
    with open(output_dir / TIMING, "w", encoding="utf-8") as f:
        for report, timing in results:
            f.write(json.dumps({"sample_id": report.sample_id,
                                "seconds": {k: round(v, 6) for k, v in sorted(timing.items())}}) + "\n")
    (output_dir / SUMMARY).write_text(json.dumps(summary, indent=2, sort_keys=True), encoding="utf-8")
    write_config(output_dir, config)


def write_config(output_dir: Path, config: RunConfig) -> Path:
    path = Path(output_dir) / CONFIG
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(config.to_dict(), indent=2, sort_keys=True, default=str), encoding="utf-8")
    return path
