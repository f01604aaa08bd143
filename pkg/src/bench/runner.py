"""Benchmark runner: query the model on every task and aggregate per task kind."""

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence

from ..config import BenchConfig
from ..errors import GatewayError, NGTRError
from ..gateway.client import Gateway, GatewaySession
from ..gateway.prompts import PromptRegistry, TemplateId, default_registry
from ..gateway.request import Sampling, text_digest
from ..table.io import GroundTruth
from ..tools.image import TableImage
from .tasks import TaskKind, TaskResult, generate_tasks, score_task

logger = logging.getLogger(__name__)

BENCH_RESULTS = "bench.jsonl"
BENCH_SUMMARY = "bench_summary.json"


@dataclass
class SampleOutcome:
    sample_id: str
    shape: tuple
    results: List[TaskResult] = field(default_factory=list)
    notes: List[str] = field(default_factory=list)
    error: Optional[str] = None


@dataclass
class BenchReport:
    outcomes: List[SampleOutcome]
    summary: Dict[str, Any]

    @property
    def results(self) -> List[TaskResult]:
        return [result for outcome in self.outcomes for result in outcome.results]


def in_filtered_view(shape, max_diff: int = 3) -> bool:
    """Samples whose row and column counts differ by at most max_diff."""
    rows, cols = shape
    return abs(rows - cols) <= max_diff


def aggregate(results: Iterable[TaskResult]) -> Dict[str, Dict[str, Any]]:
    """Arithmetic mean score per task kind."""
    totals: Dict[str, List[float]] = {}
    for result in results:
        totals.setdefault(result.task.kind.value, []).append(result.score)
    return {
        kind.value: {
            "metric": kind.metric,
            "count": len(totals.get(kind.value, [])),
            "mean": sum(totals[kind.value]) / len(totals[kind.value]) if totals.get(kind.value) else None,
        }
        for kind in TaskKind
        if kind.value in totals
    }


class BenchmarkRunner:
    """Runs the hierarchical tasks of a corpus through a gateway."""

    def __init__(
        self,
        gateway: Gateway,
        config: BenchConfig = BenchConfig(),
        seed: int = 0,
        registry: Optional[PromptRegistry] = None,
        top_p: float = 0.2,
    ):
        self.name = "BenchmarkRunner"
        self.gateway = gateway
        self.config = config
        self.seed = seed
        self.registry = registry or default_registry()
        self.sampling = Sampling(temperature=0.0, top_p=top_p)

    def run_sample(self, sample: GroundTruth, kinds: Sequence[str]) -> SampleOutcome:
        outcome = SampleOutcome(sample.id, sample.table.shape)
        try:
            image = TableImage.load(Path(sample.image_path), image_id=sample.id)
            tasks = generate_tasks(sample.table, kinds, self.seed, self.config.indices_per_table, outcome.notes)
        except (NGTRError, FileNotFoundError, ValueError) as e:
            outcome.error = f"{type(e).__name__}: {e}"
            logger.warning("benchmark sample %s failed: %s", sample.id, outcome.error)
            return outcome

        session = GatewaySession(self.gateway)
        for task in tasks:
            request = self.registry.request(TemplateId(task.kind.value), images=[image],
                                            bindings=task.bindings, sampling=self.sampling)
            try:
                response = session.complete(request)
            except GatewayError as e:
                outcome.results.append(TaskResult(task, None, None, 0.0, parse_failed=True,
                                                  error=type(e).__name__))
                continue
            outcome.results.append(score_task(task, response, text_digest(response), self.config.casefold))
        return outcome

    def run(
        self,
        samples: Sequence[GroundTruth],
        kinds: Optional[Sequence[str]] = None,
        workers: int = 1,
        output_dir: Optional[Path] = None,
    ) -> BenchReport:
        """
        Benchmark a corpus.

        Args:
            samples: Gold samples with images
            kinds: Task kinds, defaults to the configured ones
            workers: Worker threads across samples
            output_dir: Receives bench.jsonl and bench_summary.json when given

        Returns:
            BenchReport with outcomes in input order and the summary
        """
        kinds = list(kinds or self.config.kinds)
        with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
            outcomes = list(pool.map(lambda sample: self.run_sample(sample, kinds), samples))

        filtered = [o for o in outcomes if in_filtered_view(o.shape, self.config.filter_max_diff)]
        summary = {
            "samples": len(outcomes),
            "failed_samples": sum(1 for o in outcomes if o.error),
            "skipped_tasks": sum(len(o.notes) for o in outcomes),
            "filter_max_diff": self.config.filter_max_diff,
            "filtered_samples": len(filtered),
            "full": aggregate(r for o in outcomes for r in o.results),
            "filtered": aggregate(r for o in filtered for r in o.results),
        }
        report = BenchReport(outcomes, summary)
        if output_dir is not None:
            write_bench_outputs(Path(output_dir), report)
        return report


def write_bench_outputs(output_dir: Path, report: BenchReport) -> None:
    output_dir.mkdir(parents=True, exist_ok=True)
    with open(output_dir / BENCH_RESULTS, "w", encoding="utf-8") as f:
        for outcome in report.outcomes:
            if outcome.error:
                f.write(json.dumps({"sample_id": outcome.sample_id, "error": outcome.error}, ensure_ascii=False) + "\n")
            for result in outcome.results:
                f.write(json.dumps(result.to_dict(), ensure_ascii=False, sort_keys=True) + "\n")
    (output_dir / BENCH_SUMMARY).write_text(json.dumps(report.summary, indent=2, sort_keys=True), encoding="utf-8")


def run_benchmark(samples, kinds, gateway: Gateway, config: BenchConfig = BenchConfig(), seed: int = 0,
                  workers: int = 1, output_dir: Optional[Path] = None) -> BenchReport:
    return BenchmarkRunner(gateway, config, seed).run(samples, kinds, workers, output_dir)
