"""Hierarchical recognition benchmark, dataset ingestion and synthetic corpora."""

from .ingest import ingest, ingest_canonical, ingest_pubtabnet, ingest_scitsr, pubtabnet_markup
from .runner import BenchmarkRunner, BenchReport, aggregate, in_filtered_view, run_benchmark
from .synthetic import OracleResponder, SyntheticCorpus, synthesize_corpus
from .tasks import HierTask, TaskKind, TaskResult, generate_tasks, parse_answer, score_task
