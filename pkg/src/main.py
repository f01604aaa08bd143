"""Command-line interface for the neighbor-guided table recognition toolkit."""

import json
import logging
from pathlib import Path
from typing import List, Optional

import typer
from dotenv import load_dotenv
from rich.console import Console
from rich.logging import RichHandler
from rich.table import Table

from . import __version__
from .bench.ingest import DATASETS, ingest
from .bench.runner import BenchmarkRunner
from .bench.synthetic import synthesize_corpus
from .config import RunConfig, load_config, with_overrides
from .errors import NGTRError, UnknownScenario
from .gateway.backends import RecordingBackend
from .gateway.client import Gateway
from .graph.runner import run_corpus, write_config
from .graph.workflow import NGTRWorkflow
from .metrics.teds import TedsMode, teds_markup
from .retrieval.store import FORMAT_VERSION, build_store, load_store, save_store
from .table.convert import logical_to_markup, markup_size, tree_from_markup
from .table.io import GroundTruth, read_ground_truth, read_markup_records, write_ground_truth
from .table.model import LogicalCell, LogicalTable
from .tools.degrade import Scenario, degrade, parse_scenario
from .tools.image import TableImage
from .tools.toolkit import Toolkit

# Load environment variables
load_dotenv()

app = typer.Typer(
    name="ngtr",
    help="Neighbor-guided toolchain reasoning for table recognition with vision-language models",
    no_args_is_help=True,
)
console = Console()
logger = logging.getLogger("src")

EXIT_OK, EXIT_PARTIAL, EXIT_USAGE = 0, 1, 2
ABLATIONS = ("no-exp", "no-ref")


def setup_logging(verbose: bool) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=Console(stderr=True), rich_tracebacks=True, show_path=False)],
        force=True,
    )


def version_callback(value: bool):
    if value:
        console.print(f"ngtr {__version__} (store format {FORMAT_VERSION})")
        raise typer.Exit()


@app.callback()
def main(
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Debug logging"),
    version: Optional[bool] = typer.Option(None, "--version", callback=version_callback, is_eager=True,
                                           help="Print toolkit and format versions"),
):
    """Table recognition with neighbor-guided preprocessing toolchains."""
    setup_logging(verbose)


def fail(message: str, code: int = EXIT_USAGE) -> None:
    console.print(f"[red]{message}[/red]")
    raise typer.Exit(code=code)


def resolve_config(config_path: Optional[Path], **overrides) -> RunConfig:
    try:
        return with_overrides(load_config(config_path), **overrides)
    except NGTRError as e:
        fail(f"Configuration error: {e}")


def read_corpus(path: Optional[Path]) -> List[GroundTruth]:
    if path is None:
        fail("No corpus given (--corpus or corpus = ... in the config file)")
    path = Path(path)
    if not path.exists():
        fail(f"Corpus not found: {path}")
    samples, skipped = read_ground_truth(path)
    if skipped:
        console.print(f"[yellow]{skipped} malformed corpus line(s) skipped[/yellow]")
    return samples


def make_gateway(config: RunConfig) -> Gateway:
    try:
        return Gateway.from_endpoint(config.endpoint)
    except (NGTRError, OSError) as e:
        fail(f"Cannot set up the model endpoint: {e}")


def print_run_summary(summary: dict) -> None:
    table = Table(title="Recognition results")
    table.add_column("Method")
    table.add_column("Samples", justify="right")
    table.add_column("Errors", justify="right")
    table.add_column("TEDS", justify="right")
    table.add_column("TEDS-Struct", justify="right")
    method = summary["mode"] + (f" ({summary['ablation']})" if summary.get("ablation") else "")
    table.add_row(method, str(summary["samples"]), str(summary["errors"]),
                  _percent(summary["mean_teds"]), _percent(summary["mean_teds_struct"]))
    console.print(table)

    if summary["tool_usage"]:
        usage = Table(title=f"Tool usage ({summary['samples_with_tools']} samples invoked tools)")
        usage.add_column("Tool")
        usage.add_column("Rate", justify="right")
        for tool, rate in summary["tool_usage"].items():
            usage.add_row(tool, _percent(rate))
        console.print(usage)


def _percent(value: Optional[float]) -> str:
    return "-" if value is None else f"{100 * value:.2f}"


@app.command("ingest")
def ingest_command(
    dataset: str = typer.Argument(..., help=f"Dataset layout: {', '.join(DATASETS)}"),
    input_path: Path = typer.Argument(..., help="Annotation file or dataset directory"),
    store_dir: Path = typer.Argument(..., help="Output neighbor store directory"),
    image_root: Optional[Path] = typer.Option(None, help="Image directory (PubTabNet)"),
    config_path: Optional[Path] = typer.Option(None, "--config", "-c", help="Run config file"),
    workers: Optional[int] = typer.Option(None, help="Feature extraction threads"),
):
    """Build a neighbor store (and its canonical JSONL) from a dataset."""
    if dataset not in DATASETS:
        fail(f"Unknown dataset {dataset!r}; expected one of {', '.join(DATASETS)}")
    if not input_path.exists():
        fail(f"Input not found: {input_path}")
    config = resolve_config(config_path, workers=workers)

    try:
        samples, skipped = ingest(dataset, input_path, image_root)
    except (NGTRError, OSError) as e:
        fail(f"Cannot read {input_path}: {e}")
    if not samples:
        console.print("[yellow]No records found; writing an empty store[/yellow]")

    write_ground_truth(samples, store_dir / "canonical.jsonl")
    store, unusable = build_store(samples, config.retrieval, config.workers)
    save_store(store, store_dir)

    table = Table(title="Ingest")
    table.add_column("Records", justify="right")
    table.add_column("Skipped lines", justify="right")
    table.add_column("Without features", justify="right")
    table.add_row(str(len(store)), str(skipped), str(unusable))
    console.print(table)


@app.command("run")
def run_command(
    config_path: Optional[Path] = typer.Option(None, "--config", "-c", help="Run config file"),
    corpus: Optional[Path] = typer.Option(None, help="Canonical JSONL of test samples"),
    store: Optional[Path] = typer.Option(None, help="Neighbor store directory"),
    mock: Optional[Path] = typer.Option(None, help="Replay a mock script instead of a live endpoint"),
    mode: Optional[str] = typer.Option(None, help="ngtr or direct"),
    ablation: Optional[str] = typer.Option(None, help="no-exp or no-ref"),
    limit: Optional[int] = typer.Option(None, help="Process only the first N samples"),
    workers: Optional[int] = typer.Option(None, help="Worker threads"),
    seed: Optional[int] = typer.Option(None, help="Seed recorded with the run"),
    max_plan_length: Optional[int] = typer.Option(None, "--max-plan-length", "--L", help="Maximum toolchain length"),
    n_plans: Optional[int] = typer.Option(None, "--n-plans", "--N", help="Plans per generation"),
    out: Optional[Path] = typer.Option(None, "--out", "-o", help="Output directory"),
    record: Optional[Path] = typer.Option(None, help="Write the served responses as a replayable mock script"),
):
    """Run NGTR (or direct recognition) over a corpus."""
    if ablation is not None and ablation not in ABLATIONS:
        fail(f"Unknown ablation {ablation!r}; expected one of {', '.join(ABLATIONS)}")
    config = resolve_config(
        config_path,
        corpus=str(corpus) if corpus else None,
        store=str(store) if store else None,
        limit=limit,
        workers=workers,
        seed=seed,
        output_dir=str(out) if out else None,
        **{
            "endpoint.provider": "mock" if mock else None,
            "endpoint.mock_script": str(mock) if mock else None,
            "pipeline.mode": mode,
            "pipeline.max_plan_length": max_plan_length,
            "pipeline.n_plans": n_plans,
            "pipeline.experience_enabled": False if ablation == "no-exp" else None,
            "pipeline.reflection_enabled": False if ablation == "no-ref" else None,
        },
    )

    samples = read_corpus(Path(config.corpus) if config.corpus else None)
    neighbor_store = None
    if config.pipeline.mode != "direct":
        if not config.store:
            fail("NGTR mode needs a neighbor store (--store)")
        try:
            neighbor_store = load_store(Path(config.store))
        except (NGTRError, OSError) as e:
            fail(f"Cannot load store: {e}")

    gateway = make_gateway(config)
    if record is not None:
        gateway.backend = RecordingBackend(gateway.backend)
    workflow = NGTRWorkflow(neighbor_store, gateway, Toolkit(config.toolkit), config.pipeline, config.retrieval)
    result = run_corpus(samples, workflow, config, Path(config.output_dir), ablation=ablation)
    print_run_summary(result.summary)
    console.print(f"Reports written to {result.output_dir}")
    if record is not None:
        count = gateway.backend.dump(record)
        console.print(f"{count} response(s) recorded to {record}")

    if result.summary["samples"] and result.succeeded == 0:
        raise typer.Exit(code=EXIT_PARTIAL)


@app.command("bench")
def bench_command(
    config_path: Optional[Path] = typer.Option(None, "--config", "-c", help="Run config file"),
    corpus: Optional[Path] = typer.Option(None, help="Canonical JSONL with images"),
    kinds: Optional[List[str]] = typer.Option(None, "--kind", help="Task kind (repeatable)"),
    mock: Optional[Path] = typer.Option(None, help="Replay a mock script"),
    limit: Optional[int] = typer.Option(None, help="Benchmark only the first N samples"),
    seed: Optional[int] = typer.Option(None, help="Task sampling seed"),
    workers: Optional[int] = typer.Option(None, help="Worker threads"),
    out: Optional[Path] = typer.Option(None, "--out", "-o", help="Output directory"),
):
    """Run the hierarchical recognition tasks."""
    config = resolve_config(
        config_path,
        corpus=str(corpus) if corpus else None,
        limit=limit,
        seed=seed,
        workers=workers,
        output_dir=str(out) if out else None,
        **{
            "endpoint.provider": "mock" if mock else None,
            "endpoint.mock_script": str(mock) if mock else None,
        },
    )
    samples = read_corpus(Path(config.corpus) if config.corpus else None)
    if config.limit is not None:
        samples = samples[: config.limit]

    runner = BenchmarkRunner(make_gateway(config), config.bench, config.seed, top_p=config.pipeline.top_p)
    output_dir = Path(config.output_dir)
    report = runner.run(samples, kinds or config.bench.kinds, config.workers, output_dir)
    write_config(output_dir, config)

    table = Table(title="Hierarchical tasks")
    table.add_column("Task")
    table.add_column("Metric")
    table.add_column("Tasks", justify="right")
    table.add_column("All", justify="right")
    table.add_column(f"|rows-cols| <= {config.bench.filter_max_diff}", justify="right")
    for kind, entry in report.summary["full"].items():
        filtered = report.summary["filtered"].get(kind, {})
        table.add_row(kind, entry["metric"], str(entry["count"]), _percent(entry["mean"]),
                      _percent(filtered.get("mean")))
    console.print(table)
    if report.summary["skipped_tasks"]:
        console.print(f"{report.summary['skipped_tasks']} task(s) skipped (no unique cell content)")

    if report.summary["failed_samples"]:
        raise typer.Exit(code=EXIT_PARTIAL)


@app.command("degrade")
def degrade_command(
    images: List[Path] = typer.Argument(..., help="Input images"),
    scenarios: Optional[List[str]] = typer.Option(None, "--scenario", help="Scenario (repeatable); default all"),
    seed: int = typer.Option(0, help="Seed recorded in the manifest"),
    out: Path = typer.Option(Path("degraded"), "--out", "-o", help="Output directory"),
):
    """Write degraded copies of images plus a manifest."""
    try:
        selected = [parse_scenario(s) for s in scenarios] if scenarios else list(Scenario)
    except UnknownScenario as e:
        fail(str(e))

    out.mkdir(parents=True, exist_ok=True)
    failures = written = 0
    with open(out / "manifest.jsonl", "w", encoding="utf-8") as manifest:
        for path in images:
            try:
                image = TableImage.load(path)
            except (FileNotFoundError, ValueError) as e:
                console.print(f"[red]{path}: {e}[/red]")
                failures += 1
                continue
            for scenario in selected:
                degraded = degrade(image, scenario, seed=seed)
                degraded.save(out / f"{image.id}__{scenario.value}.png")
                params = {k: v for k, v in degraded.provenance[-1]["params"].items()
                          if k not in ("scenario", "seed")}
                manifest.write(json.dumps({"id": image.id, "scenario": scenario.value, "seed": seed,
                                           "params": params}, sort_keys=True) + "\n")
                written += 1

    console.print(f"{written} degraded image(s) written to {out}")
    if failures:
        raise typer.Exit(code=EXIT_PARTIAL if written else EXIT_USAGE)


def _markup_pairs(predictions: Path, gold: Path):
    """Predicted and gold markup by id, plus the skipped line counts."""
    plain = [path.suffix.lower() != ".jsonl" for path in (predictions, gold)]
    if plain[0] != plain[1]:
        fail("Give two markup files or two JSONL files of {id, markup}")
    if plain[0]:
        key = gold.stem
        return {key: predictions.read_text(encoding="utf-8")}, {key: gold.read_text(encoding="utf-8")}, 0, 0
    predicted, pred_skipped = read_markup_records(predictions)
    expected, gold_skipped = read_markup_records(gold)
    return predicted, expected, pred_skipped, gold_skipped


@app.command("score")
def score_command(
    predictions: Path = typer.Argument(..., help="Predicted markup file, or JSONL of {id, markup}"),
    gold: Path = typer.Argument(..., help="Gold markup file, or JSONL of {id, markup} (canonical JSONL works too)"),
    out: Optional[Path] = typer.Option(None, "--out", "-o", help="Write scores.jsonl here"),
):
    """Score predicted markup against gold markup with TEDS and TEDS-Struct."""
    for path in (predictions, gold):
        if not path.exists():
            fail(f"File not found: {path}")

    try:
        predicted, expected, pred_skipped, gold_skipped = _markup_pairs(predictions, gold)
    except (OSError, UnicodeDecodeError) as e:
        fail(f"Cannot read markup: {e}")
    if pred_skipped or gold_skipped:
        console.print(f"[yellow]{pred_skipped} prediction and {gold_skipped} gold line(s) skipped[/yellow]")
    if not expected:
        fail(f"No gold markup in {gold}")

    rows = []
    unusable = 0
    for sample_id, gold_markup in expected.items():
        if tree_from_markup(gold_markup) is None:
            unusable += 1
            continue
        markup = predicted.get(sample_id)
        size_pred, size_gold = markup_size(markup), markup_size(gold_markup)
        rows.append({
            "id": sample_id,
            "teds": teds_markup(markup, gold_markup, TedsMode.FULL).value,
            "teds_struct": teds_markup(markup, gold_markup, TedsMode.STRUCT).value,
            "size_pred": list(size_pred) if size_pred else None,
            "size_gold": list(size_gold) if size_gold else None,
            "missing": markup is None,
        })

    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "scores.jsonl", "w", encoding="utf-8") as f:
            for row in rows:
                f.write(json.dumps(row, sort_keys=True) + "\n")

    if unusable:
        console.print(f"[yellow]{unusable} gold table(s) without parseable markup skipped[/yellow]")

    table = Table(title="Scores")
    table.add_column("Samples", justify="right")
    table.add_column("Missing", justify="right")
    table.add_column("TEDS", justify="right")
    table.add_column("TEDS-Struct", justify="right")
    mean = (lambda key: sum(r[key] for r in rows) / len(rows)) if rows else (lambda key: None)
    table.add_row(str(len(rows)), str(sum(r["missing"] for r in rows)), _percent(mean("teds")),
                  _percent(mean("teds_struct")))
    console.print(table)


@app.command("convert")
def convert_command(
    input_path: Path = typer.Argument(..., help="JSON {cells: [...]} or canonical JSONL"),
    out: Optional[Path] = typer.Option(None, "--out", "-o", help="Write {id, markup} JSONL here"),
):
    """Convert logical cell locations to table markup."""
    if not input_path.exists():
        fail(f"File not found: {input_path}")
    try:
        if input_path.suffix == ".jsonl":
            samples, _ = read_ground_truth(input_path, resolve_images=False)
            tables = [sample.table for sample in samples]
        else:
            data = json.loads(input_path.read_text(encoding="utf-8"))
            cells = tuple(LogicalCell.from_dict(c) for c in data["cells"])
            tables = [LogicalTable(cells=cells, id=str(data.get("id", input_path.stem)))]
        converted = [(table.id, logical_to_markup(table)) for table in tables]
    except (NGTRError, KeyError, ValueError, TypeError) as e:
        fail(f"Cannot convert {input_path}: {e}")

    if out is None:
        for _, markup in converted:
            typer.echo(markup)
        return
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", encoding="utf-8") as f:
        for table_id, markup in converted:
            f.write(json.dumps({"id": table_id, "markup": markup}, ensure_ascii=False) + "\n")
    console.print(f"{len(converted)} table(s) written to {out}")


@app.command("synth")
def synth_command(
    out: Path = typer.Argument(..., help="Output directory"),
    train: int = typer.Option(10, help="Training samples"),
    test: int = typer.Option(10, help="Test samples"),
    seed: int = typer.Option(0, help="Layout seed"),
    script: bool = typer.Option(True, help="Record a replayable mock script"),
):
    """Generate a synthetic mini-corpus with a neighbor store and mock script."""
    corpus = synthesize_corpus(out, n_train=train, n_test=test, seed=seed, record_script=script)
    console.print(f"train: {corpus.train}\ntest: {corpus.test}\nstore: {corpus.store}")
    if corpus.script:
        console.print(f"mock script: {corpus.script}")


@app.command("version")
def version_command():
    """Print toolkit and format versions."""
    version_callback(True)


if __name__ == "__main__":
    app()
