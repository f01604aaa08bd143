"""Dataset readers producing canonical GroundTruth samples."""

import json
import logging
import re
from html import escape
from pathlib import Path
from typing import List, Optional, Tuple

from ..errors import FormatError, TableModelError
from ..table.convert import markup_to_logical
from ..table.io import GroundTruth, read_ground_truth
from ..table.model import LogicalCell, LogicalTable
from ..table.parser import parse_markup

logger = logging.getLogger(__name__)

DATASETS = ("pubtabnet", "scitsr", "canonical")

_INLINE_TAG = re.compile(r"^</?[a-zA-Z][^>]*>$")
IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg")


def pubtabnet_markup(record: dict) -> str:
    """
    Rebuild table markup from structure tokens and per-cell tokens.

    Inline formatting tags inside cells (<b>, <i>, <sup>...) are dropped.
    """
    try:
        structure = list(record["html"]["structure"]["tokens"])
        cells = record["html"]["cells"]
    except (KeyError, TypeError) as e:
        raise FormatError(f"record lacks html.structure.tokens or html.cells: {e}") from e

    slots = [i for i, token in enumerate(structure) if token in ("<td>", ">")]
    if len(slots) != len(cells):
        raise FormatError(f"{len(slots)} cell slots in the structure but {len(cells)} cells")

    for index, cell in zip(reversed(slots), reversed(cells)):
        tokens = [t for t in cell.get("tokens", []) if not _INLINE_TAG.match(t)]
        if tokens:
            structure.insert(index + 1, "".join(escape(t, quote=False) if len(t) == 1 else t for t in tokens))
    return "<table>" + "".join(structure) + "</table>"


def _image_for(root: Path, *candidates: str) -> Path:
    for candidate in candidates:
        path = root / candidate
        if path.exists():
            return path
    return root / candidates[-1]


def ingest_pubtabnet(path: Path, image_root: Optional[Path] = None) -> Tuple[List[GroundTruth], int]:
    """
    Read a PubTabNet-style JSONL annotation file.

    Args:
        path: JSONL with filename, split and html.{structure, cells}
        image_root: Directory holding the images; defaults to the file's directory

    Returns:
        Tuple of samples and the count of skipped lines
    """
    path = Path(path)
    image_root = Path(image_root) if image_root else path.parent
    samples: List[GroundTruth] = []
    skipped = 0

    with open(path, "r", encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
                filename = record["filename"]
                markup = pubtabnet_markup(record)
                sample_id = Path(filename).stem
                table = markup_to_logical(parse_markup(markup, lenient=True), sample_id)
            except (json.JSONDecodeError, KeyError, TypeError, FormatError, TableModelError) as e:
                skipped += 1
                logger.warning("%s:%d skipped: %s", path.name, line_no, e)
                continue

            image = _image_for(image_root, str(Path(record.get("split", "")) / filename), filename)
            samples.append(GroundTruth(id=sample_id, image_path=str(image), table=table, markup=markup))

    logger.info("ingested %d PubTabNet record(s), skipped %d", len(samples), skipped)
    return samples, skipped


def scitsr_table(data: dict, table_id: str) -> LogicalTable:
    try:
        cells = tuple(
            LogicalCell(
                int(cell["start_row"]), int(cell["end_row"]), int(cell["start_col"]), int(cell["end_col"]),
                " ".join(str(token) for token in cell.get("content") or []).strip(),
            )
            for cell in data["cells"]
        )
    except (KeyError, TypeError, ValueError) as e:
        raise FormatError(f"structure file lacks cell fields: {e}") from e
    for cell in cells:
        cell.validate()
    return LogicalTable(cells=cells, id=table_id).sorted()


def ingest_scitsr(directory: Path) -> Tuple[List[GroundTruth], int]:
    """
    Read a SciTSR-style directory: structure/*.json plus img/<stem>.png.

    Records whose image is missing are still emitted and counted in the log.
    """
    directory = Path(directory)
    structure_dir = directory / "structure"
    if not structure_dir.is_dir():
        raise FormatError(f"{directory} has no structure/ directory")

    samples: List[GroundTruth] = []
    skipped = missing = 0
    for path in sorted(structure_dir.glob("*.json")):
        try:
            table = scitsr_table(json.loads(path.read_text(encoding="utf-8")), path.stem)
        except (json.JSONDecodeError, UnicodeDecodeError, FormatError, TableModelError) as e:
            skipped += 1
            logger.warning("%s skipped: %s", path.name, e)
            continue
        image = _image_for(directory / "img", *(path.stem + suffix for suffix in IMAGE_SUFFIXES))
        sample = GroundTruth(id=path.stem, image_path=str(image), table=table)
        if sample.missing_image:
            missing += 1
        samples.append(sample)

    logger.info("ingested %d SciTSR record(s), skipped %d, %d without image", len(samples), skipped, missing)
    return samples, skipped


def ingest_canonical(path: Path) -> Tuple[List[GroundTruth], int]:
    return read_ground_truth(Path(path))


def ingest(kind: str, path: Path, image_root: Optional[Path] = None) -> Tuple[List[GroundTruth], int]:
    if kind == "pubtabnet":
        return ingest_pubtabnet(path, image_root)
    if kind == "scitsr":
        return ingest_scitsr(path)
    if kind == "canonical":
        return ingest_canonical(path)
    raise FormatError(f"unknown dataset kind {kind!r}, expected one of {DATASETS}")
