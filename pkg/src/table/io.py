"""Canonical ground-truth JSONL: one sample per line."""

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Tuple

from ..errors import FormatError, TableModelError
from .convert import logical_to_markup
from .model import LogicalCell, LogicalTable

logger = logging.getLogger(__name__)


@dataclass
class GroundTruth:
    """A labeled sample in the canonical format."""
    id: str
    image_path: str
    table: LogicalTable
    markup: Optional[str] = None
    traits: str = ""

    @property
    def gold_markup(self) -> str:
        return self.markup or logical_to_markup(self.table)

    @property
    def missing_image(self) -> bool:
        return not Path(self.image_path).exists()

    def to_dict(self) -> dict:
        record = {
            "id": self.id,
            "image_path": self.image_path,
            "cells": [cell.to_dict() for cell in self.table.cells],
        }
        if self.markup is not None:
            record["markup"] = self.markup
        if self.traits:
            record["traits"] = self.traits
        return record

    @classmethod
    def from_dict(cls, data: dict, base_dir: Optional[Path] = None) -> "GroundTruth":
        try:
            sample_id = str(data["id"])
            image_path = str(data["image_path"])
            cells = tuple(LogicalCell.from_dict(c) for c in data["cells"])
        except (KeyError, TypeError, ValueError) as e:
            raise FormatError(f"ground-truth record lacks fields: {e}") from e

        if base_dir is not None and not Path(image_path).is_absolute():
            image_path = str(base_dir / image_path)

        return cls(
            id=sample_id,
            image_path=image_path,
            table=LogicalTable(cells=cells, id=sample_id),
            markup=data.get("markup"),
            traits=data.get("traits") or "",
        )


def read_ground_truth(path: Path, resolve_images: bool = True) -> Tuple[List[GroundTruth], int]:
    """
    Read a canonical ground-truth file.

    Args:
        path: JSONL file
        resolve_images: Resolve relative image paths against the file's directory

    Returns:
        Tuple of parsed samples and the number of skipped lines
    """
    path = Path(path)
    base_dir = path.parent if resolve_images else None
    samples: List[GroundTruth] = []
    skipped = 0

    with open(path, "r", encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                samples.append(GroundTruth.from_dict(json.loads(line), base_dir))
            except (json.JSONDecodeError, FormatError) as e:
                skipped += 1
                logger.warning("%s:%d skipped: %s", path.name, line_no, e)

    return samples, skipped


def write_ground_truth(samples: Iterable[GroundTruth], path: Path) -> int:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with open(path, "w", encoding="utf-8") as f:
        for sample in samples:
            f.write(json.dumps(sample.to_dict(), ensure_ascii=False) + "\n")
            count += 1
    return count


def _record_markup(data: dict) -> str:
    if "markup" in data:
        return str(data["markup"] or "")
    try:
        cells = tuple(LogicalCell.from_dict(c) for c in data["cells"])
    except (KeyError, TypeError, ValueError) as e:
        raise FormatError(f"record has neither markup nor cells: {e}") from e
    return logical_to_markup(LogicalTable(cells=cells))


def read_markup_records(path: Path) -> Tuple[Dict[str, str], int]:
    """
    Read `{id, markup}` JSONL.

    Canonical ground-truth lines without a `markup` field are serialized from
    their cells, so a canonical file can serve as gold.

    Returns:
        Tuple of id -> markup and the number of skipped lines
    """
    path = Path(path)
    records: Dict[str, str] = {}
    skipped = 0

    with open(path, "r", encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                data = json.loads(line)
                if not isinstance(data, dict) or "id" not in data:
                    raise FormatError("record has no id")
                records[str(data["id"])] = _record_markup(data)
            except (json.JSONDecodeError, FormatError, TableModelError) as e:
                skipped += 1
                logger.warning("%s:%d skipped: %s", path.name, line_no, e)

    return records, skipped
