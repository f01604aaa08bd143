"""Neighbor store: labeled training images with precomputed ORB features."""

import json
import logging
import struct
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Tuple

import numpy as np

from ..config import RetrievalConfig
from ..errors import EmptyStoreError, FeaturelessError, RetrievalError, StoreFormatError
from ..table.convert import tree_from_markup
from ..table.io import GroundTruth
from ..tools.image import TableImage
from ..tools.lines import describe_traits
from .features import DESCRIPTOR_BYTES, FeatureSet, extract_features, similarity

logger = logging.getLogger(__name__)

MAGIC = b"NGTRFEAT"
FORMAT_VERSION = 1
MANIFEST = "manifest.jsonl"
FEATURES = "features.bin"
META = "store.meta.json"


@dataclass(frozen=True, eq=False)
class NeighborRecord:
    id: str
    image_path: str
    features: FeatureSet
    gold_markup: str
    traits: str = ""

    def load_image(self) -> TableImage:
        return TableImage.load(Path(self.image_path), image_id=self.id)

    def manifest_entry(self) -> Dict[str, Any]:
        return {"id": self.id, "image_path": self.image_path, "gold_markup": self.gold_markup, "traits": self.traits}


@dataclass
class NeighborStore:
    """Immutable after build; safe to read from many workers."""
    records: List[NeighborRecord] = field(default_factory=list)
    meta: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        ids = [record.id for record in self.records]
        if len(ids) != len(set(ids)):
            raise RetrievalError("neighbor store ids must be unique")

    def __len__(self) -> int:
        return len(self.records)

    def get(self, record_id: str) -> Optional[NeighborRecord]:
        return next((r for r in self.records if r.id == record_id), None)


def make_record(sample: GroundTruth, config: RetrievalConfig = RetrievalConfig()) -> NeighborRecord:
    """Extract features for one labeled sample; traits are derived when absent."""
    if tree_from_markup(sample.gold_markup) is None:
        raise RetrievalError(f"gold markup of {sample.id!r} does not parse")
    image = TableImage.load(Path(sample.image_path), image_id=sample.id)
    features = extract_features(image, config)
    traits = sample.traits or describe_traits(image.gray())
    return NeighborRecord(
        id=sample.id,
        image_path=str(sample.image_path),
        features=features,
        gold_markup=sample.gold_markup,
        traits=traits,
    )


def build_store(
    samples: Iterable[GroundTruth],
    config: RetrievalConfig = RetrievalConfig(),
    workers: int = 1,
) -> Tuple[NeighborStore, int]:
    """
    Build a store from labeled samples.

    Args:
        samples: Training samples (D')
        config: Feature extraction parameters
        workers: Thread count for feature extraction

    Returns:
        Tuple of the store and the number of skipped samples
    """
    samples = list(samples)

    def attempt(sample: GroundTruth):
        try:
            return make_record(sample, config)
        except (FeaturelessError, RetrievalError, FileNotFoundError, ValueError) as e:
            logger.warning("skipping %s: %s", sample.id, e)
            return None

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        built = list(pool.map(attempt, samples))

    records = [r for r in built if r is not None]
    meta = {
        "format_version": FORMAT_VERSION,
        "max_features": config.max_features,
        "min_keypoints": config.min_keypoints,
        "records": len(records),
        "skipped": len(samples) - len(records),
    }
    logger.info("built neighbor store with %d records (%d skipped)", len(records), meta["skipped"])
    return NeighborStore(records=records, meta=meta), meta["skipped"]


def save_store(store: NeighborStore, directory: Path) -> Path:
    """Write manifest.jsonl, features.bin and the store.meta.json sidecar."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)

    with open(directory / MANIFEST, "w", encoding="utf-8") as f:
        for record in store.records:
            f.write(json.dumps(record.manifest_entry(), ensure_ascii=False) + "\n")

    with open(directory / FEATURES, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<II", FORMAT_VERSION, len(store.records)))
        for record in store.records:
            key = record.id.encode("utf-8")
            f.write(struct.pack("<II", len(key), len(record.features)))
            f.write(key)
            f.write(record.features.keypoints.astype("<f4").tobytes())
            f.write(record.features.descriptors.tobytes())

    meta = dict(store.meta, build_time=time.strftime("%Y-%m-%dT%H:%M:%S"))
    (directory / META).write_text(json.dumps(meta, indent=2), encoding="utf-8")
    return directory


def _read_features(path: Path) -> Dict[str, FeatureSet]:
    data = path.read_bytes()
    if not data.startswith(MAGIC):
        raise StoreFormatError(f"{path} is not a feature file")
    offset = len(MAGIC)
    version, count = struct.unpack_from("<II", data, offset)
    if version != FORMAT_VERSION:
        raise StoreFormatError(f"{path} has format version {version}, expected {FORMAT_VERSION}")
    offset += 8

    features: Dict[str, FeatureSet] = {}
    try:
        for _ in range(count):
            key_len, n = struct.unpack_from("<II", data, offset)
            offset += 8
            key = data[offset:offset + key_len].decode("utf-8")
            offset += key_len
            keypoints = np.frombuffer(data, dtype="<f4", count=4 * n, offset=offset).reshape(n, 4)
            offset += 16 * n
            descriptors = np.frombuffer(data, dtype=np.uint8, count=DESCRIPTOR_BYTES * n, offset=offset)
            offset += DESCRIPTOR_BYTES * n
            features[key] = FeatureSet(keypoints=keypoints.copy(), descriptors=descriptors.copy())
    except (struct.error, ValueError) as e:
        raise StoreFormatError(f"{path} is truncated: {e}") from e
    return features


def load_store(directory: Path) -> NeighborStore:
    directory = Path(directory)
    if not (directory / MANIFEST).exists() or not (directory / FEATURES).exists():
        raise StoreFormatError(f"{directory} is not a neighbor store")

    features = _read_features(directory / FEATURES)
    records = []
    with open(directory / MANIFEST, "r", encoding="utf-8") as f:
        for line in f:
            if not line.strip():
                continue
            entry = json.loads(line)
            if entry["id"] not in features:
                raise StoreFormatError(f"no features stored for {entry['id']!r}")
            records.append(NeighborRecord(
                id=entry["id"],
                image_path=entry["image_path"],
                features=features[entry["id"]],
                gold_markup=entry["gold_markup"],
                traits=entry.get("traits", ""),
            ))

    meta_path = directory / META
    meta = json.loads(meta_path.read_text(encoding="utf-8")) if meta_path.exists() else {}
    return NeighborStore(records=records, meta=meta)


def rank(
    query: FeatureSet,
    store: NeighborStore,
    k: int = 1,
    config: RetrievalConfig = RetrievalConfig(),
) -> List[Tuple[NeighborRecord, float]]:
    """Top-k records by similarity, descending; ties go to the smaller id."""
    if not len(store):
        raise EmptyStoreError("neighbor store is empty")
    if k < 1:
        raise ValueError("k must be positive")
    scored = [(record, similarity(query, record.features, config)) for record in store.records]
    scored.sort(key=lambda pair: (-pair[1], pair[0].id))
    return scored[:k]


def retrieve(
    test: TableImage,
    store: NeighborStore,
    k: int = 1,
    config: RetrievalConfig = RetrievalConfig(),
) -> List[Tuple[NeighborRecord, float]]:
    """
    Retrieve the most similar labeled neighbors of a test image.

    Raises:
        EmptyStoreError: the store has no records
        FeaturelessError: the test image has too few keypoints
    """
    if not len(store):
        raise EmptyStoreError("neighbor store is empty")
    return rank(extract_features(test, config), store, k, config)
