"""ORB features and Hamming-distance similarity between table images."""

import logging
from dataclasses import dataclass

import cv2
import numpy as np

from ..config import RetrievalConfig
from ..errors import FeaturelessError
from ..tools.image import TableImage

logger = logging.getLogger(__name__)

DESCRIPTOR_BYTES = 32  # 256-bit rotated BRIEF

_POPCOUNT = np.array([bin(i).count("1") for i in range(256)], dtype=np.uint16)


@dataclass(frozen=True, eq=False)
class FeatureSet:
    """
    Keypoints as rows (x, y, orientation in radians, response) aligned with
    one 32-byte descriptor row each.
    """
    keypoints: np.ndarray
    descriptors: np.ndarray

    def __post_init__(self):
        keypoints = np.asarray(self.keypoints, dtype=np.float32).reshape(-1, 4)
        descriptors = np.asarray(self.descriptors, dtype=np.uint8).reshape(-1, DESCRIPTOR_BYTES)
        if len(keypoints) != len(descriptors):
            raise ValueError(f"{len(keypoints)} keypoints but {len(descriptors)} descriptors")
        object.__setattr__(self, "keypoints", keypoints)
        object.__setattr__(self, "descriptors", descriptors)

    def __len__(self) -> int:
        return len(self.descriptors)

    def same_as(self, other: "FeatureSet") -> bool:
        return np.array_equal(self.keypoints, other.keypoints) and np.array_equal(self.descriptors, other.descriptors)


def extract_features(img: TableImage, config: RetrievalConfig = RetrievalConfig()) -> FeatureSet:
    """
    Oriented FAST corners ranked by Harris response plus rotated BRIEF descriptors.

    Raises:
        FeaturelessError: fewer than config.min_keypoints keypoints
    """
    orb = cv2.ORB_create(
        nfeatures=config.max_features,
        scoreType=cv2.ORB_HARRIS_SCORE,
        patchSize=31,
        edgeThreshold=31,
    )
    keypoints, descriptors = orb.detectAndCompute(img.gray(), None)
    if descriptors is None or len(keypoints) < config.min_keypoints:
        found = 0 if descriptors is None else len(keypoints)
        raise FeaturelessError(f"image {img.id!r} has {found} keypoints, need {config.min_keypoints}")

    rows = [(kp.pt[0], kp.pt[1], np.deg2rad(kp.angle), kp.response) for kp in keypoints]
    return FeatureSet(keypoints=np.array(rows, dtype=np.float32), descriptors=descriptors)


def hamming_matrix(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Pairwise bit distances between two descriptor arrays."""
    xor = np.bitwise_xor(a[:, None, :], b[None, :, :])
    return _POPCOUNT[xor].sum(axis=2, dtype=np.int32)


def mutual_matches(a: FeatureSet, b: FeatureSet, threshold: int = 64) -> int:
    """
    Count descriptors that are each other's nearest neighbor under the threshold.

    Ties count as nearest, so duplicated descriptors still match and the
    count is symmetric in a and b.
    """
    if not len(a) or not len(b):
        return 0
    distances = hamming_matrix(a.descriptors, b.descriptors)
    nearest = (distances == distances.min(axis=1, keepdims=True)) & (distances == distances.min(axis=0, keepdims=True))
    pairs = nearest & (distances < threshold)
    return int(min(np.count_nonzero(pairs.any(axis=1)), np.count_nonzero(pairs.any(axis=0))))


def ratio_matches(a: FeatureSet, b: FeatureSet, threshold: int = 64, ratio: float = 0.75) -> int:
    """Lowe ratio-test matches from a to b; not symmetric."""
    if len(a) < 1 or len(b) < 2:
        return 0
    matcher = cv2.BFMatcher(cv2.NORM_HAMMING)
    count = 0
    for pair in matcher.knnMatch(a.descriptors, b.descriptors, k=2):
        if len(pair) < 2:
            continue
        best, second = pair
        if best.distance < threshold and best.distance < ratio * second.distance:
            count += 1
    return count


def similarity(a: FeatureSet, b: FeatureSet, config: RetrievalConfig = RetrievalConfig()) -> float:
    """
    Matched descriptor count normalized by the smaller feature set.

    Args:
        a: Features of the first image
        b: Features of the second image
        config: match_mode "mutual" (symmetric) or "ratio"

    Returns:
        Score in [0, 1]
    """
    smaller = min(len(a), len(b))
    if smaller == 0:
        return 0.0
    if config.match_mode == "ratio":
        matches = ratio_matches(a, b, config.hamming_threshold, config.ratio)
    else:
        matches = mutual_matches(a, b, config.hamming_threshold)
    return min(1.0, matches / smaller)
