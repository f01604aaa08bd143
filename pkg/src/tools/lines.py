"""Ruling-line detection shared by the tools, degradations and tests."""

import math
from dataclasses import dataclass
from typing import List, Tuple

import cv2
import numpy as np

MIN_CONTRAST = 16


@dataclass(frozen=True)
class RulingLine:
    orientation: str  # "h" or "v"
    x: int
    y: int
    width: int
    height: int

    @property
    def length(self) -> int:
        return self.width if self.orientation == "h" else self.height


def dark_mask(gray: np.ndarray) -> np.ndarray:
    """Otsu-inverted foreground mask (255 = ink); empty for flat images."""
    if int(gray.max()) - int(gray.min()) < MIN_CONTRAST:
        return np.zeros_like(gray)
    _, mask = cv2.threshold(gray, 0, 255, cv2.THRESH_BINARY_INV + cv2.THRESH_OTSU)
    return mask


def line_masks(gray: np.ndarray, min_length_ratio: float = 0.3) -> Tuple[np.ndarray, np.ndarray]:
    """
    Horizontal and vertical line masks via morphological opening.

    Args:
        gray: Grayscale image
        min_length_ratio: Kernel length as a fraction of min(H, W)

    Returns:
        Tuple (horizontal, vertical) of binary masks
    """
    mask = dark_mask(gray)
    length = max(3, int(math.ceil(min_length_ratio * min(gray.shape[:2]))))
    horizontal = cv2.morphologyEx(mask, cv2.MORPH_OPEN, cv2.getStructuringElement(cv2.MORPH_RECT, (length, 1)))
    vertical = cv2.morphologyEx(mask, cv2.MORPH_OPEN, cv2.getStructuringElement(cv2.MORPH_RECT, (1, length)))
    return horizontal, vertical


def ruling_mask(gray: np.ndarray, min_length_ratio: float = 0.3) -> np.ndarray:
    horizontal, vertical = line_masks(gray, min_length_ratio)
    return cv2.bitwise_or(horizontal, vertical)


def detect_ruling_lines(gray: np.ndarray, min_length_ratio: float = 0.3) -> List[RulingLine]:
    """Connected components of the line masks, one RulingLine each."""
    lines: List[RulingLine] = []
    for orientation, mask in zip(("h", "v"), line_masks(gray, min_length_ratio)):
        count, _, stats, _ = cv2.connectedComponentsWithStats(mask, connectivity=8)
        for label in range(1, count):
            x, y, w, h = (int(v) for v in stats[label, :4])
            lines.append(RulingLine(orientation, x, y, w, h))
    return lines


def estimate_skew_angle(gray: np.ndarray, min_length_ratio: float = 0.3, top_k: int = 20) -> float:
    """
    Dominant line angle in degrees, folded into [-45, 45).

    Horizontal and vertical rulings rotated by the same angle fold onto the
    same value, so a tilted grid reports its tilt.
    """
    mask = dark_mask(gray)
    if not mask.any():
        return 0.0
    threshold = max(10, int(min_length_ratio * min(gray.shape[:2])))
    found = cv2.HoughLines(mask, 1, np.pi / 1440, threshold)
    if found is None:
        return 0.0

    angles = []
    for rho_theta in found[:top_k]:
        theta = float(rho_theta[0][1])
        direction = math.degrees(theta) - 90.0
        folded = (direction + 45.0) % 90.0 - 45.0
        angles.append(folded)
    return float(np.median(angles))


def describe_traits(gray: np.ndarray) -> str:
    """Short free-text description injected into the planning prompt."""
    h, w = gray.shape[:2]
    traits = []
    traits.append("low resolution" if min(h, w) < 300 else "adequate resolution")

    spread = float(np.percentile(gray, 98) - np.percentile(gray, 2))
    mean = float(gray.mean())
    if spread < 100:
        traits.append("low contrast")
    if mean < 90:
        traits.append("underexposed")
    elif mean > 245 and spread < 150:
        traits.append("overexposed")

    lines = detect_ruling_lines(gray)
    if not lines:
        traits.append("no visible borders")
    elif len(lines) < 4:
        traits.append("sparse borders")
    else:
        traits.append("ruled borders")

    skew = estimate_skew_angle(gray)
    if abs(skew) >= 2.0:
        traits.append(f"tilted about {abs(skew):.0f} degrees")

    return ", ".join(traits)
