"""The eight image degradation scenarios used to stress table recognition."""

import logging
import math
from enum import Enum
from typing import Any, Dict, Optional, Tuple

import cv2
import numpy as np

from ..config import ToolkitConfig
from ..errors import UnknownScenario
from .image import TableImage
from .lines import dark_mask, ruling_mask
from .toolkit import border_enhance

logger = logging.getLogger(__name__)


class Scenario(str, Enum):
    BLUR = "Blur"
    UNDEREXPOSURE = "Underexposure"
    OVEREXPOSURE = "Overexposure"
    UNCLEAR_BORDERS = "UnclearBorders"
    MISSING_BORDERS = "MissingBorders"
    THICKENED_BORDERS = "ThickenedBorders"
    TILT20 = "Tilt20"
    TILT40 = "Tilt40"


def parse_scenario(name) -> Scenario:
    if isinstance(name, Scenario):
        return name
    key = str(name).replace("_", "").replace("-", "").lower()
    for scenario in Scenario:
        if scenario.value.lower() == key:
            return scenario
    raise UnknownScenario(f"unknown degradation scenario {name!r}")


def _background(img: TableImage) -> np.ndarray:
    """Median color of the non-ink pixels."""
    ink = dark_mask(img.gray()) > 0
    background = img.pixels[~ink] if (~ink).any() else img.pixels.reshape(-1, img.channels)
    return np.median(background.reshape(-1, img.channels), axis=0).astype(np.uint8).reshape(-1)


def _gamma(pixels: np.ndarray, gamma: float) -> np.ndarray:
    lut = np.clip(255.0 * (np.arange(256) / 255.0) ** gamma, 0, 255)
    return cv2.LUT(pixels, np.round(lut).astype(np.uint8))


def _fill(img: TableImage, mask: np.ndarray, color: np.ndarray, alpha: float) -> np.ndarray:
    out = img.pixels.astype(np.float64)
    target = color.astype(np.float64) if img.channels == 3 else float(color[0])
    out[mask] = (1.0 - alpha) * out[mask] + alpha * target
    return np.clip(np.round(out), 0, 255).astype(np.uint8)


def rotate_expanded(pixels: np.ndarray, angle: float, fill: int = 255) -> np.ndarray:
    """Rotate about the center, growing the canvas so no content is cut off."""
    h, w = pixels.shape[:2]
    matrix = cv2.getRotationMatrix2D((w / 2.0, h / 2.0), angle, 1.0)
    cos, sin = abs(matrix[0, 0]), abs(matrix[0, 1])
    new_w = int(math.ceil(h * sin + w * cos))
    new_h = int(math.ceil(h * cos + w * sin))
    matrix[0, 2] += new_w / 2.0 - w / 2.0
    matrix[1, 2] += new_h / 2.0 - h / 2.0
    border = fill if pixels.ndim == 2 else (fill, fill, fill)
    return cv2.warpAffine(pixels, matrix, (new_w, new_h), flags=cv2.INTER_LINEAR,
                          borderMode=cv2.BORDER_CONSTANT, borderValue=border)


def _apply(img: TableImage, scenario: Scenario, cfg: ToolkitConfig) -> Tuple[np.ndarray, Dict[str, Any]]:
    if scenario is Scenario.BLUR:
        sigma = cfg.blur_sigma
        return cv2.GaussianBlur(img.pixels, (0, 0), sigmaX=sigma, sigmaY=sigma), {"sigma": sigma}

    if scenario is Scenario.UNDEREXPOSURE:
        return _gamma(img.pixels, cfg.underexposure_gamma), {"gamma": cfg.underexposure_gamma}

    if scenario is Scenario.OVEREXPOSURE:
        return _gamma(img.pixels, cfg.overexposure_gamma), {"gamma": cfg.overexposure_gamma}

    if scenario is Scenario.UNCLEAR_BORDERS:
        lines = ruling_mask(img.gray(), cfg.line_length_ratio) > 0
        alpha = cfg.unclear_border_alpha
        return _fill(img, lines, _background(img), alpha), {"alpha": alpha, "line_pixels": int(lines.sum())}

    if scenario is Scenario.MISSING_BORDERS:
        lines = ruling_mask(img.gray(), cfg.line_length_ratio)
        # anti-aliased edges would otherwise survive as faint lines
        grown = cv2.dilate(lines, np.ones((5, 5), np.uint8)) > 0
        return _fill(img, grown, _background(img), 1.0), {"line_pixels": int(grown.sum())}

    if scenario is Scenario.THICKENED_BORDERS:
        thickness = cfg.thickened_border_thickness
        return border_enhance(img, thickness, cfg.line_length_ratio).pixels, {"thickness": thickness}

    if scenario in (Scenario.TILT20, Scenario.TILT40):
        angle = 20.0 if scenario is Scenario.TILT20 else 40.0
        return rotate_expanded(img.pixels, angle), {"angle": angle, "fill": 255}

    raise UnknownScenario(f"unknown degradation scenario {scenario!r}")


def degrade(img: TableImage, scenario, seed: int = 0, config: Optional[ToolkitConfig] = None) -> TableImage:
    """
    Apply one degradation scenario.

    Args:
        img: Source image
        scenario: Scenario or its name
        seed: Provenance only; every scenario is deterministic, so the
            pixels do not depend on it
        config: Strength parameters; defaults from ToolkitConfig

    Returns:
        Degraded image with exactly one new provenance entry
    """
    scenario = parse_scenario(scenario)
    cfg = config or ToolkitConfig()
    pixels, params = _apply(img, scenario, cfg)
    logger.debug("degraded %s with %s %s", img.id, scenario.value, params)
    return img.derive(pixels, "degrade", scenario=scenario.value, seed=seed, **params)
