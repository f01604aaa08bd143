"""The five preprocessing tools and the registry the planner sees."""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Dict, Optional

import cv2
import numpy as np

from ..config import ToolkitConfig
from ..errors import SizeError, ToolError, UnknownToolError
from .image import TableImage
from .lines import dark_mask, line_masks, ruling_mask

logger = logging.getLogger(__name__)


class ToolId(str, Enum):
    BORDER_ENHANCE = "BorderEnhance"
    UPSCALE = "Upscale"
    NOISE_REDUCE = "NoiseReduce"
    BINARIZE = "Binarize"
    DETECT_CROP = "DetectCrop"


@dataclass(frozen=True)
class ToolDescriptor:
    tool_id: ToolId
    description: str
    applicable_scenarios: str

    def prompt_line(self) -> str:
        return f"- {self.tool_id.value}: {self.description} Use when: {self.applicable_scenarios}"


TOOL_DESCRIPTORS: Dict[ToolId, ToolDescriptor] = {
    ToolId.BORDER_ENHANCE: ToolDescriptor(
        ToolId.BORDER_ENHANCE,
        "Thickens the border lines in the image, strengthening the structural features of the table.",
        "faint, thin or broken table borders.",
    ),
    ToolId.UPSCALE: ToolDescriptor(
        ToolId.UPSCALE,
        "Raises the image resolution with bicubic interpolation to improve visual quality.",
        "low-resolution or blurry images with small text.",
    ),
    ToolId.NOISE_REDUCE: ToolDescriptor(
        ToolId.NOISE_REDUCE,
        "Adjusts brightness and contrast and removes speckle noise.",
        "noisy, underexposed or washed-out images.",
    ),
    ToolId.BINARIZE: ToolDescriptor(
        ToolId.BINARIZE,
        "Converts the image to black and white, highlighting text and lines.",
        "uneven backgrounds or colored shading behind the table.",
    ),
    ToolId.DETECT_CROP: ToolDescriptor(
        ToolId.DETECT_CROP,
        "Finds the table region in the image and crops it out.",
        "tables embedded in a larger page or a complex background.",
    ),
}

_ALIASES = {
    "borderenhance": ToolId.BORDER_ENHANCE,
    "borderenhancement": ToolId.BORDER_ENHANCE,
    "upscale": ToolId.UPSCALE,
    "upscaling": ToolId.UPSCALE,
    "imageupscaling": ToolId.UPSCALE,
    "noisereduce": ToolId.NOISE_REDUCE,
    "noisereduction": ToolId.NOISE_REDUCE,
    "binarize": ToolId.BINARIZE,
    "binarization": ToolId.BINARIZE,
    "detectcrop": ToolId.DETECT_CROP,
    "detectandcrop": ToolId.DETECT_CROP,
    "detectionandcropping": ToolId.DETECT_CROP,
}


def resolve_tool_id(name: str) -> Optional[ToolId]:
    """Map a model-written tool name onto a ToolId; None when unknown."""
    key = "".join(ch for ch in str(name).lower() if ch.isalnum())
    return _ALIASES.get(key)


def _as_gray(img: TableImage) -> np.ndarray:
    return img.gray()


def border_enhance(img: TableImage, thickness: int = 2, min_length_ratio: float = 0.3) -> TableImage:
    """Dilate detected ruling lines by `thickness` pixels on each side."""
    gray = _as_gray(img)
    lines = ruling_mask(gray, min_length_ratio)
    if not lines.any():
        return img.derive(img.pixels.copy(), ToolId.BORDER_ENHANCE.value, thickness=thickness, lines_found=0)

    kernel = cv2.getStructuringElement(cv2.MORPH_RECT, (2 * thickness + 1, 2 * thickness + 1))
    grown = cv2.dilate(lines, kernel) > 0
    line_pixels = img.pixels[lines > 0]
    ink = np.median(line_pixels, axis=0).astype(np.uint8)

    out = img.pixels.copy()
    out[grown] = ink
    return img.derive(out, ToolId.BORDER_ENHANCE.value, thickness=thickness, lines_found=1)


def upscale(img: TableImage, factor: float = 2.0, max_pixels: int = 16_000_000) -> TableImage:
    """Bicubic resize by `factor` in [1, 4]."""
    if not 1.0 <= factor <= 4.0:
        raise ToolError(f"upscale factor {factor} outside [1.0, 4.0]")
    height = int(round(factor * img.height))
    width = int(round(factor * img.width))
    if height * width > max_pixels:
        raise SizeError(f"upscaled image {height}x{width} exceeds {max_pixels} pixels")
    if (height, width) == (img.height, img.width):
        return img.derive(img.pixels.copy(), ToolId.UPSCALE.value, factor=factor)
    out = cv2.resize(img.pixels, (width, height), interpolation=cv2.INTER_CUBIC)
    return img.derive(out, ToolId.UPSCALE.value, factor=factor)


def noise_reduce(img: TableImage, low_pct: float = 2.0, high_pct: float = 98.0, median_ksize: int = 3) -> TableImage:
    """Stretch the low..high percentile range to [0, 255], then median-filter."""
    low, high = np.percentile(img.pixels, [low_pct, high_pct])
    if high - low >= 1.0:
        lut = np.clip((np.arange(256, dtype=np.float64) - low) * 255.0 / (high - low), 0, 255)
        stretched = cv2.LUT(img.pixels, np.round(lut).astype(np.uint8))
    else:
        stretched = img.pixels.copy()
    out = cv2.medianBlur(stretched, median_ksize)
    return img.derive(out, ToolId.NOISE_REDUCE.value, low=float(low), high=float(high), median_ksize=median_ksize)


def binarize(img: TableImage) -> TableImage:
    """Grayscale + Otsu global threshold; output values are 0 and 255."""
    gray = _as_gray(img)
    threshold, out = cv2.threshold(gray, 0, 255, cv2.THRESH_BINARY + cv2.THRESH_OTSU)
    return img.derive(out, ToolId.BINARIZE.value, threshold=float(threshold))


def _largest_box(mask: np.ndarray):
    contours, _ = cv2.findContours(mask, cv2.RETR_EXTERNAL, cv2.CHAIN_APPROX_SIMPLE)
    if not contours:
        return None
    boxes = [cv2.boundingRect(c) for c in contours]
    return max(boxes, key=lambda b: (b[2] * b[3], -b[1], -b[0]))


def detect_and_crop(
    img: TableImage,
    margin: int = 5,
    min_area_ratio: float = 0.05,
    line_length_ratio: float = 0.15,
    density_kernel: int = 15,
) -> TableImage:
    """
    Crop to the table region.

    Ruling lines are tried first; without them the bounding box of dense ink
    is used. Regions under min_area_ratio of the image are ignored.
    """
    gray = _as_gray(img)
    area = img.height * img.width
    box, method = None, None

    horizontal, vertical = line_masks(gray, line_length_ratio)
    rulings = cv2.dilate(cv2.bitwise_or(horizontal, vertical), np.ones((3, 3), np.uint8))
    candidate = _largest_box(rulings) if rulings.any() else None
    if candidate and candidate[2] * candidate[3] >= min_area_ratio * area:
        box, method = candidate, "rulings"
    else:
        ink = dark_mask(gray)
        if ink.any():
            kernel = cv2.getStructuringElement(cv2.MORPH_RECT, (density_kernel, density_kernel))
            candidate = _largest_box(cv2.dilate(ink, kernel))
            if candidate and candidate[2] * candidate[3] >= min_area_ratio * area:
                box, method = candidate, "density"

    if box is None:
        return img.derive(img.pixels.copy(), ToolId.DETECT_CROP.value, note="NoTableFound")

    x, y, w, h = box
    x0, y0 = max(0, x - margin), max(0, y - margin)
    x1, y1 = min(img.width, x + w + margin), min(img.height, y + h + margin)
    out = img.pixels[y0:y1, x0:x1].copy()
    return img.derive(out, ToolId.DETECT_CROP.value, box=[x0, y0, x1 - x0, y1 - y0], method=method)


class Toolkit:
    """Dispatches tool ids to the configured tool functions."""

    def __init__(self, config: Optional[ToolkitConfig] = None):
        self.config = config or ToolkitConfig()
        self._tools: Dict[ToolId, Callable[[TableImage], TableImage]] = {
            ToolId.BORDER_ENHANCE: lambda img: border_enhance(
                img, self.config.border_thickness, self.config.line_length_ratio),
            ToolId.UPSCALE: lambda img: upscale(img, self.config.upscale_factor, self.config.max_pixels),
            ToolId.NOISE_REDUCE: lambda img: noise_reduce(
                img, self.config.low_percentile, self.config.high_percentile, self.config.median_ksize),
            ToolId.BINARIZE: binarize,
            ToolId.DETECT_CROP: lambda img: detect_and_crop(
                img, self.config.crop_margin, self.config.crop_min_area_ratio),
        }

    @property
    def descriptors(self):
        return [TOOL_DESCRIPTORS[tool_id] for tool_id in ToolId]

    @property
    def tool_ids(self):
        return {tool_id.value for tool_id in ToolId}

    def apply(self, tool_id, img: TableImage) -> TableImage:
        key = tool_id if isinstance(tool_id, ToolId) else resolve_tool_id(tool_id)
        if key is None:
            raise UnknownToolError(f"unknown tool {tool_id!r}")
        logger.debug("applying %s to %s", key.value, img.id)
        return self._tools[key](img)
