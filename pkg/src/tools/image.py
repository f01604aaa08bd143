"""In-memory table image with append-only provenance."""

import hashlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

import cv2
import numpy as np

MIN_SIDE = 8


@dataclass(frozen=True)
class TableImage:
    """H x W (grayscale) or H x W x 3 (BGR) 8-bit raster."""
    pixels: np.ndarray
    id: str = ""
    dpi_hint: Optional[int] = None
    provenance: Tuple[Dict[str, Any], ...] = field(default=())

    def __post_init__(self):
        pixels = np.asarray(self.pixels)
        if pixels.ndim == 3 and pixels.shape[2] == 1:
            pixels = pixels[:, :, 0]
        if pixels.dtype != np.uint8:
            raise ValueError(f"expected uint8 pixels, got {pixels.dtype}")
        if pixels.ndim not in (2, 3) or (pixels.ndim == 3 and pixels.shape[2] != 3):
            raise ValueError(f"unsupported image shape {pixels.shape}")
        if pixels.shape[0] < MIN_SIDE or pixels.shape[1] < MIN_SIDE:
            raise ValueError(f"image {pixels.shape[:2]} smaller than {MIN_SIDE}x{MIN_SIDE}")
        object.__setattr__(self, "pixels", np.ascontiguousarray(pixels))
        object.__setattr__(self, "provenance", tuple(self.provenance))

    @property
    def height(self) -> int:
        return int(self.pixels.shape[0])

    @property
    def width(self) -> int:
        return int(self.pixels.shape[1])

    @property
    def channels(self) -> int:
        return 1 if self.pixels.ndim == 2 else 3

    def gray(self) -> np.ndarray:
        if self.channels == 1:
            return self.pixels
        return cv2.cvtColor(self.pixels, cv2.COLOR_BGR2GRAY)

    def derive(self, pixels: np.ndarray, tool: str, **params: Any) -> "TableImage":
        """New image carrying these pixels and one more provenance entry."""
        entry = {"tool": tool, "params": params}
        return TableImage(pixels=pixels, id=self.id, dpi_hint=self.dpi_hint,
                          provenance=self.provenance + (entry,))

    def digest(self) -> str:
        h = hashlib.sha256()
        h.update(repr(self.pixels.shape).encode())
        h.update(self.pixels.tobytes())
        return h.hexdigest()

    def tool_names(self) -> Tuple[str, ...]:
        return tuple(entry["tool"] for entry in self.provenance)

    def encode_png(self) -> bytes:
        ok, buffer = cv2.imencode(".png", self.pixels)
        if not ok:
            raise ValueError(f"PNG encoding failed for image {self.id!r}")
        return buffer.tobytes()

    @classmethod
    def load(cls, path: Path, image_id: Optional[str] = None) -> "TableImage":
        path = Path(path)
        pixels = cv2.imread(str(path), cv2.IMREAD_UNCHANGED)
        if pixels is None:
            raise FileNotFoundError(f"cannot read image {path}")
        if pixels.ndim == 3 and pixels.shape[2] == 4:
            pixels = cv2.cvtColor(pixels, cv2.COLOR_BGRA2BGR)
        if pixels.dtype != np.uint8:
            pixels = cv2.convertScaleAbs(pixels, alpha=255.0 / max(1, int(pixels.max())))
        return cls(pixels=pixels, id=image_id or path.stem, provenance=({"tool": "load", "params": {"path": path.name}},))

    def save(self, path: Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        if not cv2.imwrite(str(path), self.pixels):
            raise OSError(f"cannot write image {path}")
        return path
