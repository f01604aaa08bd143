"""Vision requests, their fingerprints and per-call bookkeeping."""

import base64
import hashlib
import json
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Tuple

from ..tools.image import TableImage


def text_digest(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class Sampling:
    temperature: float = 0.0
    top_p: float = 0.2
    n_samples: int = 1


@dataclass(frozen=True, eq=False)
class VisionRequest:
    """A rendered prompt plus one or two inline images."""
    template_id: str
    system_text: str
    user_text: str
    images: Tuple[TableImage, ...]
    bindings: Dict[str, Any] = field(default_factory=dict)
    sampling: Sampling = field(default_factory=Sampling)

    def __post_init__(self):
        images = tuple(self.images)
        if not 1 <= len(images) <= 2:
            raise ValueError(f"a vision request carries 1 or 2 images, got {len(images)}")
        object.__setattr__(self, "images", images)

    @property
    def fingerprint(self) -> str:
        """Stable hash of (template id, bound placeholders, image digests)."""
        payload = {
            "template": self.template_id,
            "bindings": {key: str(value) for key, value in sorted(self.bindings.items())},
            "images": [image.digest() for image in self.images],
        }
        return text_digest(json.dumps(payload, sort_keys=True, ensure_ascii=False))

    def data_urls(self):
        return [
            "data:image/png;base64," + base64.b64encode(image.encode_png()).decode("ascii")
            for image in self.images
        ]


@dataclass(frozen=True)
class Completion:
    text: str
    attempts: int = 1
    latency_ms: float = 0.0
    usage: Dict[str, int] = field(default_factory=dict)

    @property
    def retries(self) -> int:
        return self.attempts - 1


@dataclass(frozen=True)
class CallRecord:
    template_id: str
    fingerprint: str
    response_digest: Optional[str]
    attempts: int
    latency_ms: float = 0.0
    usage: Dict[str, int] = field(default_factory=dict)
    error: Optional[str] = None

    def to_dict(self, timing: bool = False) -> dict:
        """Report view; latency only goes to the timing sidecar."""
        record = {
            "template_id": self.template_id,
            "fingerprint": self.fingerprint,
            "response_digest": self.response_digest,
            "attempts": self.attempts,
            "usage": dict(self.usage),
        }
        if self.error:
            record["error"] = self.error
        if timing:
            record["latency_ms"] = round(self.latency_ms, 3)
        return record
