"""Deterministic scripted stand-in for a vision-language model."""

import json
import logging
import threading
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple, Union

from ..errors import AuthError, GatewayError, RateLimitError, ScriptMissError, TransportError
from .backends import dump_script
from .request import VisionRequest

logger = logging.getLogger(__name__)

Reply = Union[str, Dict[str, str]]
Responder = Callable[[VisionRequest], Optional[Reply]]

_FAILURES = {
    "transport": TransportError,
    "rate_limit": RateLimitError,
    "auth": AuthError,
}


class _Queue:
    """Replies served in order; the last one repeats once the list runs out."""

    def __init__(self, replies: List[Reply]):
        if not replies:
            raise ValueError("a reply queue needs at least one reply")
        self.replies = list(replies)
        self.cursor = 0

    def next(self) -> Reply:
        reply = self.replies[min(self.cursor, len(self.replies) - 1)]
        self.cursor += 1
        return reply


class ScriptedMock:
    """
    Replays scripted responses.

    Lookup order: exact fingerprint, then the per-template queue, then the
    responder callable, then the default reply. A reply is either response
    text or {"error": "transport" | "rate_limit" | "auth"}.
    """

    def __init__(
        self,
        by_fingerprint: Optional[Dict[str, Union[Reply, List[Reply]]]] = None,
        by_template: Optional[Dict[str, Union[Reply, List[Reply]]]] = None,
        responder: Optional[Responder] = None,
        default: Optional[str] = None,
    ):
        self.name = "mock"
        self._by_fingerprint = {k: _Queue(_as_list(v)) for k, v in (by_fingerprint or {}).items()}
        self._by_template = {k: _Queue(_as_list(v)) for k, v in (by_template or {}).items()}
        self.responder = responder
        self.default = default
        self.recorded: Dict[str, str] = {}
        self.calls: List[Tuple[str, str]] = []
        self._lock = threading.Lock()

    @classmethod
    def from_jsonl(cls, path: Path, **kwargs: Any) -> "ScriptedMock":
        """
        Load a script file.

        Lines are {"fingerprint", "response_text"}, {"fingerprint", "error"},
        or {"template_id", "responses": [...]}.
        """
        by_fingerprint: Dict[str, List[Reply]] = {}
        by_template: Dict[str, List[Reply]] = {}
        with open(path, "r", encoding="utf-8") as f:
            for line_no, line in enumerate(f, start=1):
                if not line.strip():
                    continue
                try:
                    entry = json.loads(line)
                except json.JSONDecodeError as e:
                    raise GatewayError(f"{Path(path).name}:{line_no}: {e}") from e
                if "fingerprint" in entry:
                    reply = {"error": entry["error"]} if "error" in entry else entry["response_text"]
                    by_fingerprint.setdefault(entry["fingerprint"], []).append(reply)
                elif "template_id" in entry:
                    by_template.setdefault(entry["template_id"], []).extend(entry["responses"])
                else:
                    raise GatewayError(f"{Path(path).name}:{line_no}: entry has no fingerprint or template_id")
        return cls(by_fingerprint=by_fingerprint, by_template=by_template, **kwargs)

    def _lookup(self, request: VisionRequest) -> Reply:
        fingerprint = request.fingerprint
        with self._lock:
            if fingerprint in self._by_fingerprint:
                return self._by_fingerprint[fingerprint].next()
            if request.template_id in self._by_template:
                return self._by_template[request.template_id].next()
        if self.responder is not None:
            reply = self.responder(request)
            if reply is not None:
                return reply
        if self.default is not None:
            return self.default
        raise ScriptMissError(f"no scripted reply for {request.template_id} ({fingerprint[:12]})")

    def send(self, request: VisionRequest) -> Tuple[str, Dict[str, int]]:
        reply = self._lookup(request)
        with self._lock:
            self.calls.append((request.template_id, request.fingerprint))
        if isinstance(reply, dict):
            kind = reply.get("error", "transport")
            raise _FAILURES.get(kind, TransportError)(f"scripted {kind} failure")
        with self._lock:
            self.recorded[request.fingerprint] = reply
        return reply, {}

    def templates_called(self) -> List[str]:
        return [template for template, _ in self.calls]

    def dump(self, path: Path) -> int:
        return dump_script(self.recorded, path)


def _as_list(value: Union[Reply, List[Reply]]) -> List[Reply]:
    return list(value) if isinstance(value, list) else [value]
