"""Provider adapters: OpenAI-compatible HTTP and LangChain's ChatGroq."""

import json
import logging
import threading
from pathlib import Path
from typing import Dict, Optional, Protocol, Tuple

import requests
from langchain_core.messages import HumanMessage, SystemMessage

from ..config import ModelEndpoint
from ..errors import AuthError, GatewayError, RateLimitError, TransportError
from .request import VisionRequest

logger = logging.getLogger(__name__)

Usage = Dict[str, int]


class Backend(Protocol):
    name: str

    def send(self, request: VisionRequest) -> Tuple[str, Usage]:
        ...


def error_for_status(status: int, detail: str = "") -> Optional[GatewayError]:
    """Map an HTTP status onto the gateway error family; None for success."""
    if status < 400:
        return None
    message = f"HTTP {status}: {detail[:300]}"
    if status == 429:
        return RateLimitError(message)
    if status in (401, 403):
        return AuthError(message)
    if status >= 500 or status == 408:
        return TransportError(message)
    return GatewayError(message)


class HttpChatCompletions:
    """Chat-completions wire format with base64-inline PNG images."""

    def __init__(self, endpoint: ModelEndpoint, session: Optional[requests.Session] = None):
        self.name = "http"
        self.endpoint = endpoint
        self.url = endpoint.base_url.rstrip("/") + "/chat/completions"
        self.session = session or requests.Session()

    def payload(self, request: VisionRequest) -> dict:
        content = [{"type": "text", "text": request.user_text}]
        content += [{"type": "image_url", "image_url": {"url": url}} for url in request.data_urls()]
        messages = []
        if request.system_text:
            messages.append({"role": "system", "content": request.system_text})
        messages.append({"role": "user", "content": content})
        return {
            "model": self.endpoint.model,
            "messages": messages,
            "temperature": request.sampling.temperature,
            "top_p": request.sampling.top_p,
            "n": request.sampling.n_samples,
        }

    def send(self, request: VisionRequest) -> Tuple[str, Usage]:
        headers = {"Content-Type": "application/json"}
        api_key = self.endpoint.api_key()
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"

        try:
            response = self.session.post(self.url, headers=headers, json=self.payload(request),
                                         timeout=self.endpoint.timeout)
        except requests.exceptions.RequestException as e:
            raise TransportError(f"{type(e).__name__}: {e}") from e

        error = error_for_status(response.status_code, response.text)
        if error is not None:
            raise error

        try:
            body = response.json()
            text = body["choices"][0]["message"]["content"] or ""
        except (ValueError, KeyError, IndexError, TypeError) as e:
            raise TransportError(f"malformed completion body: {e}") from e
        usage = {k: int(v) for k, v in (body.get("usage") or {}).items() if isinstance(v, int)}
        return text, usage


class GroqChat:
    """ChatGroq with LangChain message types; images go as image_url parts."""

    def __init__(self, endpoint: ModelEndpoint):
        from langchain_groq import ChatGroq

        self.name = "groq"
        api_key = endpoint.api_key()
        if not api_key:
            raise AuthError(f"environment variable {endpoint.api_key_env} is not set")
        self.llm = ChatGroq(
            groq_api_key=api_key,
            model_name=endpoint.model,
            temperature=0.0,
            max_retries=0,
        )

    @staticmethod
    def messages(request: VisionRequest):
        content = [{"type": "text", "text": request.user_text}]
        content += [{"type": "image_url", "image_url": {"url": url}} for url in request.data_urls()]
        messages = []
        if request.system_text:
            messages.append(SystemMessage(content=request.system_text))
        messages.append(HumanMessage(content=content))
        return messages

    def send(self, request: VisionRequest) -> Tuple[str, Usage]:
        bound = self.llm.bind(temperature=request.sampling.temperature, top_p=request.sampling.top_p)
        try:
            response = bound.invoke(self.messages(request))
        except Exception as e:
            status = getattr(e, "status_code", None)
            error = error_for_status(status, str(e)) if isinstance(status, int) else None
            raise (error or TransportError(f"{type(e).__name__}: {e}")) from e
        usage = dict(getattr(response, "usage_metadata", None) or {})
        text = response.content if isinstance(response.content, str) else json.dumps(response.content)
        return text, {k: v for k, v in usage.items() if isinstance(v, int)}


class RecordingBackend:
    """Wraps a backend and keeps every (fingerprint, response) pair it served."""

    def __init__(self, inner: Backend):
        self.name = f"recording:{inner.name}"
        self.inner = inner
        self.recorded: Dict[str, str] = {}
        self._lock = threading.Lock()

    def send(self, request: VisionRequest) -> Tuple[str, Usage]:
        text, usage = self.inner.send(request)
        with self._lock:
            self.recorded[request.fingerprint] = text
        return text, usage

    def dump(self, path: Path) -> int:
        return dump_script(self.recorded, path)


def dump_script(recorded: Dict[str, str], path: Path) -> int:
    """Write a replayable mock script, sorted by fingerprint."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        for fingerprint in sorted(recorded):
            f.write(json.dumps({"fingerprint": fingerprint, "response_text": recorded[fingerprint]},
                               ensure_ascii=False) + "\n")
    return len(recorded)
