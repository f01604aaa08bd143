"""Gateway: retries, concurrency cap and per-sample call budgets."""

import logging
import threading
import time
from pathlib import Path
from typing import Callable, List, Optional

from ..config import ModelEndpoint
from ..errors import BudgetExceededError, ConfigError, GatewayError
from .backends import Backend, GroqChat, HttpChatCompletions
from .mock import ScriptedMock
from .request import CallRecord, Completion, VisionRequest, text_digest

logger = logging.getLogger(__name__)


class Gateway:
    """Shareable across workers; at most max_in_flight requests run at once."""

    def __init__(
        self,
        backend: Backend,
        max_retries: int = 3,
        backoff: float = 0.5,
        backoff_max: float = 8.0,
        max_in_flight: int = 4,
        sleep: Callable[[float], None] = time.sleep,
    ):
        self.backend = backend
        self.max_retries = max_retries
        self.backoff = backoff
        self.backoff_max = backoff_max
        self.sleep = sleep
        self._slots = threading.BoundedSemaphore(max_in_flight)

    @classmethod
    def from_endpoint(cls, endpoint: ModelEndpoint, backend: Optional[Backend] = None, **kwargs) -> "Gateway":
        return cls(
            backend or make_backend(endpoint),
            max_retries=endpoint.max_retries,
            backoff=endpoint.backoff,
            backoff_max=endpoint.backoff_max,
            max_in_flight=endpoint.max_in_flight,
            **kwargs,
        )

    def delay(self, attempt: int) -> float:
        return min(self.backoff_max, self.backoff * (2 ** (attempt - 1)))

    def complete(self, request: VisionRequest) -> Completion:
        """
        Send one request, retrying retryable failures with exponential backoff.

        Args:
            request: Rendered vision request

        Returns:
            Completion with the response text, attempt count, latency and usage

        Raises:
            TransportError: still failing after max_retries retries
            AuthError: credentials rejected (never retried)
        """
        attempt = 0
        started = time.perf_counter()
        while True:
            attempt += 1
            try:
                with self._slots:
                    text, usage = self.backend.send(request)
            except GatewayError as e:
                if not e.retryable or attempt > self.max_retries:
                    logger.warning("%s failed after %d attempt(s): %s", request.template_id, attempt, e)
                    e.attempts = attempt
                    raise
                wait = self.delay(attempt)
                logger.debug("%s attempt %d failed (%s), retrying in %.2fs", request.template_id, attempt, e, wait)
                self.sleep(wait)
                continue
            latency = (time.perf_counter() - started) * 1000.0
            logger.debug("%s -> %s in %d attempt(s)", request.template_id, text_digest(text)[:12], attempt)
            return Completion(text=text, attempts=attempt, latency_ms=latency, usage=usage)


class GatewaySession:
    """Per-sample view of a gateway: enforces the call budget and keeps call records."""

    def __init__(self, gateway: Gateway, budget: Optional[int] = None):
        self.gateway = gateway
        self.budget = budget
        self.records: List[CallRecord] = []
        self._lock = threading.Lock()

    @property
    def calls(self) -> int:
        return len(self.records)

    def complete(self, request: VisionRequest) -> str:
        with self._lock:
            if self.budget is not None and len(self.records) >= self.budget:
                raise BudgetExceededError(f"call budget of {self.budget} exhausted")
            slot = len(self.records)
            self.records.append(CallRecord(request.template_id, request.fingerprint, None, 0, error="pending"))

        try:
            completion = self.gateway.complete(request)
        except GatewayError as e:
            with self._lock:
                self.records[slot] = CallRecord(
                    request.template_id, request.fingerprint, None,
                    getattr(e, "attempts", 1), error=type(e).__name__,
                )
            raise

        with self._lock:
            self.records[slot] = CallRecord(
                template_id=request.template_id,
                fingerprint=request.fingerprint,
                response_digest=text_digest(completion.text),
                attempts=completion.attempts,
                latency_ms=completion.latency_ms,
                usage=completion.usage,
            )
        return completion.text


def make_backend(endpoint: ModelEndpoint) -> Backend:
    if endpoint.provider == "mock":
        if not endpoint.mock_script:
            raise ConfigError("endpoint.provider = 'mock' needs endpoint.mock_script")
        return ScriptedMock.from_jsonl(Path(endpoint.mock_script))
    if endpoint.provider == "groq":
        return GroqChat(endpoint)
    return HttpChatCompletions(endpoint)


def complete(endpoint: ModelEndpoint, request: VisionRequest) -> str:
    """One-shot call through a fresh gateway for the endpoint."""
    return Gateway.from_endpoint(endpoint).complete(request).text
