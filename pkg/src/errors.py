"""Exception hierarchy shared by every package in the toolkit."""


class NGTRError(Exception):
    """Root of all toolkit errors."""


class ConfigError(NGTRError):
    """Invalid or unreadable run configuration."""


# Table model

class TableModelError(NGTRError):
    """Problems with logical tables, matrices or markup."""


class OverlapError(TableModelError):
    """Two cells claim the same grid position."""


class CellIndexError(TableModelError, IndexError):
    """A cell carries a negative or inverted index."""


class ParseError(TableModelError):
    """Malformed markup in strict mode."""


class EmptyError(TableModelError):
    """No table element found in the markup."""


class GeometryError(TableModelError):
    """Row/column spans overflow or collide irreconcilably."""


# Metrics

class MetricError(NGTRError):
    """Metric computation errors."""


class DegenerateError(MetricError):
    """Both trees are empty, the score is undefined."""


# Image toolkit

class ToolError(NGTRError):
    """An image tool could not produce an output."""


class SizeError(ToolError):
    """The output image would exceed the pixel budget."""


class UnknownScenario(ToolError):
    """Degradation scenario is not one of the eight supported ones."""


class UnknownToolError(ToolError):
    """Tool id not present in the toolkit registry."""


# Neighbor retrieval

class RetrievalError(NGTRError):
    """Neighbor retrieval failures."""


class FeaturelessError(RetrievalError):
    """Too few keypoints to describe the image."""


class EmptyStoreError(RetrievalError):
    """The neighbor store holds no records."""


class StoreFormatError(RetrievalError):
    """A store directory is missing files or has the wrong format version."""


# Gateway

class GatewayError(NGTRError):
    """Vision-language model call failures."""

    retryable = False


class TransportError(GatewayError):
    """Connection, timeout or server-side failure."""

    retryable = True


class RateLimitError(TransportError):
    """The provider throttled the request."""


class AuthError(GatewayError):
    """Credentials missing or rejected."""


class NoTableError(GatewayError):
    """The model response contains no table markup."""


class PromptRenderError(GatewayError):
    """A prompt template placeholder was left unbound."""


class ScriptMissError(GatewayError):
    """The scripted mock has no reply for a request."""


class BudgetExceededError(GatewayError):
    """A sample used more model calls than its budget allows."""


# Benchmark harness

class BenchError(NGTRError):
    """Benchmark and ingestion failures."""


class CCRUnavailable(BenchError):
    """No cell with unique content exists, the CCR task is skipped."""


class FormatError(BenchError):
    """A dataset record lacks the expected fields."""
