"""Run configuration: dataclasses loaded section by section from a TOML file."""

import logging
import os
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Dict, List, Optional

from .errors import ConfigError

logger = logging.getLogger(__name__)

PROVIDERS = ("http", "groq", "mock")
MODES = ("ngtr", "direct")
MATCH_MODES = ("mutual", "ratio")


@dataclass(frozen=True)
class ModelEndpoint:
    """Where model calls go. Only the *name* of the key variable is kept."""
    provider: str = "mock"
    model: str = "gpt-4o"
    base_url: str = "https://api.openai.com/v1"
    api_key_env: str = "OPENAI_API_KEY"
    mock_script: Optional[str] = None
    max_retries: int = 3
    backoff: float = 0.5
    backoff_max: float = 8.0
    timeout: float = 60.0
    max_in_flight: int = 4

    def __post_init__(self):
        if self.provider not in PROVIDERS:
            raise ConfigError(f"endpoint.provider must be one of {PROVIDERS}, got {self.provider!r}")
        if self.max_retries < 0:
            raise ConfigError("endpoint.max_retries must be >= 0")
        if self.max_in_flight < 1:
            raise ConfigError("endpoint.max_in_flight must be >= 1")

    def api_key(self) -> Optional[str]:
        return os.getenv(self.api_key_env) if self.api_key_env else None


@dataclass(frozen=True)
class PipelineConfig:
    mode: str = "ngtr"
    max_plan_length: int = 4
    n_plans: int = 3
    plan_temperature: float = 0.8
    recognition_temperature: float = 0.0
    top_p: float = 0.2
    reflection_enabled: bool = True
    experience_enabled: bool = True
    zero_score_fallback: bool = True
    chain_of_thought: bool = False
    call_budget: Optional[int] = None
    neighbors: int = 1

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"pipeline.mode must be one of {MODES}, got {self.mode!r}")
        if self.max_plan_length < 1 or self.n_plans < 1:
            raise ConfigError("pipeline.max_plan_length and pipeline.n_plans must be >= 1")
        if self.neighbors < 1:
            raise ConfigError("pipeline.neighbors must be >= 1")

    @property
    def budget(self) -> int:
        """Model calls one sample may issue: N + L + 2 unless overridden."""
        if self.call_budget is not None:
            return self.call_budget
        return self.n_plans + self.max_plan_length + 2


@dataclass(frozen=True)
class ToolkitConfig:
    border_thickness: int = 2
    line_length_ratio: float = 0.3
    upscale_factor: float = 2.0
    max_pixels: int = 16_000_000
    low_percentile: float = 2.0
    high_percentile: float = 98.0
    median_ksize: int = 3
    crop_margin: int = 5
    crop_min_area_ratio: float = 0.05
    blur_sigma: float = 2.0
    underexposure_gamma: float = 2.5
    overexposure_gamma: float = 0.4
    unclear_border_alpha: float = 0.7
    thickened_border_thickness: int = 3

    def __post_init__(self):
        if not 1.0 <= self.upscale_factor <= 4.0:
            raise ConfigError("toolkit.upscale_factor must lie in [1.0, 4.0]")
        if self.median_ksize < 3 or self.median_ksize % 2 == 0:
            raise ConfigError("toolkit.median_ksize must be an odd integer >= 3")


@dataclass(frozen=True)
class RetrievalConfig:
    max_features: int = 500
    min_keypoints: int = 8
    hamming_threshold: int = 64
    match_mode: str = "mutual"
    ratio: float = 0.75

    def __post_init__(self):
        if self.match_mode not in MATCH_MODES:
            raise ConfigError(f"retrieval.match_mode must be one of {MATCH_MODES}")


@dataclass(frozen=True)
class BenchConfig:
    kinds: List[str] = field(default_factory=lambda: ["VTSD", "IRDR", "ICDR", "MCD", "CCR", "ICR"])
    indices_per_table: int = 1
    filter_max_diff: int = 3
    casefold: bool = False


@dataclass(frozen=True)
class RunConfig:
    endpoint: ModelEndpoint = field(default_factory=ModelEndpoint)
    pipeline: PipelineConfig = field(default_factory=PipelineConfig)
    toolkit: ToolkitConfig = field(default_factory=ToolkitConfig)
    retrieval: RetrievalConfig = field(default_factory=RetrievalConfig)
    bench: BenchConfig = field(default_factory=BenchConfig)
    store: Optional[str] = None
    corpus: Optional[str] = None
    output_dir: str = "runs/latest"
    workers: int = field(default_factory=lambda: os.cpu_count() or 1)
    seed: int = 0
    limit: Optional[int] = None

    def to_dict(self) -> Dict[str, Any]:
        """Effective config for `config.json`; no secret values are held here."""
        return asdict(self)


_SECTIONS = {
    "endpoint": ModelEndpoint,
    "pipeline": PipelineConfig,
    "toolkit": ToolkitConfig,
    "retrieval": RetrievalConfig,
    "bench": BenchConfig,
}


def _build(cls, values: Dict[str, Any], where: str):
    known = {f.name for f in fields(cls)}
    unknown = sorted(set(values) - known)
    if unknown:
        raise ConfigError(f"unknown key(s) in [{where}]: {', '.join(unknown)}")
    try:
        return cls(**values)
    except TypeError as e:
        raise ConfigError(f"invalid [{where}] section: {e}") from e


def config_from_dict(data: Dict[str, Any]) -> RunConfig:
    """Build a RunConfig from parsed TOML, rejecting unknown keys."""
    top: Dict[str, Any] = {}
    for key, value in data.items():
        if key in _SECTIONS:
            if not isinstance(value, dict):
                raise ConfigError(f"[{key}] must be a table")
            top[key] = _build(_SECTIONS[key], value, key)
        else:
            top[key] = value
    return _build(RunConfig, top, "run")


def load_config(path: Optional[Path]) -> RunConfig:
    """
    Load a run configuration file.

    Args:
        path: TOML file, or None for all defaults

    Returns:
        RunConfig
    """
    if path is None:
        return RunConfig()
    path = Path(path)
    try:
        with path.open("rb") as fh:
            data = tomllib.load(fh)
    except FileNotFoundError as e:
        raise ConfigError(f"config file not found: {path}") from e
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"cannot parse {path}: {e}") from e
    logger.debug("loaded config from %s", path)
    return config_from_dict(data)


def with_overrides(config: RunConfig, **overrides: Any) -> RunConfig:
    """
    Apply command-line overrides on top of file values.

    Keys are either top-level RunConfig fields or `section.key`; None values
    are ignored so unset CLI options never clobber the file.
    """
    top: Dict[str, Any] = {}
    nested: Dict[str, Dict[str, Any]] = {}
    for key, value in overrides.items():
        if value is None:
            continue
        section, _, name = key.partition(".")
        if name:
            if section not in _SECTIONS:
                raise ConfigError(f"unknown config section {section!r}")
            nested.setdefault(section, {})[name] = value
        else:
            top[key] = value

    for section, values in nested.items():
        current = asdict(getattr(config, section))
        current.update(values)
        top[section] = _build(_SECTIONS[section], current, section)
    try:
        return replace(config, **top)
    except TypeError as e:
        raise ConfigError(str(e)) from e
