"""Basic tests for the table recognition toolkit: imports and configuration."""

import sys
from pathlib import Path

import pytest

# Add src to path
sys.path.insert(0, str(Path(__file__).parent.parent))


def test_imports():
    """Test that all modules can be imported."""
    from src.agents.executor import ExecutorAgent  # noqa: F401
    from src.agents.experience import ExperienceAgent  # noqa: F401
    from src.agents.planner import PlannerAgent  # noqa: F401
    from src.agents.recognizer import RecognizerAgent  # noqa: F401
    from src.agents.reflector import ReflectorAgent  # noqa: F401
    from src.bench.runner import BenchmarkRunner  # noqa: F401
    from src.graph.workflow import NGTRWorkflow  # noqa: F401
    from src.main import app  # noqa: F401
    print("✓ All imports successful")


def test_default_config():
    """Test the built-in defaults."""
    from src.config import load_config

    config = load_config(None)
    assert config.endpoint.provider == "mock"
    assert (config.pipeline.max_plan_length, config.pipeline.n_plans) == (4, 3)
    # N + L + 2
    assert config.pipeline.budget == 9
    assert config.retrieval.hamming_threshold == 64
    print("✓ Default config tests passed")


def test_config_file(tmp_path):
    """Test loading a TOML config and rejecting unknown keys."""
    from src.config import load_config
    from src.errors import ConfigError

    path = tmp_path / "ngtr.toml"
    path.write_text(
        'corpus = "data/test.jsonl"\n'
        "workers = 2\n"
        "[pipeline]\n"
        "n_plans = 5\n"
        "reflection_enabled = false\n"
        "[toolkit]\n"
        "upscale_factor = 3.0\n"
    )
    config = load_config(path)
    assert config.corpus == "data/test.jsonl"
    assert config.workers == 2
    assert config.pipeline.n_plans == 5 and not config.pipeline.reflection_enabled
    assert config.toolkit.upscale_factor == 3.0

    path.write_text("[pipeline]\nplans = 5\n")
    with pytest.raises(ConfigError):
        load_config(path)

    path.write_text("[toolkit]\nupscale_factor = 8.0\n")
    with pytest.raises(ConfigError):
        load_config(path)

    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.toml")
    print("✓ Config file tests passed")


def test_config_overrides():
    """Test that command-line overrides win and unset ones are ignored."""
    from src.config import RunConfig, with_overrides
    from src.errors import ConfigError

    base = RunConfig(workers=3)
    config = with_overrides(base, workers=None, limit=2, **{"pipeline.mode": "direct", "endpoint.mock_script": "s"})
    assert config.workers == 3
    assert config.limit == 2
    assert config.pipeline.mode == "direct"
    assert config.endpoint.mock_script == "s"

    with pytest.raises(ConfigError):
        with_overrides(base, **{"pipeline.mode": "fast"})
    with pytest.raises(ConfigError):
        with_overrides(base, **{"cache.size": 3})
    print("✓ Config override tests passed")


def test_api_key_is_read_from_environment(monkeypatch):
    """Test that only the variable name is configured."""
    from src.config import ModelEndpoint

    monkeypatch.setenv("NGTR_TEST_KEY", "secret")
    endpoint = ModelEndpoint(provider="http", api_key_env="NGTR_TEST_KEY")
    assert endpoint.api_key() == "secret"
    assert "secret" not in repr(endpoint)
