"""Directional check against a live endpoint; skipped unless NGTR_LIVE_CONFIG names a run config."""

import os
from dataclasses import replace
from pathlib import Path

import pytest

from src.config import load_config
from src.gateway.client import Gateway
from src.graph.runner import run_corpus
from src.graph.workflow import NGTRWorkflow
from src.retrieval.store import load_store
from src.table.io import read_ground_truth
from src.tools.toolkit import Toolkit

LIVE_CONFIG = os.getenv("NGTR_LIVE_CONFIG")
MIN_SAMPLES = 50


@pytest.mark.skipif(not LIVE_CONFIG, reason="NGTR_LIVE_CONFIG is not set")
def test_neighbor_guidance_is_not_worse_than_direct_recognition():
    """Mean TEDS with NGTR should be at least the direct-recognition mean on the same samples."""
    config = load_config(Path(LIVE_CONFIG))
    assert config.endpoint.provider != "mock", "the live check needs a real endpoint"
    assert config.corpus and config.store, "the live config must name a corpus and a store"

    samples, _ = read_ground_truth(Path(config.corpus))
    if config.limit:
        samples = samples[: config.limit]
    assert len(samples) >= MIN_SAMPLES

    gateway = Gateway.from_endpoint(config.endpoint)
    store = load_store(Path(config.store))
    means = {}
    for mode in ("direct", "ngtr"):
        pipeline = replace(config.pipeline, mode=mode)
        workflow = NGTRWorkflow(store if mode == "ngtr" else None, gateway, Toolkit(config.toolkit),
                                pipeline, config.retrieval)
        result = run_corpus(samples, workflow, replace(config, pipeline=pipeline, limit=None))
        means[mode] = result.summary["mean_teds"]
        print(f"✓ {mode}: mean TEDS {means[mode]:.4f} over {len(samples)} samples")

    assert means["ngtr"] >= means["direct"]
