"""Shared fixtures: synthetic grid images, example tables and a mini-corpus."""

import sys
from pathlib import Path

import cv2
import numpy as np
import pytest

# Add src to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.table.model import LogicalCell, LogicalTable  # noqa: E402
from src.tools.image import TableImage  # noqa: E402


def draw_grid(
    rows: int = 3,
    cols: int = 4,
    cell: int = 40,
    thickness: int = 1,
    origin=(20, 20),
    size=None,
    text: bool = False,
) -> TableImage:
    """White canvas with a ruled rows x cols grid whose top-left corner sits at origin (x, y)."""
    x0, y0 = origin
    width = cols * cell + thickness
    height = rows * cell + thickness
    canvas_h, canvas_w = size or (y0 + height + 20, x0 + width + 20)
    pixels = np.full((canvas_h, canvas_w), 255, dtype=np.uint8)
    for r in range(rows + 1):
        y = y0 + r * cell
        pixels[y:y + thickness, x0:x0 + width] = 0
    for c in range(cols + 1):
        x = x0 + c * cell
        pixels[y0:y0 + height, x:x + thickness] = 0
    if text:
        for r in range(rows):
            for c in range(cols):
                cv2.putText(pixels, f"{r}{c}", (x0 + c * cell + 8, y0 + r * cell + cell // 2 + 5),
                            cv2.FONT_HERSHEY_SIMPLEX, 0.4, 0, 1, lineType=cv2.LINE_8)
    return TableImage(pixels=pixels, id="grid")


@pytest.fixture
def grid():
    return draw_grid


@pytest.fixture
def example_table():
    """A spans two columns over B and C."""
    return LogicalTable(
        cells=(
            LogicalCell(0, 0, 0, 1, "A"),
            LogicalCell(1, 1, 0, 0, "B"),
            LogicalCell(1, 1, 1, 1, "C"),
        ),
        id="example",
    )


@pytest.fixture(scope="session")
def mini_corpus(tmp_path_factory):
    """Rendered train/test corpus with a neighbor store and a recorded mock script."""
    from src.bench.synthetic import synthesize_corpus

    return synthesize_corpus(tmp_path_factory.mktemp("corpus"), n_train=4, n_test=2, seed=3)


@pytest.fixture(scope="session")
def ten_sample_corpus(tmp_path_factory):
    """Ten test samples, half of them blurred, for end-to-end and rerun checks."""
    from src.bench.synthetic import synthesize_corpus

    return synthesize_corpus(tmp_path_factory.mktemp("corpus10"), n_train=4, n_test=10, seed=5)
