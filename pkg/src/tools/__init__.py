"""Image preprocessing tools, degradations and table rendering."""

from .degrade import Scenario, degrade, parse_scenario, rotate_expanded
from .image import TableImage
from .lines import describe_traits, detect_ruling_lines, estimate_skew_angle
from .render import RenderStyle, render_table
from .toolkit import (
    TOOL_DESCRIPTORS,
    ToolDescriptor,
    ToolId,
    Toolkit,
    binarize,
    border_enhance,
    detect_and_crop,
    noise_reduce,
    resolve_tool_id,
    upscale,
)
