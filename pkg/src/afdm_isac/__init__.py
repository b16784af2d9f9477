"""AFDM waveform, channel, sensing and SIC toolkit for ISAC link simulation."""

__version__ = "0.1.0"

from .params import ChirpParams, FrameConfig, SystemConfig, desk, small, table1
from .frame import DaftFrame, FrameLayout, assemble_frame, build_layout, extract_pilot_slice
from .channel import Scene, Target, add_noise, apply_channel, gen_scene
from .sensing import GridSpec, SensingEstimate, build_H, estimate, metric, metric_surface

__all__ = [
    "ChirpParams", "FrameConfig", "SystemConfig", "desk", "small", "table1",
    "DaftFrame", "FrameLayout", "assemble_frame", "build_layout", "extract_pilot_slice",
    "Scene", "Target", "add_noise", "apply_channel", "gen_scene",
    "GridSpec", "SensingEstimate", "build_H", "estimate", "metric", "metric_surface",
]
