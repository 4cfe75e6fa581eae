"""
Subnet Viz
SVG grid figures of one or two subnetworks and per-layer overlap bar charts.
"""

from .core.svg_builder import SvgBuilder
from .core.grid_renderer import CLASSES, Palette, RenderedFigure, VizSpec, render
from .core.summary_chart import render_summary

__version__ = "1.0.0"
__all__ = ["SvgBuilder", "CLASSES", "Palette", "RenderedFigure", "VizSpec", "render", "render_summary"]
