"""
Grouped bar chart of per-layer sparsity and overlap.
"""

import logging
from typing import List, Tuple

from subnetwork.core.overlap import OverlapReport
from .grid_renderer import Palette
from .svg_builder import SvgBuilder

logger = logging.getLogger(__name__)

PLOT_HEIGHT = 200.0
BAR_WIDTH = 14.0
GROUP_GAP = 18.0
LEFT = 60.0
TOP = 50.0
BOTTOM = 120.0


def _metrics(single: bool, palette: Palette) -> List[Tuple[str, str]]:
    metrics = [("sparsity_a", palette.a_only)]
    if not single:
        metrics.append(("sparsity_b", palette.b_only))
    metrics.append(("jaccard", palette.both))
    return metrics


def render_summary(report: OverlapReport, single: bool = False, palette: Palette = Palette()) -> str:
    """
    One bar group per layer: sparsity_a, sparsity_b and jaccard.

    With `single` the report is a self-comparison and the sparsity_b bar is
    omitted. Every bar carries its value as a <text class="value"> annotation.
    """
    rows = report.layer_rows
    metrics = _metrics(single, palette)
    group_width = len(metrics) * BAR_WIDTH + GROUP_GAP
    width = LEFT + max(len(rows), 1) * group_width + 40.0
    height = TOP + PLOT_HEIGHT + BOTTOM
    baseline = TOP + PLOT_HEIGHT

    svg = SvgBuilder(width, height, title="Per-layer sparsity and overlap")

    svg.group_start(class_="axes")
    svg.line(LEFT, TOP, LEFT, baseline, stroke="#333333")
    svg.line(LEFT, baseline, width - 20.0, baseline, stroke="#333333")
    for tick in (0.0, 0.25, 0.5, 0.75, 1.0):
        ty = baseline - tick * PLOT_HEIGHT
        svg.line(LEFT - 4, ty, LEFT, ty, stroke="#333333")
        svg.text(LEFT - 8, ty + 4, f"{tick:.2f}", class_="tick", font_size=10, text_anchor="end")
    svg.text(14, TOP - 16, "fraction", class_="axis-label", font_size=11)
    svg.text(LEFT, height - 10, "layer", class_="axis-label", font_size=11)
    svg.group_end()

    svg.group_start(class_="legend")
    for i, (metric, colour) in enumerate(metrics):
        lx = LEFT + i * 110.0
        svg.rect(lx, 12, 12, 12, class_=f"legend-swatch {metric}", fill=colour)
        svg.text(lx + 16, 22, metric, class_="legend-label", font_size=11)
    svg.group_end()

    for g, row in enumerate(rows):
        x0 = LEFT + GROUP_GAP / 2 + g * group_width
        svg.group_start(class_="bar-group", data_layer=row.layer)
        for m, (metric, colour) in enumerate(metrics):
            value = float(getattr(row, metric))
            bar_height = value * PLOT_HEIGHT
            bx = x0 + m * BAR_WIDTH
            svg.rect(bx, baseline - bar_height, BAR_WIDTH - 2, bar_height,
                     class_=f"bar {metric}", fill=colour)
            svg.text(bx + BAR_WIDTH / 2, baseline - bar_height - 3, f"{value:.6f}",
                     class_="value", data_layer=row.layer, data_metric=metric,
                     font_size=6, text_anchor="middle")
        svg.text(x0, baseline + 12, row.layer, class_="layer-label", font_size=9,
                 transform=f"rotate(45 {x0:.2f} {baseline + 12:.2f})")
        svg.group_end()

    logger.debug(f"Rendered summary chart over {len(rows)} layers")
    return svg.get_svg()
