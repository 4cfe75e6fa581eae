"""
Grid figure of one or two subnetworks across a model's layer blocks.

Panels are laid out layer-major: per block, each attention head (its q, k, v
rows and o columns side by side), then the remaining sublayers. Each mask
entry is one cell coloured by membership class.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from shared.errors import ConfigurationError, SubnetworkMismatchError
from shared.hashing import fingerprint_of
from masking.config.mask_config import Granularity
from model_core.core.transformer import head_slices
from model_core.models.data_models import LayerId
from subnetwork.core.overlap import attention_layer_indices
from subnetwork.models.subnetwork import Subnetwork
from .svg_builder import SvgBuilder

logger = logging.getLogger(__name__)

CLASSES = ("a_only", "b_only", "both", "pruned")

MARGIN = 20.0
PANEL_GAP = 16.0
CAPTION_HEIGHT = 28.0
LEGEND_HEIGHT = 30.0


@dataclass(frozen=True)
class Palette:
    a_only: str = "#1f77b4"
    b_only: str = "#ff7f0e"
    both: str = "#9467bd"
    pruned: str = "#d9d9d9"

    def colour(self, cls: str) -> str:
        return getattr(self, cls)


@dataclass
class VizSpec:
    subnetwork_a: Subnetwork
    subnetwork_b: Optional[Subnetwork] = None
    palette: Palette = field(default_factory=Palette)
    cell_size: float = 4.0
    max_cells: int = 128
    wrap: int = 64

    def __post_init__(self):
        if self.subnetwork_b is not None:
            self.subnetwork_a.check_compatible(self.subnetwork_b)
        colours = [self.palette.colour(cls).lower() for cls in CLASSES]
        if len(set(colours)) != len(colours):
            raise ConfigurationError(f"Palette colours must be pairwise distinct, got {colours}")
        if self.cell_size <= 0 or self.max_cells < 1 or self.wrap < 1:
            raise ConfigurationError("cell_size, max_cells and wrap must be positive")

    @property
    def pair(self) -> bool:
        return self.subnetwork_b is not None


@dataclass
class Panel:
    panel_id: str
    title: str
    layer: str
    head: Optional[int]
    a: np.ndarray
    b: np.ndarray

    def counts(self) -> Dict[str, int]:
        return {
            "total": int(self.a.size),
            "kept_a": int(self.a.sum()),
            "kept_b": int(self.b.sum()),
            "both": int((self.a & self.b).sum()),
            "a_only": int((self.a & ~self.b).sum()),
            "b_only": int((~self.a & self.b).sum()),
            "pruned": int((~self.a & ~self.b).sum()),
        }


@dataclass
class RenderedFigure:
    svg: str
    sidecar: Dict[str, Any]


def _as_grid(mask: np.ndarray, wrap: int) -> np.ndarray:
    """2-D view of a mask; vectors wrap at `wrap` cells per row (padding is marked -1)."""
    if mask.ndim == 2:
        return mask.astype(np.int8)
    flat = mask.ravel().astype(np.int8)
    cols = min(wrap, flat.size)
    rows = math.ceil(flat.size / cols)
    grid = np.full(rows * cols, -1, dtype=np.int8)
    grid[:flat.size] = flat
    return grid.reshape(rows, cols)


def _block_average(grid: np.ndarray, max_cells: int) -> np.ndarray:
    """Shrink grids beyond max_cells per side; a block is kept when at least half its entries are."""
    rows, cols = grid.shape
    if rows <= max_cells and cols <= max_cells:
        return grid
    br, bc = math.ceil(rows / max_cells), math.ceil(cols / max_cells)
    out_rows, out_cols = math.ceil(rows / br), math.ceil(cols / bc)
    out = np.full((out_rows, out_cols), -1, dtype=np.int8)
    for i in range(out_rows):
        for j in range(out_cols):
            block = grid[i * br:(i + 1) * br, j * bc:(j + 1) * bc]
            valid = block[block >= 0]
            if valid.size:
                out[i, j] = 1 if valid.mean() >= 0.5 else 0
    return out


def manifest_mask_shapes(manifest: Dict[str, Any], granularity: Granularity) -> Dict[str, Tuple[int, ...]]:
    shapes = {}
    for entry in manifest.get("layers", []):
        if not entry.get("maskable"):
            continue
        weight = next((p for p in entry.get("params", []) if p.get("name") == "weight"), None)
        if weight is None:
            continue
        shape = tuple(weight["shape"])
        shapes[entry["id"]] = shape if granularity == Granularity.WEIGHT else (shape[0],)
    return shapes


def check_manifest(s: Subnetwork, manifest: Dict[str, Any]) -> None:
    """Raise SubnetworkMismatchError unless `s` was discovered on the model described by `manifest`."""
    identity = {k: v for k, v in manifest.items() if k != "weights_file"}
    if fingerprint_of(identity) != s.fingerprint:
        raise SubnetworkMismatchError(f"Subnetwork {s.fingerprint} does not belong to this model manifest")
    shapes = manifest_mask_shapes(manifest, s.granularity)
    if list(shapes) != s.layer_ids:
        raise SubnetworkMismatchError("Subnetwork layers do not match the manifest's maskable layers")
    for layer_id, mask in s.masks.items():
        if mask.shape != shapes[layer_id]:
            raise SubnetworkMismatchError(f"Layer {layer_id}: mask shape {mask.shape}, manifest expects {shapes[layer_id]}")


def _head_grid(s: Subnetwork, index: int, start: int, stop: int) -> np.ndarray:
    prefix = f"layer{index}.attn"
    if s.granularity == Granularity.WEIGHT:
        parts = [s.masks[f"{prefix}.{name}"][start:stop] for name in ("q", "k", "v")]
        parts.append(s.masks[f"{prefix}.o"][:, start:stop].T)
        return np.hstack(parts)
    return np.concatenate([s.masks[f"{prefix}.{name}"][start:stop] for name in ("q", "k", "v")])


def build_panels(spec: VizSpec) -> List[Panel]:
    a = spec.subnetwork_a
    b = spec.subnetwork_b if spec.subnetwork_b is not None else spec.subnetwork_a
    attention = set(attention_layer_indices(a)) if a.n_heads else set()
    covered = set()
    panels: List[Panel] = []

    for layer_id in a.layer_ids:
        index = LayerId(layer_id).layer_index
        if index in attention and LayerId(layer_id).block == "attn":
            if index in covered:
                continue
            covered.add(index)
            d_model = a.masks[f"layer{index}.attn.q"].shape[0]
            for head in head_slices(d_model, a.n_heads, index):
                panels.append(Panel(
                    panel_id=f"layer{index}-attn-head{head.head}",
                    title=f"layer{index}.attn head {head.head}",
                    layer=f"layer{index}.attn",
                    head=head.head,
                    a=_head_grid(a, index, head.start, head.stop),
                    b=_head_grid(b, index, head.start, head.stop),
                ))
            if a.granularity == Granularity.NEURON:
                o_id = f"layer{index}.attn.o"
                panels.append(Panel(o_id.replace(".", "-"), o_id, o_id, None, a.masks[o_id], b.masks[o_id]))
            continue
        panels.append(Panel(layer_id.replace(".", "-"), layer_id, layer_id, None,
                            a.masks[layer_id], b.masks[layer_id]))
    return panels


def _classify(a: np.ndarray, b: np.ndarray, pair: bool) -> np.ndarray:
    """Class index per cell (into CLASSES); -1 marks padding."""
    cls = np.where(a == 1, np.where(b == 1, 2, 0), np.where(b == 1, 1, 3)) if pair else np.where(a == 1, 0, 3)
    return np.where((a < 0) | (b < 0), -1, cls)


def _caption(panel: Panel, pair: bool) -> str:
    c = panel.counts()
    if pair:
        return (f"{panel.title}: a {c['kept_a']}, b {c['kept_b']}, both {c['both']}, "
                f"pruned {c['pruned']} of {c['total']}")
    return f"{panel.title}: kept {c['kept_a']}, pruned {c['total'] - c['kept_a']} of {c['total']}"


def render(spec: VizSpec, manifest: Dict[str, Any]) -> RenderedFigure:
    """Draw every panel; returns the SVG text and the caption metadata."""
    check_manifest(spec.subnetwork_a, manifest)
    panels = build_panels(spec)
    pair = spec.pair
    size = spec.cell_size

    grids = []
    for panel in panels:
        grid_a = _block_average(_as_grid(panel.a, spec.wrap), spec.max_cells)
        grid_b = _block_average(_as_grid(panel.b, spec.wrap), spec.max_cells)
        grids.append(_classify(grid_a, grid_b, pair))

    # One row of panels per layer block, in first-appearance order
    rows: Dict[str, List[int]] = {}
    for position, panel in enumerate(panels):
        rows.setdefault(panel.layer.split(".")[0], []).append(position)

    placements: Dict[int, Tuple[float, float]] = {}
    y = MARGIN + LEGEND_HEIGHT
    width = 0.0
    for members in rows.values():
        x = MARGIN
        row_height = 0.0
        for position in members:
            grid = grids[position]
            placements[position] = (x, y)
            x += max(grid.shape[1] * size, 180.0) + PANEL_GAP
            row_height = max(row_height, grid.shape[0] * size + CAPTION_HEIGHT)
        width = max(width, x)
        y += row_height + PANEL_GAP
    height = y + MARGIN

    classes = list(CLASSES) if pair else ["a_only", "pruned"]
    title = "Subnetwork overlap" if pair else "Subnetwork"
    svg = SvgBuilder(width + MARGIN, height, title=title)

    svg.group_start(class_="legend")
    for i, cls in enumerate(classes):
        lx = MARGIN + i * 110.0
        svg.rect(lx, MARGIN, 12, 12, class_=f"legend-swatch {cls}", fill=spec.palette.colour(cls))
        svg.text(lx + 16, MARGIN + 10, cls.replace("_", " "), class_="legend-label", font_size=11)
    svg.group_end()

    sidecar_panels = []
    for position, panel in enumerate(panels):
        x0, y0 = placements[position]
        grid = grids[position]
        svg.group_start(class_="panel", id=f"panel-{panel.panel_id}",
                        data_layer=panel.layer, data_head=panel.head)
        svg.text(x0, y0 + 10, _caption(panel, pair), class_="caption", font_size=10)
        top = y0 + CAPTION_HEIGHT - 10
        for (r, c), value in np.ndenumerate(grid):
            if value < 0:
                continue
            cls = CLASSES[value]
            svg.rect(x0 + c * size, top + r * size, size, size,
                     class_=f"cell {cls}", fill=spec.palette.colour(cls))
        svg.group_end()

        entry = {"id": panel.panel_id, "title": panel.title, "layer": panel.layer, "head": panel.head,
                 "rows": int(grid.shape[0]), "cols": int(grid.shape[1]), **panel.counts()}
        sidecar_panels.append(entry)

    sidecar = {
        "fingerprint": spec.subnetwork_a.fingerprint,
        "granularity": spec.subnetwork_a.granularity.value,
        "subnetworks": 2 if pair else 1,
        "legend": classes,
        "palette": {cls: spec.palette.colour(cls) for cls in CLASSES},
        "panels": sidecar_panels,
    }
    logger.info(f"Rendered {len(panels)} panels ({'two' if pair else 'one'} subnetwork{'s' if pair else ''})")
    return RenderedFigure(svg=svg.get_svg(), sidecar=sidecar)
