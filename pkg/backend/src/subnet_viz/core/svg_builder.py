"""
Minimal SVG document builder.

Elements are appended as text in call order, so identical call sequences give
byte-identical documents.
"""

from typing import Dict, List, Optional
from xml.sax.saxutils import escape, quoteattr


def fmt_num(value: float) -> str:
    """Fixed two-decimal coordinates with trailing zeros trimmed."""
    text = f"{float(value):.2f}".rstrip("0").rstrip(".")
    return "0" if text in ("-0", "") else text


def _attrs(attrs: Dict[str, object]) -> str:
    parts = []
    for key, value in attrs.items():
        if value is None:
            continue
        if isinstance(value, float):
            value = fmt_num(value)
        parts.append(f"{key.rstrip('_').replace('_', '-')}={quoteattr(str(value))}")
    return " ".join(parts)


class SvgBuilder:
    def __init__(self, width: float, height: float, title: Optional[str] = None):
        self.width = width
        self.height = height
        self._parts: List[str] = [
            '<?xml version="1.0" encoding="UTF-8"?>\n',
            f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
            f'width="{fmt_num(width)}" height="{fmt_num(height)}" '
            f'viewBox="0 0 {fmt_num(width)} {fmt_num(height)}">\n',
        ]
        if title:
            self._parts.append(f"<title>{escape(title)}</title>\n")
        self._depth = 0

    def style(self, css: str) -> None:
        self._parts.append(f"<style>{escape(css)}</style>\n")

    def group_start(self, **attrs: object) -> None:
        self._parts.append(f"<g {_attrs(attrs)}>\n" if attrs else "<g>\n")
        self._depth += 1

    def group_end(self) -> None:
        if self._depth == 0:
            raise ValueError("group_end without matching group_start")
        self._parts.append("</g>\n")
        self._depth -= 1

    def rect(self, x: float, y: float, width: float, height: float, **attrs: object) -> None:
        geometry = {"x": float(x), "y": float(y), "width": float(width), "height": float(height)}
        self._parts.append(f"<rect {_attrs({**attrs, **geometry})}/>\n")

    def line(self, x1: float, y1: float, x2: float, y2: float, **attrs: object) -> None:
        geometry = {"x1": float(x1), "y1": float(y1), "x2": float(x2), "y2": float(y2)}
        self._parts.append(f"<line {_attrs({**attrs, **geometry})}/>\n")

    def text(self, x: float, y: float, content: str, **attrs: object) -> None:
        self._parts.append(f"<text {_attrs({**attrs, 'x': float(x), 'y': float(y)})}>{escape(content)}</text>\n")

    def get_svg(self) -> str:
        if self._depth:
            raise ValueError(f"{self._depth} unclosed group(s)")
        return "".join(self._parts) + "</svg>\n"
