"""Figure Export Tools

SVG/PNG rendering of root-convergence curves: one solid polyline of rho_k per
trial and a dashed horizontal line at the predicted factor.
"""

import logging
from pathlib import Path
from typing import Dict, List, Sequence, Tuple
from xml.sax.saxutils import escape

import numpy as np

from rkl.engine.models import EnsembleResult

logger = logging.getLogger(__name__)

MAX_POINTS = 500
WIDTH, HEIGHT = 640, 420
MARGIN_LEFT, MARGIN_RIGHT, MARGIN_TOP, MARGIN_BOTTOM = 60, 20, 40, 50


def decimate(values: Sequence[float], max_points: int = MAX_POINTS) -> List[Tuple[int, float]]:
    """(k, value) pairs, thinned to at most max_points evenly spaced samples

    k starts at 1. The first and last points are always kept.
    """
    n = len(values)
    if n <= max_points:
        return [(i + 1, float(values[i])) for i in range(n)]
    idx = np.unique(np.linspace(0, n - 1, max_points).round().astype(int))
    return [(int(i) + 1, float(values[i])) for i in idx]


class _Axes:
    """Linear data-to-pixel mapping"""

    def __init__(self, k_max: int, y_max: float):
        self.k_max = max(k_max, 1)
        self.y_max = y_max
        self.plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT
        self.plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM

    def x(self, k: float) -> float:
        return MARGIN_LEFT + self.plot_w * k / self.k_max

    def y(self, value: float) -> float:
        clipped = min(max(value, 0.0), self.y_max)
        return MARGIN_TOP + self.plot_h * (1.0 - clipped / self.y_max)


def create_polyline_svg(
    points: Sequence[Tuple[int, float]], axes: _Axes, stroke: str = "#1f77b4"
) -> str:
    coords = " ".join(f"{axes.x(k):.2f},{axes.y(v):.2f}" for k, v in points)
    return (
        f'<polyline fill="none" stroke="{stroke}" stroke-width="0.8" '
        f'stroke-opacity="0.5" points="{coords}" />'
    )


def create_dashed_line_svg(value: float, axes: _Axes, stroke: str = "#d62728") -> str:
    y = axes.y(value)
    return (
        f'<polyline fill="none" stroke="{stroke}" stroke-width="1.5" stroke-dasharray="6,4" '
        f'points="{axes.x(0):.2f},{y:.2f} {axes.x(axes.k_max):.2f},{y:.2f}" />'
    )


def _axes_svg(axes: _Axes, title: str) -> str:
    x0, x1 = axes.x(0), axes.x(axes.k_max)
    y0, y1 = axes.y(0), axes.y(axes.y_max)
    parts = [
        f'<line x1="{x0:.2f}" y1="{y0:.2f}" x2="{x1:.2f}" y2="{y0:.2f}" stroke="#000000" />',
        f'<line x1="{x0:.2f}" y1="{y0:.2f}" x2="{x0:.2f}" y2="{y1:.2f}" stroke="#000000" />',
    ]
    for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
        k = round(axes.k_max * frac)
        v = axes.y_max * frac
        parts.append(
            f'<text x="{axes.x(k):.2f}" y="{y0 + 16:.2f}" font-size="11" '
            f'text-anchor="middle">{k}</text>'
        )
        parts.append(
            f'<text x="{x0 - 6:.2f}" y="{axes.y(v) + 4:.2f}" font-size="11" '
            f'text-anchor="end">{v:.2f}</text>'
        )
    parts.append(
        f'<text x="{(x0 + x1) / 2:.2f}" y="{HEIGHT - 12}" font-size="13" '
        f'text-anchor="middle">k</text>'
    )
    parts.append(
        f'<text x="16" y="{(y0 + y1) / 2:.2f}" font-size="13" text-anchor="middle" '
        f'transform="rotate(-90 16 {(y0 + y1) / 2:.2f})">&#x3F1;_k</text>'
    )
    parts.append(
        f'<text x="{WIDTH / 2:.2f}" y="22" font-size="14" '
        f'text-anchor="middle">{escape(title)}</text>'
    )
    return "\n  ".join(parts)


def render_rho_figure(result: EnsembleResult, title: str = "") -> str:
    """Self-contained SVG with trials + 1 polylines"""
    series = [t.rho_series for t in result.traces]
    k_max = max((len(s) for s in series), default=1)
    y_max = max(1.0, 1.05 * result.theoretical_rho)
    axes = _Axes(k_max, y_max)
    curves = [create_polyline_svg(decimate(s), axes) for s in series]
    body = "\n  ".join(
        [_axes_svg(axes, title)] + curves + [create_dashed_line_svg(result.theoretical_rho, axes)]
    )
    return f"""<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">
  <rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="#ffffff" />
  {body}
</svg>
"""


def export_rho_figure(
    result: EnsembleResult, output_path: Path, title: str = "", png: bool = False
) -> Dict[str, object]:
    """Write <output_path>.svg and optionally <output_path>.png

    Returns:
        {"files_created": [...]} plus "warning" when PNG output was requested
        but cairosvg is not installed
    """
    svg_content = render_rho_figure(result, title)
    output_path.parent.mkdir(parents=True, exist_ok=True)
    svg_path = output_path.with_suffix(".svg")
    svg_path.write_text(svg_content, encoding="utf-8")
    files_created: List[str] = [str(svg_path)]
    summary: Dict[str, object] = {"files_created": files_created}

    if png:
        png_path = output_path.with_suffix(".png")
        try:
            import cairosvg

            cairosvg.svg2png(bytestring=svg_content.encode("utf-8"), write_to=str(png_path))
            files_created.append(str(png_path))
        except ImportError:
            logger.warning("PNG export requires cairosvg library")
            summary["warning"] = "PNG export requires cairosvg library"
            summary["note"] = "Install with: pip install cairosvg"
    return summary
