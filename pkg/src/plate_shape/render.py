"""Deterministic SVG drawings of bodies and s-functions."""

from __future__ import annotations

from html import escape

import numpy as np

from .convex import SupportFunction2D, angle_grid, boundary_point
from .sfunctions import SFunction

PANEL = 400.0
MARGIN = 20.0
SAMPLES = 720

_STYLE = """
.truth { fill: none; stroke: #222222; stroke-width: 2; }
.reconstruction { fill: none; stroke: #cc3311; stroke-width: 1.5; stroke-dasharray: 6 3; }
.alternative { fill: none; stroke: #0077bb; stroke-width: 1; opacity: 0.6; }
.sfunction { fill: none; stroke-width: 1.5; }
.axis { stroke: #aaaaaa; stroke-width: 0.5; }
.warning { fill: #cc3311; font: 14px sans-serif; }
.label { fill: #222222; font: 12px sans-serif; }
"""

_SF_COLORS = ["#004488", "#ddaa33", "#bb5566", "#009988", "#ee7733", "#33bbee"]


def _fmt(x: float) -> str:
    return f"{x:.3f}"


def _path(xy: np.ndarray, cls: str, style: str = "") -> str:
    d = "M " + " L ".join(f"{_fmt(x)} {_fmt(y)}" for x, y in xy) + " Z"
    extra = f' style="{style}"' if style else ""
    return f'<path class="{cls}" d="{d}"{extra}/>'


def render_svg(
    truth: SupportFunction2D | None = None,
    solutions: list[SupportFunction2D] | None = None,
    sfuncs: list[SFunction] | None = None,
    warning: str | None = None,
) -> str:
    """Bodies in the left panel (ground truth and reconstructions), polar s-function plot on the right."""
    solutions = list(solutions or [])
    if truth is None and not solutions and warning is None:
        warning = "nothing to draw"
    th = angle_grid(SAMPLES)
    curves = []
    if truth is not None:
        curves.append(("truth", boundary_point(truth, th)))
    for i, P in enumerate(solutions):
        curves.append(("reconstruction" if i == 0 else "alternative", boundary_point(P, th)))
    extent = max([float(np.max(np.abs(c))) for _, c in curves] + [1e-12])
    scale = (PANEL / 2 - MARGIN) / extent
    cx = cy = PANEL / 2

    width = PANEL * (2 if sfuncs else 1)
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_fmt(width)}" height="{_fmt(PANEL)}" '
        f'viewBox="0 0 {_fmt(width)} {_fmt(PANEL)}">',
        f"<style>{_STYLE}</style>",
        f'<g id="bodies" data-scale="{scale:.6f}">',
        f'<line class="axis" x1="{_fmt(MARGIN)}" y1="{_fmt(cy)}" x2="{_fmt(PANEL - MARGIN)}" y2="{_fmt(cy)}"/>',
        f'<line class="axis" x1="{_fmt(cx)}" y1="{_fmt(MARGIN)}" x2="{_fmt(cx)}" y2="{_fmt(PANEL - MARGIN)}"/>',
    ]
    for cls, c in curves:
        xy = np.stack([cx + scale * c[:, 0], cy - scale * c[:, 1]], axis=1)
        out.append(_path(xy, cls))
    out.append("</g>")
    if sfuncs:
        vmax = max(float(np.max(s.values)) for s in sfuncs) or 1.0
        r0 = PANEL / 2 - MARGIN
        ox = PANEL + PANEL / 2
        out.append('<g id="sfunctions">')
        for i, s in enumerate(sfuncs):
            r = r0 * s.values / vmax
            t = s.theta_grid
            xy = np.stack([ox + r * np.cos(t), cy - r * np.sin(t)], axis=1)
            out.append(_path(xy, "sfunction", f"stroke: {_SF_COLORS[i % len(_SF_COLORS)]}"))
            out.append(f'<text class="label" x="{_fmt(PANEL + 8)}" y="{_fmt(16 + 14 * i)}">s{s.mode_index}</text>')
        out.append("</g>")
    if warning:
        out.append(f'<text class="warning" x="{_fmt(MARGIN)}" y="{_fmt(PANEL - 6)}">{escape(warning)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
