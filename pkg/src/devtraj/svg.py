"""Standalone SVG scatter plots of embeddings, coloured by tier."""

from __future__ import annotations

import os
from collections.abc import Mapping, Sequence
from xml.sax.saxutils import escape

import numpy as np

from .tsne import Embedding2D

PALETTE = (
    "#d62728",
    "#ff7f0e",
    "#2ca02c",
    "#1f77b4",
    "#9467bd",
    "#8c564b",
    "#e377c2",
    "#7f7f7f",
)

WIDTH = 640
HEIGHT = 480
_PLOT = (60.0, 40.0, 460.0, 380.0)  # left, top, width, height in px
_MARGIN = 0.05


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _axis_range(values: np.ndarray) -> tuple[float, float]:
    lo, hi = float(values.min()), float(values.max())
    span = hi - lo
    if span == 0.0:
        span = 1.0
    return lo - _MARGIN * span, hi + _MARGIN * span


def render_scatter_svg(
    coords: np.ndarray,
    tiers: Sequence[int],
    tier_names: Mapping[int, str] | None = None,
    title: str = "",
) -> str:
    xy = np.asarray(coords, dtype=float)
    tiers = [int(t) for t in tiers]
    if xy.ndim != 2 or xy.shape[1] != 2 or xy.shape[0] == 0:
        raise ValueError("need a non-empty (n, 2) coordinate matrix")
    if len(tiers) != xy.shape[0]:
        raise ValueError(f"{len(tiers)} tier labels for {xy.shape[0]} points")
    names = dict(tier_names or {})

    left, top, pw, ph = _PLOT
    x0, x1 = _axis_range(xy[:, 0])
    y0, y1 = _axis_range(xy[:, 1])
    px = left + (xy[:, 0] - x0) / (x1 - x0) * pw
    py = top + ph - (xy[:, 1] - y0) / (y1 - y0) * ph

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>',
    ]
    if title:
        out.append(f'<text x="{_fmt(left)}" y="24" font-size="14">{escape(title)}</text>')
    out.append(
        f'<rect x="{_fmt(left)}" y="{_fmt(top)}" width="{_fmt(pw)}" height="{_fmt(ph)}" '
        'fill="none" stroke="#333333" stroke-width="1"/>'
    )
    # axis extremes as tick labels
    bottom = top + ph
    out.append(f'<text x="{_fmt(left)}" y="{_fmt(bottom + 16)}" text-anchor="start">{x0:.2f}</text>')
    out.append(f'<text x="{_fmt(left + pw)}" y="{_fmt(bottom + 16)}" text-anchor="end">{x1:.2f}</text>')
    out.append(f'<text x="{_fmt(left - 6)}" y="{_fmt(bottom)}" text-anchor="end">{y0:.2f}</text>')
    out.append(f'<text x="{_fmt(left - 6)}" y="{_fmt(top + 10)}" text-anchor="end">{y1:.2f}</text>')
    out.append(f'<text x="{_fmt(left + pw / 2)}" y="{_fmt(bottom + 32)}" text-anchor="middle">t-SNE 1</text>')
    out.append(
        f'<text x="20" y="{_fmt(top + ph / 2)}" text-anchor="middle" '
        f'transform="rotate(-90 20 {_fmt(top + ph / 2)})">t-SNE 2</text>'
    )

    out.append('<g stroke="#ffffff" stroke-width="0.5">')
    for x, y, t in zip(px, py, tiers):
        out.append(f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="3.5" fill="{PALETTE[t % len(PALETTE)]}"/>')
    out.append("</g>")

    lx = left + pw + 20
    out.append('<g class="legend">')
    for row, t in enumerate(sorted(set(tiers))):
        ly = top + 10 + 20 * row
        label = escape(names.get(t, f"tier-{t}"))
        out.append(
            f'<g class="legend-entry"><rect x="{_fmt(lx)}" y="{_fmt(ly - 9)}" width="10" height="10" '
            f'fill="{PALETTE[t % len(PALETTE)]}"/><text x="{_fmt(lx + 16)}" y="{_fmt(ly)}">{label}</text></g>'
        )
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_scatter_svg(
    embedding: Embedding2D,
    tiers: Sequence[int],
    path: str | os.PathLike,
    tier_names: Mapping[int, str] | None = None,
    title: str = "",
) -> None:
    text = render_scatter_svg(embedding.coords, tiers, tier_names, title)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
