"""Minimal static SVG 1.1 line/point charts (no plotting dependency)."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from xml.sax.saxutils import escape

import numpy as np

WIDTH, HEIGHT = 640, 440
MARGIN = dict(left=70, right=150, top=40, bottom=55)
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def nice_ticks(lo: float, hi: float, target: int = 6) -> list[float]:
    """Round tick positions covering [lo, hi]: steps of 1, 2 or 5 × 10^k."""
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / max(target - 1, 1)
    mag = 10.0 ** math.floor(math.log10(raw))
    step = next(m * mag for m in (1, 2, 5, 10) if m * mag >= raw)
    start = math.ceil(lo / step - 1e-9) * step
    ticks = []
    t = start
    while t <= hi + 1e-9 * step:
        ticks.append(round(t, 12))
        t += step
    return ticks


def _fmt(x: float) -> str:
    return f"{x:.2f}"


def _label(x: float) -> str:
    return f"{x:g}"


@dataclass
class Series:
    label: str
    x: np.ndarray
    y: np.ndarray
    color: str
    markers: bool = False
    dashed: bool = False


@dataclass
class Figure:
    title: str = ""
    xlabel: str = ""
    ylabel: str = ""
    series: list[Series] = field(default_factory=list)

    def _next_color(self):
        return PALETTE[len(self.series) % len(PALETTE)]

    def line(self, x, y, label="", color=None, dashed=False) -> "Figure":
        self.series.append(Series(label, np.asarray(x, float), np.asarray(y, float),
                                  color or self._next_color(), dashed=dashed))
        return self

    def points(self, x, y, label="", color=None) -> "Figure":
        self.series.append(Series(label, np.asarray(x, float), np.asarray(y, float),
                                  color or self._next_color(), markers=True))
        return self

    def _limits(self):
        xs = np.concatenate([s.x for s in self.series])
        ys = np.concatenate([s.y for s in self.series])
        xs, ys = xs[np.isfinite(xs)], ys[np.isfinite(ys)]
        xlo, xhi = float(xs.min()), float(xs.max())
        ylo, yhi = float(ys.min()), float(ys.max())
        pad = 0.05 * (yhi - ylo or 1.0)
        return xlo, xhi, ylo - pad, yhi + pad

    def to_svg(self) -> str:
        if not self.series:
            raise ValueError("figure has no series")
        xlo, xhi, ylo, yhi = self._limits()
        xt, yt = nice_ticks(xlo, xhi), nice_ticks(ylo, yhi)
        xlo, xhi = min(xlo, xt[0]), max(xhi, xt[-1])
        ylo, yhi = min(ylo, yt[0]), max(yhi, yt[-1])
        x0, x1 = MARGIN["left"], WIDTH - MARGIN["right"]
        y0, y1 = HEIGHT - MARGIN["bottom"], MARGIN["top"]

        def sx(v):
            return x0 + (v - xlo) / (xhi - xlo or 1.0) * (x1 - x0)

        def sy(v):
            return y0 + (v - ylo) / (yhi - ylo or 1.0) * (y1 - y0)

        out = [
            '<?xml version="1.0" encoding="UTF-8"?>',
            f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
            f'width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
            f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
            f'<g id="axes" stroke="black" stroke-width="1">'
            f'<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}"/>'
            f'<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}"/></g>',
        ]
        ticks = ['<g id="ticks" font-family="sans-serif" font-size="11">']
        for t in xt:
            px = _fmt(sx(t))
            ticks.append(f'<line x1="{px}" y1="{y0}" x2="{px}" y2="{y0 + 5}" stroke="black"/>'
                         f'<text x="{px}" y="{y0 + 18}" text-anchor="middle">{_label(t)}</text>')
        for t in yt:
            py = _fmt(sy(t))
            ticks.append(f'<line x1="{x0 - 5}" y1="{py}" x2="{x0}" y2="{py}" stroke="black"/>'
                         f'<text x="{x0 - 8}" y="{py}" text-anchor="end" '
                         f'dominant-baseline="middle">{_label(t)}</text>')
        ticks.append("</g>")
        out.extend(ticks)

        for i, s in enumerate(self.series):
            ok = np.isfinite(s.x) & np.isfinite(s.y)
            pts = " ".join(f"{_fmt(sx(a))},{_fmt(sy(b))}" for a, b in zip(s.x[ok], s.y[ok]))
            label = escape(s.label, {'"': "&quot;"})
            if s.markers:
                out.append(f'<g class="points" data-label="{label}" fill="{s.color}">')
                out.extend(f'<circle cx="{_fmt(sx(a))}" cy="{_fmt(sy(b))}" r="3.5"/>'
                           for a, b in zip(s.x[ok], s.y[ok]))
                out.append("</g>")
            else:
                dash = ' stroke-dasharray="6,4"' if s.dashed else ""
                out.append(f'<polyline class="curve" data-label="{label}" fill="none" '
                           f'stroke="{s.color}" stroke-width="1.8"{dash} points="{pts}"/>')
            ly = MARGIN["top"] + 10 + 18 * i
            lx = x1 + 12
            swatch = (f'<circle cx="{lx + 10}" cy="{ly}" r="3.5" fill="{s.color}"/>' if s.markers
                      else f'<line x1="{lx}" y1="{ly}" x2="{lx + 20}" y2="{ly}" stroke="{s.color}" stroke-width="2"/>')
            out.append(f'<g class="legend" font-family="sans-serif" font-size="11">{swatch}'
                       f'<text x="{lx + 26}" y="{ly}" dominant-baseline="middle">{label}</text></g>')

        cx = (x0 + x1) / 2
        out.append(f'<text x="{_fmt(cx)}" y="{HEIGHT - 15}" text-anchor="middle" '
                   f'font-family="sans-serif" font-size="13">{escape(self.xlabel)}</text>')
        out.append(f'<text x="18" y="{_fmt((y0 + y1) / 2)}" text-anchor="middle" font-family="sans-serif" '
                   f'font-size="13" transform="rotate(-90 18 {_fmt((y0 + y1) / 2)})">{escape(self.ylabel)}</text>')
        if self.title:
            out.append(f'<text x="{_fmt(cx)}" y="22" text-anchor="middle" '
                       f'font-family="sans-serif" font-size="14">{escape(self.title)}</text>')
        out.append("</svg>")
        return "\n".join(out) + "\n"

    def save(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_svg())


def polyline_data(svg_text: str) -> dict[str, list[tuple[float, float]]]:
    """Pixel coordinates of each labelled polyline, for tests and tooling."""
    out = {}
    for m in re.finditer(r'<polyline class="curve" data-label="([^"]*)"[^>]*points="([^"]*)"', svg_text):
        pts = [tuple(map(float, p.split(","))) for p in m.group(2).split()]
        out[m.group(1)] = pts
    return out
