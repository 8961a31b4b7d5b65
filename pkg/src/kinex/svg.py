"""Tiny native SVG plots (polylines, markers, bars).  Presentation only:
the CSV files stay the canonical outputs, and nothing here feeds back into
results.  Output is deterministic (no timestamps, fixed float formatting)."""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

W, H = 640, 420
ML, MR, MT, MB = 64, 16, 34, 46  # margins
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e")


def _fmt(v: float) -> str:
    return f"{v:.6g}"


def _nice_ticks(lo: float, hi: float, target: int = 5) -> list[float]:
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / target
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 2.5, 5.0, 10.0):
        if raw <= mult * mag:
            step = mult * mag
            break
    first = math.ceil(lo / step) * step
    ticks = []
    t = first
    while t <= hi + 1e-12 * step:
        ticks.append(0.0 if abs(t) < 1e-12 * step else t)
        t += step
    return ticks


class _Canvas:
    def __init__(self, title: str, xlabel: str, ylabel: str,
                 xlim: tuple[float, float], ylim: tuple[float, float]):
        self.parts = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" '
            f'viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">',
            f'<rect width="{W}" height="{H}" fill="white"/>',
            f'<text x="{W / 2}" y="20" text-anchor="middle" font-size="14">{title}</text>',
            f'<text x="{W / 2}" y="{H - 8}" text-anchor="middle">{xlabel}</text>',
            f'<text x="16" y="{H / 2}" text-anchor="middle" '
            f'transform="rotate(-90 16 {H / 2})">{ylabel}</text>',
        ]
        self.x0, self.x1 = xlim
        self.y0, self.y1 = ylim
        if self.x1 <= self.x0:
            self.x1 = self.x0 + 1.0
        if self.y1 <= self.y0:
            self.y1 = self.y0 + 1.0

    def px(self, x: float) -> float:
        return ML + (x - self.x0) / (self.x1 - self.x0) * (W - ML - MR)

    def py(self, y: float) -> float:
        return H - MB - (y - self.y0) / (self.y1 - self.y0) * (H - MT - MB)

    def axes(self) -> None:
        for t in _nice_ticks(self.x0, self.x1):
            x = self.px(t)
            self.parts.append(
                f'<line x1="{_fmt(x)}" y1="{H - MB}" x2="{_fmt(x)}" y2="{H - MB + 4}" stroke="black"/>'
                f'<text x="{_fmt(x)}" y="{H - MB + 17}" text-anchor="middle">{_fmt(t)}</text>'
            )
        for t in _nice_ticks(self.y0, self.y1):
            y = self.py(t)
            self.parts.append(
                f'<line x1="{ML - 4}" y1="{_fmt(y)}" x2="{ML}" y2="{_fmt(y)}" stroke="black"/>'
                f'<text x="{ML - 7}" y="{_fmt(y + 4)}" text-anchor="end">{_fmt(t)}</text>'
            )
        self.parts.append(
            f'<rect x="{ML}" y="{MT}" width="{W - ML - MR}" height="{H - MT - MB}" '
            'fill="none" stroke="black"/>'
        )
        if self.y0 < 0.0 < self.y1:
            y = self.py(0.0)
            self.parts.append(
                f'<line x1="{ML}" y1="{_fmt(y)}" x2="{W - MR}" y2="{_fmt(y)}" '
                'stroke="#999" stroke-dasharray="4 3"/>'
            )

    def polyline(self, xs, ys, color: str, markers: bool = False) -> None:
        pts = " ".join(f"{_fmt(self.px(x))},{_fmt(self.py(y))}" for x, y in zip(xs, ys))
        self.parts.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>'
        )
        if markers:
            for x, y in zip(xs, ys):
                self.parts.append(
                    f'<circle cx="{_fmt(self.px(x))}" cy="{_fmt(self.py(y))}" r="2.4" fill="{color}"/>'
                )

    def legend(self, labels: list[str]) -> None:
        for i, lab in enumerate(labels):
            x, y = W - MR - 150, MT + 16 + 16 * i
            self.parts.append(
                f'<line x1="{x}" y1="{y - 4}" x2="{x + 22}" y2="{y - 4}" '
                f'stroke="{COLORS[i % len(COLORS)]}" stroke-width="2"/>'
                f'<text x="{x + 28}" y="{y}">{lab}</text>'
            )

    def write(self, path: Path) -> None:
        self.parts.append("</svg>")
        Path(path).write_text("\n".join(self.parts) + "\n", encoding="utf-8")


def line_plot(path, series, title: str, xlabel: str, ylabel: str, markers: bool = False) -> None:
    """series: list of (xs, ys, label); labels drawn only when more than one."""
    all_x = np.concatenate([np.asarray(s[0], dtype=float) for s in series])
    all_y = np.concatenate([np.asarray(s[1], dtype=float) for s in series])
    pad = 0.05 * (all_y.max() - all_y.min() or 1.0)
    cv = _Canvas(title, xlabel, ylabel,
                 (float(all_x.min()), float(all_x.max())),
                 (float(all_y.min()) - pad, float(all_y.max()) + pad))
    cv.axes()
    for i, (xs, ys, _label) in enumerate(series):
        cv.polyline(xs, ys, COLORS[i % len(COLORS)], markers=markers)
    if len(series) > 1:
        cv.legend([s[2] for s in series])
    cv.write(path)


def bar_chart(path, values, title: str, xlabel: str, ylabel: str) -> None:
    values = np.asarray(values, dtype=float)
    n = values.size
    cv = _Canvas(title, xlabel, ylabel, (0.5, n + 0.5), (0.0, float(values.max()) * 1.08))
    cv.axes()
    for j, v in enumerate(values, start=1):
        x0, x1 = cv.px(j - 0.35), cv.px(j + 0.35)
        y0, y1 = cv.py(v), cv.py(0.0)
        cv.parts.append(
            f'<rect x="{_fmt(x0)}" y="{_fmt(y0)}" width="{_fmt(x1 - x0)}" '
            f'height="{_fmt(y1 - y0)}" fill="{COLORS[0]}" stroke="black" stroke-width="0.5"/>'
        )
    cv.write(path)
