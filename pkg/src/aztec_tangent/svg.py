"""Tiny static SVG emitter: fixed 800x800 viewport, y axis pointing up."""
from __future__ import annotations

from typing import Iterable, Sequence

SIZE = 800
MARGIN = 60
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf")


class Figure:
    def __init__(self, xmax: float, ymax: float = 1.0, title: str = ""):
        self.xmax, self.ymax = float(xmax), float(ymax)
        span = SIZE - 2 * MARGIN
        self.scale = span / max(self.xmax, self.ymax)
        self.parts: list[str] = []
        self.title = title

    def px(self, x: float, y: float) -> tuple[float, float]:
        return MARGIN + x * self.scale, SIZE - MARGIN - y * self.scale

    def axes(self) -> None:
        x0, y0 = self.px(0, 0)
        x1, y1 = self.px(self.xmax, self.ymax)
        self.parts.append(f'<rect x="{x0:.2f}" y="{y1:.2f}" width="{x1 - x0:.2f}" height="{y0 - y1:.2f}" '
                          'fill="none" stroke="#000" stroke-width="1"/>')
        for k in range(5):
            for frac, horiz in ((k / 4, True), (k / 4, False)):
                if horiz:
                    x, y = self.px(frac * self.xmax, 0)
                    self.parts.append(f'<text x="{x:.2f}" y="{y + 18:.2f}" font-size="12" '
                                      f'text-anchor="middle">{frac * self.xmax:.3g}</text>')
                else:
                    x, y = self.px(0, frac * self.ymax)
                    self.parts.append(f'<text x="{x - 8:.2f}" y="{y + 4:.2f}" font-size="12" '
                                      f'text-anchor="end">{frac * self.ymax:.3g}</text>')
        if self.title:
            self.parts.append(f'<text x="{SIZE / 2:.0f}" y="{MARGIN / 2:.0f}" font-size="16" '
                              f'text-anchor="middle">{_esc(self.title)}</text>')

    def polyline(self, pts: Sequence[tuple[float, float]], color: str = "#000", width: float = 1.5,
                 dash: str = "") -> None:
        if len(pts) < 2:
            return
        coords = " ".join("{:.2f},{:.2f}".format(*self.px(x, y)) for x, y in pts)
        extra = f' stroke-dasharray="{dash}"' if dash else ""
        self.parts.append(f'<polyline points="{coords}" fill="none" stroke="{color}" '
                          f'stroke-width="{width}"{extra}/>')

    def marker(self, x: float, y: float, color: str = "#000", r: float = 4) -> None:
        cx, cy = self.px(x, y)
        self.parts.append(f'<circle cx="{cx:.2f}" cy="{cy:.2f}" r="{r}" fill="{color}"/>')

    def cell(self, x0: float, x1: float, y0: float, y1: float, color: str, opacity: float) -> None:
        a, b = self.px(x0, y1)
        c, d = self.px(x1, y0)
        self.parts.append(f'<rect x="{a:.2f}" y="{b:.2f}" width="{c - a:.2f}" height="{d - b:.2f}" '
                          f'fill="{color}" fill-opacity="{opacity:.3f}" stroke="none"/>')

    def render(self) -> str:
        head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" '
                f'viewBox="0 0 {SIZE} {SIZE}">\n<rect width="100%" height="100%" fill="#fff"/>\n')
        return head + "\n".join(self.parts) + "\n</svg>\n"


def split_runs(pts: Iterable[tuple[float, float]], jump: float) -> list[list[tuple[float, float]]]:
    """Break a point sequence wherever consecutive points are farther apart than ``jump``."""
    runs: list[list[tuple[float, float]]] = []
    for p in pts:
        if runs and abs(p[0] - runs[-1][-1][0]) + abs(p[1] - runs[-1][-1][1]) <= jump:
            runs[-1].append(p)
        else:
            runs.append([p])
    return runs


def _esc(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
