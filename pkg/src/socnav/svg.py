"""Deterministic SVG rendering of scenarios and paths.

The output is built from fixed-format strings only, so identical inputs
always produce byte-identical files.
"""

from __future__ import annotations

from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .sim import Scenario, obstacle_positions

SCALE = 60.0  # px per meter
MARGIN = 40.0  # px
TRACK_HORIZON = 12.0  # s of dashed track drawn for drifting obstacles
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")
DASHES = ("none", "7,4", "2,3", "10,3,2,3", "4,4", "1,2")


def _fmt(v: float) -> str:
    return f"{v:.3f}"


class _Frame:
    def __init__(self, scenario: Scenario):
        self.b = scenario.bounds
        self.width = (self.b.xmax - self.b.xmin) * SCALE + 2 * MARGIN
        self.height = (self.b.ymax - self.b.ymin) * SCALE + 2 * MARGIN

    def x(self, wx: float) -> str:
        return _fmt((wx - self.b.xmin) * SCALE + MARGIN)

    def y(self, wy: float) -> str:
        return _fmt((self.b.ymax - wy) * SCALE + MARGIN)

    def points(self, xy: np.ndarray) -> str:
        return " ".join(f"{self.x(px)},{self.y(py)}" for px, py in xy)


def render_svg(scenario: Scenario, paths: Mapping[str, np.ndarray]) -> str:
    """Scene as an SVG string: bounds, obstacles, named paths with a legend."""
    f = _Frame(scenario)
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_fmt(f.width)}" '
        f'height="{_fmt(f.height)}" viewBox="0 0 {_fmt(f.width)} {_fmt(f.height)}">',
        f'<rect x="0" y="0" width="{_fmt(f.width)}" height="{_fmt(f.height)}" fill="#ffffff"/>',
        f'<rect x="{f.x(scenario.bounds.xmin)}" y="{f.y(scenario.bounds.ymax)}" '
        f'width="{_fmt((scenario.bounds.xmax - scenario.bounds.xmin) * SCALE)}" '
        f'height="{_fmt((scenario.bounds.ymax - scenario.bounds.ymin) * SCALE)}" '
        'fill="none" stroke="#404040" stroke-width="2"/>',
    ]

    dynamic = [o for o in scenario.obstacles if o.is_dynamic]
    if dynamic:
        times = np.linspace(0.0, TRACK_HORIZON, 97)
        tracks = obstacle_positions(scenario, times)
        for j, o in enumerate(scenario.obstacles):
            if not o.is_dynamic:
                continue
            out.append(
                f'<polyline points="{f.points(tracks[:, j, :])}" fill="none" '
                'stroke="#9e9e9e" stroke-width="1.5" stroke-dasharray="5,5"/>')
    for o in scenario.obstacles:
        out.append(
            f'<circle cx="{f.x(o.position.x)}" cy="{f.y(o.position.y)}" '
            f'r="{_fmt(o.radius * SCALE)}" fill="#b0b0b0" stroke="#606060" '
            'stroke-width="1.5"/>')

    out.append(
        f'<circle cx="{f.x(scenario.start.x)}" cy="{f.y(scenario.start.y)}" '
        'r="6" fill="#2ca02c" stroke="none"/>')
    out.append(
        f'<circle cx="{f.x(scenario.goal.x)}" cy="{f.y(scenario.goal.y)}" '
        'r="6" fill="none" stroke="#d62728" stroke-width="2.5"/>')

    for i, (name, pts) in enumerate(paths.items()):
        pts = np.asarray(pts, dtype=float)
        color = PALETTE[i % len(PALETTE)]
        dash = DASHES[i % len(DASHES)]
        dash_attr = "" if dash == "none" else f' stroke-dasharray="{dash}"'
        out.append(
            f'<polyline points="{f.points(pts)}" fill="none" stroke="{color}" '
            f'stroke-width="2.5"{dash_attr}/>')

    for i, name in enumerate(paths):
        color = PALETTE[i % len(PALETTE)]
        dash = DASHES[i % len(DASHES)]
        dash_attr = "" if dash == "none" else f' stroke-dasharray="{dash}"'
        ly = MARGIN / 2.0 + 16.0 * i
        out.append(
            f'<line x1="{_fmt(MARGIN)}" y1="{_fmt(ly)}" x2="{_fmt(MARGIN + 30.0)}" '
            f'y2="{_fmt(ly)}" stroke="{color}" stroke-width="2.5"{dash_attr}/>')
        out.append(
            f'<text x="{_fmt(MARGIN + 38.0)}" y="{_fmt(ly + 4.0)}" '
            f'font-family="sans-serif" font-size="13">{name}</text>')

    out.append("</svg>")
    return "\n".join(out) + "\n"


def export_svg(scenario: Scenario, paths: Mapping[str, np.ndarray],
               path: str | Path) -> None:
    """Write the scene to disk; byte-identical for identical inputs."""
    Path(path).write_text(render_svg(scenario, paths), encoding="utf-8")
