"""Matplotlib renderings written next to the delimited outputs.

These are presentation artifacts for humans; the byte-stable exchange format
is the SVG exporter in svg.py.
"""

from __future__ import annotations

from pathlib import Path
from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
from matplotlib.patches import Circle

from .cnp import windowed_losses
from .sim import Scenario, obstacle_positions

PATH_COLORS = ("tab:blue", "tab:red", "tab:green", "tab:purple", "tab:orange")
TRACK_HORIZON = 12.0


def _draw_scene(ax, scenario: Scenario, paths: Mapping[str, np.ndarray]) -> None:
    b = scenario.bounds
    ax.add_patch(plt.Rectangle((b.xmin, b.ymin), b.xmax - b.xmin, b.ymax - b.ymin,
                               fill=False, edgecolor="0.3", linewidth=1.2))
    if any(o.is_dynamic for o in scenario.obstacles):
        tracks = obstacle_positions(scenario, np.linspace(0.0, TRACK_HORIZON, 97))
        for j, o in enumerate(scenario.obstacles):
            if o.is_dynamic:
                ax.plot(tracks[:, j, 0], tracks[:, j, 1], ls="--", lw=0.8, color="0.6")
    for o in scenario.obstacles:
        ax.add_patch(Circle((o.position.x, o.position.y), o.radius,
                            facecolor="0.75", edgecolor="0.4"))
    for i, (name, pts) in enumerate(paths.items()):
        pts = np.asarray(pts)
        ax.plot(pts[:, 0], pts[:, 1], lw=1.8, label=name,
                color=PATH_COLORS[i % len(PATH_COLORS)])
    ax.plot(scenario.start.x, scenario.start.y, "o", color="tab:green", ms=7)
    ax.plot(scenario.goal.x, scenario.goal.y, "*", color="tab:red", ms=11)
    ax.set_xlim(b.xmin - 0.5, b.xmax + 0.5)
    ax.set_ylim(b.ymin - 0.5, b.ymax + 0.5)
    ax.set_aspect("equal")


def save_scene_figure(scenario: Scenario, paths: Mapping[str, np.ndarray],
                      out_path: str | Path, title: str | None = None) -> None:
    fig, ax = plt.subplots(figsize=(5.5, 5.5))
    _draw_scene(ax, scenario, paths)
    if paths:
        ax.legend(loc="upper left", fontsize=8)
    if title:
        ax.set_title(title, fontsize=10)
    ax.set_xlabel("x (m)")
    ax.set_ylabel("y (m)")
    fig.tight_layout()
    fig.savefig(out_path, dpi=140)
    plt.close(fig)


def save_panel_figure(scenarios: Sequence[Scenario],
                      named_paths: Sequence[Mapping[str, np.ndarray]],
                      out_path: str | Path, max_panels: int = 6,
                      title: str | None = None) -> None:
    """Grid of scene panels, one scenario per panel."""
    n = min(len(scenarios), max_panels)
    cols = min(n, 3)
    rows = (n + cols - 1) // cols
    fig, axes = plt.subplots(rows, cols, figsize=(4.0 * cols, 4.0 * rows),
                             squeeze=False)
    for k in range(rows * cols):
        ax = axes[k // cols][k % cols]
        if k >= n:
            ax.axis("off")
            continue
        _draw_scene(ax, scenarios[k], named_paths[k])
        ax.tick_params(labelsize=7)
    handles, labels = axes[0][0].get_legend_handles_labels()
    if labels:
        fig.legend(handles, labels, loc="lower center", ncol=len(labels), fontsize=9)
    if title:
        fig.suptitle(title, fontsize=11)
    fig.tight_layout(rect=(0.0, 0.04, 1.0, 0.96 if title else 1.0))
    fig.savefig(out_path, dpi=130)
    plt.close(fig)


def save_loss_figure(losses: np.ndarray, out_path: str | Path,
                     window: int = 100) -> None:
    losses = np.asarray(losses, dtype=float)
    fig, ax = plt.subplots(figsize=(6.0, 3.5))
    ax.plot(losses, lw=0.4, alpha=0.35, color="tab:blue", label="per step")
    ax.plot(windowed_losses(losses, window), lw=1.4, color="tab:blue",
            label=f"trailing mean ({window})")
    ax.set_xlabel("step")
    ax.set_ylabel("loss")
    ax.legend(fontsize=8)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(out_path, dpi=140)
    plt.close(fig)


def save_metrics_figure(report: dict, out_path: str | Path) -> None:
    """Side-by-side bars for the headline metrics of a comparison report."""
    names = ("goal_reach_rate", "collision_free_rate", "mean_min_clearance",
             "mean_path_length_ratio", "ade", "fde")
    cnp_vals = [report["cnp"][n] for n in names]
    nn_vals = [report["baseline"][n] for n in names]
    x = np.arange(len(names))
    fig, ax = plt.subplots(figsize=(7.5, 3.8))
    ax.bar(x - 0.18, cnp_vals, width=0.36, label="CNP", color="tab:blue")
    ax.bar(x + 0.18, nn_vals, width=0.36, label="NN", color="tab:red")
    ax.set_xticks(x)
    ax.set_xticklabels([n.replace("_", "\n") for n in names], fontsize=7)
    ax.legend(fontsize=8)
    ax.grid(axis="y", alpha=0.3)
    fig.tight_layout()
    fig.savefig(out_path, dpi=140)
    plt.close(fig)
