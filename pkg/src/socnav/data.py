"""Demonstration datasets in (input, task-parameter, target) form.

Two point layouts are derived from the same demonstrations:

* global: x = phase in [0, 1], gamma = (start, goal, obstacle), y = position
* local:  x = goal - position, gamma = nearest obstacle - position, y = velocity

Datasets persist as JSON Lines, one demonstration per line.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import InsufficientPointsError, MalformedRecordError
from .sim import (
    Demonstration,
    SamplingConfig,
    Scenario,
    SfmParams,
    obstacle_positions,
    relative_obstacle,
    rollout,
    sample_scenario,
    scenario_from_dict,
    scenario_to_dict,
)

# Demonstrations are resampled onto this many evenly spaced phase points so
# every trajectory presents the same query grid during training.
RESAMPLE_LENGTH = 200


@dataclass(frozen=True)
class Layout:
    """Channel dimensions of one point layout."""

    mode: str
    x_dim: int
    gamma_dim: int
    y_dim: int


GLOBAL_LAYOUT = Layout("global", 1, 6, 2)
LOCAL_LAYOUT = Layout("local", 2, 2, 2)
LAYOUTS = {layout.mode: layout for layout in (GLOBAL_LAYOUT, LOCAL_LAYOUT)}


@dataclass(frozen=True)
class ContextPoint:
    """One observed (input, task parameters, target) triple."""

    x: np.ndarray
    gamma: np.ndarray
    y: np.ndarray


@dataclass
class NormStats:
    """Per-dimension z-score statistics for the x, gamma and y channels."""

    x_mean: np.ndarray
    x_std: np.ndarray
    g_mean: np.ndarray
    g_std: np.ndarray
    y_mean: np.ndarray
    y_std: np.ndarray

    def to_dict(self) -> dict:
        return {
            "x": {"mean": self.x_mean.tolist(), "std": self.x_std.tolist()},
            "gamma": {"mean": self.g_mean.tolist(), "std": self.g_std.tolist()},
            "y": {"mean": self.y_mean.tolist(), "std": self.y_std.tolist()},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "NormStats":
        def pair(key):
            return (np.asarray(d[key]["mean"], dtype=float),
                    np.asarray(d[key]["std"], dtype=float))

        xm, xs = pair("x")
        gm, gs = pair("gamma")
        ym, ys = pair("y")
        return cls(xm, xs, gm, gs, ym, ys)

    def __eq__(self, other) -> bool:
        if not isinstance(other, NormStats):
            return NotImplemented
        return all(
            np.array_equal(getattr(self, name), getattr(other, name))
            for name in ("x_mean", "x_std", "g_mean", "g_std", "y_mean", "y_std")
        )


def zscore(values: np.ndarray, mean: np.ndarray, std: np.ndarray) -> np.ndarray:
    """Apply the per-dimension z-score transform."""
    return (np.asarray(values, dtype=float) - mean) / std


def un_zscore(values: np.ndarray, mean: np.ndarray, std: np.ndarray) -> np.ndarray:
    """Invert the per-dimension z-score transform."""
    return np.asarray(values, dtype=float) * std + mean


@dataclass
class GenStats:
    """Diagnostics from dataset generation."""

    attempts: int
    kept: int
    reached: int
    collision_free: int
    obstacle_histogram: dict[int, int]

    @property
    def reach_rate(self) -> float:
        return self.reached / self.attempts if self.attempts else 0.0


@dataclass
class Dataset:
    """A set of demonstrations plus (optional) normalization statistics."""

    demos: list[Demonstration]
    norm_stats: dict[str, NormStats] | None = None
    gen_stats: GenStats | None = None

    def __len__(self) -> int:
        return len(self.demos)


# ---------------------------------------------------------------------------
# generation
# ---------------------------------------------------------------------------

def resample_demo(demo: Demonstration, n_points: int = RESAMPLE_LENGTH) -> Demonstration:
    """Linearly interpolate a demonstration onto an even phase grid."""
    if len(demo) < 2:
        return demo
    grid = np.linspace(0.0, 1.0, n_points)
    states = np.empty((n_points, 5), dtype=float)
    states[:, 0] = grid
    for col in range(1, 5):
        states[:, col] = np.interp(grid, demo.states[:, 0], demo.states[:, col])
    return Demonstration(
        gamma=demo.gamma,
        states=states,
        reached_goal=demo.reached_goal,
        collided=demo.collided,
        scenario=demo.scenario,
        duration=demo.duration,
    )


def generate_dataset(n: int, params: SfmParams, sampling: SamplingConfig,
                     seed: int, resample_length: int = RESAMPLE_LENGTH,
                     scenario_sampler=sample_scenario) -> Dataset:
    """Roll out n clean demonstrations from randomly sampled scenarios.

    Runs that collide or fail to reach the goal are regenerated, so the
    returned dataset holds exactly n demonstrations that did neither. Each
    attempt uses its own seed stream derived from (seed, attempt index), so
    results are reproducible and attempts could run in parallel.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    demos: list[Demonstration] = []
    attempts = reached = collision_free = 0
    histogram: dict[int, int] = {}
    while len(demos) < n:
        rng = np.random.default_rng([seed, attempts])
        scenario = scenario_sampler(rng, sampling)
        demo = rollout(scenario, params)
        attempts += 1
        reached += int(demo.reached_goal)
        collision_free += int(not demo.collided)
        if demo.reached_goal and not demo.collided:
            demos.append(resample_demo(demo, resample_length))
            k = len(scenario.obstacles)
            histogram[k] = histogram.get(k, 0) + 1
    stats = GenStats(attempts, len(demos), reached, collision_free,
                     dict(sorted(histogram.items())))
    return Dataset(demos=demos, gen_stats=stats)


# ---------------------------------------------------------------------------
# point extraction
# ---------------------------------------------------------------------------

def demo_arrays(demo: Demonstration, layout: Layout) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(X, gamma, Y) arrays for one demonstration under the given layout."""
    if layout.mode == "global":
        x = demo.states[:, 0:1].copy()
        g = np.tile(demo.gamma, (len(demo), 1))
        y = demo.positions.copy()
        return x, g, y
    if layout.mode == "local":
        goal = demo.scenario.goal
        pos = demo.positions
        x = np.stack([goal.x - pos[:, 0], goal.y - pos[:, 1]], axis=1)
        tracks = obstacle_positions(demo.scenario, demo.phases * demo.duration)
        g = np.empty((len(demo), 2), dtype=float)
        for k in range(len(demo)):
            g[k] = relative_obstacle(pos[k, 0], pos[k, 1], goal.x, goal.y, tracks[k])
        y = demo.velocities.copy()
        return x, g, y
    raise ValueError(f"unknown layout {layout.mode!r}")


def _wrap_points(x: np.ndarray, g: np.ndarray, y: np.ndarray) -> list[ContextPoint]:
    return [ContextPoint(x[k], g[k], y[k]) for k in range(len(x))]


def to_global_points(demo: Demonstration) -> list[ContextPoint]:
    """Whole-trajectory points: phase -> position, shared task vector."""
    return _wrap_points(*demo_arrays(demo, GLOBAL_LAYOUT))


def to_local_points(demo: Demonstration) -> list[ContextPoint]:
    """Reactive points: relative goal/obstacle offsets -> velocity.

    The nearest obstacle is evaluated at each state's simulation time, so
    drifting obstacles contribute their actual position at that moment.
    """
    return _wrap_points(*demo_arrays(demo, LOCAL_LAYOUT))


# ---------------------------------------------------------------------------
# normalization
# ---------------------------------------------------------------------------

def _channel_stats(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    mean = values.mean(axis=0)
    std = values.std(axis=0)
    std = np.where(std < 1e-12, 1.0, std)
    return mean, std


def compute_norm_stats(dataset: Dataset, layout: Layout) -> NormStats:
    xs, gs, ys = [], [], []
    for demo in dataset.demos:
        x, g, y = demo_arrays(demo, layout)
        xs.append(x)
        gs.append(g)
        ys.append(y)
    xm, xs_ = _channel_stats(np.concatenate(xs))
    gm, gs_ = _channel_stats(np.concatenate(gs))
    ym, ys_ = _channel_stats(np.concatenate(ys))
    return NormStats(xm, xs_, gm, gs_, ym, ys_)


def normalize(dataset: Dataset) -> Dataset:
    """Populate z-score statistics for both layouts from this dataset.

    Call this on the training split only; models copy the statistics and
    reuse them at test time.
    """
    if not dataset.demos:
        raise ValueError("cannot normalize an empty dataset")
    dataset.norm_stats = {
        mode: compute_norm_stats(dataset, layout) for mode, layout in LAYOUTS.items()
    }
    return dataset


# ---------------------------------------------------------------------------
# context/target sampling
# ---------------------------------------------------------------------------

def sample_context_indices(rng: np.random.Generator, n_points: int,
                           n_min: int, n_max: int, m_extra: int) -> tuple[np.ndarray, np.ndarray]:
    """Index form of sample_context; targets always contain the context."""
    if n_min < 1 or n_max < n_min or m_extra < 1:
        raise ValueError("need 1 <= n_min <= n_max and m_extra >= 1")
    if n_points < n_max + 1:
        raise InsufficientPointsError(
            f"{n_points} points cannot serve n_max={n_max} plus an extra target")
    n = int(rng.integers(n_min, n_max + 1))
    m = min(int(rng.integers(1, m_extra + 1)), n_points - n)
    idx = rng.choice(n_points, size=n + m, replace=False)
    return idx[:n], idx


def sample_context(points: Sequence[ContextPoint], rng: np.random.Generator,
                   n_min: int = 1, n_max: int = 10,
                   m_extra: int = 20) -> tuple[list[ContextPoint], list[ContextPoint]]:
    """Draw a small random context and a superset of target points."""
    ctx_idx, tgt_idx = sample_context_indices(rng, len(points), n_min, n_max, m_extra)
    return [points[i] for i in ctx_idx], [points[i] for i in tgt_idx]


# ---------------------------------------------------------------------------
# persistence and splitting
# ---------------------------------------------------------------------------

def _demo_to_record(demo: Demonstration) -> dict:
    return {
        "gamma": demo.gamma.tolist(),
        "states": demo.states.tolist(),
        "reached_goal": bool(demo.reached_goal),
        "collided": bool(demo.collided),
        "scenario": scenario_to_dict(demo.scenario),
        "duration": demo.duration,
    }


def _demo_from_record(record: dict) -> Demonstration:
    states = np.asarray(record["states"], dtype=float)
    if states.ndim != 2 or states.shape[1] != 5:
        raise ValueError(f"states must be (T, 5), got shape {states.shape}")
    return Demonstration(
        gamma=np.asarray(record["gamma"], dtype=float),
        states=states,
        reached_goal=bool(record["reached_goal"]),
        collided=bool(record["collided"]),
        scenario=scenario_from_dict(record["scenario"]),
        duration=float(record["duration"]),
    )


def save(dataset: Dataset, path: str | Path) -> None:
    """Write one JSON record per demonstration."""
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for demo in dataset.demos:
            fh.write(json.dumps(_demo_to_record(demo)) + "\n")


def load(path: str | Path) -> Dataset:
    """Read a JSONL dataset; reports the line number of any malformed record."""
    path = Path(path)
    demos = []
    with path.open("r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
                demos.append(_demo_from_record(record))
            except (json.JSONDecodeError, KeyError, ValueError, TypeError) as exc:
                raise MalformedRecordError(str(path), line_no, str(exc)) from exc
    return Dataset(demos=demos)


def split(dataset: Dataset, ratio: float, seed: int) -> tuple[Dataset, Dataset]:
    """Disjoint train/test partition by demonstration."""
    if not 0.0 < ratio < 1.0:
        raise ValueError("ratio must be in (0, 1)")
    n = len(dataset.demos)
    if n < 2:
        raise ValueError("need at least two demonstrations to split")
    order = np.random.default_rng(seed).permutation(n)
    n_train = min(max(int(round(ratio * n)), 1), n - 1)
    train = Dataset(demos=[dataset.demos[i] for i in order[:n_train]])
    test = Dataset(demos=[dataset.demos[i] for i in order[n_train:]])
    return train, test
