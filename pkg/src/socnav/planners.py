"""Planning heads built on trained models.

The global head queries a whole trajectory at once, conditioned on the two
things known before execution: the start at phase 0 and the goal at phase 1.
The local head turns relative goal/obstacle offsets into a velocity command
every control step, conditioned on a fixed context stored with the model.
A plain feed-forward regressor on (phase, task parameters) serves as the
comparison baseline.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .cnp import CHECKPOINT_VERSION, CnpModel, TrainConfig, predict_batch
from .data import (
    ContextPoint,
    Dataset,
    GLOBAL_LAYOUT,
    LOCAL_LAYOUT,
    NormStats,
    demo_arrays,
    un_zscore,
    zscore,
)
from .errors import DimensionMismatchError, VersionMismatchError
from .mlp import Adam, Mlp
from .sim import (
    Demonstration,
    Obstacle,
    Scenario,
    SfmParams,
    Vec2,
    global_task_vector,
    relative_obstacle,
    simulate,
)

# Points sampled per step when fitting the baseline; comparable to the
# target-set sizes the conditional model trains on.
FFNN_BATCH_POINTS = 30
FFNN_WEIGHT_LAYERS = 5


@dataclass
class GlobalPlan:
    """A queried whole trajectory with per-point uncertainty."""

    phases: np.ndarray
    points: np.ndarray
    stds: np.ndarray
    gamma: np.ndarray
    context: list[ContextPoint]

    def __len__(self) -> int:
        return len(self.points)

    def path_length(self) -> float:
        return float(np.linalg.norm(np.diff(self.points, axis=0), axis=1).sum())


def endpoint_context(scenario: Scenario) -> list[ContextPoint]:
    """The two observations known before execution: start and goal."""
    gamma = global_task_vector(scenario)
    return [
        ContextPoint(np.array([0.0]), gamma, np.array([scenario.start.x, scenario.start.y])),
        ContextPoint(np.array([1.0]), gamma, np.array([scenario.goal.x, scenario.goal.y])),
    ]


def plan_global(model: CnpModel, scenario: Scenario, n_points: int = 200) -> GlobalPlan:
    """Query an entire start-to-goal trajectory on an even phase grid."""
    if model.layout.mode != "global":
        raise DimensionMismatchError(
            f"plan_global needs a global-layout model, got {model.layout.mode!r}")
    if n_points < 2:
        raise ValueError("n_points must be >= 2")
    gamma = global_task_vector(scenario)
    context = endpoint_context(scenario)
    phases = np.linspace(0.0, 1.0, n_points)
    means, stds = predict_batch(model, context, phases[:, None],
                                np.tile(gamma, (n_points, 1)))
    return GlobalPlan(phases=phases, points=means, stds=stds, gamma=gamma,
                      context=context)


def local_step(model: CnpModel, robot_pos: Vec2, goal: Vec2,
               obstacles: Sequence[Obstacle], context: Sequence[ContextPoint],
               v_max: float = SfmParams().v_max) -> Vec2:
    """One reactive velocity command, clamped to the speed limit."""
    if model.layout.mode != "local":
        raise DimensionMismatchError(
            f"local_step needs a local-layout model, got {model.layout.mode!r}")
    obstacle_xy = np.array([[o.position.x, o.position.y] for o in obstacles],
                           dtype=float).reshape(-1, 2)
    gx, gy = goal.x - robot_pos.x, goal.y - robot_pos.y
    rel = relative_obstacle(robot_pos.x, robot_pos.y, goal.x, goal.y, obstacle_xy)
    means, _ = predict_batch(model, context, np.array([[gx, gy]]),
                             np.array([rel]))
    vx, vy = float(means[0, 0]), float(means[0, 1])
    speed = math.hypot(vx, vy)
    if speed > v_max:
        vx, vy = vx * v_max / speed, vy * v_max / speed
    return Vec2(vx, vy)


def local_context(dataset: Dataset, k: int = 5, seed: int = 0) -> list[ContextPoint]:
    """Fixed conditioning set for the reactive head, drawn from training data."""
    if not dataset.demos:
        raise ValueError("cannot draw a context from an empty dataset")
    rng = np.random.default_rng(seed)
    points = []
    for _ in range(k):
        demo = dataset.demos[int(rng.integers(len(dataset.demos)))]
        x, g, y = demo_arrays(demo, LOCAL_LAYOUT)
        j = int(rng.integers(len(x)))
        points.append(ContextPoint(x[j], g[j], y[j]))
    return points


def run_local(model: CnpModel, scenario: Scenario, params: SfmParams,
              context: Sequence[ContextPoint] | None = None) -> Demonstration:
    """Closed-loop run with the reactive head in place of the oracle controller."""
    if model.layout.mode != "local":
        raise DimensionMismatchError(
            f"run_local needs a local-layout model, got {model.layout.mode!r}")
    ctx = list(context) if context is not None else model.context
    if not ctx:
        raise ValueError("run_local needs a conditioning set (model.context is empty)")
    stats = model.norm_stats
    c_norm = np.concatenate([
        zscore(np.array([p.x for p in ctx]), stats.x_mean, stats.x_std),
        zscore(np.array([p.gamma for p in ctx]), stats.g_mean, stats.g_std),
        zscore(np.array([p.y for p in ctx]), stats.y_mean, stats.y_std),
    ], axis=1)
    gx, gy = scenario.goal.x, scenario.goal.y

    from .cnp import _forward_normalized  # local import to keep the hot loop lean

    def controller(px, py, vx, vy, t, obstacles_xyr):
        obstacle_xy = np.array([[o[0], o[1]] for o in obstacles_xyr],
                               dtype=float).reshape(-1, 2)
        rel = relative_obstacle(px, py, gx, gy, obstacle_xy)
        q = np.concatenate([
            zscore(np.array([[gx - px, gy - py]]), stats.x_mean, stats.x_std),
            zscore(np.array([rel]), stats.g_mean, stats.g_std),
        ], axis=1)
        mean_n, _ = _forward_normalized(model, c_norm, q)
        mean = un_zscore(mean_n, stats.y_mean, stats.y_std)
        return float(mean[0, 0]), float(mean[0, 1])

    return simulate(scenario, params, controller)


# ---------------------------------------------------------------------------
# feed-forward baseline
# ---------------------------------------------------------------------------

@dataclass
class FfnnModel:
    """Plain (phase, task parameters) -> position regressor, 5 weight layers."""

    net: Mlp
    norm_stats: NormStats

    def __post_init__(self):
        if self.net.n_layers != FFNN_WEIGHT_LAYERS:
            raise ValueError(
                f"baseline must have {FFNN_WEIGHT_LAYERS} weight layers, "
                f"got {self.net.n_layers}")


def train_ffnn(dataset: Dataset, config: TrainConfig = TrainConfig()
               ) -> tuple[FfnnModel, np.ndarray]:
    """Fit the baseline on the same data, same normalization, MSE loss."""
    if not dataset.demos:
        raise ValueError("cannot train on an empty dataset")
    if dataset.norm_stats is None:
        raise ValueError("dataset is not normalized; call data.normalize() first")
    stats = dataset.norm_stats["global"]

    q_all, y_all = [], []
    for demo in dataset.demos:
        x, g, y = demo_arrays(demo, GLOBAL_LAYOUT)
        q_all.append(np.concatenate([
            zscore(x, stats.x_mean, stats.x_std),
            zscore(g, stats.g_mean, stats.g_std),
        ], axis=1))
        y_all.append(zscore(y, stats.y_mean, stats.y_std))

    rng = np.random.default_rng(config.seed)
    in_dim = GLOBAL_LAYOUT.x_dim + GLOBAL_LAYOUT.gamma_dim
    hidden = config.hidden[0] if config.hidden else 128
    dims = [in_dim] + [hidden] * (FFNN_WEIGHT_LAYERS - 1) + [GLOBAL_LAYOUT.y_dim]
    net = Mlp.create(dims, rng)
    opt = Adam(net.params(), lr=config.learning_rate, beta1=config.beta1,
               beta2=config.beta2, eps=config.eps)

    n_demos = len(dataset.demos)
    losses = np.empty(config.steps, dtype=float)
    for step_i in range(config.steps):
        i = int(rng.integers(n_demos))
        n_pts = len(y_all[i])
        idx = rng.choice(n_pts, size=min(FFNN_BATCH_POINTS, n_pts), replace=False)
        q = q_all[i][idx]
        y = y_all[i][idx]
        out, acts = net.forward(q)
        resid = out - y
        loss = float(np.mean(resid ** 2))
        d_out = 2.0 * resid / resid.size
        _, grads = net.backward(acts, d_out)
        opt.lr = config.lr_at(step_i)
        opt.update(grads)
        losses[step_i] = loss

    return FfnnModel(net=net, norm_stats=stats), losses


def plan_ffnn(model: FfnnModel, scenario: Scenario, n_points: int = 200) -> GlobalPlan:
    """Query the baseline on the same phase grid; no conditioning mechanism."""
    if n_points < 2:
        raise ValueError("n_points must be >= 2")
    gamma = global_task_vector(scenario)
    phases = np.linspace(0.0, 1.0, n_points)
    stats = model.norm_stats
    q = np.concatenate([
        zscore(phases[:, None], stats.x_mean, stats.x_std),
        zscore(np.tile(gamma, (n_points, 1)), stats.g_mean, stats.g_std),
    ], axis=1)
    out, _ = model.net.forward(q)
    points = un_zscore(out, stats.y_mean, stats.y_std)
    return GlobalPlan(phases=phases, points=points, stds=np.zeros_like(points),
                      gamma=gamma, context=[])


def save_ffnn(model: FfnnModel, path: str | Path) -> None:
    payload = {
        "version": CHECKPOINT_VERSION,
        "kind": "ffnn",
        "norm_stats": model.norm_stats.to_dict(),
        "net": model.net.to_dict(),
    }
    Path(path).write_text(json.dumps(payload), encoding="utf-8")


def load_ffnn(path: str | Path) -> FfnnModel:
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise VersionMismatchError(f"{path}: not a model checkpoint ({exc})") from exc
    if not isinstance(payload, dict) or payload.get("version") != CHECKPOINT_VERSION:
        raise VersionMismatchError(f"{path}: unsupported checkpoint version")
    if payload.get("kind") != "ffnn":
        raise VersionMismatchError(
            f"{path}: checkpoint kind {payload.get('kind')!r} is not 'ffnn'")
    return FfnnModel(net=Mlp.from_dict(payload["net"]),
                     norm_stats=NormStats.from_dict(payload["norm_stats"]))
