"""Closed-loop and plan-level evaluation, baseline comparison, scene export.

Clearance for whole-trajectory plans is measured against obstacle positions
at t = 0 (plans carry no timing); closed-loop traces are checked against the
time-aligned obstacle tracks. Displacement errors compare against the oracle
path after both are resampled onto a common phase grid.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from .data import RESAMPLE_LENGTH
from .errors import LengthMismatchError, ScenarioSetMismatchError
from .planners import GlobalPlan, local_step
from .sim import (
    Demonstration,
    Scenario,
    SfmParams,
    min_clearance,
    obstacle_positions,
    scenario_to_dict,
)

# Plans are regression outputs, not rollouts, so "reached" uses a looser
# threshold than the simulator's goal tolerance.
GLOBAL_REACH_TOL = 0.3


@dataclass
class Metrics:
    """Aggregate evaluation results over a scenario set."""

    goal_reach_rate: float
    collision_free_rate: float
    mean_min_clearance: float
    mean_path_length_ratio: float
    ade: float
    fde: float
    n_scenarios: int
    scenario_digest: str | None = None


def scenario_set_digest(scenarios: Sequence[Scenario]) -> str:
    blob = json.dumps([scenario_to_dict(s) for s in scenarios]).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def _resample_polyline(phases: np.ndarray, points: np.ndarray,
                       grid: np.ndarray) -> np.ndarray:
    out = np.empty((len(grid), points.shape[1]))
    for col in range(points.shape[1]):
        out[:, col] = np.interp(grid, phases, points[:, col])
    return out


def displacement_errors(phases_a: np.ndarray, points_a: np.ndarray,
                        phases_b: np.ndarray, points_b: np.ndarray,
                        grid_size: int = RESAMPLE_LENGTH) -> tuple[float, float]:
    """(average, final) displacement between two paths on a common phase grid."""
    grid = np.linspace(0.0, 1.0, grid_size)
    a = _resample_polyline(phases_a, points_a, grid)
    b = _resample_polyline(phases_b, points_b, grid)
    d = np.linalg.norm(a - b, axis=1)
    return float(d.mean()), float(d[-1])


def _path_length(points: np.ndarray) -> float:
    return float(np.linalg.norm(np.diff(points, axis=0), axis=1).sum())


def plan_min_clearance(plan_points: np.ndarray, scenario: Scenario,
                       robot_radius: float) -> float:
    """Min clearance of a plan polyline against obstacles at their t=0 poses."""
    if not scenario.obstacles:
        return math.inf
    centers = np.array([[o.position.x, o.position.y] for o in scenario.obstacles])
    radii = np.array([o.radius for o in scenario.obstacles])
    d = np.linalg.norm(plan_points[:, None, :] - centers[None, :, :], axis=2)
    return float((d - radii[None, :] - robot_radius).min())


def evaluate_global(plans: Sequence[GlobalPlan], scenarios: Sequence[Scenario],
                    oracle_demos: Sequence[Demonstration],
                    robot_radius: float = SfmParams().robot_radius) -> Metrics:
    """Score whole-trajectory plans against scenes and oracle paths."""
    if not (len(plans) == len(scenarios) == len(oracle_demos)):
        raise LengthMismatchError(
            f"{len(plans)} plans, {len(scenarios)} scenarios, "
            f"{len(oracle_demos)} oracle demos")
    if len(plans) == 0:
        raise ValueError("need at least one scenario")

    reached, clearances, ratios, ades, fdes = [], [], [], [], []
    for plan, scenario, oracle in zip(plans, scenarios, oracle_demos):
        goal = np.array([scenario.goal.x, scenario.goal.y])
        reached.append(float(np.linalg.norm(plan.points[-1] - goal) <= GLOBAL_REACH_TOL))
        clearances.append(plan_min_clearance(plan.points, scenario, robot_radius))
        straight = float(np.linalg.norm(
            goal - np.array([scenario.start.x, scenario.start.y])))
        ratios.append(_path_length(plan.points) / straight)
        ade, fde = displacement_errors(plan.phases, plan.points,
                                       oracle.phases, oracle.positions)
        ades.append(ade)
        fdes.append(fde)

    clearances = np.array(clearances)
    return Metrics(
        goal_reach_rate=float(np.mean(reached)),
        collision_free_rate=float(np.mean(clearances > 0.0)),
        mean_min_clearance=float(np.mean(clearances)),
        mean_path_length_ratio=float(np.mean(ratios)),
        ade=float(np.mean(ades)),
        fde=float(np.mean(fdes)),
        n_scenarios=len(plans),
        scenario_digest=scenario_set_digest(scenarios),
    )


def evaluate_local(traces: Sequence[Demonstration], scenarios: Sequence[Scenario],
                   oracle_demos: Sequence[Demonstration] | None = None,
                   params: SfmParams = SfmParams()) -> Metrics:
    """Score closed-loop traces; collision checks use time-aligned obstacle tracks."""
    if len(traces) != len(scenarios):
        raise LengthMismatchError(f"{len(traces)} traces vs {len(scenarios)} scenarios")
    if oracle_demos is not None and len(oracle_demos) != len(traces):
        raise LengthMismatchError(
            f"{len(oracle_demos)} oracle demos vs {len(traces)} traces")
    if len(traces) == 0:
        raise ValueError("need at least one scenario")

    reached, clearances, ratios, ades, fdes = [], [], [], [], []
    for k, (trace, scenario) in enumerate(zip(traces, scenarios)):
        goal = np.array([scenario.goal.x, scenario.goal.y])
        reached.append(float(np.linalg.norm(trace.positions[-1] - goal) <= params.goal_tol))
        tracks = obstacle_positions(scenario, trace.phases * trace.duration)
        radii = np.array([o.radius for o in scenario.obstacles])
        clearances.append(min_clearance(trace.positions, tracks, radii,
                                        params.robot_radius))
        straight = float(np.linalg.norm(
            goal - np.array([scenario.start.x, scenario.start.y])))
        ratios.append(_path_length(trace.positions) / straight)
        if oracle_demos is not None:
            ade, fde = displacement_errors(trace.phases, trace.positions,
                                           oracle_demos[k].phases,
                                           oracle_demos[k].positions)
            ades.append(ade)
            fdes.append(fde)

    clearances = np.array(clearances)
    return Metrics(
        goal_reach_rate=float(np.mean(reached)),
        collision_free_rate=float(np.mean(clearances > 0.0)),
        mean_min_clearance=float(np.mean(clearances)),
        mean_path_length_ratio=float(np.mean(ratios)),
        ade=float(np.mean(ades)) if ades else 0.0,
        fde=float(np.mean(fdes)) if fdes else 0.0,
        n_scenarios=len(traces),
        scenario_digest=scenario_set_digest(scenarios),
    )


# How much the conditional planner must beat the baseline's collision-free
# rate by (percentage points) for the headline comparison flag.
COMPARISON_MARGIN = 0.15


def compare(cnp: Metrics, baseline: Metrics) -> dict:
    """Per-metric deltas and headline flags for two metric blocks."""
    if cnp.n_scenarios != baseline.n_scenarios:
        raise ScenarioSetMismatchError(
            f"{cnp.n_scenarios} vs {baseline.n_scenarios} scenarios")
    if (cnp.scenario_digest and baseline.scenario_digest
            and cnp.scenario_digest != baseline.scenario_digest):
        raise ScenarioSetMismatchError(
            f"scenario digests differ: {cnp.scenario_digest} vs {baseline.scenario_digest}")
    numeric = ("goal_reach_rate", "collision_free_rate", "mean_min_clearance",
               "mean_path_length_ratio", "ade", "fde")
    deltas = {name: getattr(cnp, name) - getattr(baseline, name) for name in numeric}
    gap = cnp.collision_free_rate - baseline.collision_free_rate
    return {
        "cnp": asdict(cnp),
        "baseline": asdict(baseline),
        "deltas": deltas,
        "flags": {
            "cnp_collision_free_rate_higher": bool(gap > 0.0),
            "cnp_beats_baseline_margin": bool(gap >= COMPARISON_MARGIN),
        },
    }


def passing_side(plan_points: np.ndarray, scenario: Scenario) -> int:
    """Which side of the start-goal line a path passes the first obstacle on.

    +1 is the left of the travel direction, -1 the right, 0 degenerate.
    Judged at the plan point closest to the obstacle center.
    """
    o = scenario.obstacles[0].position
    d = np.linalg.norm(plan_points - np.array([o.x, o.y]), axis=1)
    p = plan_points[int(np.argmin(d))]
    ux, uy = (scenario.goal.x - scenario.start.x, scenario.goal.y - scenario.start.y)
    cross = ux * (p[1] - o.y) - uy * (p[0] - o.x)
    if cross > 0.0:
        return 1
    if cross < 0.0:
        return -1
    return 0


def velocity_field_agreement(model, demos: Sequence[Demonstration],
                             v_max: float = SfmParams().v_max,
                             min_speed: float = 0.05,
                             stride: int = 5) -> float:
    """Median cosine similarity between commanded and demonstrated velocities.

    Sampled along held-out oracle demos (every `stride`-th state); states
    slower than min_speed are skipped since their direction is noise.
    """
    if model.context is None:
        raise ValueError("model has no stored conditioning set")
    cosines = []
    for demo in demos:
        tracks = obstacle_positions(demo.scenario, demo.phases * demo.duration)
        for k in range(0, len(demo), stride):
            v = demo.velocities[k]
            speed = float(np.linalg.norm(v))
            if speed < min_speed:
                continue
            from .sim import Obstacle, Vec2

            obstacles = [
                Obstacle(Vec2(float(tracks[k, j, 0]), float(tracks[k, j, 1])),
                         Vec2(0.0, 0.0), o.radius)
                for j, o in enumerate(demo.scenario.obstacles)
            ]
            cmd = local_step(model, Vec2(*demo.positions[k]), demo.scenario.goal,
                             obstacles, model.context, v_max=v_max)
            cmd_speed = math.hypot(cmd.x, cmd.y)
            if cmd_speed < 1e-9:
                cosines.append(0.0)
                continue
            cosines.append((cmd.x * v[0] + cmd.y * v[1]) / (cmd_speed * speed))
    if not cosines:
        raise ValueError("no states fast enough to compare against")
    return float(np.median(cosines))
