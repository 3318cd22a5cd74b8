"""2D kinematic world with a social-force controller.

The world is deliberately small: an omnidirectional point robot with a
velocity cap, circular obstacles that drift at constant velocity and bounce
off the workspace walls, and a Helbing-style social-force controller that
serves both as the demonstration oracle and as the closed-loop test harness.

Units are SI throughout (meters, seconds).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .errors import CoincidentObstacleError, SamplingExhaustedError

# Desired speed tapers linearly to zero inside this distance of the goal so
# demonstrations end nearly at rest instead of overshooting at cruise speed.
GOAL_SLOWDOWN_RADIUS = 0.5
# Below this speed, a robot inside the goal tolerance counts as stopped.
REST_SPEED = 0.1
# Task-vector slot for the obstacle position when a scene has none.
OBSTACLE_SENTINEL = (-100.0, -100.0)
# Distance of the virtual obstacle used for relative-obstacle features in
# obstacle-free scenes; placed behind the robot so it reads as "nothing ahead"
# without leaving the range seen during training.
FAR_OBSTACLE_DISTANCE = 8.0


@dataclass(frozen=True)
class Vec2:
    """A 2D vector in meters (or m/s when used as a velocity)."""

    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"non-finite vector ({self.x}, {self.y})")

    def __add__(self, other: "Vec2") -> "Vec2":
        return Vec2(self.x + other.x, self.y + other.y)

    def __sub__(self, other: "Vec2") -> "Vec2":
        return Vec2(self.x - other.x, self.y - other.y)

    def scaled(self, k: float) -> "Vec2":
        return Vec2(self.x * k, self.y * k)

    def norm(self) -> float:
        return math.hypot(self.x, self.y)

    def as_tuple(self) -> tuple[float, float]:
        return (self.x, self.y)


@dataclass(frozen=True)
class Bounds:
    """Axis-aligned workspace rectangle."""

    xmin: float
    ymin: float
    xmax: float
    ymax: float

    def __post_init__(self):
        if not (self.xmax > self.xmin and self.ymax > self.ymin):
            raise ValueError(f"degenerate bounds {self.as_tuple()}")

    def contains(self, x: float, y: float) -> bool:
        return self.xmin <= x <= self.xmax and self.ymin <= y <= self.ymax

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.xmin, self.ymin, self.xmax, self.ymax)


@dataclass(frozen=True)
class Obstacle:
    """Circular obstacle, optionally drifting at constant velocity."""

    position: Vec2
    velocity: Vec2 = Vec2(0.0, 0.0)
    radius: float = 0.3

    def __post_init__(self):
        if not self.radius > 0.0:
            raise ValueError(f"obstacle radius must be positive, got {self.radius}")

    @property
    def is_dynamic(self) -> bool:
        return self.velocity.x != 0.0 or self.velocity.y != 0.0


@dataclass(frozen=True)
class Scenario:
    """One navigation task: start, goal, obstacle set, workspace."""

    start: Vec2
    goal: Vec2
    obstacles: tuple[Obstacle, ...] = ()
    bounds: Bounds = Bounds(0.0, 0.0, 10.0, 10.0)


@dataclass(frozen=True)
class RobotState:
    position: Vec2
    velocity: Vec2 = Vec2(0.0, 0.0)


@dataclass(frozen=True)
class SfmParams:
    """Controller and integrator parameters.

    repulsion_gain/repulsion_range shape the exponential obstacle force
    (amplitude in m/s^2 and e-folding distance in m).
    """

    v_des: float = 1.0
    tau_relax: float = 0.5
    repulsion_gain: float = 4.0
    repulsion_range: float = 0.5
    robot_radius: float = 0.2
    v_max: float = 1.5
    dt: float = 0.05
    goal_tol: float = 0.1
    max_steps: int = 600

    def __post_init__(self):
        for name in ("v_des", "tau_relax", "repulsion_gain", "repulsion_range",
                     "robot_radius", "v_max", "dt", "goal_tol"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be strictly positive")
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")
        if self.dt > 0.1:
            raise ValueError("dt must be <= 0.1 s for a stable integration")


@dataclass(frozen=True)
class SamplingConfig:
    """Random-scenario generator settings."""

    bounds: Bounds = Bounds(0.0, 0.0, 10.0, 10.0)
    min_task_distance: float = 3.0
    robot_radius: float = 0.2
    obstacle_count: tuple[int, int] = (1, 3)
    obstacle_radius: tuple[float, float] = (0.2, 0.5)
    p_dynamic: float = 0.3
    obstacle_speed_max: float = 0.5
    max_attempts: int = 1000

    def __post_init__(self):
        if self.obstacle_count[0] < 0 or self.obstacle_count[1] < self.obstacle_count[0]:
            raise ValueError(f"bad obstacle_count range {self.obstacle_count}")
        if not 0.0 <= self.p_dynamic <= 1.0:
            raise ValueError("p_dynamic must be in [0, 1]")
        if self.min_task_distance <= 0.0:
            raise ValueError("min_task_distance must be positive")
        if self.max_attempts < 1:
            raise ValueError("max_attempts must be >= 1")


@dataclass
class Demonstration:
    """One recorded trajectory in task-parameter form.

    states is a (T, 5) float array with columns (phase, px, py, vx, vy);
    phase runs 0..1 over the recorded span and duration is that span in
    seconds (needed to place drifting obstacles at each state's time).
    """

    gamma: np.ndarray
    states: np.ndarray
    reached_goal: bool
    collided: bool
    scenario: Scenario
    duration: float

    def __len__(self) -> int:
        return len(self.states)

    @property
    def positions(self) -> np.ndarray:
        return self.states[:, 1:3]

    @property
    def velocities(self) -> np.ndarray:
        return self.states[:, 3:5]

    @property
    def phases(self) -> np.ndarray:
        return self.states[:, 0]

    @property
    def min_clearance(self) -> float:
        tracks = obstacle_positions(self.scenario, self.phases * self.duration)
        radii = np.array([o.radius for o in self.scenario.obstacles])
        return min_clearance(self.positions, tracks, radii, DEFAULT_ROBOT_RADIUS)


DEFAULT_ROBOT_RADIUS = SfmParams().robot_radius


# ---------------------------------------------------------------------------
# geometry helpers
# ---------------------------------------------------------------------------

def point_segment_distance(px: float, py: float,
                           ax: float, ay: float,
                           bx: float, by: float) -> float:
    """Distance from point p to segment a-b."""
    abx, aby = bx - ax, by - ay
    denom = abx * abx + aby * aby
    if denom == 0.0:
        return math.hypot(px - ax, py - ay)
    t = ((px - ax) * abx + (py - ay) * aby) / denom
    t = min(1.0, max(0.0, t))
    return math.hypot(px - (ax + t * abx), py - (ay + t * aby))


def global_task_vector(scenario: Scenario) -> np.ndarray:
    """Task parameters for whole-trajectory planning.

    (start, goal, obstacle position), where the obstacle slot holds the
    initial position of the obstacle closest to the start-goal segment, or a
    far-out-of-workspace sentinel when the scene has none.
    """
    sx, sy = scenario.start.x, scenario.start.y
    gx, gy = scenario.goal.x, scenario.goal.y
    if scenario.obstacles:
        best = min(
            scenario.obstacles,
            key=lambda o: point_segment_distance(o.position.x, o.position.y, sx, sy, gx, gy),
        )
        ox, oy = best.position.x, best.position.y
    else:
        ox, oy = OBSTACLE_SENTINEL
    return np.array([sx, sy, gx, gy, ox, oy], dtype=float)


def relative_obstacle(px: float, py: float, gx: float, gy: float,
                      obstacle_xy: np.ndarray) -> tuple[float, float]:
    """Offset from the robot to the nearest obstacle center.

    obstacle_xy is a (k, 2) array of centers; with k = 0 a virtual obstacle is
    placed FAR_OBSTACLE_DISTANCE behind the robot (opposite the goal) so the
    feature still reads as "nothing in the way".
    """
    if len(obstacle_xy) == 0:
        dx, dy = gx - px, gy - py
        d = math.hypot(dx, dy)
        if d < 1e-9:
            return (-FAR_OBSTACLE_DISTANCE, 0.0)
        return (-FAR_OBSTACLE_DISTANCE * dx / d, -FAR_OBSTACLE_DISTANCE * dy / d)
    d2 = (obstacle_xy[:, 0] - px) ** 2 + (obstacle_xy[:, 1] - py) ** 2
    k = int(np.argmin(d2))
    return (float(obstacle_xy[k, 0] - px), float(obstacle_xy[k, 1] - py))


def check_scenario(scenario: Scenario, *, robot_radius: float,
                   min_task_distance: float) -> None:
    """Raise ValueError when a scenario violates its invariants."""
    s, g, b = scenario.start, scenario.goal, scenario.bounds
    if (s.x, s.y) == (g.x, g.y):
        raise ValueError("start equals goal")
    if not b.contains(s.x, s.y):
        raise ValueError("start outside bounds")
    if not b.contains(g.x, g.y):
        raise ValueError("goal outside bounds")
    if (g - s).norm() < min_task_distance:
        raise ValueError("start and goal closer than min_task_distance")
    for i, o in enumerate(scenario.obstacles):
        if (o.position - s).norm() <= robot_radius + o.radius:
            raise ValueError(f"obstacle {i} overlaps the start position")


# ---------------------------------------------------------------------------
# controller and integrator
# ---------------------------------------------------------------------------

def _desired_speed(dist_to_goal: float, params: SfmParams) -> float:
    # Hard zero inside the goal tolerance, linear taper within the slowdown
    # radius, cruise speed beyond it.
    if dist_to_goal <= params.goal_tol:
        return 0.0
    return params.v_des * min(1.0, dist_to_goal / GOAL_SLOWDOWN_RADIUS)


def _sfm_accel_xy(px: float, py: float, vx: float, vy: float,
                  gx: float, gy: float,
                  obstacles_xyr: Sequence[tuple[float, float, float]],
                  params: SfmParams) -> tuple[float, float]:
    dx, dy = gx - px, gy - py
    dist = math.hypot(dx, dy)
    v_target = _desired_speed(dist, params)
    if v_target > 0.0:
        ax = (v_target * dx / dist - vx) / params.tau_relax
        ay = (v_target * dy / dist - vy) / params.tau_relax
    else:
        ax = -vx / params.tau_relax
        ay = -vy / params.tau_relax
    for ox, oy, r in obstacles_xyr:
        rx, ry = px - ox, py - oy
        d = math.hypot(rx, ry)
        if d == 0.0:
            raise CoincidentObstacleError(
                f"robot at ({px}, {py}) coincides with obstacle center")
        mag = params.repulsion_gain * math.exp(
            (params.robot_radius + r - d) / params.repulsion_range)
        ax += mag * rx / d
        ay += mag * ry / d
    return ax, ay


def sfm_accel(state: RobotState, goal: Vec2,
              obstacles: Sequence[Obstacle], params: SfmParams) -> Vec2:
    """Social-force acceleration: goal attraction plus exponential repulsion."""
    ax, ay = _sfm_accel_xy(
        state.position.x, state.position.y,
        state.velocity.x, state.velocity.y,
        goal.x, goal.y,
        [(o.position.x, o.position.y, o.radius) for o in obstacles],
        params,
    )
    return Vec2(ax, ay)


def _clamp_norm(vx: float, vy: float, v_max: float) -> tuple[float, float]:
    speed = math.hypot(vx, vy)
    if speed > v_max:
        k = v_max / speed
        return vx * k, vy * k
    return vx, vy


def _reflect(value: float, lo: float, hi: float, vel: float) -> tuple[float, float]:
    # Fold the coordinate back into [lo, hi], flipping velocity on each bounce.
    while value < lo or value > hi:
        if value < lo:
            value = 2.0 * lo - value
        else:
            value = 2.0 * hi - value
        vel = -vel
    return value, vel


def _advance_obstacle(ox: float, oy: float, vx: float, vy: float,
                      bounds: Bounds, dt: float) -> tuple[float, float, float, float]:
    ox, vx = _reflect(ox + vx * dt, bounds.xmin, bounds.xmax, vx)
    oy, vy = _reflect(oy + vy * dt, bounds.ymin, bounds.ymax, vy)
    return ox, oy, vx, vy


def step(state: RobotState, accel: Vec2, obstacles: Sequence[Obstacle],
         params: SfmParams) -> tuple[RobotState, tuple[Obstacle, ...]]:
    """Semi-implicit Euler step; drifting obstacles bounce off the walls.

    The workspace for obstacle reflection is the default bounds; use rollout
    for scenario-specific integration.
    """
    return _step_in_bounds(state, accel, obstacles, params, Bounds(0.0, 0.0, 10.0, 10.0))


def _step_in_bounds(state: RobotState, accel: Vec2, obstacles: Sequence[Obstacle],
                    params: SfmParams, bounds: Bounds) -> tuple[RobotState, tuple[Obstacle, ...]]:
    vx = state.velocity.x + accel.x * params.dt
    vy = state.velocity.y + accel.y * params.dt
    vx, vy = _clamp_norm(vx, vy, params.v_max)
    px = state.position.x + vx * params.dt
    py = state.position.y + vy * params.dt
    moved = []
    for o in obstacles:
        if o.is_dynamic:
            ox, oy, wx, wy = _advance_obstacle(
                o.position.x, o.position.y, o.velocity.x, o.velocity.y, bounds, params.dt)
            moved.append(Obstacle(Vec2(ox, oy), Vec2(wx, wy), o.radius))
        else:
            moved.append(o)
    return RobotState(Vec2(px, py), Vec2(vx, vy)), tuple(moved)


VelocityController = Callable[
    [float, float, float, float, float, list[tuple[float, float, float]]],
    tuple[float, float],
]


def simulate(scenario: Scenario, params: SfmParams,
             controller: VelocityController) -> Demonstration:
    """Closed-loop integration with a velocity controller.

    controller(px, py, vx, vy, t, obstacles_xyr) returns the next velocity,
    which is clamped to v_max and applied kinematically. The run stops once
    the robot is inside the goal tolerance and essentially at rest, or after
    max_steps. Collisions are recorded but do not abort the run.
    """
    gx, gy = scenario.goal.x, scenario.goal.y
    px, py = scenario.start.x, scenario.start.y
    vx = vy = 0.0
    obs = [(o.position.x, o.position.y, o.velocity.x, o.velocity.y, o.radius)
           for o in scenario.obstacles]
    bounds = scenario.bounds
    dt = params.dt

    rows = [(0.0, px, py, vx, vy)]
    clear_min = math.inf
    if obs:
        clear_min = min(math.hypot(px - o[0], py - o[1]) - params.robot_radius - o[4]
                        for o in obs)

    def reached() -> bool:
        return (math.hypot(gx - px, gy - py) <= params.goal_tol
                and math.hypot(vx, vy) <= REST_SPEED)

    reached_goal = reached()
    n_steps = 0
    while not reached_goal and n_steps < params.max_steps:
        obstacles_xyr = [(o[0], o[1], o[4]) for o in obs]
        vx, vy = controller(px, py, vx, vy, n_steps * dt, obstacles_xyr)
        vx, vy = _clamp_norm(vx, vy, params.v_max)
        px += vx * dt
        py += vy * dt
        obs = [_advance_obstacle(o[0], o[1], o[2], o[3], bounds, dt) + (o[4],)
               for o in obs]
        n_steps += 1
        rows.append((n_steps * dt, px, py, vx, vy))
        if obs:
            c = min(math.hypot(px - o[0], py - o[1]) - params.robot_radius - o[4]
                    for o in obs)
            clear_min = min(clear_min, c)
        reached_goal = reached()

    states = np.array(rows, dtype=float)
    duration = n_steps * dt
    if n_steps > 0:
        states[:, 0] /= duration
    return Demonstration(
        gamma=global_task_vector(scenario),
        states=states,
        reached_goal=reached_goal,
        collided=bool(clear_min < 0.0),
        scenario=scenario,
        duration=duration,
    )


def rollout(scenario: Scenario, params: SfmParams) -> Demonstration:
    """Run the social-force controller from start until the goal (or timeout)."""

    def controller(px, py, vx, vy, t, obstacles_xyr):
        ax, ay = _sfm_accel_xy(px, py, vx, vy,
                               scenario.goal.x, scenario.goal.y,
                               obstacles_xyr, params)
        return vx + ax * params.dt, vy + ay * params.dt

    return simulate(scenario, params, controller)


# ---------------------------------------------------------------------------
# obstacle tracks and clearance
# ---------------------------------------------------------------------------

def obstacle_positions(scenario: Scenario, times: np.ndarray) -> np.ndarray:
    """Obstacle centers at the given times, shape (len(times), n_obstacles, 2).

    Constant-velocity drift with elastic wall bounces folds into a closed
    form (billiard unfolding), so positions at arbitrary times match the
    stepped integration exactly.
    """
    times = np.asarray(times, dtype=float)
    n_obs = len(scenario.obstacles)
    out = np.empty((len(times), n_obs, 2), dtype=float)
    b = scenario.bounds
    spans = ((b.xmin, b.xmax), (b.ymin, b.ymax))
    for j, o in enumerate(scenario.obstacles):
        for axis, (p0, v) in enumerate(((o.position.x, o.velocity.x),
                                        (o.position.y, o.velocity.y))):
            lo, hi = spans[axis]
            if v == 0.0:
                out[:, j, axis] = p0
                continue
            length = hi - lo
            u = np.mod((p0 - lo) + v * times, 2.0 * length)
            out[:, j, axis] = lo + np.where(u <= length, u, 2.0 * length - u)
    return out


def min_clearance(positions: np.ndarray, obstacle_tracks: np.ndarray,
                  obstacle_radii: np.ndarray, robot_radius: float) -> float:
    """Minimum over time of center distance minus both radii.

    positions is (T, 2), obstacle_tracks (T, K, 2), obstacle_radii (K,).
    Negative means the robot disk overlapped an obstacle at some step.
    """
    from .errors import LengthMismatchError

    positions = np.asarray(positions, dtype=float)
    obstacle_tracks = np.asarray(obstacle_tracks, dtype=float)
    obstacle_radii = np.asarray(obstacle_radii, dtype=float)
    if obstacle_tracks.ndim != 3 or obstacle_tracks.shape[0] != positions.shape[0]:
        raise LengthMismatchError(
            f"positions has {positions.shape[0]} steps but tracks have "
            f"{obstacle_tracks.shape[0] if obstacle_tracks.ndim == 3 else '?'}")
    if obstacle_tracks.shape[1] != obstacle_radii.shape[0]:
        raise LengthMismatchError(
            f"{obstacle_tracks.shape[1]} obstacle tracks vs {obstacle_radii.shape[0]} radii")
    if obstacle_tracks.shape[1] == 0:
        return math.inf
    d = np.linalg.norm(obstacle_tracks - positions[:, None, :], axis=2)
    return float((d - obstacle_radii[None, :] - robot_radius).min())


# ---------------------------------------------------------------------------
# scenario sampling
# ---------------------------------------------------------------------------

def _draw_start_goal(rng: np.random.Generator, cfg: SamplingConfig) -> tuple[Vec2, Vec2]:
    b = cfg.bounds
    sx = rng.uniform(b.xmin, b.xmax)
    sy = rng.uniform(b.ymin, b.ymax)
    gx = rng.uniform(b.xmin, b.xmax)
    gy = rng.uniform(b.ymin, b.ymax)
    return Vec2(sx, sy), Vec2(gx, gy)


def _draw_obstacle(rng: np.random.Generator, cfg: SamplingConfig) -> Obstacle:
    b = cfg.bounds
    pos = Vec2(rng.uniform(b.xmin, b.xmax), rng.uniform(b.ymin, b.ymax))
    radius = rng.uniform(*cfg.obstacle_radius)
    vel = Vec2(0.0, 0.0)
    if rng.uniform() < cfg.p_dynamic:
        angle = rng.uniform(0.0, 2.0 * math.pi)
        speed = rng.uniform(0.0, cfg.obstacle_speed_max)
        vel = Vec2(speed * math.cos(angle), speed * math.sin(angle))
    return Obstacle(pos, vel, radius)


def sample_scenario(rng: np.random.Generator, cfg: SamplingConfig) -> Scenario:
    """Draw a random valid scenario (rejection sampling over the invariants)."""
    for _ in range(cfg.max_attempts):
        start, goal = _draw_start_goal(rng, cfg)
        n_obs = int(rng.integers(cfg.obstacle_count[0], cfg.obstacle_count[1] + 1))
        obstacles = tuple(_draw_obstacle(rng, cfg) for _ in range(n_obs))
        scenario = Scenario(start, goal, obstacles, cfg.bounds)
        try:
            check_scenario(scenario, robot_radius=cfg.robot_radius,
                           min_task_distance=cfg.min_task_distance)
        except ValueError:
            continue
        return scenario
    raise SamplingExhaustedError(
        f"no valid scenario after {cfg.max_attempts} attempts; "
        "the sampling config is over-constrained")


def sample_eval_scenario(rng: np.random.Generator, cfg: SamplingConfig) -> Scenario:
    """Held-out test scenario: one static obstacle parked near the transit line.

    The obstacle center sits within one meter laterally of a point on the
    middle stretch of the start-goal segment, which is where avoidance
    behavior actually gets exercised.
    """
    for _ in range(cfg.max_attempts):
        start, goal = _draw_start_goal(rng, cfg)
        u = rng.uniform(0.3, 0.7)
        lateral = rng.uniform(-1.0, 1.0)
        radius = rng.uniform(*cfg.obstacle_radius)
        dx, dy = goal.x - start.x, goal.y - start.y
        seg = math.hypot(dx, dy)
        if seg < cfg.min_task_distance:
            continue
        nx, ny = -dy / seg, dx / seg
        ox = start.x + u * dx + lateral * nx
        oy = start.y + u * dy + lateral * ny
        if not cfg.bounds.contains(ox, oy):
            continue
        scenario = Scenario(start, goal, (Obstacle(Vec2(ox, oy), Vec2(0.0, 0.0), radius),),
                            cfg.bounds)
        try:
            check_scenario(scenario, robot_radius=cfg.robot_radius,
                           min_task_distance=cfg.min_task_distance)
        except ValueError:
            continue
        return scenario
    raise SamplingExhaustedError(
        f"no valid eval scenario after {cfg.max_attempts} attempts")


def sample_midline_scenario(rng: np.random.Generator, cfg: SamplingConfig) -> Scenario:
    """Scenario with one static obstacle exactly at the start-goal midpoint."""
    for _ in range(cfg.max_attempts):
        start, goal = _draw_start_goal(rng, cfg)
        radius = rng.uniform(*cfg.obstacle_radius)
        mid = Vec2(0.5 * (start.x + goal.x), 0.5 * (start.y + goal.y))
        scenario = Scenario(start, goal, (Obstacle(mid, Vec2(0.0, 0.0), radius),),
                            cfg.bounds)
        try:
            check_scenario(scenario, robot_radius=cfg.robot_radius,
                           min_task_distance=cfg.min_task_distance)
        except ValueError:
            continue
        return scenario
    raise SamplingExhaustedError(
        f"no valid midline scenario after {cfg.max_attempts} attempts")


# ---------------------------------------------------------------------------
# canned scenarios used by the closed-loop demos
# ---------------------------------------------------------------------------

def crossing_scenario() -> Scenario:
    """A vertically drifting obstacle cuts across a horizontal transit."""
    return Scenario(
        start=Vec2(1.0, 5.0),
        goal=Vec2(9.0, 5.0),
        obstacles=(Obstacle(Vec2(5.0, 2.8), Vec2(0.0, 0.45), 0.3),),
        bounds=Bounds(0.0, 0.0, 10.0, 10.0),
    )


def stationary_field_scenario() -> Scenario:
    """Several parked obstacles the robot has to thread between."""
    return Scenario(
        start=Vec2(1.0, 5.0),
        goal=Vec2(9.0, 5.0),
        obstacles=(
            Obstacle(Vec2(3.2, 4.5), Vec2(0.0, 0.0), 0.35),
            Obstacle(Vec2(5.0, 5.6), Vec2(0.0, 0.0), 0.35),
            Obstacle(Vec2(6.8, 4.4), Vec2(0.0, 0.0), 0.35),
        ),
        bounds=Bounds(0.0, 0.0, 10.0, 10.0),
    )


# ---------------------------------------------------------------------------
# scenario (de)serialization
# ---------------------------------------------------------------------------

def scenario_to_dict(scenario: Scenario) -> dict:
    return {
        "start": [scenario.start.x, scenario.start.y],
        "goal": [scenario.goal.x, scenario.goal.y],
        "obstacles": [
            {
                "pos": [o.position.x, o.position.y],
                "vel": [o.velocity.x, o.velocity.y],
                "radius": o.radius,
            }
            for o in scenario.obstacles
        ],
        "bounds": list(scenario.bounds.as_tuple()),
    }


def scenario_from_dict(d: dict) -> Scenario:
    return Scenario(
        start=Vec2(*map(float, d["start"])),
        goal=Vec2(*map(float, d["goal"])),
        obstacles=tuple(
            Obstacle(Vec2(*map(float, o["pos"])), Vec2(*map(float, o["vel"])),
                     float(o["radius"]))
            for o in d["obstacles"]
        ),
        bounds=Bounds(*map(float, d["bounds"])),
    )
