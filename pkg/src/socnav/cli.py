"""Command-line entry point.

Subcommands wire data generation, training, planning, closed-loop runs and
evaluation into reproducible runs. Exit codes: 2 config/usage error,
3 sampling exhaustion, 4 data/layout error, 5 scenario-set mismatch.

Outputs are write-once; pass --force to overwrite.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import cnp, data, planners
from .config import RunConfig, config_digest, load_run_config
from .errors import (
    ConfigError,
    DimensionMismatchError,
    MalformedRecordError,
    SamplingExhaustedError,
    ScenarioSetMismatchError,
    SocnavError,
    VersionMismatchError,
)
from .evaluation import compare, evaluate_global, scenario_set_digest
from .sim import Scenario, rollout, sample_eval_scenario, scenario_from_dict
from .svg import export_svg

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SAMPLING = 3
EXIT_DATA = 4
EXIT_SCENARIO_SET = 5

LOSS_WINDOW = 100


def _prepare_output(path: str | Path, force: bool) -> Path:
    path = Path(path)
    if path.exists() and not force:
        raise ConfigError(f"refusing to overwrite {path} (use --force)")
    if path.parent and not path.parent.exists():
        path.parent.mkdir(parents=True, exist_ok=True)
    return path


def _load_dataset(path: str) -> data.Dataset:
    p = Path(path)
    if not p.exists():
        raise MalformedRecordError(str(p), 0, "dataset file not found")
    dataset = data.load(p)
    if not dataset.demos:
        raise MalformedRecordError(str(p), 0, "dataset is empty")
    return dataset


def _load_scenario(path: str) -> Scenario:
    p = Path(path)
    if not p.exists():
        raise MalformedRecordError(str(p), 0, "scenario file not found")
    try:
        return scenario_from_dict(json.loads(p.read_text(encoding="utf-8")))
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise MalformedRecordError(str(p), 1, f"bad scenario: {exc}") from exc


def _write_loss_csv(path: Path, losses: np.ndarray) -> None:
    windowed = cnp.windowed_losses(losses, LOSS_WINDOW)
    with path.open("w", encoding="utf-8") as fh:
        fh.write("step,loss,windowed_loss\n")
        for i, (a, b) in enumerate(zip(losses, windowed)):
            fh.write(f"{i},{float(a)!r},{float(b)!r}\n")


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_gen_data(args) -> int:
    cfg = load_run_config(args.config)
    if args.n < 1:
        raise ConfigError("--n must be >= 1")
    out = _prepare_output(args.out, args.force)
    t0 = time.perf_counter()
    dataset = data.generate_dataset(args.n, cfg.sfm, cfg.sampling, args.seed,
                                    resample_length=cfg.resample_length)
    data.save(dataset, out)
    elapsed = time.perf_counter() - t0
    stats = dataset.gen_stats
    print(f"wrote {len(dataset)} demonstrations to {out} ({elapsed:.1f} s)")
    print(f"attempts: {stats.attempts}, reach rate before filtering: "
          f"{stats.reach_rate:.3f}")
    print("obstacle histogram: "
          + ", ".join(f"{k} obs: {v}" for k, v in stats.obstacle_histogram.items()))
    return EXIT_OK


def _train_common(args, baseline: bool) -> int:
    cfg = load_run_config(args.config)
    train_cfg = cfg.train
    if args.steps is not None:
        if args.steps < 1:
            raise ConfigError("--steps must be >= 1")
        from dataclasses import replace

        train_cfg = replace(train_cfg, steps=args.steps)
    out = _prepare_output(args.out, args.force)
    loss_csv = _prepare_output(out.with_name(out.stem + "_loss.csv"), args.force)
    loss_png = out.with_name(out.stem + "_loss.png")

    dataset = _load_dataset(args.data)
    data.normalize(dataset)

    t0 = time.perf_counter()
    if baseline:
        model, losses = planners.train_ffnn(dataset, train_cfg)
        planners.save_ffnn(model, out)
    else:
        layout = data.LAYOUTS[args.mode]
        model, losses = cnp.train(dataset, layout, train_cfg)
        if args.mode == "local":
            model.context = planners.local_context(dataset, seed=train_cfg.seed)
        cnp.save_model(model, out)
    elapsed = time.perf_counter() - t0

    _write_loss_csv(loss_csv, losses)
    from .figures import save_loss_figure

    save_loss_figure(losses, loss_png)
    final = cnp.windowed_losses(losses, LOSS_WINDOW)[-1]
    kind = "baseline" if baseline else args.mode
    print(f"trained {kind} model on {len(dataset)} demos in {elapsed:.1f} s "
          f"({train_cfg.steps} steps)")
    print(f"final windowed loss: {final:.6f}")
    print(f"checkpoint: {out}")
    return EXIT_OK


def cmd_train(args) -> int:
    return _train_common(args, baseline=False)


def cmd_train_baseline(args) -> int:
    return _train_common(args, baseline=True)


def cmd_plan(args) -> int:
    cfg = load_run_config(args.config)
    model = cnp.load_model(args.model)
    if model.layout.mode != "global":
        raise DimensionMismatchError(
            f"plan needs a global-layout model, got {model.layout.mode!r}")
    scenario = _load_scenario(args.scenario)
    out_csv = _prepare_output(args.out_csv, args.force)
    out_svg = _prepare_output(args.out_svg, args.force)

    plan = planners.plan_global(model, scenario, args.points)
    with out_csv.open("w", encoding="utf-8") as fh:
        fh.write("phase,x,y,std_x,std_y\n")
        for ph, (x, y), (sx, sy) in zip(plan.phases, plan.points, plan.stds):
            fh.write(f"{float(ph)!r},{float(x)!r},{float(y)!r},"
                     f"{float(sx)!r},{float(sy)!r}\n")
    export_svg(scenario, {"CNP plan": plan.points}, out_svg)
    if args.out_png:
        from .figures import save_scene_figure

        save_scene_figure(scenario, {"CNP plan": plan.points},
                          _prepare_output(args.out_png, args.force))
    print(f"plan: {len(plan)} points, endpoint error "
          f"{float(np.linalg.norm(plan.points[-1] - [scenario.goal.x, scenario.goal.y])):.3f} m")
    print(f"wrote {out_csv} and {out_svg} (config {config_digest(cfg)})")
    return EXIT_OK


def cmd_rollout(args) -> int:
    cfg = load_run_config(args.config)
    model = cnp.load_model(args.model)
    if model.layout.mode != "local":
        raise DimensionMismatchError(
            f"rollout needs a local-layout model, got {model.layout.mode!r}")
    scenario = _load_scenario(args.scenario)
    out_jsonl = _prepare_output(args.out_jsonl, args.force)
    out_svg = _prepare_output(args.out_svg, args.force)

    trace = planners.run_local(model, scenario, cfg.sfm)
    data.save(data.Dataset(demos=[trace]), out_jsonl)
    export_svg(scenario, {"local CNP": trace.positions}, out_svg)
    if args.out_png:
        from .figures import save_scene_figure

        save_scene_figure(scenario, {"local CNP": trace.positions},
                          _prepare_output(args.out_png, args.force))
    print(f"closed-loop run: reached_goal={trace.reached_goal} "
          f"collided={trace.collided} duration={trace.duration:.2f} s")
    print(f"wrote {out_jsonl} and {out_svg} (config {config_digest(cfg)})")
    return EXIT_OK


def _oracle_checked_scenarios(cfg: RunConfig, n: int, seed: int):
    """Held-out scenarios on which the oracle itself succeeds, plus its runs."""
    scenarios, demos = [], []
    attempt = 0
    while len(scenarios) < n:
        rng = np.random.default_rng([seed, attempt])
        attempt += 1
        scenario = sample_eval_scenario(rng, cfg.sampling)
        demo = rollout(scenario, cfg.sfm)
        if demo.reached_goal and not demo.collided:
            scenarios.append(scenario)
            demos.append(data.resample_demo(demo, cfg.resample_length))
    return scenarios, demos


def cmd_eval(args) -> int:
    cfg = load_run_config(args.config)
    if args.n < 1:
        raise ConfigError("--n must be >= 1")
    model = cnp.load_model(args.model)
    if model.layout.mode != "global":
        raise DimensionMismatchError(
            f"eval needs a global-layout model, got {model.layout.mode!r}")
    baseline = planners.load_ffnn(args.baseline)
    report_path = _prepare_output(args.report, args.force)

    scenarios, oracle_demos = _oracle_checked_scenarios(cfg, args.n, args.seed)
    cnp_plans = [planners.plan_global(model, s, cfg.resample_length) for s in scenarios]
    nn_plans = [planners.plan_ffnn(baseline, s, cfg.resample_length) for s in scenarios]

    cnp_metrics = evaluate_global(cnp_plans, scenarios, oracle_demos,
                                  robot_radius=cfg.sfm.robot_radius)
    nn_metrics = evaluate_global(nn_plans, scenarios, oracle_demos,
                                 robot_radius=cfg.sfm.robot_radius)
    report = compare(cnp_metrics, nn_metrics)
    report["config_digest"] = config_digest(cfg, {"n": args.n, "seed": args.seed})
    report_path.write_text(json.dumps(report, indent=2) + "\n", encoding="utf-8")

    from .figures import save_metrics_figure, save_panel_figure

    panels = min(6, len(scenarios))
    save_panel_figure(
        scenarios[:panels],
        [{"CNP": cnp_plans[i].points, "NN": nn_plans[i].points,
          "oracle": oracle_demos[i].positions} for i in range(panels)],
        report_path.with_name(report_path.stem + "_panels.png"))
    save_metrics_figure(report, report_path.with_name(report_path.stem + "_metrics.png"))

    print(f"evaluated {args.n} held-out scenarios (seed {args.seed}, "
          f"digest {scenario_set_digest(scenarios)})")
    print(f"CNP: reach {cnp_metrics.goal_reach_rate:.2f}, "
          f"collision-free {cnp_metrics.collision_free_rate:.2f}, "
          f"ade {cnp_metrics.ade:.3f} m")
    print(f"NN:  reach {nn_metrics.goal_reach_rate:.2f}, "
          f"collision-free {nn_metrics.collision_free_rate:.2f}, "
          f"ade {nn_metrics.ade:.3f} m")
    print(f"report: {report_path}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="socnav",
        description="Demonstration generation, model training, planning and "
                    "evaluation for 2D social navigation.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", default=None, help="INI run configuration")
        p.add_argument("--force", action="store_true",
                       help="overwrite existing outputs")

    p = sub.add_parser("gen-data", help="roll out demonstrations to a JSONL file")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    add_common(p)
    p.set_defaults(func=cmd_gen_data)

    p = sub.add_parser("train", help="train a conditional model")
    p.add_argument("--mode", choices=("global", "local"), required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--steps", type=int, default=None)
    add_common(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("train-baseline", help="train the feed-forward baseline")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--steps", type=int, default=None)
    add_common(p)
    p.set_defaults(func=cmd_train_baseline)

    p = sub.add_parser("plan", help="query a whole trajectory for a scenario")
    p.add_argument("--model", required=True)
    p.add_argument("--scenario", required=True)
    p.add_argument("--points", type=int, default=200)
    p.add_argument("--out-csv", required=True)
    p.add_argument("--out-svg", required=True)
    p.add_argument("--out-png", default=None)
    add_common(p)
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("rollout", help="run the reactive head closed-loop")
    p.add_argument("--model", required=True)
    p.add_argument("--scenario", required=True)
    p.add_argument("--out-jsonl", required=True)
    p.add_argument("--out-svg", required=True)
    p.add_argument("--out-png", default=None)
    add_common(p)
    p.set_defaults(func=cmd_rollout)

    p = sub.add_parser("eval", help="compare the planner against the baseline")
    p.add_argument("--model", required=True)
    p.add_argument("--baseline", required=True)
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--report", required=True)
    add_common(p)
    p.set_defaults(func=cmd_eval)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SamplingExhaustedError as exc:
        print(f"sampling exhausted: {exc}", file=sys.stderr)
        return EXIT_SAMPLING
    except ScenarioSetMismatchError as exc:
        print(f"scenario set mismatch: {exc}", file=sys.stderr)
        return EXIT_SCENARIO_SET
    except (MalformedRecordError, VersionMismatchError, DimensionMismatchError,
            OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except SocnavError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
