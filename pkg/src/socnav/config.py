"""Run configuration: key=value sections with strict schema checking.

Unknown sections or keys are rejected so a typo never silently falls back to
a default. Every command embeds a digest of the effective configuration in
its outputs for reproducibility.
"""

from __future__ import annotations

import configparser
import hashlib
import json
from dataclasses import asdict, dataclass
from pathlib import Path

from .cnp import TrainConfig
from .data import RESAMPLE_LENGTH
from .errors import ConfigError
from .sim import Bounds, SamplingConfig, SfmParams


@dataclass
class RunConfig:
    sfm: SfmParams
    sampling: SamplingConfig
    train: TrainConfig
    resample_length: int = RESAMPLE_LENGTH


def _parse_bounds(raw: str) -> Bounds:
    parts = [float(p) for p in raw.split(",")]
    if len(parts) != 4:
        raise ValueError(f"bounds needs 4 comma-separated numbers, got {raw!r}")
    return Bounds(*parts)


def _parse_int_pair(raw: str) -> tuple[int, int]:
    parts = [int(p) for p in raw.split(",")]
    if len(parts) != 2:
        raise ValueError(f"expected 2 comma-separated integers, got {raw!r}")
    return (parts[0], parts[1])


def _parse_float_pair(raw: str) -> tuple[float, float]:
    parts = [float(p) for p in raw.split(",")]
    if len(parts) != 2:
        raise ValueError(f"expected 2 comma-separated numbers, got {raw!r}")
    return (parts[0], parts[1])


def _parse_int_tuple(raw: str) -> tuple[int, ...]:
    return tuple(int(p) for p in raw.split(","))


# section -> key -> (parser, SfmParams/SamplingConfig/TrainConfig field name)
_SCHEMA: dict[str, dict[str, tuple]] = {
    "sim": {
        "v_des": (float, "v_des"),
        "tau_relax": (float, "tau_relax"),
        "repulsion_gain": (float, "repulsion_gain"),
        "repulsion_range": (float, "repulsion_range"),
        "robot_radius": (float, "robot_radius"),
        "v_max": (float, "v_max"),
        "dt": (float, "dt"),
        "goal_tol": (float, "goal_tol"),
        "max_steps": (int, "max_steps"),
    },
    "sampling": {
        "bounds": (_parse_bounds, "bounds"),
        "min_task_distance": (float, "min_task_distance"),
        "obstacle_count": (_parse_int_pair, "obstacle_count"),
        "obstacle_radius": (_parse_float_pair, "obstacle_radius"),
        "p_dynamic": (float, "p_dynamic"),
        "obstacle_speed_max": (float, "obstacle_speed_max"),
        "max_attempts": (int, "max_attempts"),
    },
    "train": {
        "steps": (int, "steps"),
        "learning_rate": (float, "learning_rate"),
        "adam_beta1": (float, "beta1"),
        "adam_beta2": (float, "beta2"),
        "adam_eps": (float, "eps"),
        "seed": (int, "seed"),
        "latent_dim": (int, "latent_dim"),
        "hidden": (_parse_int_tuple, "hidden"),
        "sigma_floor": (float, "sigma_floor"),
        "n_context_min": (int, "n_context_min"),
        "n_context_max": (int, "n_context_max"),
        "m_extra": (int, "m_extra"),
    },
    "dataset": {
        "resample_length": (int, None),
    },
}


def load_run_config(path: str | Path | None = None) -> RunConfig:
    """Defaults, overridden by an optional INI file."""
    overrides: dict[str, dict] = {"sim": {}, "sampling": {}, "train": {}, "dataset": {}}
    if path is not None:
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        parser = configparser.ConfigParser()
        try:
            parser.read(path)
        except configparser.Error as exc:
            raise ConfigError(f"{path}: {exc}") from exc
        for section in parser.sections():
            if section not in _SCHEMA:
                raise ConfigError(f"{path}: unknown section [{section}]")
            for key, raw in parser.items(section):
                if key not in _SCHEMA[section]:
                    raise ConfigError(f"{path}: unknown key {key!r} in [{section}]")
                parse, field_name = _SCHEMA[section][key]
                try:
                    overrides[section][field_name or key] = parse(raw)
                except (ValueError, TypeError) as exc:
                    raise ConfigError(f"{path}: bad value for [{section}] {key}: {exc}") from exc

    try:
        sfm = SfmParams(**overrides["sim"])
        sampling_kwargs = dict(overrides["sampling"])
        sampling_kwargs.setdefault("robot_radius", sfm.robot_radius)
        sampling = SamplingConfig(**sampling_kwargs)
        train = TrainConfig(**overrides["train"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if sfm.goal_tol >= sampling.min_task_distance:
        raise ConfigError("goal_tol must be smaller than min_task_distance")
    return RunConfig(
        sfm=sfm,
        sampling=sampling,
        train=train,
        resample_length=overrides["dataset"].get("resample_length", RESAMPLE_LENGTH),
    )


def config_digest(cfg: RunConfig, extra: dict | None = None) -> str:
    """Stable digest of the effective configuration (plus command inputs)."""
    payload = {
        "sim": asdict(cfg.sfm),
        "sampling": {**asdict(cfg.sampling), "bounds": cfg.sampling.bounds.as_tuple()},
        "train": asdict(cfg.train),
        "dataset": {"resample_length": cfg.resample_length},
    }
    if extra:
        payload["extra"] = extra
    blob = json.dumps(payload, sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]
