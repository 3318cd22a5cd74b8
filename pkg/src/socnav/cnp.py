"""Conditional neural process: encoder, mean aggregation, Gaussian query head.

Observed (x, gamma, y) points are encoded one by one, averaged into a single
task representation, and a query network maps (x_q, gamma_q, representation)
to a per-dimension Gaussian over y. Training minimizes the Gaussian negative
log-likelihood over target points with Adam; all gradients are hand-derived
and checked against finite differences in the test suite.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .data import (
    ContextPoint,
    Dataset,
    LAYOUTS,
    Layout,
    NormStats,
    demo_arrays,
    sample_context_indices,
    un_zscore,
    zscore,
)
from .errors import DimensionMismatchError, EmptyContextError, VersionMismatchError
from .mlp import Adam, Mlp

LOG_2PI = math.log(2.0 * math.pi)
CHECKPOINT_VERSION = 1


@dataclass
class GaussianPrediction:
    """Per-dimension mean and standard deviation for one queried target."""

    mean: np.ndarray
    std: np.ndarray


@dataclass(frozen=True)
class TrainConfig:
    steps: int = 50_000
    learning_rate: float = 1e-3
    lr_decay: float = 0.1  # final lr as a fraction of the initial (cosine)
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    seed: int = 0
    latent_dim: int = 128
    hidden: tuple[int, ...] = (128, 128)
    sigma_floor: float = 1e-4
    n_context_min: int = 1
    n_context_max: int = 10
    m_extra: int = 20

    def __post_init__(self):
        if self.steps < 1:
            raise ValueError("steps must be >= 1")
        if self.learning_rate <= 0.0:
            raise ValueError("learning_rate must be positive")
        if not 0.0 < self.lr_decay <= 1.0:
            raise ValueError("lr_decay must be in (0, 1]")
        if self.sigma_floor <= 0.0:
            raise ValueError("sigma_floor must be positive")
        if self.latent_dim < 1:
            raise ValueError("latent_dim must be >= 1")

    def lr_at(self, step: int) -> float:
        """Cosine schedule from learning_rate down to lr_decay * learning_rate."""
        if self.steps <= 1:
            return self.learning_rate
        frac = step / (self.steps - 1)
        lo = self.lr_decay * self.learning_rate
        return lo + 0.5 * (self.learning_rate - lo) * (1.0 + math.cos(math.pi * frac))


@dataclass
class CnpModel:
    """Trained encoder/query pair plus the statistics it was trained under.

    context, when set, is the fixed conditioning set stored with reactive
    (local-layout) models.
    """

    layout: Layout
    encoder: Mlp
    query: Mlp
    norm_stats: NormStats
    sigma_floor: float
    context: list[ContextPoint] | None = None

    @property
    def latent_dim(self) -> int:
        return self.encoder.dims[-1]

    def parameters(self) -> list[np.ndarray]:
        return self.encoder.params() + self.query.params()


def _softplus(x: np.ndarray) -> np.ndarray:
    return np.logaddexp(0.0, x)


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _check_point_dims(layout: Layout, points: Sequence[ContextPoint]) -> None:
    for p in points:
        if len(p.x) != layout.x_dim or len(p.gamma) != layout.gamma_dim or len(p.y) != layout.y_dim:
            raise DimensionMismatchError(
                f"point dims ({len(p.x)}, {len(p.gamma)}, {len(p.y)}) do not match "
                f"layout {layout.mode} ({layout.x_dim}, {layout.gamma_dim}, {layout.y_dim})")


def _stack_points(points: Sequence[ContextPoint]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    x = np.array([p.x for p in points], dtype=float)
    g = np.array([p.gamma for p in points], dtype=float)
    y = np.array([p.y for p in points], dtype=float)
    return x, g, y


def _normalize_points(points: Sequence[ContextPoint], stats: NormStats) -> np.ndarray:
    x, g, y = _stack_points(points)
    return np.concatenate([
        zscore(x, stats.x_mean, stats.x_std),
        zscore(g, stats.g_mean, stats.g_std),
        zscore(y, stats.y_mean, stats.y_std),
    ], axis=1)


# ---------------------------------------------------------------------------
# forward path
# ---------------------------------------------------------------------------

def encode(model: CnpModel, context: Sequence[ContextPoint]) -> np.ndarray:
    """Latent vectors for already-normalized context points, one per point."""
    if len(context) == 0:
        raise EmptyContextError("encode requires at least one context point")
    _check_point_dims(model.layout, context)
    c = np.concatenate(_stack_points(context), axis=1)
    out, _ = model.encoder.forward(c)
    return out

def aggregate(latents: np.ndarray) -> np.ndarray:
    """Arithmetic mean of the per-point latents (order invariant)."""
    latents = np.asarray(latents, dtype=float)
    if latents.ndim != 2 or latents.shape[0] == 0:
        raise EmptyContextError("aggregate requires a nonempty (k, d) latent stack")
    return latents.mean(axis=0)


def _forward_normalized(model: CnpModel, c_norm: np.ndarray,
                        q_norm: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Normalized-space forward pass; returns (mean, std) per query row."""
    enc_out, _ = model.encoder.forward(c_norm)
    r = enc_out.mean(axis=0)
    q_in = np.concatenate([q_norm, np.broadcast_to(r, (len(q_norm), r.shape[0]))], axis=1)
    out, _ = model.query.forward(q_in)
    y_dim = model.layout.y_dim
    mean = out[:, :y_dim]
    std = _softplus(out[:, y_dim:]) + model.sigma_floor
    return mean, std


def predict_batch(model: CnpModel, context: Sequence[ContextPoint],
                  x_q: np.ndarray, gamma_q: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized prediction in SI units for a batch of query rows."""
    if len(context) == 0:
        raise EmptyContextError("prediction requires at least one context point")
    _check_point_dims(model.layout, context)
    x_q = np.atleast_2d(np.asarray(x_q, dtype=float))
    gamma_q = np.atleast_2d(np.asarray(gamma_q, dtype=float))
    if x_q.shape[1] != model.layout.x_dim or gamma_q.shape[1] != model.layout.gamma_dim:
        raise DimensionMismatchError(
            f"query dims ({x_q.shape[1]}, {gamma_q.shape[1]}) do not match layout "
            f"{model.layout.mode} ({model.layout.x_dim}, {model.layout.gamma_dim})")
    if x_q.shape[0] != gamma_q.shape[0]:
        raise DimensionMismatchError("x_q and gamma_q row counts differ")
    stats = model.norm_stats
    c_norm = _normalize_points(context, stats)
    q_norm = np.concatenate([
        zscore(x_q, stats.x_mean, stats.x_std),
        zscore(gamma_q, stats.g_mean, stats.g_std),
    ], axis=1)
    mean_n, std_n = _forward_normalized(model, c_norm, q_norm)
    return un_zscore(mean_n, stats.y_mean, stats.y_std), std_n * stats.y_std


def predict(model: CnpModel, context: Sequence[ContextPoint],
            x_q: np.ndarray, gamma_q: np.ndarray) -> GaussianPrediction:
    """Gaussian prediction (SI units) for a single query input."""
    mean, std = predict_batch(model, context, x_q, gamma_q)
    return GaussianPrediction(mean=mean[0], std=std[0])


def nll_loss(pred: GaussianPrediction, y: np.ndarray) -> float:
    """Independent-per-dimension Gaussian negative log-likelihood."""
    y = np.asarray(y, dtype=float)
    if y.shape != pred.mean.shape:
        raise DimensionMismatchError(
            f"target shape {y.shape} does not match prediction {pred.mean.shape}")
    resid = y - pred.mean
    return float(np.sum(np.log(pred.std) + 0.5 * resid ** 2 / pred.std ** 2
                        + 0.5 * LOG_2PI))


# ---------------------------------------------------------------------------
# loss and gradients (normalized space, the training path)
# ---------------------------------------------------------------------------

def _loss_and_grads(encoder: Mlp, query: Mlp, sigma_floor: float, y_dim: int,
                    c_norm: np.ndarray, q_norm: np.ndarray,
                    y_norm: np.ndarray) -> tuple[float, list[np.ndarray]]:
    """Mean NLL over targets and output dimensions, with parameter gradients."""
    enc_out, enc_acts = encoder.forward(c_norm)
    n_ctx = c_norm.shape[0]
    d_r = enc_out.shape[1]
    r = enc_out.mean(axis=0)
    m = q_norm.shape[0]
    q_in = np.concatenate([q_norm, np.broadcast_to(r, (m, d_r))], axis=1)
    q_out, q_acts = query.forward(q_in)

    mu = q_out[:, :y_dim]
    s_raw = q_out[:, y_dim:]
    sigma = _softplus(s_raw) + sigma_floor
    resid = mu - y_norm
    denom = m * y_dim
    loss = float(np.sum(np.log(sigma) + 0.5 * resid ** 2 / sigma ** 2) / denom
                 + 0.5 * LOG_2PI)

    sigma_sq = sigma ** 2
    d_mu = resid / sigma_sq / denom
    d_sigma = (1.0 / sigma - resid ** 2 / (sigma_sq * sigma)) / denom
    d_s_raw = d_sigma * _sigmoid(s_raw)
    d_q_out = np.concatenate([d_mu, d_s_raw], axis=1)

    d_q_in, q_grads = query.backward(q_acts, d_q_out)
    d_r_total = d_q_in[:, q_norm.shape[1]:].sum(axis=0)
    d_enc_out = np.tile(d_r_total / n_ctx, (n_ctx, 1))
    _, e_grads = encoder.backward(enc_acts, d_enc_out)
    return loss, e_grads + q_grads


def _batch_arrays(model: CnpModel, context: Sequence[ContextPoint],
                  targets: Sequence[ContextPoint]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    if len(context) == 0 or len(targets) == 0:
        raise EmptyContextError("need nonempty context and target sets")
    _check_point_dims(model.layout, context)
    _check_point_dims(model.layout, targets)
    stats = model.norm_stats
    c_norm = _normalize_points(context, stats)
    tx, tg, ty = _stack_points(targets)
    q_norm = np.concatenate([
        zscore(tx, stats.x_mean, stats.x_std),
        zscore(tg, stats.g_mean, stats.g_std),
    ], axis=1)
    y_norm = zscore(ty, stats.y_mean, stats.y_std)
    return c_norm, q_norm, y_norm


def batch_loss(model: CnpModel, context: Sequence[ContextPoint],
               targets: Sequence[ContextPoint]) -> float:
    """Mean NLL over targets in normalized units (the quantity training descends)."""
    loss, _ = _loss_and_grads(model.encoder, model.query, model.sigma_floor,
                              model.layout.y_dim, *_batch_arrays(model, context, targets))
    return loss


def grad(model: CnpModel, context: Sequence[ContextPoint],
         targets: Sequence[ContextPoint]) -> tuple[float, list[np.ndarray]]:
    """Loss and gradients w.r.t. every parameter, aligned with model.parameters()."""
    return _loss_and_grads(model.encoder, model.query, model.sigma_floor,
                           model.layout.y_dim, *_batch_arrays(model, context, targets))


# ---------------------------------------------------------------------------
# training
# ---------------------------------------------------------------------------

def train(dataset: Dataset, layout: Layout,
          config: TrainConfig = TrainConfig()) -> tuple[CnpModel, np.ndarray]:
    """Fit a model by stochastic NLL descent over per-demonstration batches.

    Each step picks one demonstration uniformly, draws a small context and a
    superset of targets from its points, and applies one Adam update. Fully
    deterministic for a given config.seed.
    """
    if not dataset.demos:
        raise ValueError("cannot train on an empty dataset")
    if dataset.norm_stats is None:
        raise ValueError("dataset is not normalized; call data.normalize() first")
    stats = dataset.norm_stats[layout.mode]

    c_all, q_all, y_all = [], [], []
    for demo in dataset.demos:
        x, g, y = demo_arrays(demo, layout)
        xn = zscore(x, stats.x_mean, stats.x_std)
        gn = zscore(g, stats.g_mean, stats.g_std)
        yn = zscore(y, stats.y_mean, stats.y_std)
        c_all.append(np.concatenate([xn, gn, yn], axis=1))
        q_all.append(np.concatenate([xn, gn], axis=1))
        y_all.append(yn)

    rng = np.random.default_rng(config.seed)
    in_dim = layout.x_dim + layout.gamma_dim + layout.y_dim
    q_in_dim = layout.x_dim + layout.gamma_dim + config.latent_dim
    encoder = Mlp.create([in_dim, *config.hidden, config.latent_dim], rng)
    query = Mlp.create([q_in_dim, *config.hidden, 2 * layout.y_dim], rng)
    params = encoder.params() + query.params()
    opt = Adam(params, lr=config.learning_rate, beta1=config.beta1,
               beta2=config.beta2, eps=config.eps)

    n_demos = len(dataset.demos)
    losses = np.empty(config.steps, dtype=float)
    for step_i in range(config.steps):
        i = int(rng.integers(n_demos))
        ctx_idx, tgt_idx = sample_context_indices(
            rng, len(y_all[i]), config.n_context_min, config.n_context_max,
            config.m_extra)
        loss, grads = _loss_and_grads(
            encoder, query, config.sigma_floor, layout.y_dim,
            c_all[i][ctx_idx], q_all[i][tgt_idx], y_all[i][tgt_idx])
        opt.lr = config.lr_at(step_i)
        opt.update(grads)
        losses[step_i] = loss

    model = CnpModel(layout=layout, encoder=encoder, query=query,
                     norm_stats=stats, sigma_floor=config.sigma_floor)
    return model, losses


def windowed_losses(losses: np.ndarray, window: int = 100) -> np.ndarray:
    """Trailing-mean loss curve (same length as the input)."""
    losses = np.asarray(losses, dtype=float)
    out = np.empty_like(losses)
    csum = np.cumsum(losses)
    for i in range(len(losses)):
        lo = max(0, i - window + 1)
        total = csum[i] - (csum[lo - 1] if lo > 0 else 0.0)
        out[i] = total / (i - lo + 1)
    return out


# ---------------------------------------------------------------------------
# persistence
# ---------------------------------------------------------------------------

def _layout_to_dict(layout: Layout) -> dict:
    return {"mode": layout.mode, "x_dim": layout.x_dim,
            "gamma_dim": layout.gamma_dim, "y_dim": layout.y_dim}


def _context_to_list(context: list[ContextPoint] | None) -> list | None:
    if context is None:
        return None
    return [{"x": p.x.tolist(), "gamma": p.gamma.tolist(), "y": p.y.tolist()}
            for p in context]


def _context_from_list(raw: list | None) -> list[ContextPoint] | None:
    if raw is None:
        return None
    return [ContextPoint(np.asarray(p["x"], dtype=float),
                         np.asarray(p["gamma"], dtype=float),
                         np.asarray(p["y"], dtype=float)) for p in raw]


def save_model(model: CnpModel, path: str | Path) -> None:
    payload = {
        "version": CHECKPOINT_VERSION,
        "kind": "cnp",
        "layout": _layout_to_dict(model.layout),
        "d_r": model.latent_dim,
        "sigma_floor": model.sigma_floor,
        "norm_stats": model.norm_stats.to_dict(),
        "encoder": model.encoder.to_dict(),
        "query": model.query.to_dict(),
        "context": _context_to_list(model.context),
    }
    Path(path).write_text(json.dumps(payload), encoding="utf-8")


def load_model(path: str | Path) -> CnpModel:
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise VersionMismatchError(f"{path}: not a model checkpoint ({exc})") from exc
    if not isinstance(payload, dict) or payload.get("version") != CHECKPOINT_VERSION:
        raise VersionMismatchError(
            f"{path}: unsupported checkpoint version {payload.get('version')!r}"
            if isinstance(payload, dict) else f"{path}: not a model checkpoint")
    if payload.get("kind", "cnp") != "cnp":
        raise VersionMismatchError(f"{path}: checkpoint kind {payload.get('kind')!r} is not 'cnp'")
    layout_d = payload["layout"]
    layout = LAYOUTS.get(layout_d["mode"])
    if layout is None or _layout_to_dict(layout) != layout_d:
        raise VersionMismatchError(f"{path}: unknown layout {layout_d!r}")
    model = CnpModel(
        layout=layout,
        encoder=Mlp.from_dict(payload["encoder"]),
        query=Mlp.from_dict(payload["query"]),
        norm_stats=NormStats.from_dict(payload["norm_stats"]),
        sigma_floor=float(payload["sigma_floor"]),
        context=_context_from_list(payload.get("context")),
    )
    if model.latent_dim != payload["d_r"]:
        raise VersionMismatchError(
            f"{path}: d_r header {payload['d_r']} does not match encoder {model.latent_dim}")
    return model
