"""Plain-numpy multilayer perceptron with hand-written backpropagation.

ReLU hidden layers, linear output, uniform fan-in initialization at the
1/sqrt(fan_in) scale (the sqrt(6/fan_in) variant leaves the latent channel
loud enough to drown the query inputs early in training). The backward pass
returns gradients aligned with params(), which interleaves weights and
biases layer by layer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass
class Mlp:
    weights: list[np.ndarray]
    biases: list[np.ndarray]

    @classmethod
    def create(cls, dims: list[int], rng: np.random.Generator) -> "Mlp":
        weights, biases = [], []
        for fan_in, fan_out in zip(dims[:-1], dims[1:]):
            limit = 1.0 / math.sqrt(fan_in)
            weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
            biases.append(np.zeros(fan_out))
        return cls(weights, biases)

    @property
    def dims(self) -> list[int]:
        return [self.weights[0].shape[0]] + [w.shape[1] for w in self.weights]

    @property
    def n_layers(self) -> int:
        return len(self.weights)

    def params(self) -> list[np.ndarray]:
        out = []
        for w, b in zip(self.weights, self.biases):
            out.append(w)
            out.append(b)
        return out

    def forward(self, x: np.ndarray) -> tuple[np.ndarray, list[np.ndarray]]:
        """Returns (output, activations); activations[i] is layer i's input."""
        acts = [x]
        last = self.n_layers - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            z = acts[-1] @ w + b
            if i < last:
                np.maximum(z, 0.0, out=z)
            acts.append(z)
        return acts[-1], acts

    def backward(self, acts: list[np.ndarray],
                 d_out: np.ndarray) -> tuple[np.ndarray, list[np.ndarray]]:
        """Gradient of a scalar loss given d(loss)/d(output).

        Returns (d_input, grads) with grads aligned with params().
        """
        grads: list[np.ndarray | None] = [None] * (2 * self.n_layers)
        d = d_out
        for i in reversed(range(self.n_layers)):
            if i < self.n_layers - 1:
                d = d * (acts[i + 1] > 0.0)
            grads[2 * i] = acts[i].T @ d
            grads[2 * i + 1] = d.sum(axis=0)
            d = d @ self.weights[i].T
        return d, grads  # type: ignore[return-value]

    def to_dict(self) -> dict:
        return {
            "dims": self.dims,
            "weights": [w.tolist() for w in self.weights],
            "biases": [b.tolist() for b in self.biases],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Mlp":
        weights = [np.asarray(w, dtype=float) for w in d["weights"]]
        biases = [np.asarray(b, dtype=float) for b in d["biases"]]
        net = cls(weights, biases)
        if net.dims != list(d["dims"]):
            raise ValueError(f"dims header {d['dims']} does not match weights {net.dims}")
        return net


class Adam:
    """Adam with bias correction; updates parameter arrays in place."""

    def __init__(self, params: list[np.ndarray], lr: float = 1e-3,
                 beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.params = params
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.t = 0

    def update(self, grads: list[np.ndarray]) -> None:
        self.t += 1
        b1c = 1.0 - self.beta1 ** self.t
        b2c = 1.0 - self.beta2 ** self.t
        for p, g, m, v in zip(self.params, grads, self.m, self.v):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * (g * g)
            p -= self.lr * (m / b1c) / (np.sqrt(v / b2c) + self.eps)
