"""Parameter initialization, global-norm gradient clipping and Adam."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from ..model.config import ModelConfig
from ..model.network import parameter_shapes
from ..numerics import Tensor


def init_parameters(config: ModelConfig, seed: int = 0, init_range: float = 0.01, dtype=np.float32) -> dict[str, Tensor]:
    """Every weight and bias i.i.d. uniform on [-init_range, init_range]."""
    rng = np.random.default_rng(seed)
    params = {}
    for name, shape in parameter_shapes(config).items():
        data = rng.uniform(-init_range, init_range, size=shape).astype(dtype)
        params[name] = Tensor(data, requires_grad=True, name=name)
    return params


def global_norm(params: Mapping[str, Tensor]) -> float:
    total = 0.0
    for p in params.values():
        if p.grad is not None:
            g = p.grad.astype(np.float64, copy=False)
            total += float(np.dot(g.ravel(), g.ravel()))
    return float(np.sqrt(total))


def clip_gradients(params: Mapping[str, Tensor], threshold: float = 1.0) -> float:
    """Rescale all gradients jointly so their global L2 norm is at most ``threshold``.

    Returns the factor applied (1.0 when no clipping was needed).
    """
    norm = global_norm(params)
    if norm <= threshold or norm == 0.0:
        return 1.0
    factor = threshold / norm
    for p in params.values():
        if p.grad is not None:
            p.grad *= factor
    # float rounding can leave the norm a hair above the threshold
    post = global_norm(params)
    if post > threshold:
        fix = threshold / post
        for p in params.values():
            if p.grad is not None:
                p.grad *= fix
        factor *= fix
    return factor


@dataclass
class Adam:
    """Adam with bias correction. ``m``/``v`` are keyed by parameter name."""

    lr: float = 1e-4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step_count: int = 0
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)

    def step(self, params: Mapping[str, Tensor]) -> None:
        self.step_count += 1
        t = self.step_count
        c1 = 1.0 - self.beta1 ** t
        c2 = 1.0 - self.beta2 ** t
        for name, p in params.items():
            if p.grad is None or not p.requires_grad:
                continue
            g = p.grad
            if name not in self.m:
                self.m[name] = np.zeros_like(p.data)
                self.v[name] = np.zeros_like(p.data)
            m, v = self.m[name], self.v[name]
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            p.data -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


def adam_step(opt: Adam, params: Mapping[str, Tensor]) -> None:
    opt.step(params)


def zero_grad(params: Mapping[str, Tensor]) -> None:
    for p in params.values():
        p.zero_grad()
