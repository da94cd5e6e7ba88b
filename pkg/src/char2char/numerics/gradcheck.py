"""Central finite-difference check of autodiff gradients."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .tensor import Tape, Tensor


@dataclass
class GradCheckReport:
    h: float
    tol: float
    errors: dict[str, float] = field(default_factory=dict)

    @property
    def failures(self) -> dict[str, float]:
        return {k: v for k, v in self.errors.items() if not v < self.tol}

    @property
    def passed(self) -> bool:
        return not self.failures

    @property
    def worst(self) -> tuple[str, float]:
        if not self.errors:
            return ("", 0.0)
        name = max(self.errors, key=self.errors.get)
        return name, self.errors[name]

    def format(self) -> str:
        lines = [f"{'FAIL' if v >= self.tol else 'ok  '} {k:32s} {v:.3e}" for k, v in self.errors.items()]
        name, err = self.worst
        lines.append(f"worst: {name} {err:.3e} (tol {self.tol:g})")
        return "\n".join(lines)


def relative_error(analytic: np.ndarray, numeric: np.ndarray, floor: float = 1e-6) -> np.ndarray:
    """Entrywise |a - n| / max(|a|, |n|, floor).

    The floor keeps entries whose true gradient is ~0 from being judged on
    finite-difference roundoff alone.
    """
    scale = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), floor)
    return np.abs(analytic - numeric) / scale


def numeric_gradient(loss_fn, param: Tensor, h: float) -> np.ndarray:
    grad = np.zeros_like(param.data)
    flat = param.data.reshape(-1)
    gflat = grad.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + h
        up = float(loss_fn().data)
        flat[i] = orig - h
        down = float(loss_fn().data)
        flat[i] = orig
        gflat[i] = (up - down) / (2 * h)
    return grad


def check_gradients(model, batch, h: float = 1e-4, tol: float = 1e-3, floor: float = 1e-6) -> GradCheckReport:
    """Compare autodiff and central-difference gradients for every trainable parameter.

    ``model`` must provide ``parameters()`` (name -> Tensor) and
    ``loss(batch)`` (scalar Tensor). Parameters with ``requires_grad=False``
    are left out of the report. Run this on a float64 model.
    """
    params = {k: p for k, p in model.parameters().items() if p.requires_grad}
    for p in params.values():
        p.zero_grad()
    with Tape() as tape:
        loss = model.loss(batch)
    tape.backward(loss)

    report = GradCheckReport(h=h, tol=tol)
    for name, p in params.items():
        analytic = p.grad if p.grad is not None else np.zeros_like(p.data)
        numeric = numeric_gradient(lambda: model.loss(batch), p, h)
        report.errors[name] = float(relative_error(analytic, numeric, floor).max()) if p.size else 0.0
    return report
