"""Adam updates applied per parameter."""

from __future__ import annotations

from typing import Iterable

import numpy as np

from .autodiff import Parameter


def adam_step(
    param: Parameter,
    lr: float,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> None:
    """Bias-corrected Adam update of one parameter from its current gradient."""
    param.step_count += 1
    t = param.step_count
    g = param.grad
    param.adam_m *= beta1
    param.adam_m += (1.0 - beta1) * g
    param.adam_v *= beta2
    param.adam_v += (1.0 - beta2) * (g * g)
    # update = lr * m_hat / (sqrt(v_hat) + eps) with the usual bias correction,
    # assembled in two temporaries
    denom = np.sqrt(param.adam_v / (1.0 - beta2**t))
    denom += eps
    update = param.adam_m / ((1.0 - beta1**t) / lr)
    update /= denom
    param.data -= update


def adam_step_all(params: Iterable[Parameter], lr: float, **kwargs) -> None:
    for p in params:
        adam_step(p, lr, **kwargs)


def zero_gradients(params: Iterable[Parameter]) -> None:
    for p in params:
        p.zero_grad()
