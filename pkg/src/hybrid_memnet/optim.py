"""Adam with bias correction, plus global-norm gradient clipping."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from .errors import OptimizerError
from .tensor import Tensor


@dataclass
class AdamState:
    m: np.ndarray
    v: np.ndarray
    t: int = 0
    beta1: float = 0.99
    beta2: float = 0.999
    epsilon: float = 1e-8
    learning_rate: float = 0.001

    @classmethod
    def for_param(cls, param: Tensor, **hyper) -> "AdamState":
        return cls(np.zeros_like(param.data), np.zeros_like(param.data), **hyper)


def adam_step(param: Tensor, state: AdamState) -> None:
    """Apply one bias-corrected Adam update to ``param.data`` in place.

    ``param.grad`` is read but left untouched; the caller resets it.
    """
    g = param.grad
    if g is None:
        raise OptimizerError(f"parameter {param.name or param.shape} has no gradient")
    if state.m.shape != param.shape or state.v.shape != param.shape:
        raise OptimizerError(f"state shape {state.m.shape} does not match parameter {param.shape}")
    state.t += 1
    b1, b2 = state.beta1, state.beta2
    state.m *= b1
    state.m += (1.0 - b1) * g
    state.v *= b2
    state.v += (1.0 - b2) * (g * g)
    m_hat = state.m / (1.0 - b1**state.t)
    v_hat = state.v / (1.0 - b2**state.t)
    param.data -= state.learning_rate * m_hat / (np.sqrt(v_hat) + state.epsilon)


@dataclass
class Adam:
    """Adam over a named parameter collection."""

    params: Mapping[str, Tensor]
    learning_rate: float = 0.001
    beta1: float = 0.99
    beta2: float = 0.999
    epsilon: float = 1e-8
    states: dict[str, AdamState] = field(default_factory=dict)

    def __post_init__(self):
        for name, p in self.params.items():
            self.states[name] = AdamState.for_param(
                p,
                beta1=self.beta1,
                beta2=self.beta2,
                epsilon=self.epsilon,
                learning_rate=self.learning_rate,
            )

    def step(self) -> None:
        for name, p in self.params.items():
            adam_step(p, self.states[name])

    def zero_grad(self) -> None:
        for p in self.params.values():
            p.grad = None


def clip_grad_norm(params: Iterable[Tensor], max_norm: float) -> float:
    """Rescale gradients so their global L2 norm is at most ``max_norm``.

    Returns the norm before clipping.
    """
    params = [p for p in params if p.grad is not None]
    norm = float(np.sqrt(sum(float(np.vdot(p.grad, p.grad)) for p in params)))
    if norm > max_norm:
        scale = max_norm / norm
        for p in params:
            p.grad *= scale
    return norm
