"""Adam with bias correction, operating on a model's flat parameter buffer."""

from __future__ import annotations

import numpy as np


class Adam:
    def __init__(self, size: int, lr: float = 0.01, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.m = np.zeros(size)
        self.v = np.zeros(size)
        self.t = 0

    def step(self, params: np.ndarray, grad: np.ndarray) -> None:
        """Update ``params`` in place."""
        self.t += 1
        self.m *= self.beta1
        self.m += (1.0 - self.beta1) * grad
        self.v *= self.beta2
        self.v += (1.0 - self.beta2) * (grad * grad)
        m_hat = self.m / (1.0 - self.beta1**self.t)
        v_hat = self.v / (1.0 - self.beta2**self.t)
        params -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


def adam_step(state: Adam, model, grads, lr: float | None = None):
    """Apply one Adam update to ``model``; ``grads`` is flat or a name->array dict."""
    if lr is not None:
        state.lr = lr
    if isinstance(grads, dict):
        grads = np.concatenate([np.ravel(grads[name]) for name in model.params])
    state.step(model.flat, grads)
    return model, state
