from __future__ import annotations

import numpy as np

from .network import Network


class Adam:
    """Adam with bias-corrected moments; updates a Network in place."""

    def __init__(self, net: Network, lr: float = 1e-3, beta1: float = 0.9, beta2: float = 0.999,
                 epsilon: float = 1e-8):
        self.lr, self.beta1, self.beta2, self.epsilon = lr, beta1, beta2, epsilon
        self.step_count = 0
        self.m = [{k: np.zeros_like(v) for k, v in layer.params.items()} for layer in net.layers]
        self.v = [{k: np.zeros_like(v) for k, v in layer.params.items()} for layer in net.layers]

    def step(self, net: Network, grads: list[dict[str, np.ndarray]]) -> None:
        self.step_count += 1
        t = self.step_count
        b1, b2 = self.beta1, self.beta2
        corr1 = 1.0 - b1**t
        corr2 = 1.0 - b2**t
        for layer, g_layer, m_layer, v_layer in zip(net.layers, grads, self.m, self.v):
            for name, w in layer.params.items():
                g = g_layer[name]
                m, v = m_layer[name], v_layer[name]
                m *= b1
                m += (1.0 - b1) * g
                v *= b2
                v += (1.0 - b2) * (g * g)
                m_hat = m / corr1
                v_hat = v / corr2
                w -= (self.lr * m_hat / (np.sqrt(v_hat) + self.epsilon)).astype(w.dtype, copy=False)
        net.version += 1
