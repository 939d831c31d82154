"""Adam with a fixed step size and fully exportable state.

The step size never decays; the moment tensors and step counts round-trip
through checkpoints bit-exactly, which keeps resumed training identical to
uninterrupted training.
"""

from __future__ import annotations

import numpy as np
import torch


class Adam:
    def __init__(self, params, lr: float, beta1: float = 0.5, beta2: float = 0.999, eps: float = 1e-8):
        self.params = list(params)
        self.lr = float(lr)
        self.beta1 = float(beta1)
        self.beta2 = float(beta2)
        self.eps = float(eps)
        self.steps = [0] * len(self.params)
        self.m = [torch.zeros_like(p) for p in self.params]
        self.v = [torch.zeros_like(p) for p in self.params]

    @torch.no_grad()
    def step(self) -> None:
        for i, p in enumerate(self.params):
            if p.grad is None:
                continue
            g = p.grad
            self.steps[i] += 1
            t = self.steps[i]
            self.m[i].mul_(self.beta1).add_(g, alpha=1.0 - self.beta1)
            self.v[i].mul_(self.beta2).addcmul_(g, g, value=1.0 - self.beta2)
            m_hat = self.m[i] / (1.0 - self.beta1**t)
            v_hat = self.v[i] / (1.0 - self.beta2**t)
            p.add_(-self.lr * m_hat / (v_hat.sqrt() + self.eps))

    def zero_grad(self) -> None:
        for p in self.params:
            p.grad = None

    def export_state(self) -> tuple[list[int], dict[str, np.ndarray]]:
        arrays = {}
        for i in range(len(self.params)):
            arrays[f"{i}/m"] = self.m[i].detach().numpy()
            arrays[f"{i}/v"] = self.v[i].detach().numpy()
        return list(self.steps), arrays

    def import_state(self, steps: list[int], arrays: dict[str, np.ndarray]) -> None:
        if len(steps) != len(self.params):
            raise ValueError("optimizer state does not match parameter count")
        self.steps = [int(s) for s in steps]
        for i, p in enumerate(self.params):
            self.m[i] = torch.from_numpy(arrays[f"{i}/m"].copy()).to(p.dtype)
            self.v[i] = torch.from_numpy(arrays[f"{i}/v"].copy()).to(p.dtype)
