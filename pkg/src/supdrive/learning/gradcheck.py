"""Finite-difference verification of value-loss gradients.

Builds small float64 copies of the value approximators, evaluates the
squared-error value loss on a random batch, and compares every analytic
parameter gradient against a central finite difference. Exercised by the
test suite and by the acceptance gate.
"""

from __future__ import annotations

import numpy as np
import torch

from .nets import QNetwork, ValueNetwork


def _max_relative_error(module: torch.nn.Module, loss_fn,
                        h: float = 1e-6) -> float:
    loss = loss_fn()
    module.zero_grad()
    loss.backward()
    worst = 0.0
    for p in module.parameters():
        grad = p.grad.detach().clone()
        flat = p.data.view(-1)
        gflat = grad.view(-1)
        for i in range(flat.numel()):
            orig = float(flat[i])
            with torch.no_grad():
                flat[i] = orig + h
                up = float(loss_fn())
                flat[i] = orig - h
                down = float(loss_fn())
                flat[i] = orig
            numeric = (up - down) / (2.0 * h)
            analytic = float(gflat[i])
            denom = max(abs(numeric), abs(analytic), 1e-8)
            worst = max(worst, abs(numeric - analytic) / denom)
    return worst


def q_network_gradient_error(seed: int = 0, batch: int = 16) -> float:
    """Max relative gradient error of the twin-critic regression loss."""
    torch.manual_seed(seed)
    net = QNetwork(obs_dim=5, act_dim=2, hidden=(8, 8),
                   obs_scale=np.ones(5, dtype=np.float32),
                   act_limit=np.array([0.26, 6.0], dtype=np.float32)).double()
    obs = torch.randn(batch, 5, dtype=torch.float64)
    act = torch.randn(batch, 2, dtype=torch.float64) * 0.2
    target = torch.randn(batch, dtype=torch.float64)

    def loss_fn():
        return ((net(obs, act) - target) ** 2).mean()

    return _max_relative_error(net, loss_fn)


def value_network_gradient_error(seed: int = 0, batch: int = 16) -> float:
    """Max relative gradient error of the state-value regression loss."""
    torch.manual_seed(seed)
    net = ValueNetwork(obs_dim=6, hidden=(8, 8),
                       obs_scale=np.ones(6, dtype=np.float32)).double()
    obs = torch.randn(batch, 6, dtype=torch.float64)
    target = torch.randn(batch, dtype=torch.float64)

    def loss_fn():
        return ((net(obs) - target) ** 2).mean()

    return _max_relative_error(net, loss_fn)
