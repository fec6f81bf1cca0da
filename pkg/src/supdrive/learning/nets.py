"""Function approximators shared by the three agents.

All networks prepend a fixed diagonal affine rescaling of the raw
observation (no running statistics, so a checkpoint's behaviour never
depends on the data that happened to precede a query).
"""

from __future__ import annotations

import math

import numpy as np
import torch
import torch.nn as nn

from ..driving_env import DRIVING_OBS_DIM
from ..search_env import SEARCH_OBS_DIM
from ..vehicle import DELTA_MAX, MU_MAX, V_MAX

LOG_STD_MIN = -20.0
LOG_STD_MAX = 2.0


def driving_obs_scale() -> np.ndarray:
    """1/std-scale guesses for the 12 driving observation entries."""
    return 1.0 / np.array(
        [V_MAX, math.pi, DELTA_MAX, 25.0, 25.0, 25.0, 25.0, 25.0,
         2.0, 1.0, V_MAX, 1.0], dtype=np.float32)


def search_obs_scale() -> np.ndarray:
    return np.ones(SEARCH_OBS_DIM, dtype=np.float32)


def supervisor_obs_scale() -> np.ndarray:
    return np.ones(3, dtype=np.float32)


class ObsScaler(nn.Module):
    """Fixed elementwise rescaling, stored with the parameters."""

    def __init__(self, scale: np.ndarray):
        super().__init__()
        self.register_buffer("scale", torch.as_tensor(scale, dtype=torch.float32))

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return x * self.scale


def mlp(sizes, activation=nn.ReLU, out_activation=None) -> nn.Sequential:
    layers: list[nn.Module] = []
    for i in range(len(sizes) - 1):
        layers.append(nn.Linear(sizes[i], sizes[i + 1]))
        if i < len(sizes) - 2:
            layers.append(activation())
        elif out_activation is not None:
            layers.append(out_activation())
    return nn.Sequential(*layers)


class SquashedGaussianActor(nn.Module):
    """Tanh-squashed Gaussian policy over a box action space."""

    def __init__(self, obs_dim: int, act_dim: int, hidden: tuple[int, ...],
                 obs_scale: np.ndarray, act_limit: np.ndarray):
        super().__init__()
        self.scaler = ObsScaler(obs_scale)
        self.trunk = mlp((obs_dim, *hidden))
        self.trunk_act = nn.ReLU()
        self.mu_head = nn.Linear(hidden[-1], act_dim)
        self.log_std_head = nn.Linear(hidden[-1], act_dim)
        self.register_buffer("act_limit",
                             torch.as_tensor(act_limit, dtype=torch.float32))

    def forward(self, obs: torch.Tensor, deterministic: bool = False,
                with_logprob: bool = True):
        h = self.trunk_act(self.trunk(self.scaler(obs)))
        mu = self.mu_head(h)
        log_std = torch.clamp(self.log_std_head(h), LOG_STD_MIN, LOG_STD_MAX)
        std = torch.exp(log_std)
        dist = torch.distributions.Normal(mu, std)
        raw = mu if deterministic else dist.rsample()
        action = torch.tanh(raw)
        logp = None
        if with_logprob:
            # Change of variables for the tanh squash, the numerically
            # stable softplus form.
            logp = dist.log_prob(raw).sum(-1)
            logp = logp - (2.0 * (math.log(2.0) - raw
                                  - nn.functional.softplus(-2.0 * raw))).sum(-1)
        return action * self.act_limit, logp


class QNetwork(nn.Module):
    def __init__(self, obs_dim: int, act_dim: int, hidden: tuple[int, ...],
                 obs_scale: np.ndarray, act_limit: np.ndarray):
        super().__init__()
        self.scaler = ObsScaler(obs_scale)
        self.register_buffer("act_limit",
                             torch.as_tensor(act_limit, dtype=torch.float32))
        self.net = mlp((obs_dim + act_dim, *hidden, 1))

    def forward(self, obs: torch.Tensor, act: torch.Tensor) -> torch.Tensor:
        x = torch.cat([self.scaler(obs), act / self.act_limit], dim=-1)
        return self.net(x).squeeze(-1)


class MaskedCategoricalActor(nn.Module):
    """Discrete policy; invalid actions are excluded before sampling."""

    def __init__(self, obs_dim: int, n_actions: int, hidden: tuple[int, ...],
                 obs_scale: np.ndarray):
        super().__init__()
        self.scaler = ObsScaler(obs_scale)
        self.net = mlp((obs_dim, *hidden, n_actions))

    def distribution(self, obs: torch.Tensor,
                     mask: torch.Tensor | None = None):
        logits = self.net(self.scaler(obs))
        if mask is not None:
            logits = logits.masked_fill(~mask, -1e9)
        return torch.distributions.Categorical(logits=logits)


class ValueNetwork(nn.Module):
    def __init__(self, obs_dim: int, hidden: tuple[int, ...],
                 obs_scale: np.ndarray):
        super().__init__()
        self.scaler = ObsScaler(obs_scale)
        self.net = mlp((obs_dim, *hidden, 1))

    def forward(self, obs: torch.Tensor) -> torch.Tensor:
        return self.net(self.scaler(obs)).squeeze(-1)


def driving_action_limit() -> np.ndarray:
    return np.array([DELTA_MAX, MU_MAX], dtype=np.float32)


def count_parameters(module: nn.Module) -> int:
    return sum(p.numel() for p in module.parameters())


def flat_parameters(module: nn.Module) -> np.ndarray:
    with torch.no_grad():
        return torch.cat([p.reshape(-1) for p in module.parameters()]).numpy().copy()


__all__ = [
    "DRIVING_OBS_DIM", "LOG_STD_MIN", "LOG_STD_MAX", "ObsScaler",
    "MaskedCategoricalActor", "QNetwork", "SquashedGaussianActor",
    "ValueNetwork", "count_parameters", "driving_action_limit",
    "driving_obs_scale", "flat_parameters", "mlp", "search_obs_scale",
    "supervisor_obs_scale",
]
