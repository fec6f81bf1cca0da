"""Off-policy maximum-entropy actor-critic for continuous control.

Twin Q critics with Polyak-averaged targets, a tanh-squashed Gaussian
actor, and an entropy temperature tuned toward a fixed target entropy.
The critic pair doubles as the driving value oracle: the state value
reported to the supervisor is min(Q1, Q2) at the actor's mean action.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass

import numpy as np
import torch

from .nets import QNetwork, SquashedGaussianActor


@dataclass
class SacConfig:
    learning_rate: float = 1e-4
    gamma: float = 0.99
    tau: float = 0.005                 # Polyak factor for target critics
    batch_size: int = 256
    replay_capacity: int = 1_000_000
    start_steps: int = 5_000           # uniform exploration warmup
    update_after: int = 1_000
    update_every: int = 2              # env steps per gradient update
    hidden: tuple[int, ...] = (128, 128)
    target_entropy: float = -2.0       # -dim(action)
    init_alpha: float = 0.1


class ReplayBuffer:
    def __init__(self, obs_dim: int, act_dim: int, capacity: int):
        self.obs = np.zeros((capacity, obs_dim), dtype=np.float32)
        self.act = np.zeros((capacity, act_dim), dtype=np.float32)
        self.rew = np.zeros(capacity, dtype=np.float32)
        self.next_obs = np.zeros((capacity, obs_dim), dtype=np.float32)
        self.done = np.zeros(capacity, dtype=np.float32)
        self.capacity = capacity
        self.ptr = 0
        self.size = 0

    def store(self, obs, act, rew, next_obs, done: float) -> None:
        i = self.ptr
        self.obs[i] = obs
        self.act[i] = act
        self.rew[i] = rew
        self.next_obs[i] = next_obs
        self.done[i] = done
        self.ptr = (i + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def sample(self, batch_size: int, rng: np.random.Generator) -> dict:
        idx = rng.integers(self.size, size=batch_size)
        return {
            "obs": torch.as_tensor(self.obs[idx]),
            "act": torch.as_tensor(self.act[idx]),
            "rew": torch.as_tensor(self.rew[idx]),
            "next_obs": torch.as_tensor(self.next_obs[idx]),
            "done": torch.as_tensor(self.done[idx]),
        }


class SacAgent:
    def __init__(self, obs_dim: int, act_dim: int, obs_scale: np.ndarray,
                 act_limit: np.ndarray, config: SacConfig | None = None):
        self.config = config if config is not None else SacConfig()
        cfg = self.config
        self.actor = SquashedGaussianActor(obs_dim, act_dim, cfg.hidden,
                                           obs_scale, act_limit)
        self.q1 = QNetwork(obs_dim, act_dim, cfg.hidden, obs_scale, act_limit)
        self.q2 = QNetwork(obs_dim, act_dim, cfg.hidden, obs_scale, act_limit)
        self.q1_targ = copy.deepcopy(self.q1)
        self.q2_targ = copy.deepcopy(self.q2)
        for p in self.q1_targ.parameters():
            p.requires_grad_(False)
        for p in self.q2_targ.parameters():
            p.requires_grad_(False)
        self.log_alpha = torch.tensor(float(np.log(cfg.init_alpha)),
                                      requires_grad=True)
        self.pi_opt = torch.optim.Adam(self.actor.parameters(),
                                       lr=cfg.learning_rate)
        self.q_opt = torch.optim.Adam(
            list(self.q1.parameters()) + list(self.q2.parameters()),
            lr=cfg.learning_rate)
        self.alpha_opt = torch.optim.Adam([self.log_alpha],
                                          lr=cfg.learning_rate)

    @property
    def alpha(self) -> float:
        return float(self.log_alpha.detach().exp())

    def act(self, obs: np.ndarray, deterministic: bool = False) -> np.ndarray:
        with torch.no_grad():
            t = torch.as_tensor(obs, dtype=torch.float32).unsqueeze(0)
            action, _ = self.actor(t, deterministic=deterministic,
                                   with_logprob=False)
            return action.squeeze(0).numpy()

    def value(self, obs: np.ndarray) -> float:
        """min(Q1, Q2) at the actor's mean action: the driving value oracle."""
        with torch.no_grad():
            t = torch.as_tensor(obs, dtype=torch.float32).unsqueeze(0)
            action, _ = self.actor(t, deterministic=True, with_logprob=False)
            return float(torch.min(self.q1(t, action), self.q2(t, action)))

    def update(self, batch: dict) -> dict:
        cfg = self.config
        obs, act = batch["obs"], batch["act"]
        rew, next_obs, done = batch["rew"], batch["next_obs"], batch["done"]

        with torch.no_grad():
            next_act, next_logp = self.actor(next_obs)
            q_next = torch.min(self.q1_targ(next_obs, next_act),
                               self.q2_targ(next_obs, next_act))
            target = rew + cfg.gamma * (1.0 - done) * (
                q_next - self.log_alpha.exp() * next_logp)

        q1_pred = self.q1(obs, act)
        q2_pred = self.q2(obs, act)
        q_loss = ((q1_pred - target) ** 2).mean() + ((q2_pred - target) ** 2).mean()
        self.q_opt.zero_grad()
        q_loss.backward()
        self.q_opt.step()

        for p in self.q1.parameters():
            p.requires_grad_(False)
        for p in self.q2.parameters():
            p.requires_grad_(False)
        new_act, logp = self.actor(obs)
        q_pi = torch.min(self.q1(obs, new_act), self.q2(obs, new_act))
        pi_loss = (self.log_alpha.exp().detach() * logp - q_pi).mean()
        self.pi_opt.zero_grad()
        pi_loss.backward()
        self.pi_opt.step()
        for p in self.q1.parameters():
            p.requires_grad_(True)
        for p in self.q2.parameters():
            p.requires_grad_(True)

        alpha_loss = -(self.log_alpha
                       * (logp + cfg.target_entropy).detach()).mean()
        self.alpha_opt.zero_grad()
        alpha_loss.backward()
        self.alpha_opt.step()

        with torch.no_grad():
            for net, targ in ((self.q1, self.q1_targ), (self.q2, self.q2_targ)):
                for p, pt in zip(net.parameters(), targ.parameters()):
                    pt.mul_(1.0 - cfg.tau).add_(cfg.tau * p)

        return {"q_loss": float(q_loss.detach()),
                "pi_loss": float(pi_loss.detach()),
                "alpha": self.alpha}

    # -------------------------------------------------------- serialization

    def state_dict(self) -> dict:
        return {
            "actor": self.actor.state_dict(),
            "q1": self.q1.state_dict(),
            "q2": self.q2.state_dict(),
            "q1_targ": self.q1_targ.state_dict(),
            "q2_targ": self.q2_targ.state_dict(),
            "log_alpha": self.log_alpha.detach().clone(),
        }

    def load_state_dict(self, state: dict) -> None:
        self.actor.load_state_dict(state["actor"])
        self.q1.load_state_dict(state["q1"])
        self.q2.load_state_dict(state["q2"])
        self.q1_targ.load_state_dict(state["q1_targ"])
        self.q2_targ.load_state_dict(state["q2_targ"])
        with torch.no_grad():
            self.log_alpha.copy_(state["log_alpha"])
