"""On-policy clipped-surrogate policy gradient for discrete control.

A masked categorical actor and a separate state-value critic, updated from
fixed-length rollouts with generalized advantage estimation. The critic
doubles as the search value oracle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch

from .nets import MaskedCategoricalActor, ValueNetwork


@dataclass
class PpoConfig:
    learning_rate: float = 1e-4
    gamma: float = 0.99
    gae_lambda: float = 0.95
    clip_ratio: float = 0.2
    update_epochs: int = 10
    rollout_steps: int = 2048
    minibatch_size: int = 64
    entropy_coef: float = 0.01
    value_coef: float = 0.5
    max_grad_norm: float = 0.5
    hidden: tuple[int, ...] = (64, 64)


class RolloutBuffer:
    """Fixed-length on-policy storage with GAE postprocessing."""

    def __init__(self, obs_dim: int, n_actions: int, steps: int,
                 gamma: float, lam: float):
        self.obs = np.zeros((steps, obs_dim), dtype=np.float32)
        self.act = np.zeros(steps, dtype=np.int64)
        self.logp = np.zeros(steps, dtype=np.float32)
        self.rew = np.zeros(steps, dtype=np.float32)
        self.val = np.zeros(steps, dtype=np.float32)
        self.done = np.zeros(steps, dtype=np.float32)   # episode ended here
        self.mask = np.ones((steps, n_actions), dtype=bool)
        self.adv = np.zeros(steps, dtype=np.float32)
        self.ret = np.zeros(steps, dtype=np.float32)
        self.gamma, self.lam = gamma, lam
        self.steps = steps
        self.ptr = 0

    @property
    def full(self) -> bool:
        return self.ptr >= self.steps

    def store(self, obs, act, logp, rew, val, done, mask=None) -> None:
        i = self.ptr
        self.obs[i] = obs
        self.act[i] = act
        self.logp[i] = logp
        self.rew[i] = rew
        self.val[i] = val
        self.done[i] = float(done)
        if mask is not None:
            self.mask[i] = mask
        self.ptr += 1

    def finish(self, last_value: float) -> None:
        """Compute GAE advantages; episode ends cut the recursion."""
        adv = 0.0
        next_val = last_value
        for t in reversed(range(self.steps)):
            nonterminal = 1.0 - self.done[t]
            delta = self.rew[t] + self.gamma * next_val * nonterminal - self.val[t]
            adv = delta + self.gamma * self.lam * nonterminal * adv
            self.adv[t] = adv
            next_val = self.val[t]
        self.ret[:] = self.adv + self.val
        self.ptr = 0


class PpoAgent:
    def __init__(self, obs_dim: int, n_actions: int, obs_scale: np.ndarray,
                 config: PpoConfig | None = None):
        self.config = config if config is not None else PpoConfig()
        cfg = self.config
        self.obs_dim = obs_dim
        self.n_actions = n_actions
        self.actor = MaskedCategoricalActor(obs_dim, n_actions, cfg.hidden,
                                            obs_scale)
        self.critic = ValueNetwork(obs_dim, cfg.hidden, obs_scale)
        self.optimizer = torch.optim.Adam(
            list(self.actor.parameters()) + list(self.critic.parameters()),
            lr=cfg.learning_rate)

    def make_buffer(self) -> RolloutBuffer:
        cfg = self.config
        return RolloutBuffer(self.obs_dim, self.n_actions, cfg.rollout_steps,
                             cfg.gamma, cfg.gae_lambda)

    def act(self, obs: np.ndarray, mask: np.ndarray | None = None,
            deterministic: bool = False) -> tuple[int, float, float]:
        with torch.no_grad():
            t = torch.as_tensor(obs, dtype=torch.float32).unsqueeze(0)
            m = (None if mask is None
                 else torch.as_tensor(mask, dtype=torch.bool).unsqueeze(0))
            dist = self.actor.distribution(t, m)
            action = (dist.probs.argmax(-1) if deterministic
                      else dist.sample())
            logp = dist.log_prob(action)
            value = self.critic(t)
            return int(action), float(logp), float(value)

    def value(self, obs: np.ndarray) -> float:
        """State-value estimate: the search value oracle."""
        with torch.no_grad():
            t = torch.as_tensor(obs, dtype=torch.float32).unsqueeze(0)
            return float(self.critic(t))

    def update(self, buffer: RolloutBuffer) -> dict:
        cfg = self.config
        obs = torch.as_tensor(buffer.obs)
        act = torch.as_tensor(buffer.act)
        old_logp = torch.as_tensor(buffer.logp)
        mask = torch.as_tensor(buffer.mask)
        adv = torch.as_tensor(buffer.adv)
        ret = torch.as_tensor(buffer.ret)
        adv = (adv - adv.mean()) / (adv.std() + 1e-8)

        n = cfg.rollout_steps
        last = {}
        for _ in range(cfg.update_epochs):
            perm = torch.randperm(n)
            for start in range(0, n, cfg.minibatch_size):
                idx = perm[start:start + cfg.minibatch_size]
                dist = self.actor.distribution(obs[idx], mask[idx])
                logp = dist.log_prob(act[idx])
                ratio = torch.exp(logp - old_logp[idx])
                clipped = torch.clamp(ratio, 1.0 - cfg.clip_ratio,
                                      1.0 + cfg.clip_ratio)
                pi_loss = -torch.min(ratio * adv[idx], clipped * adv[idx]).mean()
                v_loss = ((self.critic(obs[idx]) - ret[idx]) ** 2).mean()
                entropy = dist.entropy().mean()
                loss = (pi_loss + cfg.value_coef * v_loss
                        - cfg.entropy_coef * entropy)
                self.optimizer.zero_grad()
                loss.backward()
                torch.nn.utils.clip_grad_norm_(
                    list(self.actor.parameters())
                    + list(self.critic.parameters()), cfg.max_grad_norm)
                self.optimizer.step()
                last = {"pi_loss": float(pi_loss.detach()),
                        "v_loss": float(v_loss.detach()),
                        "entropy": float(entropy.detach())}
        return last

    # -------------------------------------------------------- serialization

    def state_dict(self) -> dict:
        return {"actor": self.actor.state_dict(),
                "critic": self.critic.state_dict()}

    def load_state_dict(self, state: dict) -> None:
        self.actor.load_state_dict(state["actor"])
        self.critic.load_state_dict(state["critic"])
