"""Training loops for the three agents, with convergence-gated budgets.

Each trainer runs until either the step budget is exhausted or the
evaluation return has stabilized, then checks task-specific evaluation
gates. Gate failures raise TrainingFailure with diagnostics instead of
silently saving a bad checkpoint. Checkpoints carry config echoes, seed
lineage, normalization statistics, and the evaluation record.
"""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field, replace

import numpy as np
import torch

from ..driving_env import DrivingEnv, DrivingEnvConfig, attention_flags
from ..search_env import SearchEnv, SearchEnvConfig
from ..seeding import int_seed, rng_for
from ..supervisor_env import (
    DRIVE,
    SEARCH,
    RunningNorm,
    SupervisorEnv,
    SupervisorEnvConfig,
)
from ..vehicle import LcaConfig, NoiseParams
from .checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from .nets import (
    driving_action_limit,
    driving_obs_scale,
    search_obs_scale,
    supervisor_obs_scale,
)
from .ppo import PpoAgent, PpoConfig
from .sac import ReplayBuffer, SacAgent, SacConfig

GATE_NOISE = NoiseParams(1e-4, 3e-4, 1e-4, 1e-4)


class TrainingFailure(RuntimeError):
    """A trained agent failed its evaluation gates."""

    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


@dataclass
class TrainConfig:
    agent: str                         # driving | search | supervisor
    total_env_steps: int
    seed: int = 0
    eval_every: int = 10_000           # env steps between evaluation rounds
    eval_episodes: int = 5
    convergence_window: int = 100      # eval episodes per moving average
    convergence_tolerance: float = 0.02
    convergence_abs_floor: float = 0.05
    min_steps_before_stop: int = 0
    search_grids: tuple[tuple[int, int], ...] = ((2, 3), (3, 3), (3, 4))
    search_task_types: tuple[int, ...] = (0, 1)
    supervisor_speeds_kmh: tuple[float, ...] = (30.0, 60.0, 90.0, 120.0, 150.0)
    log_every: int = 20_000
    progress: bool = True


@dataclass
class EvalRecord:
    env_steps: int
    mean_return: float
    returns: list = field(default_factory=list)


def _note(cfg: TrainConfig, msg: str) -> None:
    if cfg.progress:
        print(f"[{cfg.agent}] {msg}", flush=True)


class ConvergenceTracker:
    """Early stop when consecutive eval-return windows agree within tol.

    Relative change is measured against max(|m0|, |m1|); an absolute floor
    handles the near-zero returns of a well-behaved driving policy, where
    a relative criterion would never fire.
    """

    def __init__(self, window: int, tol: float, abs_floor: float):
        self.window = window
        self.tol = tol
        self.abs_floor = abs_floor
        self.returns: list[float] = []

    def extend(self, values) -> None:
        self.returns.extend(float(v) for v in values)

    @property
    def converged(self) -> bool:
        w = self.window
        if len(self.returns) < 2 * w:
            return False
        m1 = float(np.mean(self.returns[-w:]))
        m0 = float(np.mean(self.returns[-2 * w:-w]))
        gap = abs(m1 - m0)
        return gap <= max(self.tol * max(abs(m0), abs(m1)), self.abs_floor)


# ===================================================================
# driving
# ===================================================================

def _driving_episode_config(rng: np.random.Generator,
                            base: DrivingEnvConfig) -> DrivingEnvConfig:
    """Domain randomization: fresh speed limit and lane-centering draw."""
    return replace(
        base,
        speed_limit_kmh=float(rng.uniform(30.0, 150.0)),
        lca=LcaConfig(enabled=bool(rng.random() < 0.5)))


def run_driving_episode(env: DrivingEnv, policy, seed: int,
                        flags: np.ndarray | None = None,
                        max_steps: int | None = None):
    """Roll one episode; returns (return, steps, on_lane_fraction)."""
    obs = env.reset(seed)
    total, steps, on_lane = 0.0, 0, 0
    horizon = max_steps if max_steps is not None else 10 ** 9
    while steps < horizon:
        attended = bool(flags[steps]) if flags is not None else True
        out = env.step(policy(obs), attended)
        obs = out.observation
        total += out.reward
        on_lane += int(out.snapshot.lane.on_lane)
        steps += 1
        if out.terminated or out.truncated:
            break
    return total, steps, on_lane / max(steps, 1)


def evaluate_driving(agent: SacAgent, base: DrivingEnvConfig, seed: int,
                     episodes: int, horizon_s: float = 60.0) -> list[float]:
    """Deterministic-policy eval under domain randomization, full attention."""
    returns = []
    for ep in range(episodes):
        rng = rng_for(seed, "evalcfg", ep)
        cfg = replace(_driving_episode_config(rng, base),
                      truncation_horizon_s=horizon_s)
        env = DrivingEnv(cfg)
        ret, _, _ = run_driving_episode(
            env, lambda o: agent.act(o, deterministic=True),
            int_seed(seed, "eval", ep))
        returns.append(ret)
    return returns


def driving_gates(agent: SacAgent, base: DrivingEnvConfig,
                  seed: int) -> dict:
    """Post-training checks under low-noise, fully attended driving."""
    on_lane_fracs, step_rewards = [], []
    for ep, speed in enumerate((60.0, 90.0, 120.0) * 4):
        cfg = replace(base, noise=GATE_NOISE, speed_limit_kmh=speed,
                      lca=LcaConfig(enabled=False),
                      truncation_horizon_s=60.0)
        env = DrivingEnv(cfg)
        ret, steps, frac = run_driving_episode(
            env, lambda o: agent.act(o, deterministic=True),
            int_seed(seed, "gate", ep))
        on_lane_fracs.append(frac)
        step_rewards.append(ret / max(steps, 1))
    return {
        "on_lane_fraction": float(np.mean(on_lane_fracs)),
        "mean_step_reward": float(np.mean(step_rewards)),
        "on_lane_pass": bool(np.mean(on_lane_fracs) >= 0.95),
        "step_reward_pass": bool(np.mean(step_rewards) >= -0.01),
    }


def train_driving(config: TrainConfig,
                  env_config: DrivingEnvConfig | None = None,
                  sac_config: SacConfig | None = None):
    """Train the continuous-control driving agent.

    Episodes randomize speed limit and lane-centering availability; the
    attention curriculum interleaves attended and blind intervals so the
    critic learns the value of looking away. Returns (agent, eval_stats).
    """
    torch.manual_seed(int_seed(config.seed, "torch"))
    torch.set_num_threads(1)
    base = env_config if env_config is not None else DrivingEnvConfig()
    sac_cfg = sac_config if sac_config is not None else SacConfig()
    agent = SacAgent(12, 2, driving_obs_scale(), driving_action_limit(),
                     sac_cfg)
    replay = ReplayBuffer(12, 2, sac_cfg.replay_capacity)
    rng = rng_for(config.seed, "driving-train")
    tracker = ConvergenceTracker(config.convergence_window,
                                 config.convergence_tolerance,
                                 config.convergence_abs_floor)
    eval_curve: list[EvalRecord] = []

    step, episode = 0, 0
    next_eval = config.eval_every
    t0 = time.monotonic()
    while step < config.total_env_steps:
        ep_cfg = _driving_episode_config(rng_for(config.seed, "epcfg", episode),
                                         base)
        env = DrivingEnv(ep_cfg)
        obs = env.reset(int_seed(config.seed, "ep", episode))
        n_steps = int(ep_cfg.truncation_horizon_s / ep_cfg.dt_s) + 2
        flags = attention_flags(rng_for(config.seed, "attn", episode),
                                ep_cfg, n_steps)
        ep_step = 0
        while True:
            if step < sac_cfg.start_steps:
                limit = driving_action_limit()
                action = rng.uniform(-limit, limit)
            else:
                action = agent.act(obs)
            out = env.step(action, bool(flags[ep_step]))
            # Truncation is a bookkeeping horizon, not a real end state:
            # only genuine termination cuts the bootstrap.
            replay.store(obs, action, out.reward, out.observation,
                         float(out.terminated))
            obs = out.observation
            step += 1
            ep_step += 1
            if (step >= sac_cfg.update_after
                    and step % sac_cfg.update_every == 0):
                agent.update(replay.sample(sac_cfg.batch_size, rng))
            if out.terminated or out.truncated or step >= config.total_env_steps:
                break
        episode += 1

        if step >= next_eval:
            next_eval += config.eval_every
            rets = evaluate_driving(agent, base,
                                    int_seed(config.seed, "evalseed", step),
                                    config.eval_episodes)
            tracker.extend(rets)
            eval_curve.append(EvalRecord(step, float(np.mean(rets)), rets))
            _note(config, f"step {step}: eval return "
                          f"{np.mean(rets):+.3f} ({time.monotonic() - t0:.0f}s)")
            if tracker.converged and step >= config.min_steps_before_stop:
                _note(config, f"converged at step {step}")
                break

    gates = driving_gates(agent, base, int_seed(config.seed, "gates"))
    eval_stats = {
        "converged": tracker.converged or step >= config.total_env_steps,
        "env_steps": step,
        "episodes": episode,
        "eval_curve": [[r.env_steps, r.mean_return] for r in eval_curve],
        "final_eval_return": eval_curve[-1].mean_return if eval_curve else None,
        **gates,
    }
    if not (gates["on_lane_pass"] and gates["step_reward_pass"]):
        raise TrainingFailure("driving agent failed evaluation gates",
                              eval_stats)
    return agent, eval_stats


# ===================================================================
# search
# ===================================================================

def run_search_episode(env: SearchEnv, policy, rng: np.random.Generator,
                       rows: int, cols: int, task_type: int,
                       max_steps: int = 100):
    """Roll one episode; returns (return, elapsed_s, completed)."""
    obs = env.reset(rng, rows=rows, cols=cols, task_type=task_type)
    total, elapsed = 0.0, 0.0
    for _ in range(max_steps):
        action = policy(obs, env.action_mask())
        obs, reward, done, duration = env.step(action)
        total += reward
        elapsed += duration
        if done:
            return total, elapsed, True
    return total, elapsed, False


def random_search_policy(rng: np.random.Generator):
    def policy(obs, mask):
        return int(rng.choice(np.flatnonzero(mask)))
    return policy


def sweep_search(policy_factory, seed: int, episodes: int,
                 grids=((2, 3), (3, 3), (3, 4)),
                 task_types=(0, 1)) -> list[float]:
    """Returns over a deterministic rotation of grid sizes and goals."""
    env = SearchEnv(SearchEnvConfig())
    returns = []
    for ep in range(episodes):
        rng = rng_for(seed, "eval", ep)
        rows, cols = grids[ep % len(grids)]
        ttype = task_types[(ep // len(grids)) % len(task_types)]
        policy = policy_factory(rng)
        ret, _, done = run_search_episode(env, policy, rng, rows, cols, ttype)
        returns.append(ret if done else ret - 5.0)   # stuck policies sink
    return returns


def greedy_factory(agent: PpoAgent):
    def factory(rng):
        def policy(obs, mask):
            a, _, _ = agent.act(obs, mask, deterministic=True)
            return a
        return policy
    return factory


def evaluate_search(agent: PpoAgent, seed: int, episodes: int = 20,
                    grids=((2, 3), (3, 3), (3, 4)),
                    task_types=(0, 1)) -> list[float]:
    return sweep_search(greedy_factory(agent), seed, episodes, grids,
                        task_types)


def search_gates(agent: PpoAgent, seed: int) -> dict:
    """Completion speed on the small grid, anchored to a random policy.

    Greedy completion time must undercut uniform-random fixation by a wide
    margin; relative returns are a poor yardstick here because both
    policies collect the same completion bonuses.
    """
    env = SearchEnv(SearchEnvConfig())
    episodes = 50
    policy = greedy_factory(agent)(None)
    agent_times, completed = [], 0
    for ep in range(episodes):
        _, elapsed, done = run_search_episode(
            env, policy, rng_for(seed, "gate", ep), 2, 3, 1)
        if done:
            completed += 1
            agent_times.append(elapsed)
    rand_times = []
    for ep in range(episodes):
        rng = rng_for(seed, "base", ep)
        _, elapsed, done = run_search_episode(
            env, random_search_policy(rng), rng_for(seed, "gate", ep),
            2, 3, 1)
        if done:
            rand_times.append(elapsed)
    return {
        "mean_time_2x3": float(np.mean(agent_times)) if agent_times
        else math.inf,
        "random_mean_time_2x3": float(np.mean(rand_times)) if rand_times
        else math.inf,
        "completion_rate": completed / episodes,
    }


def train_search(config: TrainConfig,
                 ppo_config: PpoConfig | None = None):
    """Train the discrete visual-search agent across grid sizes and goals."""
    torch.manual_seed(int_seed(config.seed, "torch"))
    torch.set_num_threads(1)
    ppo_cfg = ppo_config if ppo_config is not None else PpoConfig()
    agent = PpoAgent(28, 12, search_obs_scale(), ppo_cfg)
    env = SearchEnv(SearchEnvConfig())
    rng = rng_for(config.seed, "search-train")
    tracker = ConvergenceTracker(config.convergence_window,
                                 config.convergence_tolerance,
                                 config.convergence_abs_floor)
    eval_curve: list[EvalRecord] = []

    step, episode = 0, 0
    next_eval = config.eval_every
    buf = agent.make_buffer()
    grids = config.search_grids
    types = config.search_task_types
    obs = env.reset(rng_for(config.seed, "task", episode),
                    rows=grids[0][0], cols=grids[0][1], task_type=types[0])
    ep_len = 0
    t0 = time.monotonic()
    while step < config.total_env_steps:
        mask = env.action_mask()
        action, logp, value = agent.act(obs, mask)
        nxt, reward, done, _ = env.step(action)
        ep_len += 1
        # A hard step cap cuts pathological early-training loops; the cut
        # is treated as an episode end for the advantage recursion.
        ep_end = done or ep_len >= 100
        buf.store(obs, action, logp, reward, value, ep_end, mask)
        obs = nxt
        step += 1
        if ep_end:
            episode += 1
            rows, cols = grids[int(rng.integers(len(grids)))]
            ttype = types[int(rng.integers(len(types)))]
            obs = env.reset(rng_for(config.seed, "task", episode),
                            rows=rows, cols=cols, task_type=ttype)
            ep_len = 0
        if buf.full:
            last_value = 0.0 if ep_end else agent.value(obs)
            buf.finish(last_value)
            agent.update(buf)
        if step >= next_eval:
            next_eval += config.eval_every
            rets = evaluate_search(agent, int_seed(config.seed, "evalseed", step),
                                   episodes=config.eval_episodes * 4,
                                   grids=grids, task_types=types)
            tracker.extend(rets)
            eval_curve.append(EvalRecord(step, float(np.mean(rets)), rets))
            _note(config, f"step {step}: eval return "
                          f"{np.mean(rets):+.3f} ({time.monotonic() - t0:.0f}s)")
            if tracker.converged and step >= config.min_steps_before_stop:
                _note(config, f"converged at step {step}")
                break

    gates = search_gates(agent, int_seed(config.seed, "gates"))
    fast_enough = (gates["mean_time_2x3"]
                   <= 0.6 * gates["random_mean_time_2x3"])
    eval_stats = {
        "converged": tracker.converged or step >= config.total_env_steps,
        "env_steps": step,
        "episodes": episode,
        "eval_curve": [[r.env_steps, r.mean_return] for r in eval_curve],
        "final_eval_return": eval_curve[-1].mean_return if eval_curve else None,
        "time_gate_pass": bool(fast_enough),
        **gates,
    }
    if gates["completion_rate"] < 1.0 or not fast_enough:
        raise TrainingFailure("search agent failed evaluation gates",
                              eval_stats)
    return agent, eval_stats


# ===================================================================
# supervisor
# ===================================================================

def frozen_driving_policy(agent: SacAgent):
    def policy(obs):
        return agent.act(obs, deterministic=True)
    return policy


def frozen_search_policy(agent: PpoAgent):
    """Sample from the frozen policy with the caller's generator.

    Sampling rather than argmax: a deterministic tie or a misranked state
    could otherwise pin the fixation sequence into a loop that never
    finishes the task.
    """
    def policy(obs, mask, rng: np.random.Generator):
        with torch.no_grad():
            t = torch.as_tensor(obs, dtype=torch.float32).unsqueeze(0)
            m = torch.as_tensor(mask, dtype=torch.bool).unsqueeze(0)
            probs = agent.actor.distribution(t, m).probs.squeeze(0).numpy()
        probs = np.clip(probs, 0.0, None)
        probs /= probs.sum()
        return int(rng.choice(len(probs), p=probs))
    return policy


def load_subtask_agents(driving_ckpt_path, search_ckpt_path):
    """Rebuild frozen subtask agents; both must have converged."""
    d_ckpt = load_checkpoint(driving_ckpt_path, expected_kind="driving")
    s_ckpt = load_checkpoint(search_ckpt_path, expected_kind="search")
    for name, ckpt in (("driving", d_ckpt), ("search", s_ckpt)):
        if not ckpt.eval_stats.get("converged", False):
            raise TrainingFailure(
                f"{name} checkpoint is not marked converged; "
                "refusing to train a supervisor on it",
                {"checkpoint": name, "eval_stats": ckpt.eval_stats})
    d_hidden = tuple(d_ckpt.train_config.get("hidden", (128, 128)))
    s_hidden = tuple(s_ckpt.train_config.get("hidden", (64, 64)))
    driving = SacAgent(12, 2, driving_obs_scale(), driving_action_limit(),
                       SacConfig(hidden=d_hidden))
    driving.load_state_dict(d_ckpt.params)
    search = PpoAgent(28, 12, search_obs_scale(), PpoConfig(hidden=s_hidden))
    search.load_state_dict(s_ckpt.params)
    return driving, search


def make_supervisor_env(driving: SacAgent, search: PpoAgent,
                        env_config: DrivingEnvConfig,
                        search_config: SearchEnvConfig,
                        sup_config: SupervisorEnvConfig,
                        norm: RunningNorm | None = None,
                        training: bool = False) -> SupervisorEnv:
    return SupervisorEnv(
        DrivingEnv(env_config), SearchEnv(search_config),
        frozen_driving_policy(driving), driving.value,
        frozen_search_policy(search), search.value,
        sup_config, norm=norm, training=training)


def run_supervisor_episode(env: SupervisorEnv, policy, seed: int,
                           max_decisions: int = 4000):
    obs = env.reset(seed)
    total, decisions = 0.0, 0
    while not env.done and decisions < max_decisions:
        obs, reward, done, _ = env.step(policy(obs))
        total += reward
        decisions += 1
    return total, decisions


def _supervisor_episode_env(config: TrainConfig, episode: int,
                            driving: SacAgent, search: PpoAgent,
                            base: DrivingEnvConfig,
                            norm: RunningNorm, training: bool):
    rng = rng_for(config.seed, "supcfg", episode)
    speed = float(rng.choice(config.supervisor_speeds_kmh))
    lca = bool(rng.random() < 0.5)
    rows, cols = config.search_grids[int(rng.integers(len(config.search_grids)))]
    ttype = config.search_task_types[
        int(rng.integers(len(config.search_task_types)))]
    env_cfg = replace(base, speed_limit_kmh=speed, lca=LcaConfig(enabled=lca))
    return make_supervisor_env(
        driving, search, env_cfg, SearchEnvConfig(rows=rows, cols=cols,
                                                  task_type=ttype),
        SupervisorEnvConfig(), norm=norm, training=training)


def evaluate_supervisor(agent: PpoAgent, config: TrainConfig,
                        driving: SacAgent, search: PpoAgent,
                        base: DrivingEnvConfig, norm: RunningNorm,
                        seed: int, episodes: int) -> list[float]:
    returns = []
    for ep in range(episodes):
        env = _supervisor_episode_env(config, 10_000_000 + ep, driving,
                                      search, base, norm, training=False)

        def policy(obs):
            a, _, _ = agent.act(obs, deterministic=True)
            return a
        ret, _ = run_supervisor_episode(env, policy, int_seed(seed, "ep", ep))
        returns.append(ret)
    return returns


def supervisor_gates(agent: PpoAgent, config: TrainConfig,
                     driving: SacAgent, search: PpoAgent,
                     base: DrivingEnvConfig, norm: RunningNorm,
                     seed: int) -> dict:
    """The learned allocation must beat both trivial attention baselines."""
    episodes = 10

    def learned(obs):
        a, _, _ = agent.act(obs, deterministic=True)
        return a

    def always_drive(obs):
        return DRIVE

    class Alternator:
        def __init__(self):
            self.last = SEARCH

        def __call__(self, obs):
            self.last = DRIVE if self.last == SEARCH else SEARCH
            return self.last

    scores = {}
    for name, make_policy in (("learned", lambda: learned),
                              ("always_drive", lambda: always_drive),
                              ("alternation", Alternator)):
        rets = []
        for ep in range(episodes):
            env = _supervisor_episode_env(config, 20_000_000 + ep, driving,
                                          search, base, norm, training=False)
            ret, _ = run_supervisor_episode(env, make_policy(),
                                            int_seed(seed, name, ep))
            rets.append(ret)
        scores[name] = float(np.mean(rets))
    return {
        "learned_return": scores["learned"],
        "always_drive_return": scores["always_drive"],
        "alternation_return": scores["alternation"],
        "beats_always_drive": scores["learned"] > scores["always_drive"],
        "beats_alternation": scores["learned"] > scores["alternation"],
    }


def train_supervisor(config: TrainConfig, driving_ckpt_path,
                     search_ckpt_path,
                     env_config: DrivingEnvConfig | None = None,
                     ppo_config: PpoConfig | None = None):
    """Train the attention allocator over frozen subtask agents.

    Returns (agent, eval_stats, norm). The norm carries the running value
    standardization accumulated during training; it ships inside the
    checkpoint so deployment standardizes identically.
    """
    torch.manual_seed(int_seed(config.seed, "torch"))
    torch.set_num_threads(1)
    driving, search = load_subtask_agents(driving_ckpt_path, search_ckpt_path)
    base = env_config if env_config is not None else DrivingEnvConfig()
    ppo_cfg = ppo_config if ppo_config is not None else PpoConfig()
    agent = PpoAgent(3, 2, supervisor_obs_scale(), ppo_cfg)
    norm = RunningNorm(enabled=True)
    tracker = ConvergenceTracker(config.convergence_window,
                                 config.convergence_tolerance,
                                 config.convergence_abs_floor)
    eval_curve: list[EvalRecord] = []

    step, episode = 0, 0
    next_eval = config.eval_every
    buf = agent.make_buffer()
    env = _supervisor_episode_env(config, episode, driving, search, base,
                                  norm, training=True)
    obs = env.reset(int_seed(config.seed, "ep", episode))
    t0 = time.monotonic()
    while step < config.total_env_steps:
        action, logp, value = agent.act(obs)
        nxt, reward, done, _ = env.step(action)
        buf.store(obs, action, logp, reward, value, done)
        obs = nxt
        step += 1
        if done:
            episode += 1
            env = _supervisor_episode_env(config, episode, driving, search,
                                          base, norm, training=True)
            obs = env.reset(int_seed(config.seed, "ep", episode))
        if buf.full:
            buf.finish(0.0 if done else agent.value(obs))
            agent.update(buf)
        if step >= next_eval:
            next_eval += config.eval_every
            rets = evaluate_supervisor(
                agent, config, driving, search, base, norm,
                int_seed(config.seed, "evalseed", step), config.eval_episodes)
            tracker.extend(rets)
            eval_curve.append(EvalRecord(step, float(np.mean(rets)), rets))
            _note(config, f"step {step}: eval return "
                          f"{np.mean(rets):+.3f} ({time.monotonic() - t0:.0f}s)")
            if tracker.converged and step >= config.min_steps_before_stop:
                _note(config, f"converged at step {step}")
                break

    gates = supervisor_gates(agent, config, driving, search, base, norm,
                             int_seed(config.seed, "gates"))
    eval_stats = {
        "converged": tracker.converged or step >= config.total_env_steps,
        "env_steps": step,
        "episodes": episode,
        "eval_curve": [[r.env_steps, r.mean_return] for r in eval_curve],
        "final_eval_return": eval_curve[-1].mean_return if eval_curve else None,
        **gates,
    }
    if not (gates["beats_always_drive"] and gates["beats_alternation"]):
        raise TrainingFailure("supervisor failed baseline comparisons",
                              eval_stats)
    return agent, eval_stats, norm


# ===================================================================
# persistence helpers
# ===================================================================

def checkpoint_for(agent, kind: str, config: TrainConfig, eval_stats: dict,
                   norm: RunningNorm | None = None,
                   env_config: dict | None = None,
                   extra_train_config: dict | None = None) -> Checkpoint:
    train_cfg = asdict(config)
    if extra_train_config:
        train_cfg.update(extra_train_config)
    return Checkpoint(
        agent_kind=kind,
        params=agent.state_dict(),
        norm_stats=norm.to_dict() if norm is not None else {},
        train_config=train_cfg,
        env_config=env_config or {},
        seed_lineage=[config.seed, kind],
        eval_stats=eval_stats)


def train_and_save(kind: str, out_path, config: TrainConfig,
                   driving_ckpt=None, search_ckpt=None, **kwargs):
    """One-call train-plus-checkpoint for the command line front end."""
    if kind == "driving":
        agent, stats = train_driving(config, **kwargs)
        norm = None
        extra = {"hidden": list((kwargs.get("sac_config") or SacConfig()).hidden)}
    elif kind == "search":
        agent, stats = train_search(config, **kwargs)
        norm = None
        extra = {"hidden": list((kwargs.get("ppo_config") or PpoConfig()).hidden)}
    elif kind == "supervisor":
        agent, stats, norm = train_supervisor(config, driving_ckpt,
                                              search_ckpt, **kwargs)
        extra = {"hidden": list((kwargs.get("ppo_config") or PpoConfig()).hidden)}
    else:
        raise ValueError(f"unknown agent kind: {kind!r}")
    ckpt = checkpoint_for(agent, kind, config, stats, norm,
                          extra_train_config=extra)
    path = save_checkpoint(ckpt, out_path)
    return agent, stats, path
