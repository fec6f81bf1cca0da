"""Supervisory attention allocation over driving and in-car search.

The supervisor observes only the two subtask value estimates and the
current attention locus, and decides where the eyes go next. Gaze
transitions cost two unattended 0.1 s driving steps in each direction; a
search step of duration d is covered by ceil(d / 0.1) unattended driving
steps while the wall clock advances by the true d; driving rewards pool
with weight w_d against search rewards. Two clocks are kept deliberately:
wall_time sums true durations, while the driving dynamics always advance
in whole 0.1 s ticks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .driving_env import DrivingEnv
from .search_env import SearchEnv
from .seeding import int_seed, rng_for
from .vehicle import DT

DRIVE = 0
SEARCH = 1


@dataclass
class SupervisorEnvConfig:
    w_d: float = 5.0                   # pooling weight on driving rewards
    n_tasks: int = 10                  # episode ends after this many tasks
    transition_steps: int = 2          # gaze transition cost, 0.1 s ticks
    value_standardization: bool = True  # running normalization of the values


@dataclass
class RunningNorm:
    """Per-channel running standardization of the two value estimates."""

    enabled: bool = True
    count: int = 0
    mean: list = field(default_factory=lambda: [0.0, 0.0])
    m2: list = field(default_factory=lambda: [0.0, 0.0])

    def update(self, values) -> None:
        self.count += 1
        for i, x in enumerate(values):
            delta = x - self.mean[i]
            self.mean[i] += delta / self.count
            self.m2[i] += delta * (x - self.mean[i])

    def normalize(self, values) -> tuple[float, float]:
        if not self.enabled or self.count < 2:
            return tuple(float(x) for x in values)
        out = []
        for i, x in enumerate(values):
            var = self.m2[i] / (self.count - 1)
            out.append((x - self.mean[i]) / math.sqrt(var + 1e-8))
        return tuple(out)

    def to_dict(self) -> dict:
        return {"enabled": self.enabled, "count": self.count,
                "mean": list(self.mean), "m2": list(self.m2)}

    @classmethod
    def from_dict(cls, d: dict) -> "RunningNorm":
        return cls(enabled=bool(d["enabled"]), count=int(d["count"]),
                   mean=list(d["mean"]), m2=list(d["m2"]))


@dataclass
class SubstepRecord:
    """One driving sub-step as it appears in traces."""

    t_s: float                 # wall clock after this sub-step
    attended: bool
    true_x: float
    true_y: float
    bel_x: float
    bel_y: float
    sigma_pos: float
    v_mps: float
    delta_rad: float
    r_drive: float
    r_search: float            # search reward lands on its last covering tick
    lat_offset: float
    glance_id: int             # -1 when eyes on road
    task_id: int               # -1 when the display is inactive
    offroad: bool = False      # swept path broke the lane boundary


@dataclass
class JointStepLog:
    wall_time: float           # cumulative, true durations
    wall_delta: float
    locus: int
    driving_substeps: int      # executed during this supervisor step
    pooled_reward: float
    glance_transition: bool
    search_duration: float     # true d of the search step, 0 if none
    task_completed: bool
    raw_v_drive: float
    raw_v_search: float
    substeps: list[SubstepRecord] = field(default_factory=list)


class SupervisorEnv:
    """Two-subtask supervisory MDP with stub-friendly policy injection.

    driving_policy(obs) -> action, driving_value(obs) -> float,
    search_policy(obs, mask, rng) -> action, search_value(obs) -> float.
    """

    def __init__(self, driving_env: DrivingEnv, search_env: SearchEnv,
                 driving_policy, driving_value, search_policy, search_value,
                 config: SupervisorEnvConfig | None = None,
                 norm: RunningNorm | None = None, training: bool = False):
        if driving_policy is None or driving_value is None:
            raise ValueError("a driving policy and value oracle are required")
        if search_policy is None or search_value is None:
            raise ValueError("a search policy and value oracle are required")
        self.driving_env = driving_env
        self.search_env = search_env
        self.driving_policy = driving_policy
        self.driving_value = driving_value
        self.search_policy = search_policy
        self.search_value = search_value
        self.config = config if config is not None else SupervisorEnvConfig()
        self.norm = norm if norm is not None else RunningNorm(
            enabled=self.config.value_standardization)
        self.norm.enabled = self.config.value_standardization
        self.training = training
        self._seed = None
        self._rng = None
        self.locus = DRIVE
        self.wall_time = 0.0
        self.total_substeps = 0
        self.tasks_completed = 0
        self.tasks_spawned = 0
        self.search_active = False
        self.delay_remaining = 0.0
        self.glance_count = 0
        self.reset_log: list[SubstepRecord] = []
        self._done = True

    # ------------------------------------------------------------ lifecycle

    def reset(self, seed: int) -> np.ndarray:
        self._seed = int(seed)
        self._rng = rng_for(seed, "supervisor")
        self.driving_env.reset(int_seed(seed, "drive"))
        self.locus = DRIVE
        self.wall_time = 0.0
        self.total_substeps = 0
        self.tasks_completed = 0
        self.tasks_spawned = 0
        self.glance_count = 0
        self.delay_remaining = 0.0
        self._done = False
        self.reset_log = []
        # One second of attended driving before the first decision.
        for _ in range(10):
            self._drive_substep(True, DT, self.reset_log, 0.0)
            if self._done:
                break
        self._spawn_task()
        return self._observation()

    def _spawn_task(self) -> None:
        self.search_env.reset(rng_for(self._seed, "search-task",
                                      self.tasks_spawned))
        self.tasks_spawned += 1
        self.search_active = True

    # ------------------------------------------------------------ sub-steps

    def _drive_substep(self, attended: bool, wall_delta: float,
                       records: list[SubstepRecord], r_search: float) -> float:
        action = self.driving_policy(self.driving_env.observation())
        out = self.driving_env.step(action, attended)
        self.wall_time += wall_delta
        self.total_substeps += 1
        self.delay_remaining = max(0.0, self.delay_remaining - wall_delta)
        b = self.driving_env.belief
        records.append(SubstepRecord(
            t_s=self.wall_time, attended=attended,
            true_x=out.snapshot.state.center[0],
            true_y=out.snapshot.state.center[1],
            bel_x=b.position[0], bel_y=b.position[1], sigma_pos=b.sigma_pos,
            v_mps=out.snapshot.state.speed,
            delta_rad=out.snapshot.delta_executed,
            r_drive=out.reward, r_search=r_search,
            lat_offset=out.snapshot.lane.lateral_offset,
            glance_id=-1 if attended else self.glance_count - 1,
            task_id=(self.tasks_completed if self.search_active else -1),
            offroad=out.snapshot.offroad))
        if out.terminated or out.truncated:
            self._done = True
        return out.reward

    def _search_block(self, records: list[SubstepRecord]) -> tuple[float, float, bool]:
        """One search action (or a 0.1 s wait at an inactive display)."""
        if not self.search_active:
            r = self._drive_substep(False, DT, records, 0.0)
            return r, 0.0, False
        obs_s = self.search_env.observation()
        mask = self.search_env.action_mask()
        action = self.search_policy(obs_s, mask, self._rng)
        _, r_search, task_done, duration = self.search_env.step(action)
        ticks = max(1, math.ceil(duration / DT - 1e-9))
        r_drive = 0.0
        for i in range(ticks):
            if self._done:
                break
            r_drive += self._drive_substep(
                False, duration / ticks, records,
                r_search if i == ticks - 1 else 0.0)
        if task_done:
            self.tasks_completed += 1
            self.search_active = False
            self.delay_remaining = self.search_env.config.inter_task_delay_s
        return r_drive, r_search, task_done

    # ----------------------------------------------------------------- step

    def step(self, attend: int) -> tuple[np.ndarray, float, bool, JointStepLog]:
        if self._done:
            raise RuntimeError("step called on a finished supervisor episode")
        if attend not in (DRIVE, SEARCH):
            raise ValueError(f"attend must be {DRIVE} or {SEARCH}")
        if self.search_active is False and self.delay_remaining <= 0.0 \
                and self.tasks_completed < self.config.n_tasks:
            self._spawn_task()

        records: list[SubstepRecord] = []
        wall_before = self.wall_time
        r_drive = 0.0
        r_search = 0.0
        task_completed = False
        search_duration = 0.0
        glance_transition = False

        if attend == DRIVE and self.locus == DRIVE:
            r_drive += self._drive_substep(True, DT, records, 0.0)
        elif attend == SEARCH and self.locus == DRIVE:
            glance_transition = True
            self.glance_count += 1
            self.locus = SEARCH
            for _ in range(self.config.transition_steps):
                if not self._done:
                    r_drive += self._drive_substep(False, DT, records, 0.0)
            if not self._done:
                elapsed_before = self.search_env.state.elapsed \
                    if self.search_active else 0.0
                rd, r_search, task_completed = self._search_block(records)
                r_drive += rd
                if self.search_active or task_completed:
                    search_duration = (self.search_env.state.elapsed
                                       - elapsed_before)
        elif attend == SEARCH and self.locus == SEARCH:
            elapsed_before = self.search_env.state.elapsed \
                if self.search_active else 0.0
            rd, r_search, task_completed = self._search_block(records)
            r_drive += rd
            if self.search_active or task_completed:
                search_duration = (self.search_env.state.elapsed
                                   - elapsed_before)
        else:  # attend DRIVE while locus SEARCH: glance back
            glance_transition = True
            for _ in range(self.config.transition_steps):
                if not self._done:
                    r_drive += self._drive_substep(False, DT, records, 0.0)
            self.locus = DRIVE
            if not self._done:
                r_drive += self._drive_substep(True, DT, records, 0.0)

        if task_completed and self.tasks_completed >= self.config.n_tasks \
                and not self._done:
            # Close the final glance before ending the episode so every
            # glance in the trace has its return transition.
            for _ in range(self.config.transition_steps):
                if not self._done:
                    r_drive += self._drive_substep(False, DT, records, 0.0)
            self.locus = DRIVE
            if not self._done:
                r_drive += self._drive_substep(True, DT, records, 0.0)
            self._done = True

        pooled = self.config.w_d * r_drive + r_search
        obs = self._observation()
        log = JointStepLog(
            wall_time=self.wall_time, wall_delta=self.wall_time - wall_before,
            locus=self.locus, driving_substeps=len(records),
            pooled_reward=pooled, glance_transition=glance_transition,
            search_duration=search_duration, task_completed=task_completed,
            raw_v_drive=self._raw_v_drive, raw_v_search=self._raw_v_search,
            substeps=records)
        return obs, pooled, self._done, log

    # ---------------------------------------------------------- observation

    def _observation(self) -> np.ndarray:
        self._raw_v_drive = float(
            self.driving_value(self.driving_env.observation()))
        if self.search_active and not self._done \
                and not self.search_env.state.done:
            self._raw_v_search = float(
                self.search_value(self.search_env.observation()))
        else:
            self._raw_v_search = 0.0
        if self.training:
            self.norm.update((self._raw_v_drive, self._raw_v_search))
        v_d, v_s = self.norm.normalize((self._raw_v_drive, self._raw_v_search))
        return np.array([v_d, v_s, float(self.locus)], dtype=np.float32)

    @property
    def done(self) -> bool:
        return self._done
