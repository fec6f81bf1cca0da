"""Driving MDP composing road geometry, vehicle dynamics and driver belief.

The policy controls steering and acceleration from a 12-entry observation
built entirely from the driver's belief: believed speed, heading and last
steering command, five lane-boundary probe distances cast from the believed
pose, the positional uncertainty, a lane-centering flag, the speed limit and
an attended flag. The true vehicle state never enters the observation; it
drives the reward (off-lane detection on the swept path, speed-band
penalty) and episode termination at the road's end region.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .cognition import (
    BeliefState,
    belief_from_truth,
    fuse,
    observe,
    predict_unattended,
)
from .geometry import (
    LaneQuery,
    RoadGeneratorConfig,
    RoadSpec,
    detect_offroad_transition,
    generate_road,
    in_end_region,
    lane_query,
    probe_distances,
)
from .seeding import int_seed, rng_for
from .vehicle import (
    DELTA_MAX,
    DT,
    KMH_TO_MPS,
    ControlInput,
    LcaConfig,
    NoiseParams,
    VehicleState,
    lca_correction,
    step_vehicle,
)

DRIVING_OBS_DIM = 12


@dataclass
class DrivingEnvConfig:
    road: RoadGeneratorConfig = field(default_factory=RoadGeneratorConfig)
    fixed_road: RoadSpec | None = None   # reuse one road instead of sampling
    noise: NoiseParams = field(default_factory=lambda: NoiseParams(
        sigma_steer_prop=0.01, sigma_steer_rad=0.017,
        sigma_time_s=0.01, sigma_obs_m=0.01))
    lca: LcaConfig = field(default_factory=LcaConfig)
    speed_limit_kmh: float = 60.0
    speed_tolerance_kmh: float = 10.0
    offroad_penalty: float = -1.0        # per step with any off-lane contact
    speed_penalty_factor: float = -0.1   # per km/h beyond the tolerance band
    dt_s: float = DT
    truncation_horizon_s: float = 120.0
    unattended_range_s: tuple[float, float] = (0.2, 5.0)
    attended_range_s: tuple[float, float] = (0.5, 3.0)
    acc_enabled: bool = False            # cruise control pins speed at limit

    def validate(self) -> None:
        if self.dt_s <= 0:
            raise ValueError("dt_s must be positive")
        if self.speed_tolerance_kmh < 0:
            raise ValueError("speed_tolerance_kmh must be nonnegative")
        if self.truncation_horizon_s <= 0:
            raise ValueError("truncation_horizon_s must be positive")
        for lo, hi in (self.unattended_range_s, self.attended_range_s):
            if not 0 < lo <= hi < self.truncation_horizon_s:
                raise ValueError("curriculum bounds must lie within "
                                 "(0, truncation_horizon_s)")


@dataclass
class TrueSnapshot:
    """Ground truth for metrics and traces; never fed to policies."""

    state: VehicleState
    delta_executed: float       # realized steering after LCA and noise, rad
    offroad: bool               # swept path touched off-lane this step
    lane: LaneQuery             # endpoint lane-relative position


@dataclass
class DrivingStepOutcome:
    observation: np.ndarray
    reward: float
    terminated: bool
    truncated: bool
    elapsed: float              # this step's duration, s
    snapshot: TrueSnapshot


class DrivingEnv:
    """Single-lane driving with belief-mediated observations."""

    def __init__(self, config: DrivingEnvConfig | None = None):
        self.config = config if config is not None else DrivingEnvConfig()
        self.config.validate()
        self.road: RoadSpec | None = None
        self.state: VehicleState | None = None
        self.belief: BeliefState | None = None
        self.rng: np.random.Generator | None = None
        self.steps = 0
        self._done = False

    # ------------------------------------------------------------ lifecycle

    def reset(self, seed: int) -> np.ndarray:
        cfg = self.config
        cfg.validate()
        if cfg.fixed_road is not None:
            self.road = cfg.fixed_road
        else:
            self.road = generate_road(cfg.road, int_seed(seed, "road"),
                                      speed_limit_kmh=cfg.speed_limit_kmh)
        self.rng = rng_for(seed, "episode")
        x, y, heading = self.road.start_pose
        self.state = VehicleState.at_pose(
            x, y, heading, cfg.speed_limit_kmh * KMH_TO_MPS)
        self.belief = belief_from_truth(self.state)
        self.steps = 0
        self._done = False
        return self.observation()

    def step(self, action, attended: bool,
             rng: np.random.Generator | None = None) -> DrivingStepOutcome:
        if self.state is None:
            raise RuntimeError("reset the environment before stepping")
        if self._done:
            raise RuntimeError("step called on a finished episode")
        cfg = self.config
        rng = self.rng if rng is None else rng

        delta_cmd = max(-DELTA_MAX, min(DELTA_MAX, float(action[0])))
        mu_cmd = 0.0 if cfg.acc_enabled else float(action[1])

        delta_exec = delta_cmd
        if cfg.lca.enabled:
            delta_exec += lca_correction(self.road, self.state, cfg.lca)
        old_center = self.state.center
        self.state, delta_sigma = step_vehicle(
            self.state, ControlInput(delta_exec, mu_cmd), cfg.noise, rng,
            dt=cfg.dt_s)

        # The internal model runs on the driver's own commands; it never sees
        # the lane-centering adjustment or the realized steering noise.
        pred = predict_unattended(self.belief, delta_cmd, mu_cmd, cfg.noise,
                                  rng, dt=cfg.dt_s)
        if attended:
            obs_v = observe(self.road, self.state, cfg.noise, rng)
            self.belief = fuse(pred, obs_v, cfg.noise)
        else:
            self.belief = pred

        new_center = self.state.center
        offroad, _ = detect_offroad_transition(self.road, old_center, new_center)
        v_kmh = self.state.speed / KMH_TO_MPS
        excess = max(0.0, abs(v_kmh - cfg.speed_limit_kmh)
                     - cfg.speed_tolerance_kmh)
        reward = (cfg.offroad_penalty if offroad else 0.0) \
            + cfg.speed_penalty_factor * excess

        self.steps += 1
        terminated = in_end_region(self.road, new_center)
        truncated = (not terminated
                     and self.steps * cfg.dt_s >= cfg.truncation_horizon_s)
        self._done = terminated or truncated
        return DrivingStepOutcome(
            observation=self.observation(), reward=reward,
            terminated=terminated, truncated=truncated, elapsed=cfg.dt_s,
            snapshot=TrueSnapshot(
                state=self.state, delta_executed=delta_sigma,
                offroad=offroad, lane=lane_query(self.road, new_center)))

    # ---------------------------------------------------------- observation

    def observation(self) -> np.ndarray:
        b = self.belief
        if b is None:
            raise RuntimeError("reset the environment before observing")
        probes = probe_distances(
            self.road, (b.position[0], b.position[1], b.heading))
        obs = np.empty(DRIVING_OBS_DIM, dtype=np.float32)
        obs[0] = b.speed
        obs[1] = b.heading
        obs[2] = b.steering
        obs[3:8] = probes.as_array()
        obs[8] = b.sigma_pos
        obs[9] = 1.0 if self.config.lca.enabled else 0.0
        obs[10] = self.config.speed_limit_kmh * KMH_TO_MPS
        obs[11] = 1.0 if b.attended else 0.0
        return obs

    @property
    def done(self) -> bool:
        return self._done


def inattention_schedule(rng: np.random.Generator, config: DrivingEnvConfig):
    """Endless (attended_s, unattended_s) pairs for curriculum training."""
    a_lo, a_hi = config.attended_range_s
    u_lo, u_hi = config.unattended_range_s
    while True:
        yield (float(rng.uniform(a_lo, a_hi)), float(rng.uniform(u_lo, u_hi)))


def attention_flags(rng: np.random.Generator, config: DrivingEnvConfig,
                    n_steps: int) -> np.ndarray:
    """Per-step attended flags realized from the curriculum schedule."""
    flags = np.ones(n_steps, dtype=bool)
    t = 0
    for attended_s, unattended_s in inattention_schedule(rng, config):
        n_a = max(1, int(round(attended_s / config.dt_s)))
        n_u = max(1, int(round(unattended_s / config.dt_s)))
        if t + n_a >= n_steps:
            break
        flags[t + n_a:min(n_steps, t + n_a + n_u)] = False
        t += n_a + n_u
        if t >= n_steps:
            break
    return flags
