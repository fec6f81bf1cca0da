"""Driver cognition: noisy observation, internal forward model, fusion.

The driver never sees the true vehicle state. While attending the road they
receive the position corrupted by per-axis Gaussian noise (speed, heading
and steering read exactly) and fuse it with the internal prediction using
inverse-variance weights. While looking away the belief advances through a
noiseless copy of the kinematics driven by the driver's own commands, with
a noisy internal time estimate; positional uncertainty grows by the process
noise the internal model cannot capture.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .geometry import ProbeSet, RoadSpec, probe_distances
from .vehicle import (
    DELTA_MAX,
    DT,
    MU_MAX,
    V_MAX,
    NoiseParams,
    VehicleState,
    dampening,
    kinematic_step,
)


@dataclass
class BeliefState:
    position: tuple[float, float]   # believed center, m
    sigma_pos: float                # positional uncertainty, m
    speed: float                    # believed speed, m/s
    heading: float                  # believed heading, rad
    steering: float                 # believed last steering command, rad
    attended: bool                  # whether the last update had vision


@dataclass
class Observation:
    position: tuple[float, float]   # true position + N(0, sigma_obs) per axis
    speed: float
    heading: float
    steering: float
    probes: ProbeSet                # computed from the noisy position


def belief_from_truth(state: VehicleState) -> BeliefState:
    """Exact belief, used at episode reset (vision present, zero sigma)."""
    return BeliefState(position=state.center, sigma_pos=0.0, speed=state.speed,
                       heading=state.heading, steering=state.steering,
                       attended=True)


def observe(road: RoadSpec, state: VehicleState, noise: NoiseParams,
            rng: np.random.Generator) -> Observation:
    """Visual observation of the true state; draws x noise then y noise."""
    ox = state.center[0] + rng.normal(0.0, noise.sigma_obs_m)
    oy = state.center[1] + rng.normal(0.0, noise.sigma_obs_m)
    return Observation(
        position=(ox, oy), speed=state.speed, heading=state.heading,
        steering=state.steering,
        probes=probe_distances(road, (ox, oy, state.heading)))


def predict(belief: BeliefState, steering_cmd: float, accel_cmd: float,
            noise: NoiseParams, rng: np.random.Generator, dt: float = DT,
            v_max: float = V_MAX) -> BeliefState:
    """Advance the belief one step through the internal forward model.

    Uses the commanded steering and acceleration (the driver knows their own
    actions but not the realized noise), a noisy step duration
    dt' ~ N(dt, sigma_time), and grows sigma_pos by the process noise terms:
    sigma_p = D sqrt(sigma_h^2 + (delta sigma_prop)^2) v dt for the realized
    steering noise and sigma_time * v for the time estimate.
    """
    delta = max(-DELTA_MAX, min(DELTA_MAX, steering_cmd))
    mu = max(-MU_MAX, min(MU_MAX, accel_cmd))
    v = max(0.0, min(v_max, belief.speed + mu))
    dt_est = max(0.0, dt + rng.normal(0.0, noise.sigma_time_s))
    x, y, heading = kinematic_step(
        belief.position[0], belief.position[1], belief.heading, v, delta, dt_est)
    d = dampening(v, v_max)
    sigma_p = d * math.hypot(noise.sigma_steer_rad,
                             delta * noise.sigma_steer_prop) * v * dt
    sigma_t_pos = noise.sigma_time_s * v
    sigma = math.sqrt(belief.sigma_pos ** 2 + sigma_p ** 2 + sigma_t_pos ** 2)
    return BeliefState(position=(x, y), sigma_pos=sigma, speed=v,
                       heading=heading, steering=delta, attended=False)


def predict_unattended(belief: BeliefState, steering_cmd: float,
                       accel_cmd: float, noise: NoiseParams,
                       rng: np.random.Generator, dt: float = DT,
                       v_max: float = V_MAX) -> BeliefState:
    """One unattended step: the forward model alone, no observation."""
    return predict(belief, steering_cmd, accel_cmd, noise, rng, dt, v_max)


def fuse(predicted: BeliefState, obs: Observation, noise: NoiseParams) -> BeliefState:
    """Inverse-variance fusion of the predicted position with an observation.

    w_pred = sigma_obs^2 / (sigma_pos^2 + sigma_obs^2) weights the prediction
    (the more uncertain the prediction, the less it counts), and the merged
    sigma_pos' = sqrt(w_pred^2 sigma_pos^2 + w_obs^2 sigma_obs^2) equals the
    exact inverse-variance posterior sqrt(s_p^2 s_o^2 / (s_p^2 + s_o^2)).
    Speed, heading and steering are read exactly from the observation.
    """
    sp2 = predicted.sigma_pos ** 2
    so2 = noise.sigma_obs_m ** 2
    denom = sp2 + so2
    if denom == 0.0:
        w_pred, w_obs, sigma = 0.0, 1.0, 0.0
    else:
        w_pred = so2 / denom
        w_obs = sp2 / denom
        sigma = math.sqrt(w_pred ** 2 * sp2 + w_obs ** 2 * so2)
    x = w_pred * predicted.position[0] + w_obs * obs.position[0]
    y = w_pred * predicted.position[1] + w_obs * obs.position[1]
    return BeliefState(position=(x, y), sigma_pos=sigma, speed=obs.speed,
                       heading=obs.heading, steering=obs.steering,
                       attended=True)
