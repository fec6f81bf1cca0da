"""Kinematic bicycle dynamics with speed-dampened steering noise plus a
lane-centering assistance heuristic.

The vehicle is two wheel points joined by a rigid 2 m wheelbase. Each step
the speed is updated first (v <- clamp(v + mu, 0, v_max), mu acting as the
per-step speed increment), then the front wheel advances along
heading + noisy steering and the rear wheel along the heading; the new
heading is the direction rear -> front and the wheelbase is renormalized
about the midpoint. Steering noise has an action-proportional and a constant
component, both scaled by the speed dampening D = 1 - v / v_max.

All angles rad, distances m, speeds m/s, durations s. Scalar math on
purpose: this sits in the innermost simulation loop.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import RoadSpec, _first_crossings

V_MAX_KMH = 150.0
V_MAX = V_MAX_KMH / 3.6      # m/s
DELTA_MAX = 0.26             # rad, steering bound
MU_MAX = 6.0                 # per-step speed increment bound
WHEELBASE = 2.0              # m
DT = 0.1                     # s, simulation step

KMH_TO_MPS = 1.0 / 3.6


@dataclass
class VehicleState:
    front: tuple[float, float]
    rear: tuple[float, float]
    speed: float        # m/s
    heading: float      # rad
    steering: float     # rad, last applied command (post-LCA, pre-noise)

    @property
    def center(self) -> tuple[float, float]:
        return (0.5 * (self.front[0] + self.rear[0]),
                0.5 * (self.front[1] + self.rear[1]))

    @staticmethod
    def at_pose(x: float, y: float, heading: float, speed: float) -> "VehicleState":
        h = 0.5 * WHEELBASE
        c, s = math.cos(heading), math.sin(heading)
        return VehicleState(
            front=(x + h * c, y + h * s),
            rear=(x - h * c, y - h * s),
            speed=speed, heading=heading, steering=0.0)


@dataclass
class ControlInput:
    steering: float      # rad, clamped to +/- DELTA_MAX on application
    acceleration: float  # per-step speed increment, clamped to +/- MU_MAX


@dataclass
class NoiseParams:
    sigma_steer_prop: float  # action-proportional steering noise (per rad of command)
    sigma_steer_rad: float   # constant steering noise, rad
    sigma_time_s: float      # internal time-estimate noise, s
    sigma_obs_m: float       # per-axis position observation noise, m


@dataclass
class LcaConfig:
    enabled: bool = False
    centering_gain: float = 0.005   # rad per m of lookahead left/right imbalance
    sharp_correction: float = 0.1   # rad, applied near a boundary
    boundary_margin: float = 0.5    # m
    lookahead: float = 10.0         # m ahead of the car


def dampening(speed: float, v_max: float = V_MAX) -> float:
    """Noise dampening D = 1 - v / v_max; errors outside [0, v_max]."""
    if speed < 0.0 or speed > v_max:
        raise ValueError(f"speed {speed} outside [0, {v_max}]")
    return 1.0 - speed / v_max


def apply_steering_noise(delta: float, speed: float, noise: NoiseParams,
                         rng: np.random.Generator) -> float:
    """Noisy steering: clamp(delta + D * (|delta| r1 + r2), +/- DELTA_MAX).

    Draws exactly two normals in fixed order, r1 ~ N(0, sigma_steer_prop)
    then r2 ~ N(0, sigma_steer_rad).
    """
    d = dampening(speed)
    r1 = rng.normal(0.0, noise.sigma_steer_prop)
    r2 = rng.normal(0.0, noise.sigma_steer_rad)
    noisy = delta + d * (abs(delta) * r1 + r2)
    return max(-DELTA_MAX, min(DELTA_MAX, noisy))


def step_vehicle(state: VehicleState, control: ControlInput, noise: NoiseParams,
                 rng: np.random.Generator, dt: float = DT,
                 v_max: float = V_MAX) -> tuple[VehicleState, float]:
    """Advance one step; returns (new_state, realized noisy steering)."""
    delta = max(-DELTA_MAX, min(DELTA_MAX, control.steering))
    mu = max(-MU_MAX, min(MU_MAX, control.acceleration))
    v = max(0.0, min(v_max, state.speed + mu))
    delta_sigma = apply_steering_noise(delta, v, noise, rng)

    step_len = v * dt
    fa = state.heading + delta_sigma
    fx = state.front[0] + step_len * math.cos(fa)
    fy = state.front[1] + step_len * math.sin(fa)
    rx = state.rear[0] + step_len * math.cos(state.heading)
    ry = state.rear[1] + step_len * math.sin(state.heading)
    heading = math.atan2(fy - ry, fx - rx)

    cx, cy = 0.5 * (fx + rx), 0.5 * (fy + ry)
    h = 0.5 * WHEELBASE
    c, s = math.cos(heading), math.sin(heading)
    new = VehicleState(
        front=(cx + h * c, cy + h * s),
        rear=(cx - h * c, cy - h * s),
        speed=v, heading=heading, steering=delta)
    return new, delta_sigma


def kinematic_step(x: float, y: float, heading: float, speed: float,
                   steering: float, dt: float) -> tuple[float, float, float]:
    """Noiseless center-point bicycle step, used by the internal belief model.

    Same wheel-point update as step_vehicle but parameterized by the center
    pose and free of noise and clamping side effects.
    """
    h = 0.5 * WHEELBASE
    c, s = math.cos(heading), math.sin(heading)
    fx, fy = x + h * c, y + h * s
    rx, ry = x - h * c, y - h * s
    step_len = speed * dt
    fa = heading + steering
    fx += step_len * math.cos(fa)
    fy += step_len * math.sin(fa)
    rx += step_len * math.cos(heading)
    ry += step_len * math.sin(heading)
    new_heading = math.atan2(fy - ry, fx - rx)
    return 0.5 * (fx + rx), 0.5 * (fy + ry), new_heading


def lateral_clearances(road: RoadSpec, x: float, y: float, heading: float,
                       lookahead: float, max_range: float = 50.0):
    """Left/right boundary distances at the pose and at the lookahead point.

    Returns (d_left, d_right, d_left_ahead, d_right_ahead), signed like
    probes (negative when the query point is off-lane).
    """
    lx = x + lookahead * math.cos(heading)
    ly = y + lookahead * math.sin(heading)
    origins = np.array([[x, y], [x, y], [lx, ly], [lx, ly]])
    angles = np.array([heading + 1.57, heading - 1.57,
                       heading + 1.57, heading - 1.57])
    dirs = np.stack([np.cos(angles), np.sin(angles)], axis=1)
    t_cross, init = _first_crossings(road, origins, dirs, max_range)
    dist = np.where(np.isnan(t_cross), max_range, t_cross)
    vals = np.where(init, dist, -dist)
    return tuple(float(v) for v in vals)


def lca_correction(road: RoadSpec, state: VehicleState, cfg: LcaConfig) -> float:
    """Steering adjustment of the lane-centering assistant.

    Within boundary_margin of the nearer boundary the correction is a fixed
    sharp_correction away from it; otherwise it is proportional to the
    left/right clearance imbalance measured at the lookahead point. The
    caller adds the result to the driver command before clamping and noise.
    """
    if not cfg.enabled:
        raise ValueError("lane centering assistance is disabled")
    x, y = state.center
    d_left, d_right, d_left_ahead, d_right_ahead = lateral_clearances(
        road, x, y, state.heading, cfg.lookahead)
    if min(d_left, d_right) < cfg.boundary_margin:
        return -cfg.sharp_correction if d_left < d_right else cfg.sharp_correction
    return cfg.centering_gain * (d_left_ahead - d_right_ahead)
