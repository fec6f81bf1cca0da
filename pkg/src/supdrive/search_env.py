"""In-car visual search as a discrete MDP with gaze-dependent step timing.

A task is a row-major grid of visual elements spaced a fixed visual angle
apart on the display. Each action fixates one element: the step lasts the
saccade plus encoding time for that eccentricity (EMMA timing), the element
enters visual short-term memory, and the task completes either when a
randomly placed target has been encoded (task type 0) or when every element
has been (task type 1). Every step costs its own duration; completion pays
a bonus proportional to the element count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

MAX_ROWS = 3
MAX_COLS = 4
MAX_ELEMENTS = MAX_ROWS * MAX_COLS
# VSTM bits + fixation one-hot + (rows, cols, task_type, target-found).
SEARCH_OBS_DIM = 2 * MAX_ELEMENTS + 4


@dataclass
class EmmaParams:
    """Timing constants for atomic fixate-and-encode actions.

    duration = saccade_base + saccade_per_deg * ecc
               + K * (-ln f) * exp(k * ecc)
    with ecc the angular distance from the current gaze in degrees.
    """

    encoding_scale_s: float = 0.006      # K
    eccentricity_slope: float = 0.4      # k, per degree
    frequency: float = 0.1               # f, familiarity of elements
    saccade_base_s: float = 0.07
    saccade_per_deg_s: float = 0.002
    element_spacing_deg: float = 2.0


@dataclass
class SearchEnvConfig:
    rows: int = 3
    cols: int = 3
    task_type: int = 1
    emma: EmmaParams = field(default_factory=EmmaParams)
    completion_bonus: float = 1.0        # reward per element on completion
    inter_task_delay_s: float = 1.0      # display inactive between tasks


@dataclass
class SearchTaskState:
    rows: int
    cols: int
    task_type: int
    target_index: int | None             # type 0 only
    encoded: set[int]                    # VSTM contents
    fixation: int | None                 # None = display center
    element_positions: np.ndarray        # (n, 2) degrees of visual angle
    elapsed: float                       # sum of step durations, s
    done: bool

    @property
    def n_elements(self) -> int:
        return self.rows * self.cols


def element_layout(rows: int, cols: int, spacing_deg: float) -> np.ndarray:
    """Row-major grid centered on the display origin, degrees."""
    idx = np.arange(rows * cols)
    r, c = idx // cols, idx % cols
    x = (c - (cols - 1) / 2.0) * spacing_deg
    y = (r - (rows - 1) / 2.0) * spacing_deg
    return np.stack([x, y], axis=1)


def emma_duration(from_pos, to_pos, params: EmmaParams) -> float:
    """Saccade plus encoding time for moving gaze between display points."""
    ecc = math.hypot(to_pos[0] - from_pos[0], to_pos[1] - from_pos[1])
    return (params.saccade_base_s + params.saccade_per_deg_s * ecc
            + params.encoding_scale_s * (-math.log(params.frequency))
            * math.exp(params.eccentricity_slope * ecc))


class SearchEnv:
    """Discrete search MDP over a padded 12-way fixation action space."""

    def __init__(self, config: SearchEnvConfig | None = None):
        self.config = config if config is not None else SearchEnvConfig()
        self.state: SearchTaskState | None = None

    def reset(self, rng: np.random.Generator, rows: int | None = None,
              cols: int | None = None, task_type: int | None = None) -> np.ndarray:
        rows = self.config.rows if rows is None else rows
        cols = self.config.cols if cols is None else cols
        task_type = self.config.task_type if task_type is None else task_type
        if not (1 <= rows <= MAX_ROWS and 1 <= cols <= MAX_COLS):
            raise ValueError(f"grid {rows}x{cols} outside supported "
                             f"{MAX_ROWS}x{MAX_COLS}")
        if task_type not in (0, 1):
            raise ValueError(f"task_type must be 0 or 1, got {task_type}")
        n = rows * cols
        target = int(rng.integers(n)) if task_type == 0 else None
        self.state = SearchTaskState(
            rows=rows, cols=cols, task_type=task_type, target_index=target,
            encoded=set(), fixation=None,
            element_positions=element_layout(
                rows, cols, self.config.emma.element_spacing_deg),
            elapsed=0.0, done=False)
        return self.observation()

    def action_mask(self) -> np.ndarray:
        """True for actions that address an existing element."""
        if self.state is None:
            raise RuntimeError("reset the task before querying the mask")
        mask = np.zeros(MAX_ELEMENTS, dtype=bool)
        mask[:self.state.n_elements] = True
        return mask

    def step(self, action: int) -> tuple[np.ndarray, float, bool, float]:
        """Fixate and encode one element; returns (obs, reward, done, duration)."""
        s = self.state
        if s is None:
            raise RuntimeError("reset the task before stepping")
        if s.done:
            raise RuntimeError("step called on a completed task")
        action = int(action)
        if not 0 <= action < s.n_elements:
            raise ValueError(f"action {action} outside grid of {s.n_elements}")
        from_pos = ((0.0, 0.0) if s.fixation is None
                    else s.element_positions[s.fixation])
        duration = emma_duration(from_pos, s.element_positions[action],
                                 self.config.emma)
        s.fixation = action
        s.encoded.add(action)
        s.elapsed += duration
        if s.task_type == 0:
            s.done = s.target_index in s.encoded
        else:
            s.done = len(s.encoded) == s.n_elements
        reward = -duration
        if s.done:
            reward += self.config.completion_bonus * s.n_elements
        return self.observation(), reward, s.done, duration

    def observation(self) -> np.ndarray:
        """VSTM bits (absent elements read 1), fixation one-hot, grid scalars."""
        s = self.state
        if s is None:
            raise RuntimeError("reset the task before observing")
        obs = np.zeros(SEARCH_OBS_DIM, dtype=np.float32)
        obs[s.n_elements:MAX_ELEMENTS] = 1.0
        for i in s.encoded:
            obs[i] = 1.0
        if s.fixation is not None:
            obs[MAX_ELEMENTS + s.fixation] = 1.0
        obs[2 * MAX_ELEMENTS] = s.rows / MAX_ROWS
        obs[2 * MAX_ELEMENTS + 1] = s.cols / MAX_COLS
        obs[2 * MAX_ELEMENTS + 2] = float(s.task_type)
        if s.task_type == 0 and s.target_index in s.encoded:
            obs[2 * MAX_ELEMENTS + 3] = 1.0
        return obs
