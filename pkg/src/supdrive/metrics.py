"""Behavioral statistics: glance segmentation, summaries, fit quality.

Everything here consumes plain arrays so it works equally on in-memory
substep records and on trace files read back from disk.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TRANSITION_S = 0.2          # eye movement between road and display


@dataclass
class Glance:
    glance_id: int
    start_s: float          # end of the last attended tick before the glance
    duration_s: float       # transitions included unless dwell_only


def segment_glances(t_s, glance_id, dwell_only: bool = False) -> list[Glance]:
    """Group off-road substeps into glances.

    A glance is a maximal run of rows sharing a nonnegative glance id; its
    duration runs from the end of the preceding attended tick to the end of
    its last row, so both transitions are inside it. With dwell_only the
    two transitions are stripped, leaving display time alone.
    """
    t_s = np.asarray(t_s, dtype=float)
    gid = np.asarray(glance_id, dtype=int)
    if t_s.shape != gid.shape:
        raise ValueError("t_s and glance_id must have matching shapes")
    glances: list[Glance] = []
    i, n = 0, len(gid)
    while i < n:
        if gid[i] < 0:
            i += 1
            continue
        j = i
        while j + 1 < n and gid[j + 1] == gid[i]:
            j += 1
        start = t_s[i - 1] if i > 0 else 0.0
        duration = t_s[j] - start
        if dwell_only:
            duration = max(0.0, duration - 2.0 * TRANSITION_S)
        glances.append(Glance(int(gid[i]), float(start), float(duration)))
        i = j + 1
    return glances


def task_times(t_s, task_id) -> dict[int, float]:
    """Wall time each task spent active, keyed by task id."""
    t_s = np.asarray(t_s, dtype=float)
    tid = np.asarray(task_id, dtype=int)
    out: dict[int, float] = {}
    for k in np.unique(tid):
        if k < 0:
            continue
        rows = np.flatnonzero(tid == k)
        start = t_s[rows[0] - 1] if rows[0] > 0 else 0.0
        out[int(k)] = float(t_s[rows[-1]] - start)
    return out


def bootstrap_ci(values, rng: np.random.Generator, n_boot: int = 1000,
                 level: float = 0.95) -> tuple[float, float]:
    """Percentile bootstrap interval for the mean."""
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return (math.nan, math.nan)
    if values.size == 1:
        return (float(values[0]), float(values[0]))
    idx = rng.integers(values.size, size=(n_boot, values.size))
    means = values[idx].mean(axis=1)
    alpha = (1.0 - level) / 2.0
    lo, hi = np.quantile(means, [alpha, 1.0 - alpha])
    return (float(lo), float(hi))


def summarize(values, rng: np.random.Generator, n_boot: int = 1000) -> dict:
    """Mean with a symmetric half-width from the bootstrap interval."""
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return {"mean": math.nan, "ci95": math.nan, "n": 0}
    lo, hi = bootstrap_ci(values, rng, n_boot)
    return {"mean": float(values.mean()), "ci95": float((hi - lo) / 2.0),
            "n": int(values.size)}


def fit_stats(model, reference) -> dict:
    """Coefficient of determination and RMSE of model against reference.

    R^2 is measured around the reference mean, so a model worse than the
    mean goes negative; it is not clamped.
    """
    model = np.asarray(model, dtype=float)
    reference = np.asarray(reference, dtype=float)
    if model.shape != reference.shape or model.size == 0:
        raise ValueError("model and reference must be equal-length, nonempty")
    resid = model - reference
    ss_res = float(np.sum(resid ** 2))
    ss_tot = float(np.sum((reference - reference.mean()) ** 2))
    rmse = math.sqrt(ss_res / model.size)
    if ss_tot == 0.0:
        r2 = 1.0 if ss_res == 0.0 else -math.inf
    else:
        r2 = 1.0 - ss_res / ss_tot
    return {"r2": r2, "rmse": rmse}
