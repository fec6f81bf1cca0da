"""Batch simulation of the trained stack across scenario conditions.

Each condition fixes speed limit, lane-centering, display size, task
goal, and cruise control; episodes within a condition differ only by
seed. Outputs are plain CSV: per-substep traces (optional), per-decision
value rows, per-episode aggregates, and bootstrap summaries. Reruns with
the same seed are byte-identical.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .config import (
    driving_env_config,
    load_config,
    search_env_config,
    supervisor_env_config,
)
from .driving_env import DrivingEnv
from .learning.checkpoint import load_checkpoint
from .learning.nets import (
    driving_action_limit,
    driving_obs_scale,
    search_obs_scale,
    supervisor_obs_scale,
)
from .learning.ppo import PpoAgent, PpoConfig
from .learning.sac import SacAgent, SacConfig
from .learning.train import frozen_driving_policy, frozen_search_policy
from .metrics import segment_glances, summarize, task_times
from .search_env import SearchEnv
from .seeding import int_seed, rng_for
from .supervisor_env import RunningNorm, SupervisorEnv

TRACE_COLUMNS = [
    "t_s", "locus", "true_x_m", "true_y_m", "bel_x_m", "bel_y_m",
    "sigma_pos_m", "v_mps", "delta_rad", "r_drive", "r_search",
    "lat_offset_m", "glance_id", "task_id",
]

VALUE_COLUMNS = ["episode", "decision", "t_s", "locus", "attend",
                 "v_drive_raw", "v_search_raw"]

EPISODE_COLUMNS = [
    "condition", "episode", "wall_s", "pooled_return", "tasks_done",
    "n_glances", "mean_glance_s", "mean_dwell_s", "mean_task_time_s",
    "mean_abs_lat_m", "max_abs_lat_m", "offroad_fraction",
    "mean_speed_mps",
]

SUMMARY_COLUMNS = ["condition", "variable", "mean", "ci95", "n"]

SUMMARY_VARIABLES = ["mean_glance_s", "mean_dwell_s", "mean_task_time_s",
                     "mean_abs_lat_m", "offroad_fraction", "wall_s",
                     "pooled_return"]


@dataclass(frozen=True)
class Condition:
    label: str
    speed_limit_kmh: float
    lca_enabled: bool
    rows: int
    cols: int
    task_type: int
    acc_enabled: bool = False

    @staticmethod
    def build(speed_kmh: float, lca: bool, rows: int, cols: int,
              task_type: int, acc: bool = False) -> "Condition":
        label = (f"v{speed_kmh:g}_e{rows * cols}_t{task_type}"
                 f"_lca{'on' if lca else 'off'}{'_acc' if acc else ''}")
        return Condition(label, speed_kmh, lca, rows, cols, task_type, acc)


class PolicyStack:
    """The three frozen agents plus the supervisor's value normalizer."""

    def __init__(self, driving: SacAgent, search: PpoAgent,
                 supervisor: PpoAgent, norm: RunningNorm):
        self.driving = driving
        self.search = search
        self.supervisor = supervisor
        self.norm = norm

    @classmethod
    def load(cls, ckpt_dir: str | Path) -> "PolicyStack":
        ckpt_dir = Path(ckpt_dir)
        d_ckpt = load_checkpoint(ckpt_dir / "driving.pt",
                                 expected_kind="driving")
        s_ckpt = load_checkpoint(ckpt_dir / "search.pt",
                                 expected_kind="search")
        sup_ckpt = load_checkpoint(ckpt_dir / "supervisor.pt",
                                   expected_kind="supervisor")
        driving = SacAgent(
            12, 2, driving_obs_scale(), driving_action_limit(),
            SacConfig(hidden=tuple(d_ckpt.train_config.get("hidden",
                                                           (128, 128)))))
        driving.load_state_dict(d_ckpt.params)
        search = PpoAgent(
            28, 12, search_obs_scale(),
            PpoConfig(hidden=tuple(s_ckpt.train_config.get("hidden",
                                                           (64, 64)))))
        search.load_state_dict(s_ckpt.params)
        supervisor = PpoAgent(
            3, 2, supervisor_obs_scale(),
            PpoConfig(hidden=tuple(sup_ckpt.train_config.get("hidden",
                                                             (64, 64)))))
        supervisor.load_state_dict(sup_ckpt.params)
        norm = RunningNorm.from_dict(sup_ckpt.norm_stats)
        return cls(driving, search, supervisor, norm)


def build_env(stack: PolicyStack, condition: Condition,
              cfg: dict | None = None) -> SupervisorEnv:
    cfg = cfg if cfg is not None else load_config(None)
    base = driving_env_config(cfg)
    denv_cfg = replace(base,
                       speed_limit_kmh=condition.speed_limit_kmh,
                       lca=replace(base.lca, enabled=condition.lca_enabled),
                       acc_enabled=condition.acc_enabled)
    senv_cfg = replace(search_env_config(cfg), rows=condition.rows,
                       cols=condition.cols, task_type=condition.task_type)
    return SupervisorEnv(
        DrivingEnv(denv_cfg), SearchEnv(senv_cfg),
        frozen_driving_policy(stack.driving), stack.driving.value,
        frozen_search_policy(stack.search), stack.search.value,
        supervisor_env_config(cfg), norm=stack.norm, training=False)


@dataclass
class EpisodeResult:
    condition: str
    episode: int
    records: list                      # SubstepRecord rows, reset included
    decisions: list                    # (t_s, locus, attend, v_d, v_s)
    aggregates: dict


def run_episode(stack: PolicyStack, condition: Condition, seed: int,
                episode_index: int, cfg: dict | None = None,
                max_decisions: int = 5000,
                attend_override=None) -> EpisodeResult:
    """One full supervised episode with the deterministic supervisor.

    attend_override(decision_index, obs) -> action replaces the learned
    supervisor when a scripted attention schedule is wanted.
    """
    env = build_env(stack, condition, cfg)
    obs = env.reset(seed)
    records = list(env.reset_log)
    decisions = []
    pooled = 0.0
    k = 0
    while not env.done and k < max_decisions:
        if attend_override is not None:
            attend = int(attend_override(k, obs))
        else:
            attend, _, _ = stack.supervisor.act(obs, deterministic=True)
        obs, reward, _, log = env.step(attend)
        pooled += reward
        decisions.append((log.wall_time, log.locus, attend,
                          log.raw_v_drive, log.raw_v_search))
        records.extend(log.substeps)
        k += 1

    t_s = np.array([r.t_s for r in records])
    gid = np.array([r.glance_id for r in records])
    tid = np.array([r.task_id for r in records])
    lat = np.array([r.lat_offset for r in records])
    glances = segment_glances(t_s, gid)
    dwells = segment_glances(t_s, gid, dwell_only=True)
    times = task_times(t_s, tid)
    completed = [times[k] for k in sorted(times)[:env.tasks_completed]]
    aggregates = {
        "condition": condition.label,
        "episode": episode_index,
        "wall_s": env.wall_time,
        "pooled_return": pooled,
        "tasks_done": env.tasks_completed,
        "n_glances": len(glances),
        "mean_glance_s": (float(np.mean([g.duration_s for g in glances]))
                          if glances else 0.0),
        "mean_dwell_s": (float(np.mean([g.duration_s for g in dwells]))
                         if dwells else 0.0),
        "mean_task_time_s": (float(np.mean(completed)) if completed
                             else float("nan")),
        "mean_abs_lat_m": float(np.mean(np.abs(lat))),
        "max_abs_lat_m": float(np.max(np.abs(lat))),
        "offroad_fraction": float(np.mean([r.offroad for r in records])),
        "mean_speed_mps": float(np.mean([r.v_mps for r in records])),
    }
    return EpisodeResult(condition.label, episode_index, records, decisions,
                         aggregates)


# ------------------------------------------------------------------ csv

def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.9g}"
    return str(x)


def _write_csv(path: Path, header: list[str], rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def write_trace(path: Path, records) -> None:
    rows = [[r.t_s, 0 if r.attended else 1, r.true_x, r.true_y, r.bel_x,
             r.bel_y, r.sigma_pos, r.v_mps, r.delta_rad, r.r_drive,
             r.r_search, r.lat_offset, r.glance_id, r.task_id]
            for r in records]
    _write_csv(path, TRACE_COLUMNS, rows)


def write_values(path: Path, results: list[EpisodeResult]) -> None:
    rows = []
    for res in results:
        for i, (t, locus, attend, vd, vs) in enumerate(res.decisions):
            rows.append([res.episode, i, t, locus, attend, vd, vs])
    _write_csv(path, VALUE_COLUMNS, rows)


def write_episodes(path: Path, results: list[EpisodeResult]) -> None:
    rows = [[res.aggregates[c] for c in EPISODE_COLUMNS] for res in results]
    _write_csv(path, EPISODE_COLUMNS, rows)


def write_summary(path: Path, results_by_condition: dict, seed: int,
                  n_boot: int = 1000) -> None:
    rows = []
    for label in sorted(results_by_condition):
        results = results_by_condition[label]
        for var in SUMMARY_VARIABLES:
            values = [r.aggregates[var] for r in results
                      if not np.isnan(r.aggregates[var])]
            stats = summarize(values, rng_for(seed, "boot", label, var),
                              n_boot=n_boot)
            rows.append([label, var, stats["mean"], stats["ci95"],
                         stats["n"]])
    _write_csv(path, SUMMARY_COLUMNS, rows)


# ------------------------------------------------------------ batch runs

def simulate_conditions(stack: PolicyStack, conditions, episodes: int,
                        base_seed: int, out_dir: str | Path,
                        cfg: dict | None = None,
                        trace_episodes: int = 0,
                        n_boot: int = 1000,
                        progress: bool = True) -> dict:
    """Run every condition and write the full CSV set under out_dir."""
    cfg = cfg if cfg is not None else load_config(None)
    out = Path(out_dir)
    by_condition: dict[str, list[EpisodeResult]] = {}
    for ci, cond in enumerate(conditions):
        results = []
        for ep in range(episodes):
            seed = int_seed(base_seed, "cond", ci, "ep", ep)
            res = run_episode(stack, cond, seed, ep, cfg)
            results.append(res)
            if ep < trace_episodes:
                write_trace(out / "traces" / cond.label / f"ep{ep:04d}.csv",
                            res.records)
        by_condition[cond.label] = results
        write_values(out / "values" / f"{cond.label}.csv", results)
        if progress:
            agg = np.mean([r.aggregates["mean_glance_s"] for r in results])
            print(f"[simulate] {cond.label}: {episodes} episodes, "
                  f"mean glance {agg:.3f} s", flush=True)
    all_results = [r for label in sorted(by_condition)
                   for r in by_condition[label]]
    write_episodes(out / "episodes.csv", all_results)
    write_summary(out / "summary.csv", by_condition, base_seed,
                  n_boot=n_boot)
    return by_condition


def exp1_conditions() -> list[Condition]:
    """Speed x display-size x goal grid at fixed manual speed control."""
    conds = []
    for speed in (60.0, 120.0):
        for rows, cols in ((2, 3), (3, 3)):
            for ttype in (0, 1):
                conds.append(Condition.build(speed, False, rows, cols, ttype))
    return conds


def exp2_conditions() -> list[Condition]:
    """Speed sweep crossed with lane-centering and display size."""
    conds = []
    for speed in (30.0, 60.0, 90.0, 120.0, 150.0):
        for lca in (False, True):
            for rows, cols in ((2, 3), (3, 3), (3, 4)):
                conds.append(Condition.build(speed, lca, rows, cols, 1))
    return conds


def scripted_glance_schedule(glance_decisions: int, dwell_decisions: int):
    """Alternating fixed attention pattern for value-trace probes.

    Stays on the road for dwell_decisions supervisor steps, then glances
    at the display for glance_decisions steps, repeating.
    """
    period = glance_decisions + dwell_decisions

    def schedule(k: int, obs) -> int:
        return 1 if (k % period) >= dwell_decisions else 0

    return schedule
