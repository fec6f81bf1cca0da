"""Figures and text reports from simulation CSV outputs.

Everything reads the files simulate writes, so reports can be rebuilt
without rerunning episodes. Figures are written as PNG with the Agg
backend; no display is required.
"""

from __future__ import annotations

import csv
import re
from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

_LABEL_RE = re.compile(
    r"^v(?P<speed>[0-9.]+)_e(?P<elements>\d+)_t(?P<task_type>\d)"
    r"_lca(?P<lca>on|off)(?P<acc>_acc)?$")


def parse_label(label: str) -> dict:
    m = _LABEL_RE.match(label)
    if m is None:
        raise ValueError(f"unparseable condition label: {label!r}")
    return {
        "speed_kmh": float(m.group("speed")),
        "elements": int(m.group("elements")),
        "task_type": int(m.group("task_type")),
        "lca": m.group("lca") == "on",
        "acc": m.group("acc") is not None,
    }


def read_rows(path: str | Path) -> list[dict]:
    """CSV rows with numeric fields parsed; strings kept as-is."""
    rows = []
    with Path(path).open(newline="") as fh:
        for row in csv.DictReader(fh):
            parsed = {}
            for k, v in row.items():
                try:
                    parsed[k] = float(v)
                except ValueError:
                    parsed[k] = v
            rows.append(parsed)
    return rows


def _group(rows: list[dict], key: str) -> dict:
    out = defaultdict(list)
    for r in rows:
        out[r[key]].append(r)
    return dict(out)


def _mean_ci(values) -> tuple[float, float]:
    v = np.asarray([x for x in values if not np.isnan(x)], dtype=float)
    if v.size == 0:
        return (np.nan, np.nan)
    if v.size == 1:
        return (float(v[0]), 0.0)
    sem = v.std(ddof=1) / np.sqrt(v.size)
    return (float(v.mean()), float(1.96 * sem))


def plot_condition_bars(episode_rows: list[dict], variable: str,
                        out_png: str | Path, ylabel: str | None = None,
                        title: str | None = None) -> Path:
    """One bar per condition with a normal-approximation error bar."""
    groups = _group(episode_rows, "condition")
    labels = sorted(groups)
    means, cis = [], []
    for lab in labels:
        m, c = _mean_ci([r[variable] for r in groups[lab]])
        means.append(m)
        cis.append(c)
    fig, ax = plt.subplots(figsize=(max(6.0, 0.8 * len(labels)), 4.0))
    x = np.arange(len(labels))
    ax.bar(x, means, yerr=cis, capsize=3, color="#4878a8")
    ax.set_xticks(x)
    ax.set_xticklabels(labels, rotation=45, ha="right", fontsize=8)
    ax.set_ylabel(ylabel or variable)
    if title:
        ax.set_title(title)
    ax.grid(axis="y", alpha=0.3)
    fig.tight_layout()
    out = Path(out_png)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, dpi=120)
    plt.close(fig)
    return out


def plot_speed_sweep(episode_rows: list[dict], variable: str,
                     out_png: str | Path, ylabel: str | None = None) -> Path:
    """Variable against speed limit, one line per lane-centering state.

    Elements pool within each (speed, lca) cell, matching the binned
    analysis of the speed sweep.
    """
    cells = defaultdict(list)
    for r in episode_rows:
        meta = parse_label(r["condition"])
        cells[(meta["speed_kmh"], meta["lca"])].append(r[variable])
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for lca, color in ((False, "#b8552f"), (True, "#2f7fb8")):
        speeds = sorted({s for (s, l) in cells if l == lca})
        if not speeds:
            continue
        means, cis = [], []
        for s in speeds:
            m, c = _mean_ci(cells[(s, lca)])
            means.append(m)
            cis.append(c)
        ax.errorbar(speeds, means, yerr=cis, marker="o", capsize=3,
                    color=color,
                    label="lane centering on" if lca else "manual lanekeeping")
    ax.set_xlabel("speed limit (km/h)")
    ax.set_ylabel(ylabel or variable)
    ax.grid(alpha=0.3)
    ax.legend()
    fig.tight_layout()
    out = Path(out_png)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, dpi=120)
    plt.close(fig)
    return out


def plot_trace(trace_rows: list[dict], out_png: str | Path) -> Path:
    """Lateral offset and position uncertainty over one episode.

    Glances are shaded so the buildup of uncertainty while the eyes are
    off the road is visible against the lane-keeping record.
    """
    t = np.array([r["t_s"] for r in trace_rows])
    lat = np.array([r["lat_offset_m"] for r in trace_rows])
    sig = np.array([r["sigma_pos_m"] for r in trace_rows])
    off = np.array([r["locus"] for r in trace_rows]) > 0.5
    fig, axes = plt.subplots(2, 1, figsize=(8.0, 5.0), sharex=True)
    for ax, series, label in ((axes[0], lat, "lateral offset (m)"),
                              (axes[1], sig, "position sigma (m)")):
        ax.plot(t, series, lw=0.9, color="#333333")
        ax.set_ylabel(label)
        ax.grid(alpha=0.3)
        _shade_offroad(ax, t, off)
    axes[1].set_xlabel("time (s)")
    fig.tight_layout()
    out = Path(out_png)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, dpi=120)
    plt.close(fig)
    return out


def plot_value_trace(value_rows: list[dict], out_png: str | Path,
                     episode: int | None = None) -> Path:
    """Raw subtask value estimates across one episode's decisions."""
    if episode is not None:
        value_rows = [r for r in value_rows if r["episode"] == episode]
    t = np.array([r["t_s"] for r in value_rows])
    vd = np.array([r["v_drive_raw"] for r in value_rows])
    vs = np.array([r["v_search_raw"] for r in value_rows])
    off = np.array([r["locus"] for r in value_rows]) > 0.5
    fig, ax = plt.subplots(figsize=(8.0, 4.0))
    ax.plot(t, vd, lw=1.0, color="#b8552f", label="driving value")
    ax.plot(t, vs, lw=1.0, color="#2f7fb8", label="search value")
    _shade_offroad(ax, t, off)
    ax.set_xlabel("time (s)")
    ax.set_ylabel("value estimate")
    ax.grid(alpha=0.3)
    ax.legend()
    fig.tight_layout()
    out = Path(out_png)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, dpi=120)
    plt.close(fig)
    return out


def _shade_offroad(ax, t, off) -> None:
    in_run = False
    start = 0.0
    for i in range(len(t)):
        if off[i] and not in_run:
            in_run, start = True, t[i - 1] if i > 0 else 0.0
        elif not off[i] and in_run:
            ax.axvspan(start, t[i - 1] if i > 0 else t[i], color="#d9b84a",
                       alpha=0.25, lw=0)
            in_run = False
    if in_run:
        ax.axvspan(start, t[-1], color="#d9b84a", alpha=0.25, lw=0)


def write_text_report(summary_rows: list[dict], out_md: str | Path) -> Path:
    """Per-condition summary table as markdown."""
    by_cond = _group(summary_rows, "condition")
    variables = sorted({r["variable"] for r in summary_rows})
    lines = ["# Simulation summary", ""]
    header = "| condition | " + " | ".join(variables) + " |"
    rule = "|---" * (len(variables) + 1) + "|"
    lines += [header, rule]
    for cond in sorted(by_cond):
        cells = {r["variable"]: r for r in by_cond[cond]}
        row = [cond]
        for var in variables:
            r = cells.get(var)
            row.append("" if r is None
                       else f"{r['mean']:.3f} ± {r['ci95']:.3f}")
        lines.append("| " + " | ".join(row) + " |")
    n = {int(r["n"]) for r in summary_rows}
    lines += ["", (f"Samples per cell: {min(n)} to {max(n)}"
                   if len(n) > 1 else f"Samples per cell: {n.pop()}")]
    out = Path(out_md)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text("\n".join(lines) + "\n")
    return out


def build_report(run_dir: str | Path, out_dir: str | Path) -> list[Path]:
    """All standard figures and the summary table for one simulate run."""
    run_dir = Path(run_dir)
    out_dir = Path(out_dir)
    written = []
    episodes = read_rows(run_dir / "episodes.csv")
    summary = read_rows(run_dir / "summary.csv")
    written.append(write_text_report(summary, out_dir / "summary.md"))
    for var, ylabel in (("mean_glance_s", "mean glance duration (s)"),
                        ("mean_dwell_s", "mean in-car dwell (s)"),
                        ("mean_task_time_s", "mean task time (s)"),
                        ("mean_abs_lat_m", "mean |lateral offset| (m)")):
        written.append(plot_condition_bars(
            episodes, var, out_dir / f"{var}.png", ylabel=ylabel))
    speeds = {parse_label(r["condition"])["speed_kmh"] for r in episodes}
    if len(speeds) > 2:
        written.append(plot_speed_sweep(
            episodes, "mean_glance_s", out_dir / "glance_vs_speed.png",
            ylabel="mean glance duration (s)"))
        written.append(plot_speed_sweep(
            episodes, "mean_task_time_s", out_dir / "tasktime_vs_speed.png",
            ylabel="mean task time (s)"))
    traces = sorted(run_dir.glob("traces/*/ep0000.csv"))
    if traces:
        written.append(plot_trace(read_rows(traces[0]),
                                  out_dir / "example_trace.png"))
    values = sorted(run_dir.glob("values/*.csv"))
    if values:
        written.append(plot_value_trace(read_rows(values[0]),
                                        out_dir / "example_values.png",
                                        episode=0))
    return written
