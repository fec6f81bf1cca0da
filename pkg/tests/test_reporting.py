"""Figure and table generation from simulate run directories."""

import csv
from pathlib import Path

import pytest

from supdrive.reporting import (
    build_report,
    parse_label,
    plot_trace,
    plot_value_trace,
    read_rows,
    write_text_report,
)
from supdrive.simulate import (
    EPISODE_COLUMNS,
    SUMMARY_COLUMNS,
    TRACE_COLUMNS,
    VALUE_COLUMNS,
)


def _write(path: Path, header, rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


@pytest.fixture()
def run_dir(tmp_path):
    """Small fabricated simulate output: 3 speeds x 1 lca state each."""
    labels = ["v30_e6_t1_lcaoff", "v60_e6_t1_lcaon", "v90_e6_t1_lcaoff"]
    ep_rows = []
    for ci, label in enumerate(labels):
        for ep in range(3):
            ep_rows.append([label, ep, 30.0 + ep, -5.0 - ci, 4, 12,
                            1.1 - 0.1 * ci, 0.6, 3.5 + 0.2 * ci,
                            0.3, 0.9, 0.01, 10.0 + 5 * ci])
    _write(tmp_path / "episodes.csv", EPISODE_COLUMNS, ep_rows)
    sum_rows = [[label, "mean_glance_s", 1.0, 0.1, 3] for label in labels]
    _write(tmp_path / "summary.csv", SUMMARY_COLUMNS, sum_rows)
    trace = []
    for i in range(20):
        glance = 5 <= i < 10
        trace.append([0.1 * (i + 1), int(glance), 1.0 * i, 0.1, 1.0 * i,
                      0.12, 0.05 if glance else 0.01, 10.0, 0.0, 0.0, 0.0,
                      0.1, 0 if glance else -1, 0 if glance else -1])
    _write(tmp_path / "traces" / labels[0] / "ep0000.csv", TRACE_COLUMNS,
           trace)
    values = [[0, k, 0.5 * (k + 1), int(2 <= k < 5), int(2 <= k < 5),
               5.0 - 0.2 * k, 1.0] for k in range(8)]
    _write(tmp_path / "values" / f"{labels[0]}.csv", VALUE_COLUMNS, values)
    return tmp_path


def test_parse_label_round_trip():
    meta = parse_label("v60_e6_t1_lcaoff")
    assert meta == {"speed_kmh": 60.0, "elements": 6, "task_type": 1,
                    "lca": False, "acc": False}
    meta = parse_label("v120_e12_t0_lcaon_acc")
    assert meta["speed_kmh"] == 120.0 and meta["elements"] == 12
    assert meta["task_type"] == 0 and meta["lca"] and meta["acc"]
    with pytest.raises(ValueError):
        parse_label("lane_keeping_baseline")


def test_read_rows_parses_numbers_keeps_strings(run_dir):
    rows = read_rows(run_dir / "episodes.csv")
    assert rows[0]["condition"] == "v30_e6_t1_lcaoff"
    assert isinstance(rows[0]["wall_s"], float)
    assert rows[0]["tasks_done"] == 4.0


def test_build_report_writes_everything(run_dir):
    out = run_dir / "report"
    written = build_report(run_dir, out)
    names = {p.name for p in written}
    assert {"summary.md", "mean_glance_s.png", "mean_dwell_s.png",
            "mean_task_time_s.png", "mean_abs_lat_m.png",
            "glance_vs_speed.png", "tasktime_vs_speed.png",
            "example_trace.png", "example_values.png"} == names
    for p in written:
        assert p.exists() and p.stat().st_size > 0
    text = (out / "summary.md").read_text()
    assert "v30_e6_t1_lcaoff" in text
    assert "Samples per cell" in text


def test_plots_handle_all_attended_trace(tmp_path, run_dir):
    rows = read_rows(run_dir / "traces" / "v30_e6_t1_lcaoff" / "ep0000.csv")
    for r in rows:
        r["locus"] = 0.0
    out = plot_trace(rows, tmp_path / "flat.png")
    assert out.exists()
    vrows = read_rows(run_dir / "values" / "v30_e6_t1_lcaoff.csv")
    out = plot_value_trace(vrows, tmp_path / "vals.png", episode=0)
    assert out.exists()


def test_text_report_alone(tmp_path):
    rows = [{"condition": "v60_e6_t1_lcaoff", "variable": "wall_s",
             "mean": 31.0, "ci95": 0.5, "n": 3}]
    out = write_text_report(rows, tmp_path / "s.md")
    assert "wall_s" in out.read_text()
