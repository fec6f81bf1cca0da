"""Subtask value estimates under a scripted attention schedule.

Forces long glances at the display so the decline of the driving value
while blind, its recovery on looking back, and the moderating effects
of speed and lane centering are visible in the decision-level value
rows. Writes per-condition value CSVs and one figure per condition.
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from supdrive.config import load_config  # noqa: E402
from supdrive.reporting import plot_value_trace, read_rows  # noqa: E402
from supdrive.seeding import int_seed  # noqa: E402
from supdrive.simulate import (  # noqa: E402
    Condition,
    PolicyStack,
    run_episode,
    scripted_glance_schedule,
    write_values,
)


def trace_conditions() -> list[Condition]:
    conds = []
    for speed in (60.0, 120.0):
        for lca in (False, True):
            conds.append(Condition.build(speed, lca, 3, 3, 1))
    return conds


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--ckpt-dir", default="artifacts/checkpoints")
    ap.add_argument("--out-dir", default="artifacts/value_traces")
    ap.add_argument("--episodes", type=int, default=100)
    ap.add_argument("--seed", type=int, default=3)
    ap.add_argument("--glance-decisions", type=int, default=13,
                    help="consecutive display decisions per scripted glance")
    ap.add_argument("--dwell-decisions", type=int, default=8,
                    help="consecutive road decisions between glances")
    ap.add_argument("--n-tasks", type=int, default=4,
                    help="tasks per episode (keeps value CSVs small)")
    ap.add_argument("--config", default=None)
    args = ap.parse_args()

    cfg = load_config(args.config)
    cfg["supervisor"]["n_tasks"] = args.n_tasks
    stack = PolicyStack.load(args.ckpt_dir)
    out = Path(args.out_dir)
    schedule = scripted_glance_schedule(args.glance_decisions,
                                        args.dwell_decisions)
    for ci, cond in enumerate(trace_conditions()):
        results = []
        for ep in range(args.episodes):
            seed = int_seed(args.seed, "vt", ci, "ep", ep)
            results.append(run_episode(stack, cond, seed, ep, cfg,
                                       attend_override=schedule))
        csv_path = out / f"{cond.label}.csv"
        write_values(csv_path, results)
        plot_value_trace(read_rows(csv_path), out / f"{cond.label}.png",
                         episode=0)
        print(f"[value-traces] {cond.label}: {args.episodes} episodes "
              f"-> {csv_path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
