#!/usr/bin/env python3
"""Train all three agents in dependency order and save checkpoints.

Search and driving agents train independently; the supervisor trains on
top of their frozen checkpoints. Each stage stops early once its
evaluation return stabilizes, then must pass its gates or the run aborts.
"""

import argparse
import json
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from supdrive.learning.train import TrainConfig, TrainingFailure, train_and_save


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="artifacts/checkpoints",
                    help="directory for the three checkpoint pairs")
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--quick", action="store_true",
                    help="tiny budgets for a pipeline shakeout; gates are "
                         "expected to fail")
    ap.add_argument("--only", choices=["search", "driving", "supervisor"],
                    help="train a single stage (supervisor assumes the "
                         "subtask checkpoints already exist)")
    args = ap.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    budgets = ({"search": 6_000, "driving": 5_000, "supervisor": 3_000}
               if args.quick else
               {"search": 300_000, "driving": 1_000_000,
                "supervisor": 500_000})

    stages = [args.only] if args.only else ["search", "driving", "supervisor"]
    paths = {k: out / f"{k}.pt" for k in ("search", "driving", "supervisor")}
    t0 = time.monotonic()
    for stage in stages:
        cfg = TrainConfig(agent=stage, total_env_steps=budgets[stage],
                          seed=args.seed, eval_every=10_000,
                          eval_episodes=5)
        if args.quick:
            cfg.eval_every = max(budgets[stage] // 3, 500)
            cfg.eval_episodes = 2
            cfg.convergence_window = 4
        print(f"=== {stage}: budget {budgets[stage]} steps ===", flush=True)
        kwargs = {}
        if stage == "supervisor":
            kwargs = {"driving_ckpt": paths["driving"],
                      "search_ckpt": paths["search"]}
        try:
            _, stats, path = train_and_save(stage, paths[stage], cfg, **kwargs)
        except TrainingFailure as exc:
            print(f"{stage} FAILED gates: {exc}", flush=True)
            print(json.dumps(
                {k: v for k, v in exc.diagnostics.items()
                 if k != "eval_curve"}, indent=2, default=str), flush=True)
            return 1
        brief = {k: v for k, v in stats.items() if k != "eval_curve"}
        print(f"{stage} saved to {path}", flush=True)
        print(json.dumps(brief, indent=2, default=str), flush=True)
    print(f"all stages done in {time.monotonic() - t0:.0f}s", flush=True)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
