"""Speed x display-size x task-type grid with manual driving.

Eight conditions crossing 60/120 km/h speed limits, 6/9-element
displays, and the two task goals, all without lane centering. Writes
the standard simulate CSV set plus report figures.
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from supdrive.config import load_config  # noqa: E402
from supdrive.reporting import build_report  # noqa: E402
from supdrive.simulate import (  # noqa: E402
    PolicyStack,
    exp1_conditions,
    simulate_conditions,
)


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--ckpt-dir", default="artifacts/checkpoints")
    ap.add_argument("--out-dir", default="artifacts/exp1")
    ap.add_argument("--episodes", type=int, default=200)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--trace-episodes", type=int, default=2)
    ap.add_argument("--config", default=None)
    args = ap.parse_args()

    cfg = load_config(args.config)
    stack = PolicyStack.load(args.ckpt_dir)
    simulate_conditions(stack, exp1_conditions(), args.episodes, args.seed,
                        args.out_dir, cfg=cfg,
                        trace_episodes=args.trace_episodes,
                        n_boot=cfg["simulate"]["n_boot"])
    for path in build_report(args.out_dir, Path(args.out_dir) / "report"):
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
