"""Speed sweep crossed with lane centering and display size.

Thirty conditions: speed limits 30 to 150 km/h in 30 km/h steps, lane
centering on/off, and 6/9/12-element displays on the counting task.
Downstream analysis pools display sizes within speed bins.
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from supdrive.config import load_config  # noqa: E402
from supdrive.reporting import build_report  # noqa: E402
from supdrive.simulate import (  # noqa: E402
    PolicyStack,
    exp2_conditions,
    simulate_conditions,
)


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--ckpt-dir", default="artifacts/checkpoints")
    ap.add_argument("--out-dir", default="artifacts/exp2")
    ap.add_argument("--episodes", type=int, default=100)
    ap.add_argument("--seed", type=int, default=2)
    ap.add_argument("--trace-episodes", type=int, default=1)
    ap.add_argument("--config", default=None)
    args = ap.parse_args()

    cfg = load_config(args.config)
    stack = PolicyStack.load(args.ckpt_dir)
    simulate_conditions(stack, exp2_conditions(), args.episodes, args.seed,
                        args.out_dir, cfg=cfg,
                        trace_episodes=args.trace_episodes,
                        n_boot=cfg["simulate"]["n_boot"])
    for path in build_report(args.out_dir, Path(args.out_dir) / "report"):
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
