"""Command line front end.

Subcommands: train-driver, train-search, train-supervisor, simulate,
evaluate, report. Seeds and the checkpoint directory can come from the
SUPDRIVE_SEED and SUPDRIVE_CKPT_DIR environment variables; flags win
over the environment. Exit codes: 0 success, 2 bad configuration or
checkpoint, 3 training did not meet its gates, 1 anything unexpected.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path


def _default_seed() -> int:
    return int(os.environ.get("SUPDRIVE_SEED", "1"))


def _default_ckpt_dir() -> str:
    return os.environ.get("SUPDRIVE_CKPT_DIR", "artifacts/checkpoints")


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=_default_seed(),
                   help="base seed (env SUPDRIVE_SEED)")
    p.add_argument("--config", type=str, default=None,
                   help="JSON run configuration")
    p.add_argument("--ckpt-dir", type=str, default=_default_ckpt_dir(),
                   help="checkpoint directory (env SUPDRIVE_CKPT_DIR)")
    p.add_argument("--deterministic", action="store_true",
                   help="single-threaded torch with deterministic kernels")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="supdrive",
        description="train and run the supervisory multitasking stack")
    sub = parser.add_subparsers(dest="command", required=True)

    for kind, name in (("driving", "train-driver"),
                       ("search", "train-search"),
                       ("supervisor", "train-supervisor")):
        p = sub.add_parser(name, help=f"train the {kind} policy")
        _add_common(p)
        p.add_argument("--steps", type=int, default=None,
                       help="environment step budget")
        p.add_argument("--out", type=str, default=None,
                       help=f"checkpoint path (default <ckpt-dir>/{kind}.pt)")
        p.add_argument("--eval-every", type=int, default=10_000)
        p.add_argument("--eval-episodes", type=int, default=5)
        if kind == "supervisor":
            p.add_argument("--driving-ckpt", type=str, default=None)
            p.add_argument("--search-ckpt", type=str, default=None)
        p.set_defaults(kind=kind)

    p = sub.add_parser("simulate", help="run trained agents over conditions")
    _add_common(p)
    p.add_argument("--experiment", choices=("exp1", "exp2", "single"),
                   default="exp1")
    p.add_argument("--episodes", type=int, default=None,
                   help="episodes per condition (default from config)")
    p.add_argument("--out-dir", type=str, default="artifacts/sim")
    p.add_argument("--trace-episodes", type=int, default=1,
                   help="episodes per condition with full substep traces")
    p.add_argument("--speed", type=float, default=60.0,
                   help="single: speed limit km/h")
    p.add_argument("--lca", action="store_true",
                   help="single: enable lane centering")
    p.add_argument("--rows", type=int, default=3)
    p.add_argument("--cols", type=int, default=3)
    p.add_argument("--task-type", type=int, choices=(0, 1), default=1)
    p.add_argument("--acc", action="store_true",
                   help="single: enable cruise control")

    p = sub.add_parser("evaluate", help="evaluate checkpoints against gates")
    _add_common(p)
    p.add_argument("--episodes", type=int, default=20)
    p.add_argument("--json", action="store_true",
                   help="print machine-readable stats only")

    p = sub.add_parser("report", help="figures and tables from a sim run")
    p.add_argument("--run-dir", type=str, required=True,
                   help="directory written by simulate")
    p.add_argument("--out-dir", type=str, default=None,
                   help="default <run-dir>/report")
    return parser


def _apply_determinism(args) -> None:
    if getattr(args, "deterministic", False):
        import torch

        torch.set_num_threads(1)
        torch.use_deterministic_algorithms(True)


def _cmd_train(args) -> int:
    from .learning.train import TrainConfig, train_and_save

    budgets = {"driving": 1_000_000, "search": 300_000,
               "supervisor": 500_000}
    steps = args.steps if args.steps is not None else budgets[args.kind]
    out = args.out or str(Path(args.ckpt_dir) / f"{args.kind}.pt")
    config = TrainConfig(agent=args.kind, total_env_steps=steps,
                         seed=args.seed, eval_every=args.eval_every,
                         eval_episodes=args.eval_episodes)
    kwargs = {}
    if args.kind == "supervisor":
        kwargs["driving_ckpt"] = (args.driving_ckpt or
                                  str(Path(args.ckpt_dir) / "driving.pt"))
        kwargs["search_ckpt"] = (args.search_ckpt or
                                 str(Path(args.ckpt_dir) / "search.pt"))
    _, stats, path = train_and_save(args.kind, out, config, **kwargs)
    print(json.dumps({"checkpoint": str(path), "eval_stats": stats},
                     indent=2, sort_keys=True, default=str))
    return 0


def _cmd_simulate(args) -> int:
    from .config import load_config
    from .simulate import (Condition, PolicyStack, exp1_conditions,
                           exp2_conditions, simulate_conditions)

    cfg = load_config(args.config)
    if args.experiment == "exp1":
        conditions = exp1_conditions()
    elif args.experiment == "exp2":
        conditions = exp2_conditions()
    else:
        conditions = [Condition.build(args.speed, args.lca, args.rows,
                                      args.cols, args.task_type,
                                      acc=args.acc)]
    episodes = (args.episodes if args.episodes is not None
                else cfg["simulate"]["episodes"])
    trace_eps = args.trace_episodes if cfg["simulate"]["trace_substeps"] else 0
    stack = PolicyStack.load(args.ckpt_dir)
    simulate_conditions(stack, conditions, episodes, args.seed,
                        args.out_dir, cfg=cfg, trace_episodes=trace_eps,
                        n_boot=cfg["simulate"]["n_boot"])
    print(f"wrote {args.out_dir}")
    return 0


def _cmd_evaluate(args) -> int:
    import numpy as np

    from .config import driving_env_config, load_config
    from .learning.train import (TrainConfig, driving_gates,
                                 evaluate_supervisor, search_gates)
    from .simulate import PolicyStack

    base = driving_env_config(load_config(args.config))
    stack = PolicyStack.load(args.ckpt_dir)
    out = {
        "driving": driving_gates(stack.driving, base, args.seed),
        "search": search_gates(stack.search, args.seed),
    }
    sup_cfg = TrainConfig(agent="supervisor", total_env_steps=0,
                          seed=args.seed, progress=False)
    returns = evaluate_supervisor(stack.supervisor, sup_cfg, stack.driving,
                                  stack.search, base, stack.norm, args.seed,
                                  args.episodes)
    out["supervisor"] = {"mean_return": float(np.mean(returns)),
                         "episodes": len(returns)}
    print(json.dumps(out, indent=2, sort_keys=True, default=str))
    if not args.json:
        ok = (out["driving"]["on_lane_pass"]
              and out["driving"]["step_reward_pass"]
              and out["search"]["completion_rate"] == 1.0)
        print(f"gates: {'pass' if ok else 'FAIL'}")
    return 0


def _cmd_report(args) -> int:
    from .reporting import build_report

    out_dir = args.out_dir or str(Path(args.run_dir) / "report")
    written = build_report(args.run_dir, out_dir)
    for path in written:
        print(path)
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    from .config import ConfigError
    from .learning.checkpoint import CheckpointError
    from .learning.train import TrainingFailure

    _apply_determinism(args)
    try:
        if args.command in ("train-driver", "train-search",
                            "train-supervisor"):
            return _cmd_train(args)
        if args.command == "simulate":
            return _cmd_simulate(args)
        if args.command == "evaluate":
            return _cmd_evaluate(args)
        if args.command == "report":
            return _cmd_report(args)
        raise AssertionError(f"unhandled command {args.command!r}")
    except (ConfigError, CheckpointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except TrainingFailure as exc:
        print(f"training failed: {exc}", file=sys.stderr)
        diag = dict(exc.diagnostics)
        diag.pop("eval_curve", None)
        print(json.dumps(diag, indent=2, sort_keys=True, default=str),
              file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
