"""Shared test helpers that fabricate small agents and run directories."""

from pathlib import Path

import torch

from supdrive.learning.checkpoint import Checkpoint, save_checkpoint
from supdrive.learning.nets import (
    driving_action_limit,
    driving_obs_scale,
    search_obs_scale,
    supervisor_obs_scale,
)
from supdrive.learning.ppo import PpoAgent, PpoConfig
from supdrive.learning.sac import SacAgent, SacConfig
from supdrive.supervisor_env import RunningNorm


def fabricate_checkpoints(out: Path) -> Path:
    """Three untrained agents saved in the standard checkpoint layout."""
    torch.manual_seed(99)
    driving = SacAgent(12, 2, driving_obs_scale(), driving_action_limit(),
                       SacConfig(hidden=(16, 16)))
    search = PpoAgent(28, 12, search_obs_scale(), PpoConfig(hidden=(16,)))
    supervisor = PpoAgent(3, 2, supervisor_obs_scale(),
                          PpoConfig(hidden=(8,)))
    norm = RunningNorm(enabled=True, count=50, mean=[4.0, 3.0],
                       m2=[49 * 2.0, 49 * 1.0])
    save_checkpoint(Checkpoint("driving", driving.state_dict(),
                               train_config={"hidden": [16, 16]}),
                    out / "driving.pt")
    save_checkpoint(Checkpoint("search", search.state_dict(),
                               train_config={"hidden": [16]}),
                    out / "search.pt")
    save_checkpoint(Checkpoint("supervisor", supervisor.state_dict(),
                               norm_stats=norm.to_dict(),
                               train_config={"hidden": [8]}),
                    out / "supervisor.pt")
    return out
