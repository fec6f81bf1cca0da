"""Checkpoint persistence: binary parameter blob plus JSON sidecar.

A checkpoint is two files sharing a stem: `<stem>.pt` holds the network
parameters, `<stem>.json` holds everything a human or a loader needs to
interpret them (agent kind, config echoes, normalization statistics, seed
lineage, evaluation statistics, schema version). Loads verify the schema
and fail loudly on corruption or version drift; there is no silent
fallback.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import torch

SCHEMA_VERSION = "supdrive-checkpoint/1"


class CheckpointError(Exception):
    """Unreadable, corrupt, or incompatible checkpoint."""


@dataclass
class Checkpoint:
    agent_kind: str                  # driving | search | supervisor
    params: dict                     # nested torch state dicts
    norm_stats: dict = field(default_factory=dict)
    train_config: dict = field(default_factory=dict)
    env_config: dict = field(default_factory=dict)
    seed_lineage: list = field(default_factory=list)
    eval_stats: dict = field(default_factory=dict)
    schema_version: str = SCHEMA_VERSION


def _sidecar(path: Path) -> Path:
    return path.with_suffix(".json")


def save_checkpoint(ckpt: Checkpoint, path: str | Path) -> Path:
    path = Path(path).with_suffix(".pt")
    path.parent.mkdir(parents=True, exist_ok=True)
    torch.save({"schema_version": ckpt.schema_version,
                "agent_kind": ckpt.agent_kind,
                "params": ckpt.params}, path)
    meta = {
        "schema_version": ckpt.schema_version,
        "agent_kind": ckpt.agent_kind,
        "norm_stats": ckpt.norm_stats,
        "train_config": ckpt.train_config,
        "env_config": ckpt.env_config,
        "seed_lineage": ckpt.seed_lineage,
        "eval_stats": ckpt.eval_stats,
    }
    _sidecar(path).write_text(json.dumps(meta, indent=2, sort_keys=True))
    return path


def load_checkpoint(path: str | Path,
                    expected_kind: str | None = None) -> Checkpoint:
    path = Path(path).with_suffix(".pt")
    sidecar = _sidecar(path)
    if not path.exists():
        raise CheckpointError(f"missing checkpoint blob: {path}")
    if not sidecar.exists():
        raise CheckpointError(f"missing checkpoint sidecar: {sidecar}")
    try:
        meta = json.loads(sidecar.read_text())
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise CheckpointError(f"unreadable sidecar {sidecar}: {exc}") from exc
    for key in ("schema_version", "agent_kind"):
        if key not in meta:
            raise CheckpointError(f"sidecar {sidecar} lacks '{key}'")
    if meta["schema_version"] != SCHEMA_VERSION:
        raise CheckpointError(
            f"schema mismatch: file has {meta['schema_version']!r}, "
            f"this build reads {SCHEMA_VERSION!r}")
    try:
        blob = torch.load(path, map_location="cpu", weights_only=False)
    except Exception as exc:
        raise CheckpointError(f"corrupt checkpoint blob {path}: {exc}") from exc
    if not isinstance(blob, dict) or "params" not in blob:
        raise CheckpointError(f"checkpoint blob {path} has no parameters")
    if blob.get("schema_version") != SCHEMA_VERSION:
        raise CheckpointError(
            f"schema mismatch: blob has {blob.get('schema_version')!r}, "
            f"this build reads {SCHEMA_VERSION!r}")
    if blob.get("agent_kind") != meta["agent_kind"]:
        raise CheckpointError(
            f"agent kind disagrees between blob ({blob.get('agent_kind')!r}) "
            f"and sidecar ({meta['agent_kind']!r})")
    if expected_kind is not None and meta["agent_kind"] != expected_kind:
        raise CheckpointError(
            f"checkpoint holds a {meta['agent_kind']!r} agent, "
            f"caller needs {expected_kind!r}")
    return Checkpoint(
        agent_kind=meta["agent_kind"], params=blob["params"],
        norm_stats=meta.get("norm_stats", {}),
        train_config=meta.get("train_config", {}),
        env_config=meta.get("env_config", {}),
        seed_lineage=meta.get("seed_lineage", []),
        eval_stats=meta.get("eval_stats", {}),
        schema_version=meta["schema_version"])
