"""One JSON file configures a whole run.

The file is a dict of sections; every key must name a real field of the
dataclass behind its section, so typos fail loudly instead of silently
running defaults. Omitted sections and keys fall back to the dataclass
defaults. Builders assemble the nested environment configs from the
validated sections.
"""

from __future__ import annotations

import dataclasses
import json
from pathlib import Path

from .driving_env import DrivingEnvConfig
from .search_env import EmmaParams, SearchEnvConfig
from .supervisor_env import SupervisorEnvConfig
from .vehicle import LcaConfig, NoiseParams
from .geometry import RoadGeneratorConfig


class ConfigError(ValueError):
    """Malformed or contradictory run configuration."""


_SECTION_TYPES = {
    "road": RoadGeneratorConfig,
    "noise": NoiseParams,
    "lca": LcaConfig,
    "emma": EmmaParams,
    "driving": DrivingEnvConfig,
    "search": SearchEnvConfig,
    "supervisor": SupervisorEnvConfig,
}

# These fields are nested dataclasses or non-JSON types; they are built
# from their own sections instead of set directly.
_COMPOSED_FIELDS = {
    "driving": {"road", "noise", "lca", "fixed_road"},
    "search": {"emma"},
}

_SIMULATE_KEYS = {
    "episodes": 200,          # per condition
    "n_boot": 1000,           # bootstrap resamples for interval estimates
    "trace_substeps": True,   # write per-substep trace rows
}


def _check_keys(section: str, data: dict) -> None:
    if not isinstance(data, dict):
        raise ConfigError(f"section {section!r} must be an object")
    if section == "simulate":
        allowed = set(_SIMULATE_KEYS)
    else:
        cls = _SECTION_TYPES[section]
        allowed = {f.name for f in dataclasses.fields(cls)}
        allowed -= _COMPOSED_FIELDS.get(section, set())
    unknown = sorted(set(data) - allowed)
    if unknown:
        raise ConfigError(
            f"unknown key(s) in section {section!r}: {', '.join(unknown)}; "
            f"allowed: {', '.join(sorted(allowed))}")


def default_config() -> dict:
    """All sections at their dataclass defaults, JSON-serializable."""
    cfg: dict = {}
    for section, cls in _SECTION_TYPES.items():
        skip = _COMPOSED_FIELDS.get(section, set())
        if section == "noise":
            # The calibrated noise defaults live on the driving env config.
            cfg[section] = dataclasses.asdict(DrivingEnvConfig().noise)
            continue
        values = {}
        for f in dataclasses.fields(cls):
            if f.name in skip:
                continue
            if f.default is not dataclasses.MISSING:
                v = f.default
            elif f.default_factory is not dataclasses.MISSING:  # type: ignore
                v = f.default_factory()                          # type: ignore
            else:
                raise ConfigError(
                    f"{cls.__name__}.{f.name} has no default")
            values[f.name] = list(v) if isinstance(v, tuple) else v
        cfg[section] = values
    cfg["simulate"] = dict(_SIMULATE_KEYS)
    return cfg


def load_config(path: str | Path | None = None) -> dict:
    """Defaults overlaid with the file's sections; unknown keys error."""
    cfg = default_config()
    if path is None:
        return cfg
    try:
        data = json.loads(Path(path).read_text())
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") \
            from exc
    if not isinstance(data, dict):
        raise ConfigError("top level of a config file must be an object")
    unknown = sorted(set(data) - set(cfg))
    if unknown:
        raise ConfigError(
            f"unknown section(s): {', '.join(unknown)}; "
            f"allowed: {', '.join(sorted(cfg))}")
    for section, overrides in data.items():
        _check_keys(section, overrides)
        cfg[section].update(overrides)
    return cfg


def _tuplify(cls, values: dict) -> dict:
    """JSON arrays back to tuples where the dataclass expects them."""
    out = dict(values)
    for f in dataclasses.fields(cls):
        if f.name in out and isinstance(out[f.name], list):
            out[f.name] = tuple(out[f.name])
    return out


def driving_env_config(cfg: dict) -> DrivingEnvConfig:
    built = DrivingEnvConfig(
        road=RoadGeneratorConfig(**_tuplify(RoadGeneratorConfig,
                                            cfg["road"])),
        noise=NoiseParams(**cfg["noise"]),
        lca=LcaConfig(**cfg["lca"]),
        **_tuplify(DrivingEnvConfig, cfg["driving"]))
    built.validate()
    return built


def search_env_config(cfg: dict) -> SearchEnvConfig:
    return SearchEnvConfig(emma=EmmaParams(**cfg["emma"]), **cfg["search"])


def supervisor_env_config(cfg: dict) -> SupervisorEnvConfig:
    return SupervisorEnvConfig(**cfg["supervisor"])
