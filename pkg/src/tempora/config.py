"""Run configuration: JSON file with strict keys, plus flag overrides."""

from __future__ import annotations

import dataclasses
import json
import os
from dataclasses import dataclass, field

from .errors import ConfigError
from .evidential import EpistemicConfig
from .orchestrator import MCTSConfig
from .pis import PISConfig

ENV_VAR = "ANSB_CONFIG"
PROVIDERS = ("rule_based", "noisy", "remote")


@dataclass(frozen=True)
class RunConfig:
    pis: PISConfig = field(default_factory=PISConfig)
    mcts: MCTSConfig = field(default_factory=MCTSConfig)
    provider: dict = field(default_factory=lambda: {"name": "rule_based"})
    paths: dict = field(default_factory=dict)
    seed: int = 0

    def to_json(self) -> dict:
        return dataclasses.asdict(self)


def _build(cls, data, where: str):
    if not isinstance(data, dict):
        raise ConfigError(f"{where}: expected an object")
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - names)
    if unknown:
        raise ConfigError(f"{where}: unknown keys {unknown}")
    try:
        return cls(**data)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from None


def _provider(data) -> dict:
    if not isinstance(data, dict):
        raise ConfigError("provider: expected an object")
    name = data.get("name", "rule_based")
    allowed = {
        "rule_based": set(),
        "noisy": {"seed", "p_flip", "rate"},
        "remote": {"endpoint", "timeout_ms"},
    }
    if name not in allowed:
        raise ConfigError(f"provider: unknown name {name!r}")
    unknown = sorted(set(data) - allowed[name] - {"name"})
    if unknown:
        raise ConfigError(f"provider: unknown keys {unknown}")
    if name == "remote" and "endpoint" not in data:
        raise ConfigError("provider: remote needs an endpoint")
    return {"name": name, **{k: v for k, v in data.items() if k != "name"}}


def config_from_dict(data: dict) -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigError("config: expected an object")
    unknown = sorted(set(data) - {"pis", "mcts", "provider", "paths", "seed"})
    if unknown:
        raise ConfigError(f"config: unknown keys {unknown}")
    pis = dict(data.get("pis", {}))
    if "epistemic" in pis:
        pis["epistemic"] = _build(EpistemicConfig, pis["epistemic"], "pis.epistemic")
    paths = data.get("paths", {})
    if not isinstance(paths, dict) or set(paths) - {"dataset", "output"}:
        raise ConfigError("paths: only 'dataset' and 'output' are recognized")
    seed = data.get("seed", 0)
    if not isinstance(seed, int):
        raise ConfigError("seed: expected an integer")
    return RunConfig(
        pis=_build(PISConfig, pis, "pis"),
        mcts=_build(MCTSConfig, data.get("mcts", {}), "mcts"),
        provider=_provider(data.get("provider", {"name": "rule_based"})),
        paths=dict(paths),
        seed=seed,
    )


def load_config(path: str | None = None) -> RunConfig:
    """Read ``path`` (or ``$ANSB_CONFIG``); defaults when neither is set."""
    path = path or os.environ.get(ENV_VAR)
    if not path:
        return RunConfig()
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return config_from_dict(data)
