"""Runtime configuration for the gateway and CLI.

Sources, lowest to highest precedence: built-in defaults, a key=value config
file, SUBQUEST_* environment variables, command-line flags.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, fields
from pathlib import Path

ENV_PREFIX = "SUBQUEST_"


@dataclass
class GatewayConfig:
    corpus: str = ""  # empty -> packaged starter corpus
    store: str = ""  # empty -> no KB execution
    model: str = "template-inverse"  # oracle | template-inverse | remote:<url>
    attempts: int = 3
    port: int = 8040
    records: str = "dialogues.jsonl"  # confirmed-session persistence


def _coerce(value: str, target_type):
    if target_type is int:
        return int(value)
    return value


def load_config(path: str | None = None, overrides: dict | None = None) -> GatewayConfig:
    cfg = GatewayConfig()
    if path:
        for line_no, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{line_no}: expected key=value")
            key, _, value = line.partition("=")
            key = key.strip().lower()
            if not hasattr(cfg, key):
                raise ValueError(f"{path}:{line_no}: unknown key {key!r}")
            setattr(cfg, key, _coerce(value.strip(), type(getattr(cfg, key))))
    for f in fields(cfg):
        env = os.environ.get(ENV_PREFIX + f.name.upper())
        if env is not None:
            setattr(cfg, f.name, _coerce(env, f.type if isinstance(f.type, type) else type(getattr(cfg, f.name))))
    for key, value in (overrides or {}).items():
        if value is not None:
            setattr(cfg, key, value)
    return cfg
