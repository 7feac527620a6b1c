"""Flat ``key = value`` run configuration files."""

from __future__ import annotations

import enum
import typing
from dataclasses import fields
from pathlib import Path

from netmig.dynamics import SimConfig
from netmig.economics import EconParams


class ConfigError(ValueError):
    pass


def _field_types() -> dict[str, type]:
    hints = typing.get_type_hints(SimConfig)
    hints.update(typing.get_type_hints(EconParams))
    hints.pop("econ")
    return hints


def _convert(key: str, raw: str, kind):
    if kind is bool:
        return raw.lower() in ("1", "true", "yes")
    if kind is int:
        return int(raw)
    if kind is float:
        return float(raw)
    if isinstance(kind, type) and issubclass(kind, enum.Enum):
        return kind(raw)
    if typing.get_origin(kind) is tuple:
        return tuple(x.strip() for x in raw.split(",") if x.strip())
    return raw


def parse_config(text: str, base: SimConfig | None = None) -> SimConfig:
    types = _field_types()
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, raw = (s.strip() for s in line.split("=", 1))
        if key not in types:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        try:
            values[key] = _convert(key, raw, types[key])
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {exc}") from None
    return (base or SimConfig()).with_values(**values)


def load_config(path: str | Path, base: SimConfig | None = None) -> SimConfig:
    return parse_config(Path(path).read_text(), base)


def dump_config(cfg: SimConfig) -> str:
    lines = []
    for key, value in cfg.flat().items():
        if isinstance(value, tuple):
            value = ",".join(value)
        elif isinstance(value, enum.Enum):
            value = value.value
        lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"


CONFIG_KEYS = tuple(f.name for f in fields(SimConfig) if f.name != "econ") + tuple(
    f.name for f in fields(EconParams)
)
