"""Run configuration: defaults, key=value files and command-line overrides."""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from .experiment import CELLS, default_parallelism
from .spectral import K_HEADING, K_HEIGHT_PERIOD
from .vessel import VesselParams

STAGES = ("generate", "train", "evaluate", "analyze")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    n: int = 48000
    seed: int = 0
    out: str = "runs/default"
    vessel: dict = field(default_factory=dict)   # VesselParams overrides
    noise: bool = True
    k_values: tuple[int, ...] = (K_HEIGHT_PERIOD, K_HEADING)
    parallelism: int = field(default_factory=default_parallelism)
    stages: tuple[str, ...] = STAGES
    epochs: int = 100
    cells: tuple[str, ...] = tuple(CELLS)

    def vessel_params(self) -> VesselParams:
        return VesselParams(**self.vessel)

    def as_dict(self) -> dict:
        d = {f.name: getattr(self, f.name) for f in fields(self)}
        for key in ("k_values", "stages", "cells"):
            d[key] = list(d[key])
        d.pop("out")
        d.pop("parallelism")  # results never depend on it
        return d


def _parse_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


def _list(text: str) -> tuple[str, ...]:
    return tuple(s.strip() for s in text.split(",") if s.strip())


_PARSERS = {
    "n": int, "seed": int, "out": str, "noise": _parse_bool, "parallelism": int, "epochs": int,
    "k_values": lambda s: tuple(int(v) for v in _list(s)),
    "stages": _list, "cells": _list,
}


def parse_config_text(text: str, base: RunConfig | None = None) -> RunConfig:
    """Apply ``key = value`` lines on top of ``base``.

    ``#`` starts a comment. Vessel overrides use ``vessel.<field> = value``.
    """
    cfg = base or RunConfig()
    updates: dict = {}
    vessel = dict(cfg.vessel)
    vessel_fields = set(VesselParams.__dataclass_fields__)
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        try:
            if key.startswith("vessel."):
                name = key[len("vessel."):]
                if name not in vessel_fields:
                    raise ConfigError(f"line {lineno}: unknown vessel parameter {name!r}")
                vessel[name] = float(value)
            elif key in _PARSERS:
                updates[key] = _PARSERS[key](value)
            else:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"line {lineno}: bad value for {key!r}: {value!r}") from None
    cfg = replace(cfg, vessel=vessel, **updates)
    validate(cfg)
    return cfg


def load_config(path, base: RunConfig | None = None) -> RunConfig:
    return parse_config_text(Path(path).read_text(), base)


def validate(cfg: RunConfig) -> None:
    from .experiment import parse_cell

    if cfg.n < 1:
        raise ConfigError("n must be at least 1")
    if cfg.epochs < 1:
        raise ConfigError("epochs must be at least 1")
    bad = [s for s in cfg.stages if s not in STAGES]
    if bad:
        raise ConfigError(f"unknown stages {bad}")
    for c in cfg.cells:
        try:
            parse_cell(c)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    try:
        cfg.vessel_params()
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid vessel parameters: {exc}") from None
