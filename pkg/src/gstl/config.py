"""Run configuration: thresholds and time bounds shared by the CLI commands.

Files are flat ``key = value`` lines (``#`` starts a comment); command-line
flags override file values.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, fields
from pathlib import Path

from .interval_algebra import DEFAULT_EPS
from .spatial_model import DEFAULT_EPS_DIST

__all__ = ["Config", "ConfigError", "load_config", "parse_config"]


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class Config:
    d: float = DEFAULT_EPS_DIST          # connectivity threshold used when mining
    eps_dist: float = DEFAULT_EPS_DIST   # neighbor threshold for eval/verify graphs
    eps: float = DEFAULT_EPS             # endpoint tolerance of interval relations
    horizon: int = 60
    deadline: int = 40
    gap: int = 0                         # missing frames tolerated inside a mined interval
    hold: int = 1                        # frames a post-condition outlasts the move
    move_time: int = 5                   # default for actions without one

    def __post_init__(self):
        for f in ("d", "eps_dist", "eps", "horizon", "deadline", "hold", "move_time"):
            if getattr(self, f) <= 0:
                raise ConfigError(f"{f} must be positive")
        if self.gap < 0:
            raise ConfigError("gap must be non-negative")
        if self.horizon < self.deadline:
            raise ConfigError("horizon must be at least the deadline")

    def replace(self, **kw) -> "Config":
        kw = {k: v for k, v in kw.items() if v is not None}
        return dataclasses.replace(self, **kw)


_TYPES = {f.name: (float if f.type in ("float", float) else int) for f in fields(Config)}


def parse_config(text: str, base: Config = Config()) -> Config:
    values = {}
    for n, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {n}: expected key = value")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in _TYPES:
            raise ConfigError(f"line {n}: unknown key {key!r}")
        try:
            values[key] = _TYPES[key](val)
        except ValueError:
            raise ConfigError(f"line {n}: bad value {val!r} for {key}") from None
    return base.replace(**values)


def load_config(path) -> Config:
    return parse_config(Path(path).read_text())
