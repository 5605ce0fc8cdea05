"""Run configuration: ``key = value`` files, environment and command-line overrides."""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any, Mapping, Optional

from .exponents import ALPHA_TOL
from .profile_ode import ATOL, EVENT_TOL, RTOL, default_horizon

__all__ = ["RunConfig", "ConfigError", "parse_config_text", "load_config", "THREADS_ENV"]

THREADS_ENV = "SSS_THREADS"


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    N: int = 1
    rtol: float = RTOL
    atol: float = ATOL
    event_tol: float = EVENT_TOL
    matching_tol: float = 1e-7
    alpha_tol: float = ALPHA_TOL
    horizon: Optional[float] = None
    max_zeros: int = 8
    spectral_points: int = 10_000
    pde_h: float = 1 / 400
    workers: int = 1
    out_dir: str = "."

    def __post_init__(self):
        for name in ("rtol", "atol", "event_tol", "matching_tol", "alpha_tol", "pde_h"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be > 0, got {getattr(self, name)}")
        if self.horizon is not None and not self.horizon > 0:
            raise ConfigError(f"horizon must be > 0, got {self.horizon}")
        if self.N < 1:
            raise ConfigError(f"dimension must be >= 1, got {self.N}")
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")
        if self.max_zeros < 1:
            raise ConfigError(f"max_zeros must be >= 1, got {self.max_zeros}")
        if self.spectral_points < 100:
            raise ConfigError(f"spectral_points must be >= 100, got {self.spectral_points}")

    @property
    def S_max(self) -> float:
        return self.horizon if self.horizon is not None else default_horizon(self.N)

    def replace(self, **changes: Any) -> "RunConfig":
        changes = {k: v for k, v in changes.items() if v is not None}
        return dataclasses.replace(self, **changes)

    @property
    def out_path(self) -> Path:
        return Path(self.out_dir)


_ALIASES = {"dim": "N", "dimension": "N", "n": "N", "threads": "workers",
            "s_max": "horizon", "zero_budget": "max_zeros", "output_dir": "out_dir"}


def _coerce(name: str, raw: str):
    types = {f.name: f.type for f in fields(RunConfig)}
    kind = types[name]
    try:
        if kind in ("int",):
            return int(raw)
        if kind in ("float",):
            return float(raw)
        if kind == "Optional[float]":
            return None if raw.lower() in ("", "none", "auto") else float(raw)
        return raw
    except ValueError as exc:
        raise ConfigError(f"bad value for {name}: {raw!r}") from exc


def parse_config_text(text: str) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    known = {f.name for f in fields(RunConfig)}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (p.strip() for p in line.split("=", 1))
        key = key.replace("-", "_")
        key = _ALIASES.get(key.lower(), key)
        if key not in known:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        out[key] = _coerce(key, value)
    return out


def load_config(path: Optional[str] = None, overrides: Optional[Mapping[str, Any]] = None,
                environ: Optional[Mapping[str, str]] = None) -> RunConfig:
    """Defaults, then the file, then ``SSS_THREADS``, then explicit overrides."""
    values: dict = {}
    if path is not None:
        try:
            values.update(parse_config_text(Path(path).read_text()))
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
    env = os.environ if environ is None else environ
    if env.get(THREADS_ENV):
        try:
            values["workers"] = int(env[THREADS_ENV])
        except ValueError as exc:
            raise ConfigError(f"{THREADS_ENV} must be an integer") from exc
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return RunConfig(**values)
