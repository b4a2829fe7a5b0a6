"""Run configuration with file and environment overrides."""

from __future__ import annotations

import os
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path

from .errors import ConfigError
from .model import TEMPERATURE_SCHEDULE

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

ENV_PREFIX = "VERISPICE_"


@dataclass
class RunConfig:
    rel_tolerance: float = 0.02
    abs_tolerance: float = 1e-6
    ngspice: str = "ngspice"
    sim_timeout: float = 60.0
    provider_kind: str = "mock"  # mock | http
    provider_endpoint: str = ""
    provider_api_key_env: str = ENV_PREFIX + "API_KEY"
    provider_rate_per_second: float = 1.0
    transcript_path: str = ""
    detector_command: list[str] = field(default_factory=list)
    detector_url: str = ""
    detector_threshold: float = 0.25
    parallelism: int = 1
    temperature_schedule: dict[int, float] = field(
        default_factory=lambda: dict(TEMPERATURE_SCHEDULE)
    )

    def __post_init__(self):
        if not 0 < self.rel_tolerance < 1:
            raise ConfigError(f"rel_tolerance must be in (0, 1), got {self.rel_tolerance}")
        if self.abs_tolerance < 0:
            raise ConfigError(f"abs_tolerance must be >= 0, got {self.abs_tolerance}")
        if self.parallelism < 1:
            raise ConfigError(f"parallelism must be >= 1, got {self.parallelism}")
        if self.provider_kind not in ("mock", "http"):
            raise ConfigError(f"unknown provider kind {self.provider_kind!r}")
        if not 0.0 <= self.detector_threshold <= 1.0:
            raise ConfigError(f"detector_threshold outside [0, 1]: {self.detector_threshold}")

    def with_overrides(self, overrides: dict) -> "RunConfig":
        """Apply per-problem overrides from meta.toml."""
        known = {k: v for k, v in overrides.items() if hasattr(self, k)}
        unknown = set(overrides) - set(known)
        if unknown:
            raise ConfigError(f"unknown override keys: {sorted(unknown)}")
        return replace(self, **known)


def load_config(path: str | Path | None = None, env: dict | None = None) -> RunConfig:
    """Build a RunConfig from an optional TOML file plus environment overrides.

    Environment keys use the VERISPICE_ prefix with upper-cased field names,
    e.g. VERISPICE_NGSPICE, VERISPICE_REL_TOLERANCE.
    """
    env = os.environ if env is None else env
    values: dict = {}
    if path is not None:
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        try:
            values.update(tomllib.loads(path.read_text(encoding="utf-8")))
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"bad config file {path}: {exc}") from exc

    for name, current in RunConfig.__dataclass_fields__.items():
        key = ENV_PREFIX + name.upper()
        if key not in env:
            continue
        raw = env[key]
        kind = current.type
        if name in ("detector_command",):
            values[name] = raw.split()
        elif kind == "float" or name.endswith("tolerance"):
            values[name] = float(raw)
        elif kind == "int":
            values[name] = int(raw)
        else:
            values[name] = raw

    values.pop("temperature_schedule", None)  # not overridable from flat sources
    try:
        return RunConfig(**values)
    except TypeError as exc:
        raise ConfigError(f"bad config keys: {exc}") from exc
