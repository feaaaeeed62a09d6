"""JSON run configuration shared by the CLI subcommands."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any

from .convergence import DetectionPolicy
from .errors import ConfigError
from .laplace import LimitLadder
from .signals import SignalSpec, UniformGrid, spec_from_dict, spec_to_dict

OUTPUT_DIR_ENV = "GENFVT_OUTPUT_DIR"
MAX_SAMPLES = 10**8


@dataclass(frozen=True)
class GridConfig:
    dt: float = 1e-2
    T: float | None = None


@dataclass(frozen=True)
class RunConfig:
    spec: SignalSpec | None = None
    input: Path | None = None
    grid: GridConfig = GridConfig()
    q_max: int = 6
    policy: DetectionPolicy = DetectionPolicy()
    ladder: LimitLadder = LimitLadder()
    output_dir: Path = Path("genfvt-out")
    format: str = "json"
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if (self.spec is None) == (self.input is None) and not self.extra:
            raise ConfigError("exactly one of 'spec' or 'input' must be given")
        if self.spec is not None and self.input is not None:
            raise ConfigError("'spec' and 'input' are mutually exclusive")
        if self.format not in ("json", "csv"):
            raise ConfigError(f"format must be 'json' or 'csv', got {self.format!r}")
        if self.grid.T is not None:
            if not self.grid.dt > 0 or not self.grid.T > 0:
                raise ConfigError("grid dt and T must be positive")
            if self.grid.T / self.grid.dt > MAX_SAMPLES:
                raise ConfigError(f"grid exceeds {MAX_SAMPLES} samples")

    def make_grid(self, default: UniformGrid | None = None) -> UniformGrid:
        if self.grid.T is None:
            if default is None:
                raise ConfigError("config needs grid.T for this command")
            return default
        return UniformGrid.from_horizon(self.grid.dt, self.grid.T)

    def to_dict(self) -> dict:
        return {
            "spec": spec_to_dict(self.spec) if self.spec is not None else None,
            "input": str(self.input) if self.input is not None else None,
            "grid": {"dt": self.grid.dt, "T": self.grid.T},
            "q_max": self.q_max,
            "policy": self.policy.to_dict(),
            "ladder": self.ladder.to_dict(),
            "output_dir": str(self.output_dir),
            "format": self.format,
            **self.extra,
        }


def _build(cls, data: dict | None, name: str):
    data = dict(data or {})
    known = {f.name for f in fields(cls)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown {name} fields: {sorted(unknown)}")
    try:
        return cls(**data)
    except TypeError as exc:
        raise ConfigError(f"bad {name}: {exc}") from None


EXTRA_SECTIONS = ("lti", "system", "z")


def config_from_dict(data: dict[str, Any], base_dir: Path | None = None) -> RunConfig:
    data = dict(data)
    spec = spec_from_dict(data.pop("spec")) if data.get("spec") is not None else None
    data.pop("spec", None)
    inp = data.pop("input", None)
    if inp is not None:
        inp = Path(inp)
        if base_dir is not None and not inp.is_absolute():
            inp = base_dir / inp
    grid = _build(GridConfig, data.pop("grid", None), "grid")
    policy = _build(DetectionPolicy, data.pop("policy", None), "policy")
    ladder = _build(LimitLadder, data.pop("ladder", None), "ladder")
    out = data.pop("output_dir", None) or os.environ.get(OUTPUT_DIR_ENV) or "genfvt-out"
    extra = {k: data.pop(k) for k in EXTRA_SECTIONS if k in data}
    q_max = data.pop("q_max", 6)
    fmt = data.pop("format", "json")
    data.pop("schema", None)
    if data:
        raise ConfigError(f"unknown config keys: {sorted(data)}")
    if not isinstance(q_max, int):
        raise ConfigError("q_max must be an integer")
    return RunConfig(spec, inp, grid, q_max, policy, ladder, Path(out), fmt, extra)


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: config must be a JSON object")
    return config_from_dict(data, base_dir=path.parent)
