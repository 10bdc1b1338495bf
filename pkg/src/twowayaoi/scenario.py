"""Scenario files: JSON on disk, resolved into plain dataclasses.

Resolution order is built-in defaults (the reference operating point), then
a named preset, then the JSON file, then command-line overrides.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from importlib import resources
from typing import Optional

import jsonschema

from .model import DomainError, PowerProfile, SystemParams, db_to_linear

COMMANDS = ("analyze", "optimize", "simulate", "sweep", "grid")
PRESETS = {
    "full": {"n_slots": 10_000_000, "n_samples": 10_000_000},
    "quick": {"n_slots": 100_000, "n_samples": 100_000},
}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SimSettings:
    n_slots: int = 10_000_000
    n_samples: int = 10_000_000
    seed: int = 0


@dataclass(frozen=True)
class SweepRange:
    vary: str = "B"
    fixed: float = 1.0
    start: float = 0.75
    stop: float = 2.0
    step: float = 0.025

    def __post_init__(self):
        if self.vary not in ("A", "B"):
            raise ConfigError(f"sweep.vary must be 'A' or 'B', got {self.vary!r}")
        if not self.step > 0:
            raise ConfigError("sweep.step must be positive")
        if not self.start < self.stop:
            raise ConfigError("sweep.start must be below sweep.stop")
        if not (self.start > 0 and self.fixed > 0):
            raise ConfigError("sweep powers must be positive")

    def points(self) -> list[float]:
        n = int(math.floor((self.stop - self.start) / self.step + 1e-9))
        return [self.start + k * self.step for k in range(n + 1)]


@dataclass(frozen=True)
class GridSpec:
    step: float = 0.01

    def __post_init__(self):
        if not self.step > 0:
            raise ConfigError("grid.step must be positive")


@dataclass(frozen=True)
class Scenario:
    params: SystemParams = field(default_factory=SystemParams.reference)
    powers: Optional[PowerProfile] = None
    sweep: Optional[SweepRange] = None
    grid: Optional[GridSpec] = None
    sim: SimSettings = field(default_factory=SimSettings)
    min_success: float = 0.0
    oracle_step: Optional[float] = None
    workers: int = 1
    out: Optional[str] = None
    format: str = "csv"

    def check(self, command: str) -> None:
        modes = [m for m in ("powers", "sweep", "grid") if getattr(self, m) is not None]
        need = {"analyze": "powers", "simulate": "powers", "sweep": "sweep", "grid": "grid"}.get(command)
        if need is None:
            if modes:
                raise ConfigError(f"{command} takes no {'/'.join(modes)} section")
        elif modes != [need]:
            raise ConfigError(f"{command} needs exactly one of powers/sweep/grid: {need}")
        if self.format not in ("csv", "json"):
            raise ConfigError(f"format must be csv or json, got {self.format!r}")
        if not 0 <= self.min_success < 1:
            raise ConfigError("min_success must lie in [0, 1)")
        if self.oracle_step is not None and not self.oracle_step > 0:
            raise ConfigError("oracle step must be positive")
        if self.sim.n_samples < 1:
            raise ConfigError("n_samples must be >= 1")
        if self.sim.n_slots < 2 or self.sim.n_slots % 2:
            raise ConfigError("n_slots must be an even integer >= 2")
        if self.sim.seed < 0:
            raise ConfigError("seed must be non-negative")

    def to_dict(self) -> dict:
        out = asdict(self)
        out["simulation"] = out.pop("sim")
        out["output"] = {"path": out.pop("out"), "format": out.pop("format")}
        return out


def schema() -> dict:
    text = resources.files("twowayaoi").joinpath("scenario.schema.json").read_text()
    return json.loads(text)


def load_file(path: str) -> dict:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read scenario {path}: {exc}") from exc
    try:
        jsonschema.validate(data, schema())
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"{path}: {exc.message}") from exc
    return data


def _default_section(command: str) -> dict:
    if command in ("analyze", "simulate"):
        return {"powers": {"p_a": 1.0, "p_b": 1.196, "p_r": 0.75}}
    if command == "sweep":
        return {"sweep": {}}
    if command == "grid":
        return {"grid": {}, "min_success": 0.5}
    return {}


def _merge(dst: dict, src: dict) -> dict:
    for key, value in src.items():
        if isinstance(value, dict) and isinstance(dst.get(key), dict):
            _merge(dst[key], value)
        else:
            dst[key] = value
    return dst


def _normalize_params(layer: dict) -> dict:
    """Turn dB thresholds into linear ones and fill the complementary weight."""
    layer = dict(layer)
    if "gamma_th_db" in layer:
        if "gamma_th" in layer:
            raise ConfigError("give gamma_th or gamma_th_db, not both")
        layer["gamma_th"] = db_to_linear(layer.pop("gamma_th_db"))
    if "weight_a" in layer and "weight_b" not in layer:
        layer["weight_b"] = 1.0 - layer["weight_a"]
    elif "weight_b" in layer and "weight_a" not in layer:
        layer["weight_a"] = 1.0 - layer["weight_b"]
    return layer


def resolve(command: str, file_data: Optional[dict] = None, overrides: Optional[dict] = None,
            preset: Optional[str] = None) -> Scenario:
    """Build the Scenario for ``command`` from the layered sources.

    ``file_data`` and ``overrides`` share the JSON scenario layout.  A file
    section irrelevant to ``command`` (say, ``grid`` while running
    ``analyze``) is ignored so one file can drive every command.
    """
    if command not in COMMANDS:
        raise ConfigError(f"unknown command {command!r}")
    raw: dict = {"params": {}, "simulation": {}, "output": {}}
    _merge(raw, _default_section(command))
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError(f"unknown preset {preset!r}")
        _merge(raw, {"simulation": dict(PRESETS[preset])})
    wanted = {"analyze": "powers", "simulate": "powers", "sweep": "sweep", "grid": "grid"}.get(command)
    for layer in (file_data or {}, overrides or {}):
        layer = {k: v for k, v in json.loads(json.dumps(layer)).items()
                 if k not in ("powers", "sweep", "grid") or k == wanted}
        if "params" in layer:
            layer["params"] = _normalize_params(layer["params"])
        _merge(raw, layer)

    try:
        params = SystemParams.reference(**raw["params"])
        powers = PowerProfile(**raw["powers"]) if "powers" in raw else None
        sweep = SweepRange(**raw["sweep"]) if "sweep" in raw else None
        grid = GridSpec(**raw["grid"]) if "grid" in raw else None
        sim = SimSettings(**raw["simulation"])
        scenario = Scenario(
            params=params, powers=powers, sweep=sweep, grid=grid, sim=sim,
            min_success=float(raw.get("min_success", 0.0)),
            oracle_step=raw.get("oracle_step"),
            workers=int(raw.get("workers", 1)),
            out=raw["output"].get("path"),
            format=raw["output"].get("format", "csv"),
        )
    except (TypeError, DomainError) as exc:
        raise ConfigError(str(exc)) from exc
    scenario.check(command)
    return scenario
