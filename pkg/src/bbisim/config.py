"""TOML run configuration.

Every key is optional; an empty file reproduces the default sweep
(pink noise, identical beats, all four classes, 10 sampling rates x 12
SNR levels). Example::

    seed = 1
    noise = "pink"            # or "white"
    variation_pct = 5.0       # used by the Varied5pc scenario
    workers = 4
    output_dir = "results"
    emit_trials = false
    emit_plots = true

    [grid]
    classes = [1, 2, 3, 4]
    scenarios = ["Exact", "Varied5pc"]
    fs_list = [14, 23, 50]
    snr_db_list = [18, 24]

    [simulation]
    fs_high = 10000
    fs_est = 1000
    window_s = 4.0
    delay_std_s = 0.1
    max_abs_delay_s = 1.0
    max_lag_s = 1.0
    nsem_threshold = 0.01
    max_trials = 200000

    [prototypes.1.gamma]      # override single kernel parameters
    amplitude = 0.95
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

from .engine import DEFAULT_FS_LIST, DEFAULT_SNR_LIST, CellSpec, DelayDistribution, Scenario, SweepGrid
from .noise import NoiseKind
from .pulse_model import DAWBER_CLASSES, PulsePrototype, VariationSpec, dawber_prototype

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


class ConfigError(ValueError):
    """Invalid configuration; the message starts with the offending key path."""

    def __init__(self, location: str, message: str):
        super().__init__(f"{location}: {message}")
        self.location = location


_TOP_KEYS = {"seed", "noise", "variation_pct", "workers", "output_dir",
             "emit_trials", "emit_plots", "grid", "simulation", "prototypes"}
_GRID_KEYS = {"classes", "scenarios", "fs_list", "snr_db_list"}
_SIM_KEYS = {"fs_high", "fs_est", "window_s", "delay_std_s", "max_abs_delay_s",
             "max_lag_s", "nsem_threshold", "max_trials"}
_KERNEL_FIELDS = {"amplitude", "mode", "std"}


@dataclass
class RunConfig:
    grid: SweepGrid = field(default_factory=SweepGrid)
    noise_kind: NoiseKind = NoiseKind.PINK
    variation_pct: float = 5.0
    master_seed: int = 0
    output_dir: Path = Path("results")
    emit_trials: bool = False
    emit_plots: bool = True
    worker_count: int = 1
    simulation: dict = field(default_factory=dict)
    prototypes: dict = field(default_factory=dict)

    def cell_specs(self) -> list[CellSpec]:
        sim = dict(self.simulation)
        options: dict[str, Any] = {
            "noise_kind": self.noise_kind,
            "variation": VariationSpec(self.variation_pct / 100.0),
        }
        for key, target in (("fs_high", "fs_high"), ("fs_est", "fs_est"), ("window_s", "window"),
                            ("max_lag_s", "max_lag_seconds"), ("nsem_threshold", "nsem_threshold"),
                            ("max_trials", "max_trials")):
            if key in sim:
                options[target] = sim[key]
        if "delay_std_s" in sim or "max_abs_delay_s" in sim:
            options["delay"] = DelayDistribution(
                std=sim.get("delay_std_s", 0.1), max_abs=sim.get("max_abs_delay_s", 1.0))
        specs = self.grid.specs(**options)
        if self.prototypes:
            specs = [replace(s, prototype=self.prototypes.get(s.dawber_class, s.prototype)) for s in specs]
        return specs


def _expect(value, kinds, location: str, what: str):
    if isinstance(value, bool) and bool not in (kinds if isinstance(kinds, tuple) else (kinds,)):
        raise ConfigError(location, f"expected {what}, got {value!r}")
    if not isinstance(value, kinds):
        raise ConfigError(location, f"expected {what}, got {value!r}")
    return value


def _number(value, location: str, *, positive=False, minimum=None, integer=False):
    kinds = (int,) if integer else (int, float)
    what = "an integer" if integer else "a number"
    _expect(value, kinds, location, what)
    if not math.isfinite(value):
        raise ConfigError(location, f"expected a finite {what[2:] if integer else 'number'}, got {value!r}")
    if positive and not value > 0:
        raise ConfigError(location, f"expected a positive value, got {value!r}")
    if minimum is not None and value < minimum:
        raise ConfigError(location, f"expected a value >= {minimum}, got {value!r}")
    return value


def _number_list(value, location: str, *, positive=False, integer=False) -> tuple:
    _expect(value, list, location, "a non-empty list")
    if not value:
        raise ConfigError(location, "expected a non-empty list")
    out = tuple(_number(v, f"{location}[{i}]", positive=positive, integer=integer)
                for i, v in enumerate(value))
    if len(set(out)) != len(out):
        raise ConfigError(location, "duplicate values")
    return out


def _reject_unknown(table: dict, allowed: set, location: str) -> None:
    for key in table:
        if key not in allowed:
            where = f"{location}.{key}" if location else key
            raise ConfigError(where, f"unknown key (allowed: {', '.join(sorted(allowed))})")


def _parse_prototypes(table, location: str) -> dict[int, PulsePrototype]:
    _expect(table, dict, location, "a table")
    out = {}
    for class_key, kernels in table.items():
        where = f"{location}.{class_key}"
        try:
            dawber_class = int(class_key)
        except ValueError:
            raise ConfigError(where, "expected a Dawber class number 1..4") from None
        if dawber_class not in DAWBER_CLASSES:
            raise ConfigError(where, "expected a Dawber class number 1..4")
        _expect(kernels, dict, where, "a table")
        _reject_unknown(kernels, {"gamma", "gaussian"}, where)
        proto = dawber_prototype(dawber_class)
        for kernel_name, params in kernels.items():
            kwhere = f"{where}.{kernel_name}"
            _expect(params, dict, kwhere, "a table")
            _reject_unknown(params, _KERNEL_FIELDS, kwhere)
            values = {k: float(_number(v, f"{kwhere}.{k}", positive=True)) for k, v in params.items()}
            kernel = getattr(proto, kernel_name)
            try:
                proto = replace(proto, **{kernel_name: replace(kernel, **values)})
            except ValueError as exc:
                raise ConfigError(kwhere, str(exc)) from None
        out[dawber_class] = proto
    return out


def config_from_dict(data: dict) -> RunConfig:
    """Validate a parsed configuration document."""
    _reject_unknown(data, _TOP_KEYS, "")
    cfg = RunConfig()
    if "seed" in data:
        cfg.master_seed = _number(data["seed"], "seed", integer=True, minimum=0)
    if "noise" in data:
        try:
            cfg.noise_kind = NoiseKind(_expect(data["noise"], str, "noise", "a string"))
        except ValueError:
            raise ConfigError("noise", f"expected 'pink' or 'white', got {data['noise']!r}") from None
    if "variation_pct" in data:
        cfg.variation_pct = float(_number(data["variation_pct"], "variation_pct", minimum=0))
    if "workers" in data:
        cfg.worker_count = _number(data["workers"], "workers", integer=True, minimum=1)
    if "output_dir" in data:
        cfg.output_dir = Path(_expect(data["output_dir"], str, "output_dir", "a path string"))
    for key, attr in (("emit_trials", "emit_trials"), ("emit_plots", "emit_plots")):
        if key in data:
            setattr(cfg, attr, _expect(data[key], bool, key, "true or false"))

    grid = _expect(data.get("grid", {}), dict, "grid", "a table")
    _reject_unknown(grid, _GRID_KEYS, "grid")
    classes = DAWBER_CLASSES
    if "classes" in grid:
        classes = _number_list(grid["classes"], "grid.classes", integer=True)
        for i, c in enumerate(classes):
            if c not in DAWBER_CLASSES:
                raise ConfigError(f"grid.classes[{i}]", f"expected a Dawber class 1..4, got {c}")
    scenarios: tuple = (Scenario.EXACT,)
    if "scenarios" in grid:
        raw = _expect(grid["scenarios"], list, "grid.scenarios", "a non-empty list")
        if not raw:
            raise ConfigError("grid.scenarios", "expected a non-empty list")
        parsed = []
        for i, name in enumerate(raw):
            try:
                parsed.append(Scenario(name))
            except ValueError:
                raise ConfigError(f"grid.scenarios[{i}]",
                                  f"expected one of {[s.value for s in Scenario]}, got {name!r}") from None
        scenarios = tuple(parsed)
    fs_list = DEFAULT_FS_LIST
    if "fs_list" in grid:
        fs_list = tuple(float(v) for v in _number_list(grid["fs_list"], "grid.fs_list", positive=True))
    snr_list = DEFAULT_SNR_LIST
    if "snr_db_list" in grid:
        snr_list = tuple(float(v) for v in _number_list(grid["snr_db_list"], "grid.snr_db_list"))
    cfg.grid = SweepGrid(fs_list=fs_list, snr_list=snr_list, classes=classes,
                         scenarios=scenarios, seed=cfg.master_seed)

    sim = _expect(data.get("simulation", {}), dict, "simulation", "a table")
    _reject_unknown(sim, _SIM_KEYS, "simulation")
    for key, value in sim.items():
        if key == "max_trials":
            cfg.simulation[key] = _number(value, "simulation.max_trials", integer=True, minimum=3)
        else:
            cfg.simulation[key] = float(_number(value, f"simulation.{key}", positive=True))
    if "prototypes" in data:
        cfg.prototypes = _parse_prototypes(data["prototypes"], "prototypes")
    try:
        cfg.cell_specs()
    except ValueError as exc:
        raise ConfigError("simulation", str(exc)) from None
    return cfg


def parse_config(path) -> RunConfig:
    """Read and validate a TOML configuration file."""
    path = Path(path)
    try:
        with path.open("rb") as fh:
            data = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(str(path), "file not found") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(str(path), f"parse error: {exc}") from None
    return config_from_dict(data)
