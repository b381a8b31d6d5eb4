"""Simulation of beat-to-beat interval (BBI) estimation error for sampled pulse waves."""

from .config import ConfigError, RunConfig, parse_config
from .delay import DelayEstimate, cross_correlation, estimate_delay
from .engine import (
    CellSpec,
    DelayDistribution,
    NsemAccumulator,
    Scenario,
    SweepCell,
    SweepError,
    SweepGrid,
    TrialRecord,
    TrialRunner,
    cell_stream,
    compute_rmse,
    run_cell,
    run_sweep,
    run_trial,
)
from .noise import NoiseKind, NoiseSpec, add_noise, pink_noise, symbol_energy, white_noise
from .plots import MissingSliceError, render_plots
from .pulse_model import (
    DAWBER_CLASSES,
    KernelKind,
    KernelParams,
    PulsePrototype,
    VariationSpec,
    dawber_prototype,
    perturb_prototype,
    synthesize_pulse,
)
from .report import read_results_csv, write_results_csv
from .resampler import resample, resample_array
from .signals import Signal

__version__ = "0.1.0"

__all__ = [
    "add_noise",
    "cell_stream",
    "CellSpec",
    "compute_rmse",
    "ConfigError",
    "cross_correlation",
    "DAWBER_CLASSES",
    "dawber_prototype",
    "DelayDistribution",
    "DelayEstimate",
    "estimate_delay",
    "KernelKind",
    "KernelParams",
    "MissingSliceError",
    "NoiseKind",
    "NoiseSpec",
    "NsemAccumulator",
    "parse_config",
    "perturb_prototype",
    "pink_noise",
    "PulsePrototype",
    "read_results_csv",
    "render_plots",
    "resample",
    "resample_array",
    "run_cell",
    "run_sweep",
    "run_trial",
    "RunConfig",
    "Scenario",
    "Signal",
    "SweepCell",
    "SweepError",
    "SweepGrid",
    "symbol_energy",
    "synthesize_pulse",
    "TrialRecord",
    "TrialRunner",
    "VariationSpec",
    "white_noise",
    "write_results_csv",
]
