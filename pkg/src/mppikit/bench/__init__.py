"""Experiment harness: config files, closed-loop episodes, sweeps, spectrum
fitting, timing comparisons, and plot emission."""

from mppikit.bench.config import BenchConfig, ENVIRONMENT_IDS
from mppikit.bench.runner import (
    EnvironmentBundle,
    build_environment,
    build_ocp,
    run_episode,
    run_sweep,
    timing_report,
)
from mppikit.bench.spectrum_fit import SpectrumFit, fit_sampler_spectrum
from mppikit.bench.plots import emit_plots

__all__ = [
    "BenchConfig",
    "ENVIRONMENT_IDS",
    "EnvironmentBundle",
    "SpectrumFit",
    "build_environment",
    "build_ocp",
    "emit_plots",
    "fit_sampler_spectrum",
    "run_episode",
    "run_sweep",
    "timing_report",
]
