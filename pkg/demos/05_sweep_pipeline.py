"""End-to-end benchmark pipeline: sweep, timing, artifacts, plots.

Runs a small horizon x rollout x variant grid on the pendulum, writes the
three sweep CSVs, a per-variant timing table, per-episode logs, and the
SVG report plots. Every artifact is byte-deterministic for a fixed
config, so re-running this script leaves the output directory unchanged.

The command line equivalent of this script is:

    mppikit sweep --config sweep.yaml --output demos/out/sweep_pipeline
    mppikit timing --config sweep.yaml --output demos/out/sweep_pipeline
    mppikit plot demos/out/sweep_pipeline

Run from the repository root:

    python3 demos/05_sweep_pipeline.py
"""

import dataclasses
from pathlib import Path

import numpy as np

from mppikit.bench.config import BenchConfig
from mppikit.bench.plots import emit_plots
from mppikit.bench.runner import (
    run_episode,
    run_sweep,
    timing_report,
    write_episode_artifacts,
)
from mppikit.metrics import episode_summary

OUT = Path(__file__).resolve().parent / "out" / "sweep_pipeline"


def main():
    config = BenchConfig(
        environment_id="pendulum", controller_variant="lowpass",
        n_rollouts=32, horizon=20, temperature=3.0, sigma=(1.0,),
        n_steps=100, seeds=(0, 1, 2), output_dir=str(OUT),
        fc_hz=1.0, order=2,
        sweep_rollouts=(16, 32),
        sweep_variants=("white", "lowpass"))

    paths = run_sweep(config, workers=2)
    config.echo(OUT)
    for name, path in paths.items():
        print(f"{name}: {path}")

    # Timing comparison at the headline cell.
    times = {}
    for variant in ("white", "lowpass"):
        cell = dataclasses.replace(config, controller_variant=variant)
        times[variant] = np.concatenate(
            [run_episode(cell, seed).compute_times_s for seed in config.seeds])
    for entry in timing_report(times):
        print(f"{entry.variant}: {entry.median_s * 1e3:.2f} ms/step "
              f"({entry.overhead_pct:+.1f}% vs white)")

    # Per-episode logs for the first seed, then the SVG report.
    result = run_episode(config, 0)
    write_episode_artifacts(result, episode_summary(result), OUT / "episode_seed0")
    emit_plots(OUT)
    print(f"report plots in {OUT}")


if __name__ == "__main__":
    main()
