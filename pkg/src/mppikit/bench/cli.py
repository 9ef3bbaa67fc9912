"""Command-line entry points: run, sweep, fit-spectrum, timing, plot."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from mppikit.bench.config import BenchConfig
from mppikit.bench.plots import emit_plots
from mppikit.bench.runner import (
    _write_csv,
    build_environment,
    run_episode,
    run_sweep,
    timing_report,
    write_episode_artifacts,
)
from mppikit.bench.spectrum_fit import fit_sampler_spectrum
from mppikit.dsp import Spectrum
from mppikit.metrics import episode_summary


def _load(args) -> tuple[BenchConfig, Path]:
    config = BenchConfig.from_file(args.config)
    out = Path(args.output) if args.output else Path(config.output_dir)
    return config, out


def _cmd_run(args) -> int:
    config, out = _load(args)
    seed = args.seed if args.seed is not None else config.seeds[0]
    config.echo(out)
    result = run_episode(config, seed)
    summary = episode_summary(result, track=build_environment(config).track)
    write_episode_artifacts(result, summary, out)
    status = "completed" if summary.completed else "terminated early"
    print(f"episode seed={seed} {status}: steps={result.applied_controls.shape[0]} "
          f"cost={summary.cumulative_cost:.4g} mssd={summary.mssd:.4g} "
          f"median_step={summary.median_compute_s * 1e3:.3f} ms")
    print(f"artifacts in {out}")
    return 0


def _cmd_sweep(args) -> int:
    config, out = _load(args)
    config.echo(out)
    paths = run_sweep(config, workers=args.workers, output_dir=out)
    for name, path in paths.items():
        print(f"{name}: {path}")
    return 0


def _cmd_fit_spectrum(args) -> int:
    config, out = _load(args)
    if config.fit_reference_csv is None:
        raise ValueError("config has no spectrum_fit section")
    reference = Spectrum.from_csv(config.fit_reference_csv)
    fit = fit_sampler_spectrum(reference, config.fit_family, config.fit_grid or {})
    out.mkdir(parents=True, exist_ok=True)
    _write_csv(out / "fit.csv", "spectrum-fit",
               ["family", "fc_hz", "order", "beta", "control_rate_hz",
                "error", "resampled"],
               [[fit.spec.kind, fit.spec.fc_hz, fit.spec.order, fit.spec.beta,
                 fit.spec.control_rate_hz, fit.error, fit.resampled]])
    print(f"best {fit.spec.kind} fit: fc_hz={fit.spec.fc_hz} order={fit.spec.order} "
          f"beta={fit.spec.beta} error={fit.error:.4g} resampled={fit.resampled}")
    print(f"written: {out / 'fit.csv'}")
    return 0


def _cmd_timing(args) -> int:
    config, out = _load(args)
    variants = ["white"]
    if config.controller_variant != "white":
        variants.append(config.controller_variant)
    times = {}
    for variant in variants:
        pooled = []
        for seed in config.seeds:
            result = run_episode(config, seed, variant=variant)
            pooled.extend(result.compute_times_s.tolist())
        times[variant] = pooled
    entries = timing_report(times, baseline="white")
    out.mkdir(parents=True, exist_ok=True)
    _write_csv(out / "timing.csv", "timing",
               ["variant", "median_step_s", "overhead_pct"],
               [[e.variant, e.median_s, e.overhead_pct] for e in entries])
    for e in entries:
        print(f"{e.variant:10s} median {e.median_s * 1e3:8.3f} ms  "
              f"overhead {e.overhead_pct:+.2f}%")
    print(f"written: {out / 'timing.csv'}")
    return 0


def _cmd_plot(args) -> int:
    out = Path(args.output)
    written = emit_plots(out)
    for path in written:
        print(f"written: {path}")
    if not written:
        print(f"no plottable CSVs found in {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mppikit",
        description="Sampling-based MPC benchmarks: episodes, sweeps, "
                    "spectrum fits, timing, and plots.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, help_text, needs_config=True, workers=False, seed=False):
        p = sub.add_parser(name, help=help_text)
        if needs_config:
            p.add_argument("--config", required=True, help="path to the YAML config")
        p.add_argument("--output", default=None if needs_config else ".",
                       help="output directory (default: config output_dir)"
                       if needs_config else "directory holding the CSVs")
        if workers:
            p.add_argument("--workers", type=int, default=1,
                           help="concurrent sweep workers")
        if seed:
            p.add_argument("--seed", type=int, default=None,
                           help="override the config's first seed")
        p.set_defaults(fn=fn)
        return p

    add("run", _cmd_run, "run one closed-loop episode", seed=True)
    add("sweep", _cmd_sweep, "run the (H, N, variant) sweep grid", workers=True)
    add("fit-spectrum", _cmd_fit_spectrum,
        "fit sampler parameters to a reference spectrum CSV")
    add("timing", _cmd_timing, "compare per-step compute time against white MPPI")
    add("plot", _cmd_plot, "render SVG figures from a run directory",
        needs_config=False)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
