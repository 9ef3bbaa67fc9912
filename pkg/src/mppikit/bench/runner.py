"""Closed-loop episode execution, sweep grids, and timing comparison.

Determinism contract: the generator driving control tick t of an episode
is seeded with ``SeedSequence([seed, cell_index, t])``. Every episode is a
pure function of (config, seed, cell index), so sweep cells can run on any
number of workers in any order without changing a single byte of output.
"""

from __future__ import annotations

import csv
import hashlib
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from mppikit.bench.config import BenchConfig
from mppikit.control import ControllerConfig, OCPSpec, make_controller, mppi_step
from mppikit.environments import (
    CarParams,
    CartpoleParams,
    PendulumParams,
    TrackSpec,
    cartpole_cost,
    cartpole_step,
    frenet_project,
    oval_track,
    pendulum_cost,
    pendulum_step,
    racing_cost,
    single_track_step,
)
from mppikit.metrics import EpisodeResult, EpisodeSummary, episode_summary, lower_median

SCHEMA_VERSION = "v1"
OFF_TRACK_LIMIT_M = 5.0


@dataclass(frozen=True)
class EnvironmentBundle:
    """Everything the episode loop needs to know about one environment.

    dynamics and step_cost are batched over leading axes and never raise;
    healthy() is the scalar blow-up check applied to the true state after
    each tick.
    """

    name: str
    state_dim: int
    control_dim: int
    dt: float
    dynamics: Callable[[np.ndarray, np.ndarray], np.ndarray]
    step_cost: Callable[[np.ndarray, np.ndarray], np.ndarray]
    control_low: np.ndarray
    control_high: np.ndarray
    x0: np.ndarray
    healthy: Callable[[np.ndarray], bool]
    track: TrackSpec | None = None


def _build_pendulum(params: dict) -> EnvironmentBundle:
    p = PendulumParams(**params)

    def healthy(x: np.ndarray) -> bool:
        return bool(np.all(np.isfinite(x)) and abs(x[1]) < 1e3)

    return EnvironmentBundle(
        name="pendulum", state_dim=2, control_dim=1, dt=p.dt,
        dynamics=lambda x, u: pendulum_step(p, x, u),
        step_cost=pendulum_cost,
        control_low=np.array([-p.torque_limit]),
        control_high=np.array([p.torque_limit]),
        x0=np.zeros(2), healthy=healthy,
    )


def _build_cartpole(params: dict) -> EnvironmentBundle:
    p = CartpoleParams(**params)

    def healthy(x: np.ndarray) -> bool:
        return bool(np.all(np.isfinite(x)) and abs(x[0]) < 100.0
                    and abs(x[1]) < 1e3 and abs(x[3]) < 1e3)

    return EnvironmentBundle(
        name="cartpole", state_dim=4, control_dim=1, dt=p.dt,
        dynamics=lambda x, u: cartpole_step(p, x, u),
        step_cost=cartpole_cost,
        control_low=np.array([-p.force_limit]),
        control_high=np.array([p.force_limit]),
        x0=np.array([0.0, 0.0, math.pi, 0.0]), healthy=healthy,
    )


def _build_racing(params: dict) -> EnvironmentBundle:
    params = dict(params)
    track_csv = params.pop("track_csv", None)
    track_width = float(params.pop("track_width", 1.0))
    track = TrackSpec.from_csv(track_csv, track_width) if track_csv else oval_track()
    p = CarParams(**params)

    def step_cost(x: np.ndarray, u: np.ndarray) -> np.ndarray:
        # Rollout states may leave the track; cost stays finite out there
        # (the boundary softplus keeps growing), so no max_offset cutoff.
        f = frenet_project(track, x[..., 0], x[..., 1], x[..., 2],
                           x[..., 3], x[..., 4], max_offset=np.inf)
        slip = np.abs(np.arctan2(x[..., 4], x[..., 3]))
        return racing_cost(f.tangential_velocity, f.lateral, slip,
                           x[..., 2], f.tangent_heading, track.width)

    def healthy(x: np.ndarray) -> bool:
        if not np.all(np.isfinite(x)):
            return False
        try:
            frenet_project(track, x[0], x[1], max_offset=OFF_TRACK_LIMIT_M)
        except ValueError:
            return False
        return True

    start = track.points[0]
    heading = math.atan2(track.points[1, 1] - start[1], track.points[1, 0] - start[0])
    return EnvironmentBundle(
        name="racing", state_dim=6, control_dim=2, dt=p.dt,
        dynamics=lambda x, u: single_track_step(p, x, u),
        step_cost=step_cost,
        control_low=np.array([-p.steer_limit, p.accel_min]),
        control_high=np.array([p.steer_limit, p.accel_max]),
        x0=np.array([start[0], start[1], heading, 0.0, 0.0, 0.0]),
        healthy=healthy, track=track,
    )


_BUILDERS = {"pendulum": _build_pendulum, "cartpole": _build_cartpole,
             "racing": _build_racing}


def build_environment(config: BenchConfig) -> EnvironmentBundle:
    """Instantiate the environment named by the config."""
    return _BUILDERS[config.environment_id](config.environment_params)


def build_ocp(env: EnvironmentBundle, horizon: int) -> OCPSpec:
    """Finite-horizon rollout problem on an environment's true model."""
    return OCPSpec(
        state_dim=env.state_dim, control_dim=env.control_dim, dt=env.dt,
        horizon=horizon, dynamics=env.dynamics, step_cost=env.step_cost,
        control_low=env.control_low, control_high=env.control_high,
    )


def _fingerprint(config: BenchConfig, variant: str, horizon: int,
                 n_rollouts: int, seed: int, cell_index: int) -> str:
    payload = repr((sorted(config.resolved().items()), variant, horizon,
                    n_rollouts, seed, cell_index))
    return hashlib.sha256(payload.encode()).hexdigest()[:16]


def run_episode(config: BenchConfig, seed: int, *, cell_index: int = 0,
                variant: str | None = None, horizon: int | None = None,
                n_rollouts: int | None = None) -> EpisodeResult:
    """One closed-loop episode: n_steps control ticks against the true model.

    The rollout model and the true model are the same function, so the
    controller plans with perfect knowledge. A non-finite or out-of-bounds
    state terminates the episode early with completed=False; logs keep the
    valid prefix. The keyword overrides exist for sweep cells.
    """
    variant = variant or config.controller_variant
    horizon = config.horizon if horizon is None else horizon
    n_rollouts = config.n_rollouts if n_rollouts is None else n_rollouts

    env = build_environment(config)
    ocp = build_ocp(env, horizon)
    controller_config = ControllerConfig(
        variant=variant, n_rollouts=n_rollouts, temperature=config.temperature,
        sampler=config.sampler_spec(1.0 / env.dt, variant),
        n_knots=config.n_knots, smooth_weight=config.smooth_weight,
    )
    state = make_controller(controller_config, ocp)

    x = env.x0
    states = [x]
    controls, costs, times = [], [], []
    completed = True
    for t in range(config.n_steps):
        rng = np.random.default_rng(np.random.SeedSequence([seed, cell_index, t]))
        u, state, diag = mppi_step(state, ocp, x, rng)
        x_next = np.asarray(env.dynamics(x, u), dtype=float)
        if not env.healthy(x_next):
            completed = False
            break
        controls.append(np.asarray(u, dtype=float))
        costs.append(float(env.step_cost(x, u)))
        times.append(diag.wall_time_s)
        states.append(x_next)
        x = x_next

    n_logged = len(controls)
    return EpisodeResult(
        applied_controls=(np.array(controls) if n_logged
                          else np.zeros((0, env.control_dim))),
        states=np.array(states),
        step_costs=np.array(costs, dtype=float),
        compute_times_s=np.array(times, dtype=float),
        seed=seed,
        config_fingerprint=_fingerprint(config, variant, horizon, n_rollouts,
                                        seed, cell_index),
        completed=completed,
    )


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_csv(path: Path, schema: str, header: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(f"# mppikit {schema} schema {SCHEMA_VERSION}\n")
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


# Wall-clock timing is deliberately absent: sweep outputs must be
# byte-identical across re-runs, and timing has its own subcommand.
EPISODE_COLUMNS = ["cell", "variant", "horizon", "n_rollouts", "seed", "ok",
                   "completed", "steps", "cumulative_cost", "mssd", "msgfd",
                   "distance_m", "error"]
AGGREGATE_COLUMNS = ["cell", "variant", "horizon", "n_rollouts", "n_seeds",
                     "n_ok", "n_completed", "mean_cumulative_cost", "mean_mssd",
                     "mean_msgfd", "mean_distance_m", "ok"]
IMPROVEMENT_COLUMNS = ["horizon", "n_rollouts", "baseline", "mean_cost_baseline",
                       "mean_cost_lowpass", "improvement"]


def _episode_row(cell: int, variant: str, horizon: int, n_rollouts: int,
                 seed: int, config: BenchConfig, track) -> list:
    try:
        result = run_episode(config, seed, cell_index=cell, variant=variant,
                             horizon=horizon, n_rollouts=n_rollouts)
        summary = episode_summary(result, track=track)
        return [cell, variant, horizon, n_rollouts, seed, True,
                summary.completed, result.applied_controls.shape[0],
                summary.cumulative_cost, summary.mssd, summary.msgfd,
                summary.distance_m, ""]
    except Exception as exc:  # cell isolation: record, keep sweeping
        return [cell, variant, horizon, n_rollouts, seed, False, False, 0,
                float("nan"), float("nan"), float("nan"), float("nan"),
                f"{type(exc).__name__}: {exc}"]


def run_sweep(config: BenchConfig, workers: int = 1,
              output_dir=None) -> dict[str, Path]:
    """Cartesian (horizon x n_rollouts x variant) grid, each cell over all seeds.

    Writes episodes.csv (one row per episode), aggregate.csv (per-cell means
    over the episodes that ran), and improvement.csv (relative cost
    improvement of the lowpass variant over every other variant per grid
    point). A failing episode is recorded with ok=false and does not stop
    the sweep. Returns the written paths.
    """
    horizons = config.sweep_horizons or (config.horizon,)
    rollouts = config.sweep_rollouts or (config.n_rollouts,)
    variants = config.sweep_variants or (config.controller_variant,)
    track = build_environment(config).track

    cells = [(cell, h, n, v)
             for cell, (h, n, v) in enumerate(
                 (h, n, v) for h in horizons for n in rollouts for v in variants)]
    jobs = [(cell, h, n, v, seed) for cell, h, n, v in cells for seed in config.seeds]

    def work(job):
        cell, h, n, v, seed = job
        return (cell, seed), _episode_row(cell, v, h, n, seed, config, track)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            keyed = dict(pool.map(work, jobs))
    else:
        keyed = dict(map(work, jobs))
    episode_rows = [keyed[(cell, seed)] for cell, h, n, v in cells
                    for seed in config.seeds]

    aggregate_rows = []
    cell_means: dict[tuple[int, int, str], float] = {}
    for cell, h, n, v in cells:
        rows = [keyed[(cell, seed)] for seed in config.seeds]
        ok_rows = [r for r in rows if r[5]]
        n_ok = len(ok_rows)

        def mean_of(index: int) -> float:
            return (float(np.mean([r[index] for r in ok_rows]))
                    if ok_rows else float("nan"))

        mean_cost = mean_of(8)
        cell_means[(h, n, v)] = mean_cost
        aggregate_rows.append([cell, v, h, n, len(rows), n_ok,
                               sum(1 for r in rows if r[6]), mean_cost,
                               mean_of(9), mean_of(10), mean_of(11),
                               n_ok == len(rows)])

    improvement_rows = []
    for h in horizons:
        for n in rollouts:
            lp = cell_means.get((h, n, "lowpass"))
            if lp is None:
                continue
            for v in variants:
                if v == "lowpass":
                    continue
                base = cell_means[(h, n, v)]
                gain = ((base - lp) / abs(base)
                        if math.isfinite(base) and base != 0.0 else float("nan"))
                improvement_rows.append([h, n, v, base, lp, gain])

    out = Path(output_dir if output_dir is not None else config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "episodes": out / "episodes.csv",
        "aggregate": out / "aggregate.csv",
        "improvement": out / "improvement.csv",
    }
    _write_csv(paths["episodes"], "episodes", EPISODE_COLUMNS, episode_rows)
    _write_csv(paths["aggregate"], "aggregate", AGGREGATE_COLUMNS, aggregate_rows)
    _write_csv(paths["improvement"], "improvement", IMPROVEMENT_COLUMNS,
               improvement_rows)
    return paths


@dataclass(frozen=True)
class TimingEntry:
    """Median per-step compute time of one variant and its overhead
    relative to the baseline."""

    variant: str
    median_s: float
    overhead_pct: float


def timing_report(times_per_variant: dict, baseline: str = "white") -> list[TimingEntry]:
    """Per-variant median step times and overhead vs the baseline variant.

    times_per_variant maps variant name to a vector of per-step compute
    times in seconds. Raises if the baseline is missing or any vector is
    empty; an absent measurement must not read as zero overhead.
    """
    if baseline not in times_per_variant:
        raise ValueError(f"baseline variant {baseline!r} missing from timing data")
    medians = {}
    for variant, times in times_per_variant.items():
        times = np.asarray(times, dtype=float)
        if times.size == 0:
            raise ValueError(f"empty timing vector for variant {variant!r}")
        medians[variant] = lower_median(times)
    base = medians[baseline]
    return [TimingEntry(variant=v, median_s=m, overhead_pct=(m / base - 1.0) * 100.0)
            for v, m in medians.items()]


def write_episode_artifacts(result: EpisodeResult, summary: EpisodeSummary,
                            directory) -> dict[str, Path]:
    """controls.csv, states.csv, and a one-row summary.csv for one episode."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    m = result.applied_controls.shape[1] if result.applied_controls.ndim == 2 else 0
    n = result.states.shape[1]
    paths = {
        "controls": directory / "controls.csv",
        "states": directory / "states.csv",
        "summary": directory / "summary.csv",
    }
    _write_csv(paths["controls"], "controls",
               ["step"] + [f"u_{j}" for j in range(m)],
               [[t] + [float(v) for v in row]
                for t, row in enumerate(result.applied_controls)])
    _write_csv(paths["states"], "states",
               ["step"] + [f"x_{j}" for j in range(n)],
               [[t] + [float(v) for v in row] for t, row in enumerate(result.states)])
    _write_csv(paths["summary"], "summary",
               ["seed", "fingerprint", "completed", "steps", "cumulative_cost",
                "mssd", "msgfd", "median_step_time_s", "distance_m"],
               [[result.seed, result.config_fingerprint, summary.completed,
                 result.applied_controls.shape[0], summary.cumulative_cost,
                 summary.mssd, summary.msgfd, summary.median_compute_s,
                 summary.distance_m]])
    return paths
