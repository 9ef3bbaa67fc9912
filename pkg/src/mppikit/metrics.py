"""Smoothness and performance metrics over applied-control logs.

MSSD (mean squared second difference) measures chatter directly; MSGFD
(mean squared deviation from a Savitzky-Golay fit) measures how far the
signal is from a locally-polynomial, i.e. smooth, signal. Both use unit
time steps, so they compare signals sampled at the same rate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from mppikit.dsp import savitzky_golay_smooth
from mppikit.environments.racing import TrackSpec, track_progress

MSGFD_WINDOW = 11
MSGFD_POLYORDER = 3


@dataclass(frozen=True)
class EpisodeResult:
    """Complete log of one closed-loop episode.

    applied_controls is (T, m), states is (T+1, n), step_costs and
    compute_times_s have length T. completed is False when the environment
    blew up and the episode terminated early (logs are the valid prefix).
    """

    applied_controls: np.ndarray
    states: np.ndarray
    step_costs: np.ndarray
    compute_times_s: np.ndarray
    seed: int
    config_fingerprint: str
    completed: bool = True

    def __post_init__(self):
        t = self.applied_controls.shape[0]
        if self.states.shape[0] != t + 1:
            raise ValueError("states must have one more row than applied_controls")
        if self.step_costs.shape != (t,) or self.compute_times_s.shape != (t,):
            raise ValueError("step_costs and compute_times_s must have length T")
        if t and np.any(self.compute_times_s <= 0.0):
            raise ValueError("compute times must be positive")

    @property
    def cumulative_cost(self) -> float:
        return float(self.step_costs.sum())


@dataclass(frozen=True)
class EpisodeSummary:
    """Scalar summary of one episode; distance_m is NaN off-track tasks."""

    cumulative_cost: float
    mssd: float
    msgfd: float
    median_compute_s: float
    distance_m: float
    completed: bool


def lower_median(values) -> float:
    """Median with lower tie-breaking: the element at index (k-1)//2 of the
    sorted vector, so the result is always an observed value."""
    values = np.sort(np.asarray(values, dtype=float))
    if values.size == 0:
        raise ValueError("lower_median of an empty vector")
    return float(values[(values.size - 1) // 2])


def mssd(signal: np.ndarray) -> float:
    """Mean of squared second differences (u_{t+1} - 2 u_t + u_{t-1})^2 over
    all interior steps and dimensions. Unit time steps, no dt scaling."""
    signal = np.atleast_2d(np.asarray(signal, dtype=float).T).T
    if signal.shape[0] < 3:
        raise ValueError("mssd needs at least 3 samples")
    second = np.diff(signal, n=2, axis=0)
    return float(np.mean(second ** 2))


def msgfd(signal: np.ndarray, window: int = MSGFD_WINDOW,
          polyorder: int = MSGFD_POLYORDER) -> float:
    """Mean squared deviation between the signal and its Savitzky-Golay
    smoothed version."""
    signal = np.atleast_2d(np.asarray(signal, dtype=float).T).T
    if signal.shape[0] < window:
        raise ValueError("msgfd needs at least `window` samples")
    smoothed = savitzky_golay_smooth(signal, window, polyorder)
    return float(np.mean((signal - smoothed) ** 2))


def episode_summary(result: EpisodeResult, track: TrackSpec | None = None,
                    msgfd_window: int = MSGFD_WINDOW,
                    msgfd_polyorder: int = MSGFD_POLYORDER) -> EpisodeSummary:
    """Scalar metrics of one episode.

    With a track, distance_m is the unwrapped centerline progress of the
    state (x, y) trace; otherwise NaN. Medians use lower tie-breaking.
    """
    controls = result.applied_controls
    n_steps = controls.shape[0]
    distance = float(track_progress(track, result.states[:, :2])) if track is not None else float("nan")
    return EpisodeSummary(
        cumulative_cost=result.cumulative_cost,
        mssd=mssd(controls) if n_steps >= 3 else float("nan"),
        msgfd=msgfd(controls, msgfd_window, msgfd_polyorder) if n_steps >= msgfd_window else float("nan"),
        median_compute_s=lower_median(result.compute_times_s) if n_steps else float("nan"),
        distance_m=distance,
        completed=result.completed,
    )
