"""Analytic benchmark systems: pendulum, cartpole, single-track racing car."""

from mppikit.environments.cartpole import CartpoleParams, cartpole_cost, cartpole_step
from mppikit.environments.pendulum import (
    PendulumParams,
    pendulum_cost,
    pendulum_energy,
    pendulum_step,
)
from mppikit.environments.racing import (
    CAR_STATE_FIELDS,
    CarParams,
    FrenetState,
    TrackSpec,
    frenet_project,
    oval_track,
    racing_cost,
    single_track_step,
    track_progress,
)

__all__ = [
    "CAR_STATE_FIELDS",
    "CarParams",
    "CartpoleParams",
    "FrenetState",
    "PendulumParams",
    "TrackSpec",
    "cartpole_cost",
    "cartpole_step",
    "frenet_project",
    "oval_track",
    "pendulum_cost",
    "pendulum_energy",
    "pendulum_step",
    "racing_cost",
    "single_track_step",
    "track_progress",
]
