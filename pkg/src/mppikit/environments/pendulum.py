"""Torque-limited pendulum swing-up.

State is (theta, theta_dot) with theta = 0 hanging down (stable) and
theta = pi upright (the goal). The torque limit is below the gravity
torque m*g*l, so reaching upright requires pumping energy over several
swings instead of rotating up directly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class PendulumParams:
    mass: float = 1.0
    length: float = 1.0
    damping: float = 0.1
    gravity: float = 9.81
    torque_limit: float = 2.0
    dt: float = 0.05

    def __post_init__(self):
        for name in ("mass", "length", "gravity", "torque_limit", "dt"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")
        if self.damping < 0.0:
            raise ValueError("damping must be nonnegative")
        if self.torque_limit >= self.mass * self.gravity * self.length:
            raise ValueError("torque_limit must stay below m*g*l (multi-swing regime)")


def pendulum_step(params: PendulumParams, x: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Semi-implicit Euler step: velocity first, then angle with the new
    velocity. x is (..., 2), u is (..., 1)."""
    x = np.asarray(x, dtype=float)
    theta, omega = x[..., 0], x[..., 1]
    torque = np.asarray(u, dtype=float)[..., 0]
    inertia = params.mass * params.length ** 2
    alpha = (torque - params.damping * omega
             - params.mass * params.gravity * params.length * np.sin(theta)) / inertia
    omega_next = omega + params.dt * alpha
    theta_next = theta + params.dt * omega_next
    return np.stack([theta_next, omega_next], axis=-1)


def pendulum_cost(x: np.ndarray, u: np.ndarray, weights=(1.0, 0.1, 0.001)) -> np.ndarray:
    """Swing-up cost, zero at upright rest with zero torque.

    (1 + cos theta)^2 is 0 at theta = pi (upright) and 4 at theta = 0
    (hanging), so the angle term alone spans [0, 4] * w_angle.
    """
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    w_angle, w_spin, w_torque = weights
    return (w_angle * (1.0 + np.cos(x[..., 0])) ** 2
            + w_spin * x[..., 1] ** 2
            + w_torque * u[..., 0] ** 2)


def pendulum_energy(params: PendulumParams, x: np.ndarray) -> np.ndarray:
    """Total mechanical energy, zero datum at the hanging rest state."""
    x = np.asarray(x, dtype=float)
    inertia = params.mass * params.length ** 2
    kinetic = 0.5 * inertia * x[..., 1] ** 2
    potential = params.mass * params.gravity * params.length * (1.0 - np.cos(x[..., 0]))
    return kinetic + potential
