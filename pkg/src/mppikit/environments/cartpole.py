"""Frictionless cartpole swing-up.

State is (p, p_dot, theta, theta_dot) with theta = 0 upright and theta = pi
hanging. The pole is a uniform rod pivoting on the cart, which gives the
standard 4/3 effective-length factor in the angular dynamics. Control is a
horizontal force on the cart.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class CartpoleParams:
    cart_mass: float = 1.0
    pole_mass: float = 0.1
    pole_length: float = 1.0
    gravity: float = 9.81
    force_limit: float = 10.0
    dt: float = 0.02

    def __post_init__(self):
        for name in ("cart_mass", "pole_mass", "pole_length", "gravity", "force_limit", "dt"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")


def cartpole_step(params: CartpoleParams, x: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Semi-implicit Euler step of the two-DOF cartpole equations.

    x is (..., 4) = (p, p_dot, theta, theta_dot), u is (..., 1).
    """
    x = np.asarray(x, dtype=float)
    pos, vel, theta, omega = x[..., 0], x[..., 1], x[..., 2], x[..., 3]
    force = np.asarray(u, dtype=float)[..., 0]

    total_mass = params.cart_mass + params.pole_mass
    half_len = 0.5 * params.pole_length
    sin_t, cos_t = np.sin(theta), np.cos(theta)

    temp = (force + params.pole_mass * half_len * omega ** 2 * sin_t) / total_mass
    theta_acc = (params.gravity * sin_t - cos_t * temp) / (
        half_len * (4.0 / 3.0 - params.pole_mass * cos_t ** 2 / total_mass))
    pos_acc = temp - params.pole_mass * half_len * theta_acc * cos_t / total_mass

    vel_next = vel + params.dt * pos_acc
    omega_next = omega + params.dt * theta_acc
    pos_next = pos + params.dt * vel_next
    theta_next = theta + params.dt * omega_next
    return np.stack([pos_next, vel_next, theta_next, omega_next], axis=-1)


def _wrap_angle(theta):
    return (theta + np.pi) % (2.0 * np.pi) - np.pi


def cartpole_cost(x: np.ndarray, u: np.ndarray,
                  weights=(1.0, 0.1, 0.01, 0.1, 0.001)) -> np.ndarray:
    """Quadratic swing-up cost, zero at upright centered rest with zero force."""
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    w_angle, w_pos, w_vel, w_spin, w_force = weights
    return (w_angle * _wrap_angle(x[..., 2]) ** 2
            + w_pos * x[..., 0] ** 2
            + w_vel * x[..., 1] ** 2
            + w_spin * x[..., 3] ** 2
            + w_force * u[..., 0] ** 2)
