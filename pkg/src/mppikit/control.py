"""Sampling-based MPC core.

Implements the shared machinery (rollout, importance weighting, nominal
update, shift) and five controller variants distinguished by how candidate
control sequences are generated from a nominal plan:

* white:   nominal + i.i.d. Gaussian perturbations.
* lowpass: nominal + low-pass filtered perturbations.
* colored: nominal + power-law (colored) perturbations.
* lifted:  perturbations sampled in the control-derivative space and
           integrated, with a smoothness penalty on the sampled derivatives.
* spline:  perturbations sampled at a reduced set of spline knots and
           interpolated to the full horizon with a natural cubic spline.

Every step is a pure function of (state, controller state, rng), so closed
loops are bit-reproducible from a seed.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, replace

import numpy as np
from scipy.interpolate import CubicSpline

from mppikit.sampling import SamplerSpec, sample_perturbations

VARIANTS = ("white", "lowpass", "colored", "lifted", "spline")

# Failed rollouts get cost SENTINEL_SCALE * (1 + |partial cost|): large enough
# to zero their weight, finite so the weighting math never sees inf/nan.
SENTINEL_SCALE = 1.0e6


@dataclass(frozen=True)
class OCPSpec:
    """A discrete-time optimal control problem over a fixed horizon.

    dynamics(x, u) and step_cost(x, u) must be deterministic and accept
    leading batch dimensions: x is (..., state_dim), u is (..., control_dim).
    terminal_cost(x) is optional (None means zero).
    """

    state_dim: int
    control_dim: int
    dt: float
    horizon: int
    dynamics: object
    step_cost: object
    control_low: np.ndarray
    control_high: np.ndarray
    terminal_cost: object = None

    def __post_init__(self):
        low = np.broadcast_to(np.asarray(self.control_low, dtype=float), (self.control_dim,)).copy()
        high = np.broadcast_to(np.asarray(self.control_high, dtype=float), (self.control_dim,)).copy()
        object.__setattr__(self, "control_low", low)
        object.__setattr__(self, "control_high", high)
        if self.state_dim < 1 or self.control_dim < 1:
            raise ValueError("state_dim and control_dim must be >= 1")
        if self.dt <= 0.0:
            raise ValueError("dt must be positive")
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        if not np.all(low < high):
            raise ValueError("control bounds must satisfy low < high elementwise")


@dataclass(frozen=True)
class ControllerConfig:
    """Variant id plus every hyperparameter of one controller."""

    variant: str
    n_rollouts: int
    temperature: float
    sampler: SamplerSpec
    n_knots: int = 8
    smooth_weight: float = 0.1

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}, expected one of {VARIANTS}")
        if self.n_rollouts < 1:
            raise ValueError("n_rollouts must be >= 1")
        if self.temperature <= 0.0:
            raise ValueError("temperature must be positive")
        if self.variant == "spline" and self.n_knots < 2:
            raise ValueError("spline variant needs n_knots >= 2")
        if self.smooth_weight < 0.0:
            raise ValueError("smooth_weight must be nonnegative")


@dataclass(frozen=True)
class ControllerState:
    """Mutable-across-steps part of a controller, treated as immutable.

    nominal lives in the variant's native space: control space for
    white/lowpass/colored, control-derivative space for lifted, knot space
    for spline. u_prev is the last applied control (lifted only).
    """

    config: ControllerConfig
    nominal: np.ndarray
    u_prev: np.ndarray | None = None


@dataclass(frozen=True)
class RolloutResult:
    """Trajectory, controls, and total cost of one open-loop rollout."""

    states: np.ndarray
    controls: np.ndarray
    cost: float
    failed: bool = False


@dataclass(frozen=True)
class StepDiagnostics:
    """Per-step record: all rollout costs, weights, and wall-clock time."""

    costs: np.ndarray
    weights: np.ndarray
    wall_time_s: float
    n_failed: int
    all_failed: bool


def clip_controls(controls: np.ndarray, low, high) -> np.ndarray:
    """Elementwise clamp of a control sequence to the box [low, high]."""
    return np.clip(controls, low, high)


def shift_sequence(controls: np.ndarray) -> np.ndarray:
    """Warm start for the next tick: drop the first row, repeat the last."""
    return np.concatenate([controls[1:], controls[-1:]], axis=0)


def compute_weights(costs, temperature: float, failed=None) -> np.ndarray:
    """Exponentiated-cost importance weights.

    w_i proportional to exp(-temperature * J_i), normalized to sum to 1.
    The minimum cost is subtracted before exponentiation, which leaves the
    result invariant to common offsets and prevents underflow. If a failure
    mask is given and every rollout failed, returns uniform weights so the
    control loop degrades to averaging instead of dividing by zero.
    """
    costs = np.asarray(costs, dtype=float)
    if costs.ndim != 1 or costs.size == 0:
        raise ValueError("costs must be a nonempty 1-D vector")
    if temperature <= 0.0:
        raise ValueError("temperature must be positive")
    if not np.all(np.isfinite(costs)):
        raise ValueError("costs must be finite (failed rollouts carry sentinel costs)")
    n = costs.size
    if failed is not None and np.all(failed):
        return np.full(n, 1.0 / n)
    w = np.exp(-temperature * (costs - costs.min()))
    return w / w.sum()


def update_nominal(candidates: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Weighted average of candidate sequences: sum_i w_i * U_i.

    A convex combination, so box feasibility of the candidates carries over.
    """
    weights = np.asarray(weights, dtype=float)
    if abs(float(weights.sum()) - 1.0) > 1e-9:
        raise ValueError("weights must sum to 1")
    return np.tensordot(weights, candidates, axes=1)


def _finite_rows(x: np.ndarray) -> np.ndarray:
    return np.isfinite(x).all(axis=-1)


def _rollout_batch(ocp: OCPSpec, x0: np.ndarray, controls: np.ndarray):
    """Roll N control sequences through the dynamics in lockstep.

    Returns (costs, failed). A rollout whose dynamics or cost go nonfinite
    is frozen at its last finite state and charged
    SENTINEL_SCALE * (1 + |cost accumulated so far|).
    """
    n_rollouts, horizon, _ = controls.shape
    x = np.broadcast_to(np.asarray(x0, dtype=float), (n_rollouts, ocp.state_dim)).copy()
    cost = np.zeros(n_rollouts)
    failed = np.zeros(n_rollouts, dtype=bool)
    with np.errstate(all="ignore"):
        for h in range(horizon):
            u = controls[:, h, :]
            c = np.asarray(ocp.step_cost(x, u), dtype=float)
            x_next = np.asarray(ocp.dynamics(x, u), dtype=float)
            bad = ~(np.isfinite(c) & _finite_rows(x_next)) & ~failed
            ok = ~failed & ~bad
            cost[ok] += c[ok]
            failed |= bad
            x = np.where(failed[:, None], x, x_next)
        if ocp.terminal_cost is not None:
            ct = np.asarray(ocp.terminal_cost(x), dtype=float)
            bad = ~np.isfinite(ct) & ~failed
            ok = ~failed & ~bad
            cost[ok] += ct[ok]
            failed |= bad
    return np.where(failed, SENTINEL_SCALE * (1.0 + np.abs(cost)), cost), failed


def rollout(ocp: OCPSpec, x0: np.ndarray, controls: np.ndarray) -> RolloutResult:
    """Open-loop rollout of one control sequence with full logging.

    Controls are clipped to the bounds first. The returned cost equals the
    sum of step costs over the logged (state, control) pairs plus the
    terminal cost of the final state, so it is recomputable from the logs.
    On nonfinite propagation the trajectory is frozen at the last finite
    state, failed is set, and the cost becomes the failure sentinel.
    """
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (ocp.state_dim,):
        raise ValueError(f"x0 must have shape ({ocp.state_dim},)")
    if not np.all(np.isfinite(x0)):
        raise ValueError("x0 must be finite")
    controls = clip_controls(np.asarray(controls, dtype=float), ocp.control_low, ocp.control_high)
    if controls.shape != (ocp.horizon, ocp.control_dim):
        raise ValueError(f"controls must have shape ({ocp.horizon}, {ocp.control_dim})")

    states = np.empty((ocp.horizon + 1, ocp.state_dim))
    states[0] = x0
    cost = 0.0
    failed = False
    with np.errstate(all="ignore"):
        for h in range(ocp.horizon):
            if failed:
                states[h + 1] = states[h]
                continue
            c = float(ocp.step_cost(states[h], controls[h]))
            x_next = np.asarray(ocp.dynamics(states[h], controls[h]), dtype=float)
            if not (np.isfinite(c) and np.all(np.isfinite(x_next))):
                failed = True
                states[h + 1] = states[h]
                continue
            cost += c
            states[h + 1] = x_next
        if not failed and ocp.terminal_cost is not None:
            ct = float(ocp.terminal_cost(states[-1]))
            if np.isfinite(ct):
                cost += ct
            else:
                failed = True
    if failed:
        cost = SENTINEL_SCALE * (1.0 + abs(cost))
    return RolloutResult(states=states, controls=controls, cost=cost, failed=failed)


def lifted_transform(state: ControllerState, perturbations: np.ndarray, ocp: OCPSpec):
    """Candidate controls for the lifted (derivative-sampling) variant.

    The nominal and the perturbations live in control-derivative space.
    Controls integrate as u_h = clip(u_{h-1} + d_h * dt) with u_0 = u_prev,
    clipping inside the recursion so saturation is absorbing. Returns the
    candidate control sequences and the per-rollout smoothness penalty
    smooth_weight * ||nominal + perturbation||^2.
    """
    if state.config.variant != "lifted":
        raise ValueError(f"variant is {state.config.variant!r}, expected 'lifted'")
    derivs = state.nominal + perturbations
    n_rollouts, horizon, m = derivs.shape
    controls = np.empty_like(derivs)
    u = np.broadcast_to(state.u_prev, (n_rollouts, m))
    for h in range(horizon):
        u = np.clip(u + derivs[:, h, :] * ocp.dt, ocp.control_low, ocp.control_high)
        controls[:, h, :] = u
    penalties = state.config.smooth_weight * np.sum(derivs * derivs, axis=(1, 2))
    return controls, penalties


def _knot_times(horizon: int, n_knots: int) -> np.ndarray:
    return np.linspace(0.0, float(horizon - 1), n_knots)


def spline_transform(knots: np.ndarray, horizon: int, low, high) -> np.ndarray:
    """Interpolate knot sequences to full-horizon control sequences.

    Knots sit at uniformly spaced horizon indices (first at step 0, last at
    step horizon-1) and are interpolated per control dimension with a
    natural cubic spline, then clipped (cubics can overshoot the knot box).
    """
    n_knots = knots.shape[-2]
    if not 2 <= n_knots <= horizon:
        raise ValueError("need 2 <= n_knots <= horizon")
    times = _knot_times(horizon, n_knots)
    spline = CubicSpline(times, knots, axis=-2, bc_type="natural")
    return np.clip(spline(np.arange(horizon)), low, high)


def make_controller(config: ControllerConfig, ocp: OCPSpec, initial_nominal: np.ndarray | None = None) -> ControllerState:
    """Fresh controller state with a zero (feasible-projected) nominal.

    initial_nominal, if given, is interpreted in the variant's native space
    and clipped where that space is control-valued.
    """
    if config.sampler.dims != ocp.control_dim:
        raise ValueError("sampler sigma length must equal ocp.control_dim")
    if abs(config.sampler.control_rate_hz * ocp.dt - 1.0) > 1e-6:
        raise ValueError("sampler control_rate_hz must equal 1 / ocp.dt")
    if config.variant == "spline" and config.n_knots > ocp.horizon:
        raise ValueError("n_knots must not exceed ocp.horizon")

    rows = config.n_knots if config.variant == "spline" else ocp.horizon
    nominal = np.zeros((rows, ocp.control_dim)) if initial_nominal is None else np.array(initial_nominal, dtype=float)
    if nominal.shape != (rows, ocp.control_dim):
        raise ValueError(f"initial nominal must have shape ({rows}, {ocp.control_dim})")
    u_prev = None
    if config.variant == "lifted":
        u_prev = np.clip(np.zeros(ocp.control_dim), ocp.control_low, ocp.control_high)
    else:
        # Control-valued nominal spaces must respect the bounds at all times.
        nominal = np.clip(nominal, ocp.control_low, ocp.control_high)
    return ControllerState(config=config, nominal=nominal, u_prev=u_prev)


def mppi_step(state: ControllerState, ocp: OCPSpec, x_t: np.ndarray, rng):
    """One control tick: sample, transform, rollout, weight, update, shift.

    Returns (u_applied, next_state, diagnostics). u_applied is the first
    control of the updated nominal, taken before shifting. Sampler or
    rollout failures surface as sentinel costs and diagnostics flags; the
    loop itself never raises on them.
    """
    t0 = time.perf_counter()
    cfg = state.config
    low, high = ocp.control_low, ocp.control_high
    sample_horizon = cfg.n_knots if cfg.variant == "spline" else ocp.horizon
    eps = sample_perturbations(rng, cfg.sampler, cfg.n_rollouts, sample_horizon).data

    penalties = None
    if cfg.variant == "lifted":
        native = state.nominal + eps
        candidates, penalties = lifted_transform(state, eps, ocp)
    elif cfg.variant == "spline":
        native = clip_controls(state.nominal + eps, low, high)
        candidates = spline_transform(native, ocp.horizon, low, high)
    else:
        native = clip_controls(state.nominal + eps, low, high)
        candidates = native

    costs, failed = _rollout_batch(ocp, x_t, candidates)
    if penalties is not None:
        costs = costs + penalties
    weights = compute_weights(costs, cfg.temperature, failed=failed)
    new_nominal = update_nominal(native, weights)

    if cfg.variant == "lifted":
        u_applied = np.clip(state.u_prev + new_nominal[0] * ocp.dt, low, high)
        next_state = replace(state, nominal=shift_sequence(new_nominal), u_prev=u_applied)
    elif cfg.variant == "spline":
        u_applied = new_nominal[0].copy()
        times = _knot_times(ocp.horizon, cfg.n_knots)
        spline = CubicSpline(times, new_nominal, axis=0, bc_type="natural")
        shifted = np.clip(spline(np.minimum(times + 1.0, float(ocp.horizon - 1))), low, high)
        next_state = replace(state, nominal=shifted)
    else:
        u_applied = new_nominal[0].copy()
        next_state = replace(state, nominal=shift_sequence(new_nominal))

    diag = StepDiagnostics(
        costs=costs,
        weights=weights,
        wall_time_s=time.perf_counter() - t0,
        n_failed=int(np.count_nonzero(failed)),
        all_failed=bool(np.all(failed)),
    )
    return u_applied, next_state, diag
