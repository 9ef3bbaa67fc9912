"""Tests for the controller core.

Weight algebra and rollout costs are checked against hand-computed values
on a double integrator; the zero-noise fixed point pins the full update
loop for every sampler variant.
"""

import math

import numpy as np
import pytest

from mppikit.control import (
    VARIANTS,
    ControllerConfig,
    OCPSpec,
    _rollout_batch,
    clip_controls,
    compute_weights,
    lifted_transform,
    make_controller,
    mppi_step,
    rollout,
    shift_sequence,
    spline_transform,
    update_nominal,
)
from mppikit.environments import PendulumParams, pendulum_cost, pendulum_step
from mppikit.sampling import SamplerSpec, sample_perturbations


def double_integrator_ocp(horizon=10, low=-10.0, high=10.0):
    """x = (position, velocity), dt = 0.1, terminal cost = position."""
    dt = 0.1

    def step(x, u):
        x = np.asarray(x, dtype=float)
        u = np.asarray(u, dtype=float)
        return np.stack([x[..., 0] + dt * x[..., 1], x[..., 1] + dt * u[..., 0]],
                        axis=-1)

    def step_cost(x, u):
        return np.zeros(np.asarray(x).shape[:-1])

    def terminal_cost(x):
        return np.asarray(x, dtype=float)[..., 0]

    return OCPSpec(state_dim=2, control_dim=1, dt=dt, horizon=horizon,
                   dynamics=step, step_cost=step_cost,
                   control_low=low, control_high=high,
                   terminal_cost=terminal_cost)


def pendulum_ocp(horizon=20, params=None):
    params = params or PendulumParams()
    return OCPSpec(state_dim=2, control_dim=1, dt=params.dt, horizon=horizon,
                   dynamics=lambda x, u: pendulum_step(params, x, u),
                   step_cost=pendulum_cost,
                   control_low=-params.torque_limit,
                   control_high=params.torque_limit)


def sampler_for(variant, rate=20.0, sigma=1e-12):
    kind = {"white": "white", "lowpass": "lowpass", "colored": "colored",
            "lifted": "white", "spline": "white"}[variant]
    kwargs = {}
    if kind == "lowpass":
        kwargs = {"fc_hz": 2.0, "order": 2}
    elif kind == "colored":
        kwargs = {"beta": 1.0}
    return SamplerSpec(kind=kind, sigma=(sigma,), control_rate_hz=rate, **kwargs)


class TestWeights:
    def test_two_costs_hand_value(self):
        w = compute_weights(np.array([0.0, math.log(2.0)]), 1.0)
        assert np.allclose(w, [2.0 / 3.0, 1.0 / 3.0], atol=1e-12)

    def test_equal_costs_give_uniform(self):
        w = compute_weights(np.full(7, 3.25), 2.0)
        assert np.allclose(w, 1.0 / 7.0, atol=1e-12)

    def test_offset_invariance(self):
        costs = np.array([4.0, 1.0, 2.5, 9.0])
        a = compute_weights(costs, 0.7)
        b = compute_weights(costs + 1234.5, 0.7)
        assert np.allclose(a, b, atol=1e-12)

    def test_sums_to_one(self):
        rng = np.random.default_rng(0)
        for _ in range(10):
            w = compute_weights(rng.uniform(0, 100, size=50), 3.0)
            assert abs(w.sum() - 1.0) < 1e-12
            assert np.all(w >= 0.0)

    def test_single_candidate(self):
        assert np.array_equal(compute_weights(np.array([5.0]), 1.0), [1.0])

    def test_lower_cost_gets_higher_weight(self):
        w = compute_weights(np.array([1.0, 2.0, 3.0]), 0.5)
        assert w[0] > w[1] > w[2]

    def test_all_failed_gives_uniform(self):
        costs = np.array([1e6, 2e6, 3e6])
        w = compute_weights(costs, 1.0, failed=np.array([True, True, True]))
        assert np.allclose(w, 1.0 / 3.0, atol=1e-12)

    def test_validation(self):
        with pytest.raises(ValueError):
            compute_weights(np.array([]), 1.0)
        with pytest.raises(ValueError):
            compute_weights(np.zeros((2, 2)), 1.0)
        with pytest.raises(ValueError):
            compute_weights(np.array([1.0]), 0.0)
        with pytest.raises(ValueError):
            compute_weights(np.array([np.inf]), 1.0)


class TestNominalUpdate:
    def test_one_hot_selects_candidate(self):
        candidates = np.arange(24, dtype=float).reshape(3, 4, 2)
        w = np.array([0.0, 1.0, 0.0])
        assert np.array_equal(update_nominal(candidates, w), candidates[1])

    def test_symmetric_perturbations_cancel(self):
        base = np.linspace(-1, 1, 10).reshape(5, 2)
        candidates = np.stack([base + 0.3, base - 0.3])
        out = update_nominal(candidates, np.array([0.5, 0.5]))
        assert np.allclose(out, base, atol=1e-12)

    def test_weighted_average_hand_value(self):
        candidates = np.stack([np.zeros((1, 1)), np.full((1, 1), 4.0)])
        out = update_nominal(candidates, np.array([0.75, 0.25]))
        assert np.allclose(out, [[1.0]], atol=1e-12)

    def test_rejects_bad_weight_sum(self):
        candidates = np.zeros((2, 3, 1))
        with pytest.raises(ValueError):
            update_nominal(candidates, np.array([0.5, 0.6]))


class TestClipShift:
    def test_shift_drops_first_repeats_last(self):
        seq = np.array([[1.0], [2.0], [3.0]])
        assert np.array_equal(shift_sequence(seq), [[2.0], [3.0], [3.0]])

    def test_shift_horizon_one_is_identity(self):
        seq = np.array([[5.0]])
        assert np.array_equal(shift_sequence(seq), seq)

    def test_clip_elementwise(self):
        controls = np.array([[-3.0, 0.5], [2.0, 7.0]])
        out = clip_controls(controls, np.array([-1.0, -1.0]), np.array([1.0, 1.0]))
        assert np.array_equal(out, [[-1.0, 0.5], [1.0, 1.0]])


class TestRollout:
    def test_double_integrator_hand_cost(self):
        # u = 1 for 10 steps from rest: v_k = 0.1 k, p_10 = 0.1 * sum(v_1..v_9)
        # = 0.01 * 45 = 0.45. Step cost zero, terminal cost = position.
        ocp = double_integrator_ocp()
        result = rollout(ocp, np.zeros(2), np.ones((10, 1)))
        assert abs(result.cost - 0.45) < 1e-12
        assert not result.failed
        assert result.states.shape == (11, 2)

    def test_zero_controls_zero_cost(self):
        ocp = double_integrator_ocp()
        result = rollout(ocp, np.zeros(2), np.zeros((10, 1)))
        assert result.cost == 0.0

    def test_horizon_one_state_rows(self):
        ocp = double_integrator_ocp(horizon=1)
        result = rollout(ocp, np.zeros(2), np.zeros((1, 1)))
        assert result.states.shape == (2, 2)

    def test_controls_are_clipped(self):
        ocp = double_integrator_ocp(low=-0.5, high=0.5)
        result = rollout(ocp, np.zeros(2), np.full((10, 1), 3.0))
        assert np.all(result.controls <= 0.5)

    def test_cost_recomputable_from_logs(self):
        ocp = pendulum_ocp()
        rng = np.random.default_rng(4)
        result = rollout(ocp, np.array([0.1, 0.0]), rng.normal(size=(20, 1)))
        total = sum(pendulum_cost(result.states[t], result.controls[t])
                    for t in range(20))
        assert abs(total - result.cost) < 1e-9

    def test_failure_freezes_state_and_applies_sentinel(self):
        # 1-D chain with unit cost per step; dynamics go nonfinite once the
        # state reaches 3, i.e. on the fourth step.
        def step(x, u):
            x = np.asarray(x, dtype=float)
            return np.where(x >= 3.0, np.inf, x + 1.0)

        def unit_cost(x, u):
            return np.ones(np.asarray(x).shape[:-1])

        ocp = OCPSpec(state_dim=1, control_dim=1, dt=0.1, horizon=10,
                      dynamics=step, step_cost=unit_cost,
                      control_low=-1.0, control_high=1.0)
        result = rollout(ocp, np.zeros(1), np.zeros((10, 1)))
        assert result.failed
        # Three healthy steps accumulate cost 3 before the guard trips.
        assert abs(result.cost - 1.0e6 * (1.0 + 3.0)) < 1e-6
        assert np.all(np.isfinite(result.states))

    def test_batch_matches_single(self):
        ocp = pendulum_ocp()
        rng = np.random.default_rng(8)
        controls = np.clip(rng.normal(size=(5, 20, 1)), -2.0, 2.0)
        costs, failed = _rollout_batch(ocp, np.array([0.3, -0.2]), controls)
        for i in range(5):
            single = rollout(ocp, np.array([0.3, -0.2]), controls[i])
            assert abs(costs[i] - single.cost) < 1e-9
            assert failed[i] == single.failed

    def test_batch_isolates_failures(self):
        def step(x, u):
            x = np.asarray(x, dtype=float)
            return np.where(x >= 2.0, np.inf, x + u[..., :1])

        def unit_cost(x, u):
            return np.ones(np.asarray(x).shape[:-1])

        ocp = OCPSpec(state_dim=1, control_dim=1, dt=0.1, horizon=5,
                      dynamics=step, step_cost=unit_cost,
                      control_low=-1.0, control_high=1.0)
        controls = np.stack([np.zeros((5, 1)), np.ones((5, 1))])
        costs, failed = _rollout_batch(ocp, np.zeros(1), controls)
        assert not failed[0] and failed[1]
        assert costs[0] == 5.0
        assert costs[1] > 1e5


class TestLiftedTransform:
    def make_state(self, horizon=3, dt=0.1, low=-10.0, high=10.0):
        ocp = double_integrator_ocp(horizon=horizon, low=low, high=high)
        config = ControllerConfig(variant="lifted", n_rollouts=4, temperature=1.0,
                                  sampler=sampler_for("lifted", rate=1.0 / dt),
                                  smooth_weight=0.5)
        return make_controller(config, ocp), ocp

    def test_zero_derivatives_hold_previous_input(self):
        state, ocp = self.make_state()
        controls, penalties = lifted_transform(state, np.zeros((2, 3, 1)), ocp)
        assert np.allclose(controls, 0.0, atol=1e-15)
        assert np.allclose(penalties, 0.0, atol=1e-15)

    def test_constant_rate_integrates_to_ramp(self):
        state, ocp = self.make_state()
        controls, _ = lifted_transform(state, np.full((1, 3, 1), 2.0), ocp)
        assert np.allclose(controls[0, :, 0], [0.2, 0.4, 0.6], atol=1e-12)

    def test_clamping_absorbs_integration(self):
        state, ocp = self.make_state(low=-0.5, high=0.5)
        controls, _ = lifted_transform(state, np.full((1, 3, 1), 100.0), ocp)
        # Once saturated the sequence stays pinned rather than winding up.
        assert np.allclose(controls[0, :, 0], [0.5, 0.5, 0.5], atol=1e-12)

    def test_penalty_scales_with_squared_rates(self):
        state, ocp = self.make_state()
        rates = np.array([[[1.0], [2.0], [-1.0]]])
        _, penalties = lifted_transform(state, rates, ocp)
        assert np.allclose(penalties, 0.5 * 6.0, atol=1e-9)

    def test_rejects_non_lifted_state(self):
        ocp = double_integrator_ocp(horizon=3)
        config = ControllerConfig(variant="white", n_rollouts=4, temperature=1.0,
                                  sampler=sampler_for("white", rate=10.0))
        state = make_controller(config, ocp)
        with pytest.raises(ValueError):
            lifted_transform(state, np.zeros((1, 3, 1)), ocp)


class TestSplineTransform:
    def test_knots_equal_horizon_reproduce_values(self):
        knots = np.linspace(-1, 1, 5).reshape(5, 1)
        out = spline_transform(knots[np.newaxis], 5, np.array([-10.0]),
                               np.array([10.0]))
        assert np.allclose(out[0], knots, atol=1e-9)

    def test_constant_knots_give_constant_sequence(self):
        knots = np.full((1, 4, 2), 0.7)
        out = spline_transform(knots, 12, np.array([-1.0, -1.0]),
                               np.array([1.0, 1.0]))
        assert np.allclose(out, 0.7, atol=1e-9)

    def test_two_knot_linear_interpolation(self):
        # A natural cubic through two points degenerates to a straight line.
        knots = np.array([[[0.0], [1.0]]])
        out = spline_transform(knots, 5, np.array([-10.0]), np.array([10.0]))
        assert np.allclose(out[0, :, 0], [0.0, 0.25, 0.5, 0.75, 1.0], atol=1e-9)

    def test_output_clipped(self):
        knots = np.array([[[0.0], [10.0], [0.0]]])
        out = spline_transform(knots, 9, np.array([-1.0]), np.array([1.0]))
        assert np.all(out <= 1.0) and np.all(out >= -1.0)

    def test_validation(self):
        low, high = np.array([-1.0]), np.array([1.0])
        with pytest.raises(ValueError):
            spline_transform(np.zeros((1, 1, 1)), 5, low, high)
        with pytest.raises(ValueError):
            spline_transform(np.zeros((1, 6, 1)), 5, low, high)


class TestSpecValidation:
    def test_ocp_rejects_bad_bounds(self):
        with pytest.raises(ValueError):
            double_integrator_ocp(low=1.0, high=-1.0)

    def test_ocp_rejects_bad_horizon(self):
        with pytest.raises(ValueError):
            double_integrator_ocp(horizon=0)

    def test_ocp_broadcasts_scalar_bounds(self):
        ocp = pendulum_ocp()
        assert np.array_equal(ocp.control_low, [-2.0])
        assert np.array_equal(ocp.control_high, [2.0])

    def test_config_rejects_unknown_variant(self):
        with pytest.raises(ValueError):
            ControllerConfig(variant="bayesian", n_rollouts=4, temperature=1.0,
                             sampler=sampler_for("white"))

    def test_config_rejects_bad_counts(self):
        with pytest.raises(ValueError):
            ControllerConfig(variant="white", n_rollouts=0, temperature=1.0,
                             sampler=sampler_for("white"))
        with pytest.raises(ValueError):
            ControllerConfig(variant="white", n_rollouts=4, temperature=0.0,
                             sampler=sampler_for("white"))
        with pytest.raises(ValueError):
            ControllerConfig(variant="spline", n_rollouts=4, temperature=1.0,
                             sampler=sampler_for("spline"), n_knots=1)

    def test_make_controller_rejects_dim_mismatch(self):
        ocp = double_integrator_ocp()
        sampler = SamplerSpec(kind="white", sigma=(1.0, 1.0), control_rate_hz=10.0)
        config = ControllerConfig(variant="white", n_rollouts=4, temperature=1.0,
                                  sampler=sampler)
        with pytest.raises(ValueError):
            make_controller(config, ocp)

    def test_make_controller_rejects_rate_mismatch(self):
        ocp = double_integrator_ocp()  # dt = 0.1 -> 10 Hz control rate
        config = ControllerConfig(variant="white", n_rollouts=4, temperature=1.0,
                                  sampler=sampler_for("white", rate=20.0))
        with pytest.raises(ValueError):
            make_controller(config, ocp)

    def test_make_controller_rejects_excess_knots(self):
        ocp = double_integrator_ocp(horizon=5)
        config = ControllerConfig(variant="spline", n_rollouts=4, temperature=1.0,
                                  sampler=sampler_for("spline", rate=10.0),
                                  n_knots=8)
        with pytest.raises(ValueError):
            make_controller(config, ocp)

    def test_make_controller_rejects_bad_nominal_shape(self):
        ocp = double_integrator_ocp()
        config = ControllerConfig(variant="white", n_rollouts=4, temperature=1.0,
                                  sampler=sampler_for("white", rate=10.0))
        with pytest.raises(ValueError):
            make_controller(config, ocp, initial_nominal=np.zeros((3, 1)))

    def test_make_controller_initializes_lifted_memory(self):
        ocp = double_integrator_ocp()
        config = ControllerConfig(variant="lifted", n_rollouts=4, temperature=1.0,
                                  sampler=sampler_for("lifted", rate=10.0))
        state = make_controller(config, ocp)
        assert np.array_equal(state.u_prev, np.zeros(1))
        assert state.nominal.shape == (10, 1)

    def test_spline_nominal_lives_in_knot_space(self):
        ocp = double_integrator_ocp(horizon=10)
        config = ControllerConfig(variant="spline", n_rollouts=4, temperature=1.0,
                                  sampler=sampler_for("spline", rate=10.0),
                                  n_knots=4)
        state = make_controller(config, ocp)
        assert state.nominal.shape == (4, 1)


class TestMppiStep:
    @pytest.mark.parametrize("variant", VARIANTS)
    def test_zero_noise_fixed_point(self, variant):
        # With vanishing exploration noise every candidate equals the nominal,
        # so one update must return the nominal unchanged.
        ocp = pendulum_ocp(horizon=15)
        config = ControllerConfig(variant=variant, n_rollouts=16, temperature=1.0,
                                  sampler=sampler_for(variant, sigma=1e-12),
                                  n_knots=5)
        state = make_controller(config, ocp)
        u, next_state, diag = mppi_step(state, ocp, np.array([0.2, 0.0]),
                                        np.random.default_rng(0))
        assert np.max(np.abs(u)) <= 1e-6
        assert np.max(np.abs(next_state.nominal)) <= 1e-6
        assert diag.n_failed == 0

    @pytest.mark.parametrize("variant", VARIANTS)
    def test_deterministic_given_seed(self, variant):
        ocp = pendulum_ocp(horizon=12)
        config = ControllerConfig(variant=variant, n_rollouts=8, temperature=1.0,
                                  sampler=sampler_for(variant, sigma=0.5),
                                  n_knots=5)
        outs = []
        for _ in range(2):
            state = make_controller(config, ocp)
            u, nxt, _ = mppi_step(state, ocp, np.array([0.5, -0.1]),
                                  np.random.default_rng(99))
            outs.append((u.copy(), nxt.nominal.copy()))
        assert np.array_equal(outs[0][0], outs[1][0])
        assert np.array_equal(outs[0][1], outs[1][1])

    def test_single_rollout_adopts_candidate(self):
        ocp = pendulum_ocp(horizon=10)
        config = ControllerConfig(variant="white", n_rollouts=1, temperature=1.0,
                                  sampler=sampler_for("white", sigma=0.8))
        state = make_controller(config, ocp)
        u, next_state, diag = mppi_step(state, ocp, np.array([0.1, 0.0]),
                                        np.random.default_rng(5))
        # Reconstruct the lone candidate from the same stream: with one
        # rollout the weight is 1, so the update must adopt it wholesale.
        eps = sample_perturbations(np.random.default_rng(5), config.sampler, 1, 10)
        candidate = np.clip(state.nominal + eps.data[0],
                            ocp.control_low, ocp.control_high)
        assert np.allclose(u, candidate[0], atol=1e-12)
        assert np.allclose(next_state.nominal, shift_sequence(candidate), atol=1e-12)
        assert np.array_equal(diag.weights, [1.0])

    def test_applied_control_is_feasible(self):
        ocp = pendulum_ocp(horizon=10)
        config = ControllerConfig(variant="white", n_rollouts=16, temperature=1.0,
                                  sampler=sampler_for("white", sigma=5.0))
        state = make_controller(config, ocp)
        for seed in range(5):
            u, state, _ = mppi_step(state, ocp, np.array([0.1, 0.0]),
                                    np.random.default_rng(seed))
            assert np.all(u >= ocp.control_low) and np.all(u <= ocp.control_high)
            assert np.all(state.nominal >= ocp.control_low)
            assert np.all(state.nominal <= ocp.control_high)

    def test_all_failed_reports_uniform_weights(self):
        def step(x, u):
            return np.full_like(np.asarray(x, dtype=float), np.inf)

        def unit_cost(x, u):
            return np.ones(np.asarray(x).shape[:-1])

        ocp = OCPSpec(state_dim=1, control_dim=1, dt=0.1, horizon=5,
                      dynamics=step, step_cost=unit_cost,
                      control_low=-1.0, control_high=1.0)
        config = ControllerConfig(variant="white", n_rollouts=4, temperature=1.0,
                                  sampler=sampler_for("white", rate=10.0, sigma=0.5))
        state = make_controller(config, ocp)
        _, _, diag = mppi_step(state, ocp, np.zeros(1), np.random.default_rng(0))
        assert diag.all_failed
        assert diag.n_failed == 4
        assert np.allclose(diag.weights, 0.25, atol=1e-12)

    def test_diagnostics_shapes(self):
        ocp = pendulum_ocp(horizon=10)
        config = ControllerConfig(variant="white", n_rollouts=6, temperature=1.0,
                                  sampler=sampler_for("white", sigma=0.5))
        state = make_controller(config, ocp)
        _, _, diag = mppi_step(state, ocp, np.array([0.1, 0.0]),
                               np.random.default_rng(1))
        assert diag.costs.shape == (6,)
        assert diag.weights.shape == (6,)
        assert abs(diag.weights.sum() - 1.0) < 1e-9
        assert diag.wall_time_s > 0.0

    def test_wide_open_lowpass_tracks_white_episode_cost(self):
        # A first-order filter with cutoff near Nyquist barely shapes the
        # noise, so episode cost should land close to the white sampler.
        results = {}
        for variant in ("white", "lowpass"):
            if variant == "white":
                sampler = SamplerSpec(kind="white", sigma=(1.0,),
                                      control_rate_hz=20.0)
            else:
                sampler = SamplerSpec(kind="lowpass", sigma=(1.0,),
                                      control_rate_hz=20.0, fc_hz=9.8, order=1)
            costs = []
            for seed in range(5):
                ocp = pendulum_ocp(horizon=20)
                config = ControllerConfig(variant=variant, n_rollouts=32,
                                          temperature=3.0, sampler=sampler)
                state = make_controller(config, ocp)
                x = np.array([0.0, 0.0])
                total = 0.0
                for t in range(100):
                    rng = np.random.default_rng(np.random.SeedSequence([seed, t]))
                    u, state, _ = mppi_step(state, ocp, x, rng)
                    total += pendulum_cost(x, u)
                    x = pendulum_step(PendulumParams(), x, u)
                costs.append(total)
            results[variant] = np.mean(costs)
        rel = abs(results["lowpass"] - results["white"]) / results["white"]
        assert rel < 0.10
