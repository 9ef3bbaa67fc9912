"""Perturbation samplers for sampling-based MPC.

Three families share one contract: given a seeded generator, a spec, and a
batch shape (N rollouts, H steps, m control dims), return an N x H x m tensor
of zero-mean perturbations whose per-dimension standard deviation matches the
spec's sigma.

* white:   i.i.d. Gaussian, flat spectrum.
* colored: power-law spectrum, PSD proportional to f**(-beta).
* lowpass: white noise run through a causal Butterworth filter, which
  concentrates perturbation energy below the cutoff without biasing
  frequencies inside the passband.

Determinism contract: a batch is a pure function of (seed, spec, N, H). The
white sampler and the colored sampler at beta = 0 consume the Gaussian
stream identically (rollout-major), so their batches coincide bit for bit
under the same seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import toeplitz
from scipy.signal import sosfilt

from mppikit.dsp import design_butterworth_lowpass, generate_colored_noise

MAX_BURN_IN = 4096


@dataclass(frozen=True)
class SamplerSpec:
    """Parameters of a perturbation sampler.

    sigma is the per-dimension standard deviation (diagonal noise
    covariance) in control units. control_rate_hz (1 / dt) normalizes the
    low-pass cutoff against Nyquist.
    """

    kind: str
    sigma: np.ndarray
    control_rate_hz: float
    beta: float = 0.0
    fc_hz: float = 0.0
    order: int = 0

    def __post_init__(self):
        sigma = np.atleast_1d(np.asarray(self.sigma, dtype=float))
        object.__setattr__(self, "sigma", sigma)
        if self.kind not in ("white", "colored", "lowpass"):
            raise ValueError(f"unknown sampler kind {self.kind!r}")
        if np.any(sigma <= 0.0):
            raise ValueError("sigma must be elementwise positive")
        if self.control_rate_hz <= 0.0:
            raise ValueError("control_rate_hz must be positive")
        if self.kind == "colored" and self.beta < 0.0:
            raise ValueError("beta must be nonnegative")
        if self.kind == "lowpass":
            if not 0.0 < self.fc_hz < self.control_rate_hz / 2.0:
                raise ValueError("fc_hz must lie in (0, control_rate_hz / 2)")
            if self.order < 1:
                raise ValueError("order must be >= 1")

    @property
    def dims(self) -> int:
        return len(self.sigma)

    @property
    def fc_norm(self) -> float:
        """Cutoff as a fraction of Nyquist."""
        return self.fc_hz / (self.control_rate_hz / 2.0)


@dataclass(frozen=True)
class PerturbationBatch:
    """An N x H x m tensor of sampled perturbations plus its provenance."""

    data: np.ndarray
    spec: SamplerSpec
    seed: int | None

    @property
    def n_rollouts(self) -> int:
        return self.data.shape[0]

    @property
    def horizon(self) -> int:
        return self.data.shape[1]


def lowpass_burn_in(fc_norm: float, order: int) -> int:
    """Transient length discarded so early-horizon samples are not attenuated
    by the filter's zero initial state. Scales with the impulse-response
    length, capped at MAX_BURN_IN."""
    return min(max(2 * order, math.ceil(2.0 / fc_norm)), MAX_BURN_IN)


def _coerce_rng(rng) -> tuple[np.random.Generator, int | None]:
    if isinstance(rng, np.random.Generator):
        return rng, None
    return np.random.default_rng(rng), int(rng)


def _check_kind(spec: SamplerSpec, expected: str) -> None:
    if spec.kind != expected:
        raise ValueError(f"spec.kind is {spec.kind!r}, expected {expected!r}")


def sample_white(rng, spec: SamplerSpec, n_rollouts: int, horizon: int) -> PerturbationBatch:
    """i.i.d. Gaussian perturbations, dimension d scaled by sigma[d]."""
    _check_kind(spec, "white")
    gen, seed = _coerce_rng(rng)
    data = gen.standard_normal((n_rollouts, horizon, spec.dims)) * spec.sigma
    return PerturbationBatch(data=data, spec=spec, seed=seed)


def sample_colored(rng, spec: SamplerSpec, n_rollouts: int, horizon: int) -> PerturbationBatch:
    """Power-law perturbations: each (rollout, dim) sequence comes from
    generate_colored_noise, then every dimension is rescaled so the batch
    sample standard deviation matches sigma[d] (same convention as the
    low-pass sampler). beta = 0 bypasses the spectral round trip and
    consumes the Gaussian stream exactly like the white sampler, so it
    matches sample_white bit for bit under the same seed."""
    _check_kind(spec, "colored")
    gen, seed = _coerce_rng(rng)
    if spec.beta == 0.0:
        data = gen.standard_normal((n_rollouts, horizon, spec.dims)) * spec.sigma
        return PerturbationBatch(data=data, spec=spec, seed=seed)
    shaped = generate_colored_noise(gen, spec.beta, horizon, n_rollouts * spec.dims)
    data = np.moveaxis(shaped.reshape(horizon, n_rollouts, spec.dims), 0, 1)
    std = data.std(axis=(0, 1))
    data = data / np.where(std > 0.0, std, 1.0) * spec.sigma
    return PerturbationBatch(data=data, spec=spec, seed=seed)


# The design is a pure function of (fc_norm, order); caching keeps the
# per-control-tick sampling cost flat.
_cached_design = lru_cache(maxsize=64)(design_butterworth_lowpass)


# Above this many filtered samples per sequence, the streaming filter wins
# over the dense impulse-response projection.
_MATRIX_PATH_MAX_LEN = 128


@lru_cache(maxsize=64)
def _lowpass_projection(fc_norm: float, order: int, horizon: int) -> np.ndarray:
    """Matrix mapping a white sequence to the post-burn-in filtered output.

    Causal filtering of a finite sequence from zero initial state is
    y[n] = sum_k h[k] x[n - k] with h the filter's impulse response, so the
    whole operation is one lower-triangular Toeplitz product. Applying it
    as x @ M, with the first `burn` output columns dropped, fuses filtering
    and burn-in removal into a single BLAS call. Exact within the window:
    output sample n only involves h[0..n], so nothing is truncated.
    """
    cascade = _cached_design(fc_norm, order)
    burn = lowpass_burn_in(fc_norm, order)
    length = horizon + burn
    impulse = np.zeros(length)
    impulse[0] = 1.0
    response = sosfilt(cascade.as_sos(), impulse)
    full = toeplitz(np.concatenate([response[:1], np.zeros(length - 1)]), response)
    return np.ascontiguousarray(full[:, burn:])


def sample_lowpass(rng, spec: SamplerSpec, n_rollouts: int, horizon: int) -> PerturbationBatch:
    """Low-pass filtered Gaussian perturbations.

    Draws white sequences of length horizon + W (W the burn-in), filters
    each rollout's each control dimension causally with the designed
    Butterworth cascade, discards the first W outputs, and rescales every
    dimension so the batch sample standard deviation matches sigma[d].
    The rescale keeps sigma's meaning identical across sampler kinds:
    changing the cutoff changes only the spectrum, not the exploration
    magnitude.
    """
    _check_kind(spec, "lowpass")
    gen, seed = _coerce_rng(rng)
    burn = lowpass_burn_in(spec.fc_norm, spec.order)

    # Time sits on the last axis so the filter runs per (rollout, dim)
    # sequence. Short windows (the per-control-tick regime) go through the
    # cached impulse-response projection: one matmul instead of a scipy
    # filter call plus burn-in slicing. Long windows use the streaming
    # filter, whose cost scales linearly instead of quadratically.
    white = gen.standard_normal((n_rollouts, spec.dims, horizon + burn))
    if horizon + burn <= _MATRIX_PATH_MAX_LEN:
        projection = _lowpass_projection(spec.fc_norm, spec.order, horizon)
        rows = white.reshape(n_rollouts * spec.dims, horizon + burn)
        kept = (rows @ projection).reshape(n_rollouts, spec.dims, horizon)
    else:
        cascade = _cached_design(spec.fc_norm, spec.order)
        kept = sosfilt(cascade.as_sos(), white, axis=-1)[:, :, burn:]

    std = kept.std(axis=(0, 2))
    kept *= (spec.sigma / np.where(std > 0.0, std, 1.0))[:, None]
    return PerturbationBatch(data=np.swapaxes(kept, 1, 2), spec=spec, seed=seed)


_SAMPLERS = {"white": sample_white, "colored": sample_colored, "lowpass": sample_lowpass}


def sample_perturbations(rng, spec: SamplerSpec, n_rollouts: int, horizon: int) -> PerturbationBatch:
    """Dispatch to the sampler matching spec.kind."""
    return _SAMPLERS[spec.kind](rng, spec, n_rollouts, horizon)
