"""Signal-processing substrate: Butterworth design, filtering, Savitzky-Golay
smoothing, power-law (colored) noise synthesis, and periodogram PSD estimation.

All operations are pure functions of their inputs; random generation takes an
explicit seeded generator, so everything here is safe to call from multiple
threads on disjoint data.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.signal import sosfilt


@dataclass(frozen=True)
class BiquadCascade:
    """A digital low-pass filter as a cascade of second-order sections.

    Attributes
    ----------
    sections : np.ndarray, shape (n_sections, 5)
        Rows of ``(b0, b1, b2, a1, a2)`` with ``a0`` normalized to 1.
    gain : float
        Overall scalar gain applied on top of the sections.
    fc_norm : float
        Cutoff as a fraction of Nyquist, in (0, 1).
    order : int
        Filter order; ``n_sections == ceil(order / 2)``.
    """

    sections: np.ndarray
    gain: float
    fc_norm: float
    order: int

    def as_sos(self) -> np.ndarray:
        """Sections in scipy's (n, 6) second-order-section layout."""
        cached = getattr(self, "_sos", None)
        if cached is None:
            b = self.sections[:, :3].copy()
            b[0] *= self.gain
            a = np.hstack([np.ones((len(self.sections), 1)), self.sections[:, 3:]])
            cached = np.hstack([b, a])
            # Frozen dataclass; memoize the derived layout (called per tick).
            object.__setattr__(self, "_sos", cached)
        return cached

    def poles(self) -> np.ndarray:
        """All denominator roots (complex), concatenated over sections."""
        roots = []
        for _, _, _, a1, a2 in self.sections:
            roots.extend(np.roots([1.0, a1, a2]) if a2 != 0.0 else [-a1])
        return np.asarray(roots, dtype=complex)

    def dc_gain(self) -> float:
        return float(magnitude_response(self, 0.0))


def design_butterworth_lowpass(fc_norm: float, order: int) -> BiquadCascade:
    """Design a digital Butterworth low-pass filter.

    The analog prototype (poles equally spaced on the left-half circle of
    radius ``tan(pi * fc_norm / 2)``, the prewarped cutoff) is discretized
    with the bilinear transform, so the -3 dB point lands exactly at
    ``fc_norm``. Zeros map to z = -1 and every section is normalized to
    unit DC gain.

    Parameters
    ----------
    fc_norm : float
        Cutoff as a fraction of Nyquist, strictly inside (0, 1).
    order : int
        Filter order, >= 1.

    Returns
    -------
    BiquadCascade
        Stable cascade of ``ceil(order / 2)`` sections with unit DC gain.
    """
    if not 0.0 < fc_norm < 1.0:
        raise ValueError(f"fc_norm must be in (0, 1), got {fc_norm}")
    if order < 1 or int(order) != order:
        raise ValueError(f"order must be a positive integer, got {order}")
    order = int(order)

    warped = np.tan(0.5 * np.pi * fc_norm)
    k = np.arange(1, order + 1)
    theta = np.pi * (2 * k - 1) / (2 * order) + 0.5 * np.pi
    analog = warped * np.exp(1j * theta)

    # Bilinear transform z = (1 + s) / (1 - s); conjugate pairs share a biquad.
    digital = (1.0 + analog) / (1.0 - analog)
    upper = digital[analog.imag > 1e-12]
    real = digital[np.abs(analog.imag) <= 1e-12].real

    rows = []
    for p in upper:
        a1 = -2.0 * p.real
        a2 = abs(p) ** 2
        g = (1.0 + a1 + a2) / 4.0
        rows.append((g, 2.0 * g, g, a1, a2))
    for p in real:
        a1 = -p
        g = (1.0 + a1) / 2.0
        rows.append((g, g, 0.0, a1, 0.0))

    return BiquadCascade(
        sections=np.asarray(rows, dtype=float),
        gain=1.0,
        fc_norm=float(fc_norm),
        order=order,
    )


def magnitude_response(cascade: BiquadCascade, f_norm) -> np.ndarray | float:
    """Magnitude of the cascade's frequency response at ``f_norm``.

    ``f_norm`` is a fraction of Nyquist in [0, 1]; scalars give a scalar back,
    arrays are evaluated elementwise.
    """
    f = np.asarray(f_norm, dtype=float)
    if np.any(f < 0.0) or np.any(f > 1.0):
        raise ValueError("f_norm must lie in [0, 1]")
    z1 = np.exp(-1j * np.pi * f)
    z2 = z1 * z1
    h = np.full(f.shape, complex(cascade.gain))
    for b0, b1, b2, a1, a2 in cascade.sections:
        h *= (b0 + b1 * z1 + b2 * z2) / (1.0 + a1 * z1 + a2 * z2)
    mag = np.abs(h)
    return float(mag) if np.isscalar(f_norm) else mag


def apply_filter(cascade: BiquadCascade, sequence: np.ndarray, burn_in: int = 0) -> np.ndarray:
    """Run the cascade causally over a sequence, column by column.

    Section states start at zero. ``sequence`` may include a transient
    prefix: the first ``burn_in`` filtered samples are discarded, so the
    output has ``len(sequence) - burn_in`` rows (identical shape when
    ``burn_in`` is 0). Output at row t depends only on input rows <= t of
    the full sequence.
    """
    seq = np.asarray(sequence, dtype=float)
    if seq.ndim not in (1, 2):
        raise ValueError("sequence must be 1-D or 2-D (time on axis 0)")
    if seq.shape[0] < 1:
        raise ValueError("sequence must contain at least one sample")
    if burn_in < 0 or burn_in >= seq.shape[0]:
        raise ValueError("burn_in must satisfy 0 <= burn_in < len(sequence)")
    out = sosfilt(cascade.as_sos(), seq, axis=0)
    return out[burn_in:]


def _sg_weights(offsets: np.ndarray, polyorder: int) -> np.ndarray:
    """Least-squares polynomial-fit weights evaluating the fit at offset 0."""
    degree = min(polyorder, len(offsets) - 1)
    vand = np.vander(offsets.astype(float), degree + 1, increasing=True)
    return np.linalg.pinv(vand)[0]


def savitzky_golay_smooth(sequence: np.ndarray, window: int, polyorder: int) -> np.ndarray:
    """Savitzky-Golay smoothing with truncated one-sided fits at the edges.

    Each interior sample is replaced by the center value of the degree
    ``polyorder`` least-squares polynomial over the symmetric window. Near
    the boundaries the window is truncated on the missing side and the fit
    is evaluated at the edge sample itself (the fit degree is capped at the
    truncated point count minus one).
    """
    seq = np.asarray(sequence, dtype=float)
    squeeze = seq.ndim == 1
    if squeeze:
        seq = seq[:, None]
    if seq.ndim != 2:
        raise ValueError("sequence must be 1-D or 2-D (time on axis 0)")
    n = seq.shape[0]
    if window % 2 == 0 or window < 3:
        raise ValueError(f"window must be an odd integer >= 3, got {window}")
    if window > n:
        raise ValueError(f"window {window} exceeds sequence length {n}")
    if not 0 <= polyorder < window:
        raise ValueError("polyorder must satisfy 0 <= polyorder < window")

    half = window // 2
    out = np.empty_like(seq)

    center = _sg_weights(np.arange(-half, half + 1), polyorder)
    windows = np.lib.stride_tricks.sliding_window_view(seq, window, axis=0)
    out[half:n - half] = windows @ center

    for t in range(half):
        w = _sg_weights(np.arange(-t, half + 1), polyorder)
        out[t] = w @ seq[: t + half + 1]
        w = _sg_weights(np.arange(-half, t + 1), polyorder)
        out[n - 1 - t] = w @ seq[n - 1 - t - half:]

    return out[:, 0] if squeeze else out


def _shape_power_law(white: np.ndarray, beta: float, axis: int = 0) -> np.ndarray:
    """Scale the positive-frequency spectrum of white noise by f**(-beta/2).

    The DC bin reuses the first nonzero bin's gain, which sidesteps the
    power-law singularity at f = 0.
    """
    n = white.shape[axis]
    spec = np.fft.rfft(white, axis=axis)
    gains = np.ones(spec.shape[axis])
    gains[1:] = np.arange(1, spec.shape[axis], dtype=float) ** (-0.5 * beta)
    shape = [1] * white.ndim
    shape[axis] = -1
    return np.fft.irfft(spec * gains.reshape(shape), n=n, axis=axis)


def generate_colored_noise(rng, beta: float, length: int, dims: int = 1) -> np.ndarray:
    """Draw a ``length x dims`` sample whose one-sided PSD falls off as f**(-beta).

    Synthesis is spectral: white Gaussian noise is shaped in the frequency
    domain and transformed back, then each column is renormalized to unit
    sample variance (the mean is left in place). ``beta = 0`` reduces to
    plain white noise up to that renormalization.
    """
    if beta < 0:
        raise ValueError(f"beta must be nonnegative, got {beta}")
    gen = np.random.default_rng(rng) if not isinstance(rng, np.random.Generator) else rng
    white = gen.standard_normal((length, dims))
    shaped = _shape_power_law(white, beta, axis=0)
    std = shaped.std(axis=0)
    return shaped / np.where(std > 0.0, std, 1.0)


@dataclass(frozen=True)
class Spectrum:
    """One-sided power spectral density over frequency bins in Hz."""

    freqs: np.ndarray
    power: np.ndarray

    def __post_init__(self):
        freqs = np.asarray(self.freqs, dtype=float)
        power = np.asarray(self.power, dtype=float)
        if freqs.shape != power.shape or freqs.ndim != 1:
            raise ValueError("freqs and power must be 1-D arrays of equal length")
        if np.any(np.diff(freqs) <= 0):
            raise ValueError("freqs must be strictly increasing")
        if np.any(power < 0):
            raise ValueError("power must be nonnegative")
        object.__setattr__(self, "freqs", freqs)
        object.__setattr__(self, "power", power)

    def bin_width(self) -> float:
        return float(self.freqs[1] - self.freqs[0]) if len(self.freqs) > 1 else 1.0

    def total_power(self) -> float:
        return float(np.sum(self.power) * self.bin_width())

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["freq_hz", "power"])
            for f, p in zip(self.freqs, self.power):
                writer.writerow([repr(float(f)), repr(float(p))])

    @classmethod
    def from_csv(cls, path) -> "Spectrum":
        rows = np.loadtxt(Path(path), delimiter=",", skiprows=1, ndmin=2)
        return cls(freqs=rows[:, 0], power=rows[:, 1])


def periodogram_psd(batch: np.ndarray, sample_rate: float, window: str = "rectangular") -> Spectrum:
    """Average one-sided periodogram over a batch of realizations.

    Parameters
    ----------
    batch : np.ndarray, shape (R, T) or (T,)
        R realizations of length T.
    sample_rate : float
        Sampling rate in Hz.
    window : {"rectangular", "hann"}
        Taper applied before the transform; Hann estimates are corrected
        for the window's power loss.

    The scaling is Parseval-consistent: ``sum(power) * bin_width``
    approximates the mean squared value of the signal.
    """
    x = np.atleast_2d(np.asarray(batch, dtype=float))
    n_real, n = x.shape
    if n_real < 1 or n < 2:
        raise ValueError("batch must hold at least one realization of length >= 2")
    if window == "rectangular":
        correction = 1.0
    elif window == "hann":
        taper = np.hanning(n)
        x = x * taper
        correction = 1.0 / np.mean(taper**2)
    else:
        raise ValueError(f"unknown window {window!r}")

    spec = np.fft.rfft(x, axis=1)
    psd = (np.abs(spec) ** 2) * (2.0 * correction / (sample_rate * n))
    psd[:, 0] *= 0.5
    if n % 2 == 0:
        psd[:, -1] *= 0.5
    return Spectrum(freqs=np.fft.rfftfreq(n, d=1.0 / sample_rate), power=psd.mean(axis=0))
