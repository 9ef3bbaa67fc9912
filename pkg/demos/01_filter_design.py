"""Walk through the causal low-pass filter used to shape control noise.

Designs Butterworth cascades at several cutoffs and orders, verifies the
two anchor points of the magnitude response (unit DC gain, -3 dB at the
cutoff), measures the stopband roll-off, and plots the responses.

Run from the repository root:

    python3 demos/01_filter_design.py

Writes demos/out/filter_design/magnitude.svg and prints a small table.
"""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from mppikit.dsp import apply_filter, design_butterworth_lowpass, magnitude_response

OUT = Path(__file__).resolve().parent / "out" / "filter_design"


def rolloff_db_per_decade(cascade, fc_norm):
    """Measured slope between 4x and 8x the cutoff.

    The bilinear transform warps the frequency axis through tan(pi f / 2),
    so the textbook -20 dB/decade-per-order asymptote is recovered on the
    prewarped axis, not the raw digital one.
    """
    f1, f2 = 4.0 * fc_norm, 8.0 * fc_norm
    gain_db = 20.0 * np.log10(magnitude_response(cascade, f2)
                              / magnitude_response(cascade, f1))
    decades = np.log10(np.tan(np.pi * f2 / 2.0) / np.tan(np.pi * f1 / 2.0))
    return gain_db / decades


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    fig, (ax_mag, ax_time) = plt.subplots(1, 2, figsize=(10, 4))

    print(f"{'order':>5} {'fc_norm':>8} {'|H(0)|':>8} {'|H(fc)|':>8} "
          f"{'slope dB/dec':>13}")
    freqs = np.linspace(1e-4, 0.999, 2048)
    for order in (1, 2, 4):
        fc_norm = 0.1  # one tenth of Nyquist
        cascade = design_butterworth_lowpass(fc_norm, order)
        slope = rolloff_db_per_decade(cascade, fc_norm)
        print(f"{order:>5} {fc_norm:>8.2f} "
              f"{magnitude_response(cascade, 0.0):>8.4f} "
              f"{magnitude_response(cascade, fc_norm):>8.4f} {slope:>13.1f}")
        ax_mag.semilogy(freqs, magnitude_response(cascade, freqs),
                        label=f"order {order}")

    ax_mag.axvline(0.1, color="gray", lw=0.8, ls="--")
    ax_mag.axhline(2.0 ** -0.5, color="gray", lw=0.8, ls="--")
    ax_mag.set_xlabel("frequency / Nyquist")
    ax_mag.set_ylabel("|H(f)|")
    ax_mag.set_title("Butterworth magnitude, fc = 0.1")
    ax_mag.legend()

    # Time-domain view: the same white sequence before and after filtering.
    rng = np.random.default_rng(0)
    noise = rng.standard_normal(200)
    cascade = design_butterworth_lowpass(0.1, 2)
    ax_time.plot(noise, lw=0.7, alpha=0.6, label="white input")
    ax_time.plot(apply_filter(cascade, noise), lw=1.4, label="filtered")
    ax_time.set_xlabel("sample")
    ax_time.set_title("Causal filtering of one draw")
    ax_time.legend()

    fig.tight_layout()
    fig.savefig(OUT / "magnitude.svg")
    print(f"wrote {OUT / 'magnitude.svg'}")


if __name__ == "__main__":
    main()
