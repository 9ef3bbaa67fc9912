"""mppikit: sampling-based MPC with spectrum-shaped perturbation sampling."""

from mppikit.dsp import (
    BiquadCascade,
    Spectrum,
    apply_filter,
    design_butterworth_lowpass,
    generate_colored_noise,
    magnitude_response,
    periodogram_psd,
    savitzky_golay_smooth,
)
from mppikit.sampling import (
    PerturbationBatch,
    SamplerSpec,
    lowpass_burn_in,
    sample_colored,
    sample_lowpass,
    sample_perturbations,
    sample_white,
)
from mppikit.control import (
    VARIANTS,
    ControllerConfig,
    ControllerState,
    OCPSpec,
    RolloutResult,
    StepDiagnostics,
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
from mppikit.metrics import EpisodeResult, EpisodeSummary, episode_summary, lower_median, msgfd, mssd

__version__ = "0.1.0"
