"""twinfeed: twin-beam squeezing to single-mode squeezing by feedforward.

A numpy/scipy toolkit that models the conversion of two-mode
intensity-difference squeezing into single-mode amplitude squeezing by
measuring one beam and feeding its fluctuations forward onto the other.
It provides the analytic frequency-domain noise model, a twin-beam
source model with named experimental scenario presets, a time-domain
Monte Carlo engine for the full detection/feedforward chain, a
spectrum-analyzer-style estimator, and a command-line interface.
"""

from .noise_model import (
    ChannelEfficiencies,
    GainProfile,
    NormalizedSpectrum,
    TwinBeamNoise,
    apply_loss,
    from_db,
    ideal_limit,
    noise_with_gain,
    optimal_gain,
    predict_optimal_noise,
    to_db,
)
from .fwm_source import (
    FwmParams,
    PRESET_NAMES,
    ScenarioPreset,
    from_measured,
    ideal_pia_spectra,
    preset,
    scenario_twin_noise,
)
from .feedforward_sim import (
    PhotocurrentTrace,
    RunResult,
    SimConfig,
    actuate_eom,
    analytic_prediction,
    dc_block,
    delay,
    detect,
    run,
    synthesize_twin_traces,
)
from .spectral import (
    SpectrumEstimate,
    fit_delay_oscillation,
    normalize_to_shot,
    squeezing_at,
    squeezing_band,
    subtract_electronic,
    welch_psd,
)

__version__ = "0.1.0"
