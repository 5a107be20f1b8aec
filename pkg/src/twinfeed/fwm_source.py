"""Twin-beam source models and named experimental scenario presets.

The four-wave-mixing source is modeled as an ideal phase-insensitive
amplifier of intensity gain G: at low analysis frequency the single-beam
noise is 2G - 1 and the intensity-difference noise is 1/(2G - 1), both
relaxing to shot noise beyond the squeezing bandwidth through a
Lorentzian weight.  Scenario presets bundle the source, loss, delay and
detection parameters of two laboratory configurations (plus displacement
variants of each); atomic-physics settings such as detunings, pump power
and cell temperature ride along as descriptive metadata only.
"""

from __future__ import annotations

from dataclasses import dataclass, field, asdict

import numpy as np
from scipy.constants import c as _SPEED_OF_LIGHT

from .noise_model import NormalizedSpectrum, TwinBeamNoise, from_db

__all__ = [
    "FwmParams",
    "ScenarioPreset",
    "PRESET_NAMES",
    "ideal_pia_spectra",
    "from_measured",
    "preset",
    "scenario_twin_noise",
]


@dataclass(frozen=True)
class FwmParams:
    """Phase-insensitive-amplifier description of the four-wave-mixing source.

    Parameters
    ----------
    gain : float
        Intensity gain G >= 1 of the amplifier.
    squeezing_bandwidth : float
        Lorentzian half-width (Hz) over which the squeezing relaxes to
        shot noise.  The default is well above the few-MHz analysis band,
        so in-band spectra are nearly flat.
    excess_noise : float
        Technical noise added to each beam (linear, relative to shot);
        uncorrelated between the beams, so it raises both the single-beam
        and the difference spectra while leaving their correlation alone.
    source_transmission : float
        Per-beam transmission between the amplifier and the feedforward
        stage, applied through the loss rule.
    """

    gain: float
    squeezing_bandwidth: float = 10e6
    excess_noise: float = 0.0
    source_transmission: float = 1.0

    def __post_init__(self):
        if not np.isfinite(self.gain) or self.gain < 1.0:
            raise ValueError("gain must be >= 1")
        if not self.squeezing_bandwidth > 0.0:
            raise ValueError("squeezing_bandwidth must be > 0")
        if self.excess_noise < 0.0:
            raise ValueError("excess_noise must be >= 0")
        if not 0.0 < self.source_transmission <= 1.0:
            raise ValueError("source_transmission must lie in (0,1]")


@dataclass(frozen=True)
class ScenarioPreset:
    """Named bundle of source, loss, delay and detection parameters.

    ``single_beam_db`` of ``None`` means "derive from the symmetric
    amplifier model", i.e. the single-beam noise is the reciprocal of the
    difference noise (equal magnitude in dB, opposite sign).  ``metadata``
    is purely descriptive and carries no computational meaning.
    """

    name: str
    twin_noise_db: float
    eta_E: float
    eta_D: float
    electronic_delay: float
    optical_delay_length: float
    detector_bandwidth: float
    analysis_frequency: float
    single_beam_db: float | None = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.name:
            raise ValueError("name must be a non-empty identifier")
        if not np.isfinite(self.twin_noise_db):
            raise ValueError("twin_noise_db must be finite")
        for nm in ("eta_E", "eta_D"):
            if not 0.0 < getattr(self, nm) <= 1.0:
                raise ValueError(f"{nm} must lie in (0,1]")
        for nm in ("electronic_delay", "optical_delay_length"):
            if getattr(self, nm) < 0.0:
                raise ValueError(f"{nm} must be >= 0")
        for nm in ("detector_bandwidth", "analysis_frequency"):
            if not getattr(self, nm) > 0.0:
                raise ValueError(f"{nm} must be > 0")
        if self.single_beam_db is not None and self.single_beam_db <= self.twin_noise_db:
            raise ValueError("single_beam_db must exceed twin_noise_db")

    @property
    def resolved_single_beam_db(self) -> float:
        """Single-beam level, falling back to the symmetric-amplifier value."""
        if self.single_beam_db is not None:
            return self.single_beam_db
        return -self.twin_noise_db

    @property
    def optical_delay(self) -> float:
        """Free-space propagation time (s) of the optical delay line."""
        return self.optical_delay_length / _SPEED_OF_LIGHT

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioPreset":
        return cls(**data)


def ideal_pia_spectra(params: FwmParams, grid) -> TwinBeamNoise:
    """Twin-beam noise of the phase-insensitive amplifier on a frequency grid.

    Before excess noise and source loss,

        S(f)       = 1 + (2G - 2) * L(f)
        S_minus(f) = 1 - (1 - 1/(2G - 1)) * L(f)

    with the Lorentzian weight L(f) = gamma^2 / (gamma^2 + f^2).  At low
    frequency this gives S = 2G - 1 and S_minus = 1/(2G - 1) (so
    S * S_minus = 1 exactly); far out of band both relax to shot noise.
    Excess noise then adds to both spectra and the source transmission is
    applied through the loss rule, after which the cross-correlation
    follows from consistency.
    """
    freqs = np.asarray(grid, dtype=float)
    gamma = params.squeezing_bandwidth
    lorentz = gamma**2 / (gamma**2 + freqs**2)
    two_g_minus_1 = 2.0 * params.gain - 1.0
    s = 1.0 + (two_g_minus_1 - 1.0) * lorentz + params.excess_noise
    s_minus = 1.0 - (1.0 - 1.0 / two_g_minus_1) * lorentz + params.excess_noise
    eta = params.source_transmission
    s = eta * s + (1.0 - eta)
    s_minus = eta * s_minus + (1.0 - eta)
    return TwinBeamNoise.from_spectra(
        NormalizedSpectrum(freqs, s), NormalizedSpectrum(freqs, s_minus)
    )


def from_measured(s_minus_db: float, single_beam_db: float, grid) -> TwinBeamNoise:
    """Frequency-flat twin-beam noise at measured dB levels.

    Bypasses the amplifier model for cases where the single-beam noise is
    known independently of the difference squeezing.
    """
    if not s_minus_db < single_beam_db:
        raise ValueError("s_minus_db must be below single_beam_db")
    freqs = np.asarray(grid, dtype=float)
    return TwinBeamNoise.from_spectra(
        NormalizedSpectrum.flat(freqs, from_db(single_beam_db)),
        NormalizedSpectrum.flat(freqs, from_db(s_minus_db)),
    )


def _base_presets() -> dict:
    off = ScenarioPreset(
        name="off_resonance",
        twin_noise_db=-7.4,
        eta_E=0.88,
        eta_D=0.95,
        electronic_delay=65e-9,
        optical_delay_length=19.6,
        detector_bandwidth=4e6,
        analysis_frequency=360e3,
        metadata={
            "one_photon_detuning_hz": 800e6,
            "two_photon_detuning_hz": 2e6,
            "pump_probe_angle_deg": 0.5,
            "pump_power_w": 0.300,
            "cell_temperature_c": 107.0,
            "pump_diameter_m": 0.9e-3,
            "probe_diameter_m": 1.3e-3,
        },
    )
    on = ScenarioPreset(
        name="on_resonance",
        twin_noise_db=-5.8,
        eta_E=0.88,
        eta_D=0.95,
        electronic_delay=72e-9,
        optical_delay_length=21.7,
        detector_bandwidth=4e6,
        analysis_frequency=360e3,
        metadata={
            "one_photon_detuning_hz": -687e6,
            "two_photon_detuning_hz": 8e6,
            "pump_probe_angle_deg": 0.4,
            "pump_power_w": 0.750,
            "cell_temperature_c": 90.0,
            "pump_diameter_m": 1.3e-3,
            "probe_diameter_m": 0.9e-3,
        },
    )
    presets = {"off_resonance": off, "on_resonance": on}
    # Displacement variants: the lossy actuator is replaced by a 99/1
    # combination with a strong coherent beam, so only eta_E changes.
    for base_name, base in list(presets.items()):
        data = base.to_dict()
        data["name"] = f"{base_name}_displacement"
        data["eta_E"] = 0.99
        data["metadata"] = dict(base.metadata, actuation="displacement_99_1")
        presets[data["name"]] = ScenarioPreset.from_dict(data)
    return presets


_PRESETS = _base_presets()
PRESET_NAMES = tuple(_PRESETS)


def preset(name: str) -> ScenarioPreset:
    """Look up a named scenario preset."""
    try:
        return _PRESETS[name]
    except KeyError:
        known = ", ".join(PRESET_NAMES)
        raise KeyError(f"unknown scenario {name!r}; known scenarios: {known}") from None


def scenario_twin_noise(scenario: ScenarioPreset, grid) -> TwinBeamNoise:
    """Flat twin-beam noise at the preset's squeezing and single-beam levels."""
    return from_measured(scenario.twin_noise_db, scenario.resolved_single_beam_db, grid)
