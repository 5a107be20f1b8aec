"""Frequency-domain noise model for measure-and-feedforward squeezing transfer.

All spectra are one-sided noise powers normalized to shot noise, so a value
of 1.0 is the quantum noise limit and values below 1.0 are squeezed.  The
central objects are the twin-beam noise triple (single-beam spectrum S,
intensity-difference spectrum S_minus, amplitude cross-correlation
C = S - S_minus) and the channel efficiencies eta_E (probe-path
transmission through delay line and actuator) and eta_D (conjugate
detector efficiency).

With a real electronic feedforward gain g and a residual timing error tau
between the two paths, the probe noise after feedforward is the quadratic

    S_f(O, g) = eta_E*S + (1 - eta_E)
                + g^2 * (eta_D*S + 1 - eta_D)
                + 2*g*sqrt(eta_E*eta_D) * C(O) * cos(2*pi*O*tau)

whose minimum over g (at tau = 0) is the optimal-gain prediction

    S_f(O) = eta_E*S + (1 - eta_E)
             - eta_E*eta_D * (S - S_minus)^2 / (eta_D*S + 1 - eta_D).

In the lossless, high-gain limit this tends to 2*S_minus: transferring
two-mode squeezing to a single mode costs a factor of two (3 dB).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import GridMismatchError

__all__ = [
    "NormalizedSpectrum",
    "TwinBeamNoise",
    "ChannelEfficiencies",
    "GainProfile",
    "optimal_gain",
    "predict_optimal_noise",
    "ideal_limit",
    "noise_with_gain",
    "apply_loss",
    "to_db",
    "from_db",
]


def _as_readonly(values, dtype=float) -> np.ndarray:
    arr = np.asarray(values, dtype=dtype).copy()
    arr.flags.writeable = False
    return arr


def _check_grid(frequencies: np.ndarray) -> None:
    if frequencies.ndim != 1 or frequencies.size == 0:
        raise ValueError("frequency grid must be a non-empty 1-D sequence")
    if not np.all(np.isfinite(frequencies)):
        raise ValueError("frequency grid contains non-finite values")
    if frequencies[0] <= 0.0 or np.any(np.diff(frequencies) <= 0.0):
        raise ValueError("frequencies must be strictly increasing and > 0")


def _require_same_grid(a: np.ndarray, b: np.ndarray, what: str) -> None:
    if a.shape != b.shape or not np.array_equal(a, b):
        raise GridMismatchError(f"{what} are defined on different frequency grids")


@dataclass(frozen=True)
class NormalizedSpectrum:
    """Noise power vs frequency, relative to shot noise (shot == 1.0 linear).

    Parameters
    ----------
    frequencies : array_like
        Analysis frequencies in Hz, strictly increasing, all > 0.
    values : array_like
        Linear noise power relative to shot noise; finite and > 0.
    """

    frequencies: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "frequencies", _as_readonly(self.frequencies))
        object.__setattr__(self, "values", _as_readonly(self.values))
        _check_grid(self.frequencies)
        if self.values.shape != self.frequencies.shape:
            raise ValueError("values and frequencies must have the same shape")
        if not np.all(np.isfinite(self.values)) or np.any(self.values <= 0.0):
            raise ValueError("spectrum values must be finite and > 0")

    @classmethod
    def flat(cls, frequencies, level: float) -> "NormalizedSpectrum":
        """Frequency-independent spectrum at the given linear level."""
        freqs = np.asarray(frequencies, dtype=float)
        return cls(freqs, np.full(freqs.shape, float(level)))

    def values_db(self) -> np.ndarray:
        """Values converted to power dB relative to shot noise."""
        return to_db(self.values)

    def at(self, frequency: float) -> float:
        """Linearly interpolated value at a single frequency (edge-held)."""
        return float(np.interp(frequency, self.frequencies, self.values))


@dataclass(frozen=True)
class TwinBeamNoise:
    """Noise description of a pair of quantum-correlated beams.

    The probe and conjugate are assumed to have equal normalized
    single-beam spectra ``single_beam``; ``intensity_difference`` is the
    normalized spectrum of their balanced difference.  The amplitude
    cross-correlation is fixed by consistency, C = S - S_minus, so that
    the balanced difference of two unit-shot beams indeed has spectrum
    S - C.  ``cross_correlation`` may take either sign but must satisfy
    that identity on the shared grid.
    """

    single_beam: NormalizedSpectrum
    intensity_difference: NormalizedSpectrum
    cross_correlation: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "cross_correlation", _as_readonly(self.cross_correlation))
        _require_same_grid(
            self.single_beam.frequencies,
            self.intensity_difference.frequencies,
            "single-beam and intensity-difference spectra",
        )
        if self.cross_correlation.shape != self.single_beam.frequencies.shape:
            raise GridMismatchError("cross-correlation does not match the spectrum grid")
        if not np.all(np.isfinite(self.cross_correlation)):
            raise ValueError("cross-correlation must be finite")
        expected = self.single_beam.values - self.intensity_difference.values
        if not np.allclose(self.cross_correlation, expected, rtol=1e-9, atol=1e-12):
            raise ValueError("cross-correlation must equal single_beam - intensity_difference")

    @classmethod
    def from_spectra(
        cls, single_beam: NormalizedSpectrum, intensity_difference: NormalizedSpectrum
    ) -> "TwinBeamNoise":
        """Build the triple with the cross-correlation derived from consistency."""
        return cls(
            single_beam,
            intensity_difference,
            single_beam.values - intensity_difference.values,
        )

    @property
    def frequencies(self) -> np.ndarray:
        return self.single_beam.frequencies


@dataclass(frozen=True)
class ChannelEfficiencies:
    """Probe-path transmission eta_E and conjugate detector efficiency eta_D."""

    eta_E: float
    eta_D: float

    def __post_init__(self):
        for name in ("eta_E", "eta_D"):
            value = getattr(self, name)
            if not np.isfinite(value) or not 0.0 < value <= 1.0:
                raise ValueError(f"{name} must lie in (0,1]")


@dataclass(frozen=True)
class GainProfile:
    """Real electronic feedforward gain per analysis frequency.

    The sign carries the feedback polarity: correlated twin beams
    (S_minus < S) need a negative gain.
    """

    frequencies: np.ndarray
    gains: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "frequencies", _as_readonly(self.frequencies))
        object.__setattr__(self, "gains", _as_readonly(self.gains))
        _check_grid(self.frequencies)
        if self.gains.shape != self.frequencies.shape:
            raise ValueError("gains and frequencies must have the same shape")
        if not np.all(np.isfinite(self.gains)):
            raise ValueError("gains must be finite")

    @classmethod
    def flat(cls, frequencies, gain: float) -> "GainProfile":
        freqs = np.asarray(frequencies, dtype=float)
        return cls(freqs, np.full(freqs.shape, float(gain)))


def _detected_conjugate_psd(twin: TwinBeamNoise, eff: ChannelEfficiencies) -> np.ndarray:
    """Normalized PSD of the conjugate photocurrent, eta_D*S + (1 - eta_D)."""
    return eff.eta_D * twin.single_beam.values + (1.0 - eff.eta_D)


def optimal_gain(
    twin: TwinBeamNoise,
    eff: ChannelEfficiencies,
    convention: str = "field",
) -> GainProfile:
    """Per-frequency feedforward gain that minimizes the probe output noise.

    Two conventions are in circulation, differing by whether the gain is
    referenced to the optical field or to the detected photocurrent:

    ``"field"``
        sqrt(eta_E) * (S_minus - S) / (eta_D*S + 1 - eta_D)
    ``"photocurrent"``
        -sqrt(eta_E*eta_D) * C / (eta_D*S + 1 - eta_D)

    They differ by a factor sqrt(eta_D) and give the same minimum noise.
    The ``"photocurrent"`` value is the exact minimizer of
    :func:`noise_with_gain`; both are exposed because the referencing
    ambiguity cannot be resolved from the output spectrum alone.
    """
    s = twin.single_beam.values
    s_minus = twin.intensity_difference.values
    denom = _detected_conjugate_psd(twin, eff)
    if convention == "field":
        gains = np.sqrt(eff.eta_E) * (s_minus - s) / denom
    elif convention == "photocurrent":
        gains = -np.sqrt(eff.eta_E * eff.eta_D) * twin.cross_correlation / denom
    else:
        raise ValueError(f"unknown gain convention {convention!r}")
    return GainProfile(twin.frequencies, gains)


def predict_optimal_noise(twin: TwinBeamNoise, eff: ChannelEfficiencies) -> NormalizedSpectrum:
    """Probe noise after feedforward at the per-frequency optimal gain.

    Returns eta_E*S + (1 - eta_E) - eta_E*eta_D*(S - S_minus)^2 /
    (eta_D*S + 1 - eta_D) pointwise on the twin grid.
    """
    s = twin.single_beam.values
    s_minus = twin.intensity_difference.values
    denom = _detected_conjugate_psd(twin, eff)
    values = (
        eff.eta_E * s
        + (1.0 - eff.eta_E)
        - eff.eta_E * eff.eta_D * (s - s_minus) ** 2 / denom
    )
    return NormalizedSpectrum(twin.frequencies, values)


def ideal_limit(s_minus: NormalizedSpectrum) -> NormalizedSpectrum:
    """Lossless high-gain floor, 2*S_minus: the two-to-one-mode transfer penalty."""
    return NormalizedSpectrum(s_minus.frequencies, 2.0 * s_minus.values)


def noise_with_gain(
    twin: TwinBeamNoise,
    eff: ChannelEfficiencies,
    gain: GainProfile,
    residual_delay: float = 0.0,
) -> NormalizedSpectrum:
    """Probe noise after feedforward at an arbitrary real gain profile.

    ``residual_delay`` is the timing mismatch (seconds) between the
    control signal and the probe; it dephases the correlation term by
    cos(2*pi*f*tau), making the output oscillate between difference-like
    and sum-like noise levels with period 1/tau.  At tau = 0 the minimum
    over the gain reproduces :func:`predict_optimal_noise`; at zero gain
    the output is the pure probe-path loss channel.
    """
    _require_same_grid(twin.frequencies, gain.frequencies, "twin noise and gain profile")
    if not np.isfinite(residual_delay) or residual_delay < 0.0:
        raise ValueError("residual_delay must be finite and >= 0")
    g = gain.gains
    dephase = np.cos(2.0 * np.pi * twin.frequencies * residual_delay)
    values = (
        eff.eta_E * twin.single_beam.values
        + (1.0 - eff.eta_E)
        + g**2 * _detected_conjugate_psd(twin, eff)
        + 2.0 * g * np.sqrt(eff.eta_E * eff.eta_D) * twin.cross_correlation * dephase
    )
    return NormalizedSpectrum(twin.frequencies, values)


def apply_loss(spectrum: NormalizedSpectrum, transmission: float) -> NormalizedSpectrum:
    """Beam-splitter loss on a normalized spectrum: eta*S + (1 - eta).

    Shot noise (S == 1) is a fixed point: loss on a coherent state is
    invisible in shot-normalized units.
    """
    if not np.isfinite(transmission) or not 0.0 < transmission <= 1.0:
        raise ValueError("transmission must lie in (0,1]")
    return NormalizedSpectrum(
        spectrum.frequencies,
        transmission * spectrum.values + (1.0 - transmission),
    )


def to_db(linear):
    """Linear power ratio to power dB (10*log10)."""
    arr = np.asarray(linear, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0.0):
        raise ValueError("dB conversion requires finite values > 0")
    out = 10.0 * np.log10(arr)
    return float(out) if np.isscalar(linear) or arr.ndim == 0 else out


def from_db(db):
    """Power dB to linear power ratio."""
    arr = np.asarray(db, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError("dB values must be finite")
    out = 10.0 ** (arr / 10.0)
    return float(out) if np.isscalar(db) or arr.ndim == 0 else out
