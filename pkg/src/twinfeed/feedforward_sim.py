"""Time-domain Monte Carlo engine for the measure-and-feedforward chain.

Synthesizes correlated probe/conjugate photocurrent traces with a
prescribed cross-spectral density, then pushes them through the full
chain: conjugate detection (efficiency, bandwidth, electronic noise), DC
block, electronic delay, variable gain, and additive actuation on the
probe with its own loss and optional compensating optical delay.

Conventions
-----------
Traces are real photocurrent fluctuations normalized so shot noise has
unit one-sided PSD; a shot-limited trace therefore has per-sample
variance sample_rate/2.  The detector low-pass and the DC block are
applied as zero-phase magnitude responses: the physical single-pole
response magnitudes are kept, but their group delay is folded into the
single configured electronic delay, which is how the timing budget is
quoted for the hardware being modeled.  Delays themselves are
windowed-sinc fractional-delay filters with exactly linear phase.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import fft as sp_fft
from scipy import signal as sp_signal
from scipy.constants import c as _SPEED_OF_LIGHT

from .errors import CsdModelError, TraceAlignmentError
from .fwm_source import ScenarioPreset, scenario_twin_noise
from .noise_model import (
    ChannelEfficiencies,
    GainProfile,
    NormalizedSpectrum,
    TwinBeamNoise,
    noise_with_gain,
)
from . import spectral

__all__ = [
    "PhotocurrentTrace",
    "SimConfig",
    "RunSettings",
    "RunResult",
    "STAGES",
    "DISPLACEMENT_TRANSMISSION",
    "synthesize_twin_traces",
    "detect",
    "dc_block",
    "delay",
    "actuate_eom",
    "optimal_electronic_gain",
    "run",
    "analytic_prediction",
    "stage_prediction",
]

# Probe transmission of the 99/1 displacement actuation variant.
DISPLACEMENT_TRANSMISSION = 0.99

# Half-width (samples) of the windowed-sinc fractional-delay kernel.
_DELAY_KERNEL_HALF = 64
_DELAY_KAISER_BETA = 10.0

_MAX_SAMPLES = int(2.5e8)  # memory guard for a single synthesized trace


@dataclass(frozen=True)
class PhotocurrentTrace:
    """Uniformly sampled photocurrent fluctuation in shot-normalized units."""

    sample_rate: float
    samples: np.ndarray
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "samples", np.asarray(self.samples, dtype=float))
        if not self.sample_rate > 0.0:
            raise ValueError("sample_rate must be > 0")
        if self.samples.ndim != 1 or self.samples.size < 2:
            raise ValueError("samples must be a 1-D sequence of length >= 2")

    @property
    def duration(self) -> float:
        return self.samples.size / self.sample_rate

    def relabeled(self, label: str) -> "PhotocurrentTrace":
        return PhotocurrentTrace(self.sample_rate, self.samples, label)


@dataclass(frozen=True)
class SimConfig:
    """Simulation settings; ``None`` fields resolve from the scenario preset.

    ``electronic_noise_psd`` is the detector's electronics noise floor in
    shot units (0 models noise already subtracted).  The optical delay,
    when resolved from a preset, is the free-space propagation time of
    its delay-line length.
    """

    sample_rate: float = 50e6
    duration: float = 0.05
    rng_seed: int = 0
    detector_bandwidth: float | None = None
    electronic_noise_psd: float = 0.0
    dc_block_cutoff: float = 10e3
    electronic_delay: float | None = None
    optical_delay: float | None = None

    def __post_init__(self):
        if not self.sample_rate > 0.0:
            raise ValueError("sample_rate must be > 0")
        if not self.duration > 0.0:
            raise ValueError("duration must be > 0")
        if self.duration * self.sample_rate > _MAX_SAMPLES:
            raise ValueError(
                f"duration*sample_rate = {self.duration * self.sample_rate:.3g} "
                f"samples exceeds the memory budget of {_MAX_SAMPLES:.3g}"
            )
        if self.electronic_noise_psd < 0.0:
            raise ValueError("electronic_noise_psd must be >= 0")
        if self.dc_block_cutoff < 0.0:
            raise ValueError("dc_block_cutoff must be >= 0")
        bw = self.detector_bandwidth
        if bw is not None and np.isfinite(bw):
            if not bw > 0.0:
                raise ValueError("detector_bandwidth must be > 0")
            if self.sample_rate <= 2.0 * bw:
                raise ValueError("sample_rate must exceed twice the detector bandwidth")
            if self.dc_block_cutoff >= bw:
                raise ValueError("dc_block_cutoff must be below the detector bandwidth")
        for nm in ("electronic_delay", "optical_delay"):
            value = getattr(self, nm)
            if value is not None and value < 0.0:
                raise ValueError(f"{nm} must be >= 0")

    def resolved(self, scenario: ScenarioPreset) -> "SimConfig":
        """Fill unset fields from the scenario preset."""
        return replace(
            self,
            detector_bandwidth=(
                self.detector_bandwidth
                if self.detector_bandwidth is not None
                else scenario.detector_bandwidth
            ),
            electronic_delay=(
                self.electronic_delay
                if self.electronic_delay is not None
                else scenario.electronic_delay
            ),
            optical_delay=(
                self.optical_delay
                if self.optical_delay is not None
                else scenario.optical_delay
            ),
        )


STAGES = (
    "probe_source",
    "conjugate_source",
    "conjugate_detected",
    "control_blocked",
    "control_delayed",
    "probe_delayed",
    "probe_out",
)


@dataclass(frozen=True)
class RunSettings:
    """Fully resolved inputs of a run, echoed in the result."""

    scenario: ScenarioPreset
    sim: SimConfig
    compensate_delay: bool
    variant: str
    electronic_gain: float
    probe_transmission: float
    rbw: float
    n_averages: int


@dataclass(frozen=True)
class RunResult:
    """Per-stage traces and shot-normalized spectrum estimates of one run."""

    traces: dict
    spectra: dict
    config_echo: RunSettings
    rng_seed_used: int

    def __post_init__(self):
        missing = set(self.spectra) - set(self.traces)
        if missing:
            raise ValueError(f"spectra without matching traces: {sorted(missing)}")


def _unit_shot_white(rng: np.random.Generator, n: int, sample_rate: float) -> np.ndarray:
    """White Gaussian trace with unit one-sided PSD in shot units."""
    return rng.standard_normal(n) * math.sqrt(sample_rate / 2.0)


def _lowpass_magnitude(freqs: np.ndarray, bandwidth: float | None) -> np.ndarray:
    """Single-pole low-pass magnitude response; identity for unbounded bandwidth."""
    if bandwidth is None or not np.isfinite(bandwidth):
        return np.ones_like(freqs)
    return 1.0 / np.sqrt(1.0 + (freqs / bandwidth) ** 2)


def _highpass_magnitude(freqs: np.ndarray, cutoff: float) -> np.ndarray:
    """First-order high-pass magnitude response; identity for zero cutoff."""
    if cutoff == 0.0:
        return np.ones_like(freqs)
    ratio = freqs / cutoff
    return ratio / np.sqrt(1.0 + ratio**2)


def _apply_magnitude(samples: np.ndarray, sample_rate: float, magnitude_fn) -> np.ndarray:
    n = samples.size
    spectrum = sp_fft.rfft(samples)
    spectrum *= magnitude_fn(sp_fft.rfftfreq(n, d=1.0 / sample_rate))
    return sp_fft.irfft(spectrum, n)


def synthesize_twin_traces(
    twin: TwinBeamNoise,
    cfg: SimConfig,
    rng: np.random.Generator | None = None,
    n_samples: int | None = None,
) -> tuple[PhotocurrentTrace, PhotocurrentTrace]:
    """Draw a probe/conjugate pair with the prescribed cross-spectral density.

    The target per-bin CSD matrix [[S, C], [C, S]] (interpolated onto the
    FFT bin grid) is factored through its symmetric square root and
    applied to two independent white traces in the frequency domain, so
    the realized pair is stationary Gaussian with exactly the requested
    auto- and cross-spectra.  Deterministic for a fixed generator state.
    """
    fs = cfg.sample_rate
    n = int(round(cfg.duration * fs)) if n_samples is None else int(n_samples)
    if n < 16:
        raise ValueError("trace too short; increase duration")
    if rng is None:
        rng = np.random.default_rng(cfg.rng_seed)

    freqs = sp_fft.rfftfreq(n, d=1.0 / fs)
    s = np.interp(freqs, twin.frequencies, twin.single_beam.values)
    c = np.interp(freqs, twin.frequencies, twin.cross_correlation)
    lam_plus = s + c
    lam_minus = s - c
    bad = np.nonzero((lam_plus < 0.0) | (lam_minus < 0.0))[0]
    if bad.size:
        raise CsdModelError(
            f"cross-spectral density matrix not positive semidefinite at "
            f"{freqs[bad[0]]:g} Hz (|C| exceeds S)"
        )
    half_sum = 0.5 * (np.sqrt(lam_plus) + np.sqrt(lam_minus))
    half_diff = 0.5 * (np.sqrt(lam_plus) - np.sqrt(lam_minus))
    del s, c, lam_plus, lam_minus

    scale = math.sqrt(fs / 2.0)
    w_probe = sp_fft.rfft(rng.standard_normal(n))
    w_conj = sp_fft.rfft(rng.standard_normal(n))
    probe = sp_fft.irfft(scale * (half_sum * w_probe + half_diff * w_conj), n)
    conjugate = sp_fft.irfft(scale * (half_diff * w_probe + half_sum * w_conj), n)
    return (
        PhotocurrentTrace(fs, probe, "probe_source"),
        PhotocurrentTrace(fs, conjugate, "conjugate_source"),
    )


def detect(
    trace: PhotocurrentTrace,
    efficiency: float,
    detector_bandwidth: float | None,
    electronic_noise_psd: float,
    rng: np.random.Generator,
) -> PhotocurrentTrace:
    """Photodetection: efficiency loss, vacuum admixture, bandwidth, electronics.

    output = lowpass(sqrt(eta)*x + sqrt(1-eta)*v) + e with fresh unit-PSD
    vacuum v and white electronics noise e of the configured PSD.  Shot
    noise is a fixed point of the loss stage, so a coherent input still
    reads unit PSD in band.
    """
    if not 0.0 < efficiency <= 1.0:
        raise ValueError("efficiency must lie in (0,1]")
    if electronic_noise_psd < 0.0:
        raise ValueError("electronic_noise_psd must be >= 0")
    fs = trace.sample_rate
    out = math.sqrt(efficiency) * trace.samples
    if efficiency < 1.0:
        out = out + math.sqrt(1.0 - efficiency) * _unit_shot_white(rng, out.size, fs)
    if detector_bandwidth is not None and np.isfinite(detector_bandwidth):
        out = _apply_magnitude(out, fs, lambda f: _lowpass_magnitude(f, detector_bandwidth))
    if electronic_noise_psd > 0.0:
        out = out + math.sqrt(electronic_noise_psd) * _unit_shot_white(rng, out.size, fs)
    return PhotocurrentTrace(fs, out, f"{trace.label}_detected" if trace.label else "detected")


def dc_block(trace: PhotocurrentTrace, cutoff: float) -> PhotocurrentTrace:
    """First-order high-pass removing the DC component of a photocurrent.

    Well above the cutoff the PSD is essentially untouched (< 0.01 dB two
    decades up); a zero cutoff is the identity.
    """
    if cutoff < 0.0:
        raise ValueError("cutoff must be >= 0")
    if cutoff == 0.0:
        return trace
    out = _apply_magnitude(
        trace.samples, trace.sample_rate, lambda f: _highpass_magnitude(f, cutoff)
    )
    return PhotocurrentTrace(trace.sample_rate, out, f"{trace.label}_blocked")


def _delay_kernel(fraction: float) -> np.ndarray:
    """Windowed-sinc interpolation kernel for a sub-sample shift."""
    k = _DELAY_KERNEL_HALF
    offsets = np.arange(-k, k + 1, dtype=float) - fraction
    window = np.i0(
        _DELAY_KAISER_BETA * np.sqrt(np.maximum(0.0, 1.0 - (offsets / (k + 0.5)) ** 2))
    ) / np.i0(_DELAY_KAISER_BETA)
    kernel = np.sinc(offsets) * window
    return kernel / kernel.sum()


def delay(trace: PhotocurrentTrace, tau: float) -> PhotocurrentTrace:
    """Band-limited fractional delay by ``tau`` seconds.

    Splits the delay into an exact integer shift and a windowed-sinc
    sub-sample interpolation whose kernel is symmetric about the shift,
    so the phase is exactly linear (no group-delay error in band).  The
    first ``tau*sample_rate + kernel`` samples of the output are edge
    transients; callers are expected to trim a common margin.
    """
    if not np.isfinite(tau) or tau < 0.0:
        raise ValueError("tau must be finite and >= 0")
    if tau == 0.0:
        return trace
    fs = trace.sample_rate
    shift_samples = tau * fs
    if shift_samples >= trace.samples.size:
        raise ValueError(
            f"delay of {tau:g} s exceeds the trace duration {trace.duration:g} s"
        )
    n_whole = int(round(shift_samples))
    fraction = shift_samples - n_whole
    x = trace.samples
    if fraction != 0.0:
        x = sp_signal.oaconvolve(x, _delay_kernel(fraction), mode="same")
    out = np.zeros_like(x)
    if n_whole > 0:
        out[n_whole:] = x[:-n_whole]
        out[:n_whole] = x[0]
    else:
        out = x
    return PhotocurrentTrace(fs, out, f"{trace.label}_delayed")


def actuate_eom(
    probe_optical: PhotocurrentTrace,
    control: PhotocurrentTrace,
    gain: float,
    eta_e: float,
    rng: np.random.Generator,
) -> PhotocurrentTrace:
    """Small-signal additive actuation of the probe amplitude.

    output = sqrt(eta_e)*(x_p + g*i_c) + sqrt(1-eta_e)*v with fresh
    vacuum v.  The actuator transmission multiplies the control term as
    well, so the electronic gain knob g relates to the model-level gain
    by a factor sqrt(eta_e).
    """
    if probe_optical.sample_rate != control.sample_rate:
        raise TraceAlignmentError("probe and control have different sample rates")
    if probe_optical.samples.size != control.samples.size:
        raise TraceAlignmentError("probe and control have different lengths")
    if not 0.0 < eta_e <= 1.0:
        raise ValueError("eta_e must lie in (0,1]")
    if not np.isfinite(gain):
        raise ValueError("gain must be finite")
    fs = probe_optical.sample_rate
    out = math.sqrt(eta_e) * (probe_optical.samples + gain * control.samples)
    if eta_e < 1.0:
        out = out + math.sqrt(1.0 - eta_e) * _unit_shot_white(rng, out.size, fs)
    return PhotocurrentTrace(fs, out, "probe_out")


def optimal_electronic_gain(
    twin: TwinBeamNoise, eff: ChannelEfficiencies, frequency: float
) -> float:
    """Electronic gain minimizing the actuated probe noise at one frequency.

    Because the actuator transmission scales both the probe and the
    control term, eta_E drops out of this knob:
    g = -sqrt(eta_D)*C / (eta_D*S + 1 - eta_D).
    """
    s = twin.single_beam.at(frequency)
    c = float(np.interp(frequency, twin.frequencies, twin.cross_correlation))
    return -math.sqrt(eff.eta_D) * c / (eff.eta_D * s + 1.0 - eff.eta_D)


def _effective_probe_transmission(scenario: ScenarioPreset, variant: str) -> float:
    if variant == "eom":
        return scenario.eta_E
    if variant == "displacement":
        return DISPLACEMENT_TRANSMISSION
    raise ValueError(f"unknown actuation variant {variant!r}")


def _shot_transfer(stage: str, freqs: np.ndarray, cfg: SimConfig) -> np.ndarray:
    """Shot-noise transfer |T(f)|^2 of the chain up to the given stage.

    This is the normalized PSD a coherent input would show at that
    stage; dividing it out is the analytic equivalent of calibrating the
    analyzer against a shot-limited beam at the same point.
    """
    if stage == "conjugate_detected":
        return _lowpass_magnitude(freqs, cfg.detector_bandwidth) ** 2
    if stage in ("control_blocked", "control_delayed"):
        return (
            _lowpass_magnitude(freqs, cfg.detector_bandwidth)
            * _highpass_magnitude(freqs, cfg.dc_block_cutoff)
        ) ** 2
    return np.ones_like(freqs)


def run(
    scenario: ScenarioPreset,
    cfg: SimConfig,
    compensate_delay: bool = True,
    gain_override: float | None = None,
    variant: str = "eom",
    rbw: float = 30e3,
    n_averages: int | None = None,
) -> RunResult:
    """Execute the full feedforward chain for one scenario.

    Synthesize twin beams, detect the conjugate, block its DC, apply the
    electronic delay and gain, and actuate the probe (with the optical
    delay on the probe iff ``compensate_delay``).  Stage traces are
    trimmed to a common valid region, Welch-estimated at ``rbw`` with
    ``n_averages`` averages (all that fit when ``None``), and normalized
    to each stage's shot transfer.  The gain defaults to the optimum at
    the scenario's analysis frequency.  Identical (scenario, cfg) and
    seed give bit-identical traces.
    """
    sim = cfg.resolved(scenario)
    eta_e = _effective_probe_transmission(scenario, variant)
    eff = ChannelEfficiencies(eta_e, scenario.eta_D)
    fs = sim.sample_rate

    grid = np.geomspace(10.0, fs / 2.0, 257)
    twin = scenario_twin_noise(scenario, grid)

    seed = int(sim.rng_seed)
    rng_twin, rng_detect, rng_actuate = (
        np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(3)
    )

    n_keep = int(round(sim.duration * fs))
    max_delay = max(sim.electronic_delay, sim.optical_delay)
    margin = _DELAY_KERNEL_HALF + int(math.ceil(max_delay * fs)) + 16
    n_total = sp_fft.next_fast_len(n_keep + 2 * margin)

    probe, conjugate = synthesize_twin_traces(twin, sim, rng=rng_twin, n_samples=n_total)
    detected = detect(
        conjugate,
        scenario.eta_D,
        sim.detector_bandwidth,
        sim.electronic_noise_psd,
        rng_detect,
    ).relabeled("conjugate_detected")
    blocked = dc_block(detected, sim.dc_block_cutoff).relabeled("control_blocked")
    control = delay(blocked, sim.electronic_delay).relabeled("control_delayed")

    if gain_override is not None:
        electronic_gain = float(gain_override)
    else:
        electronic_gain = optimal_electronic_gain(twin, eff, scenario.analysis_frequency)

    stages = {
        "probe_source": probe,
        "conjugate_source": conjugate,
        "conjugate_detected": detected,
        "control_blocked": blocked,
        "control_delayed": control,
    }
    probe_in = probe
    if compensate_delay:
        probe_in = delay(probe, sim.optical_delay).relabeled("probe_delayed")
        stages["probe_delayed"] = probe_in
    stages["probe_out"] = actuate_eom(probe_in, control, electronic_gain, eta_e, rng_actuate)

    traces = {
        name: PhotocurrentTrace(fs, tr.samples[margin : margin + n_keep], name)
        for name, tr in stages.items()
    }

    if n_averages is None:
        nperseg = spectral.segment_length_for_rbw(fs, rbw)
        n_averages = max(1, (n_keep - nperseg) // (nperseg // 2) + 1)
    spectra = {}
    for name, tr in traces.items():
        raw = spectral.welch_psd(tr, rbw, n_averages)
        reference = spectral.SpectrumEstimate(
            frequencies=raw.frequencies,
            psd=_shot_transfer(name, raw.frequencies, sim),
            rbw=raw.rbw,
            n_averages=1,
            estimator_variance=0.0,
        )
        spectra[name] = spectral.normalize_to_shot(raw, reference)

    echo = RunSettings(
        scenario=scenario,
        sim=sim,
        compensate_delay=compensate_delay,
        variant=variant,
        electronic_gain=electronic_gain,
        probe_transmission=eta_e,
        rbw=rbw,
        n_averages=n_averages,
    )
    return RunResult(traces=traces, spectra=spectra, config_echo=echo, rng_seed_used=seed)


def analytic_prediction(
    result: RunResult, frequencies: np.ndarray | None = None
) -> NormalizedSpectrum:
    """Model prediction for the probe-out spectrum of a finished run.

    Folds the gain actually applied, the in-chain filter magnitudes and
    the residual delay between the two paths into the frequency-domain
    quadratic, so a correct simulation should match this to within
    estimator noise.
    """
    echo = result.config_echo
    sim = echo.sim
    if frequencies is None:
        frequencies = result.spectra["probe_out"].frequencies
    freqs = np.asarray(frequencies, dtype=float)
    twin = scenario_twin_noise(echo.scenario, freqs)
    eff = ChannelEfficiencies(echo.probe_transmission, echo.scenario.eta_D)
    chain_magnitude = _lowpass_magnitude(freqs, sim.detector_bandwidth) * _highpass_magnitude(
        freqs, sim.dc_block_cutoff
    )
    gains = math.sqrt(echo.probe_transmission) * echo.electronic_gain * chain_magnitude
    if echo.compensate_delay:
        residual = abs(sim.electronic_delay - sim.optical_delay)
    else:
        residual = sim.electronic_delay
    return noise_with_gain(twin, eff, GainProfile(freqs, gains), residual)


def stage_prediction(result: RunResult, stage: str, frequencies: np.ndarray) -> np.ndarray:
    """Shot-normalized model prediction for any labeled stage."""
    freqs = np.asarray(frequencies, dtype=float)
    scenario = result.config_echo.scenario
    twin = scenario_twin_noise(scenario, freqs)
    s = twin.single_beam.values
    if stage in ("probe_source", "conjugate_source", "probe_delayed"):
        return s
    if stage in ("conjugate_detected", "control_blocked", "control_delayed"):
        eta_d = scenario.eta_D
        return eta_d * s + (1.0 - eta_d)
    if stage == "probe_out":
        return analytic_prediction(result, freqs).values
    raise KeyError(f"unknown stage {stage!r}")
