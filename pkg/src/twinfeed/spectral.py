"""Spectrum-analyzer emulation on shot-normalized photocurrent traces.

Welch estimation with Hann windows and 50% overlap plays the role of a
swept analyzer: the resolution bandwidth maps to the segment length
through the window's equivalent noise bandwidth, and video-bandwidth /
trace averaging collapses into the number of averaged segments.  All
estimates are one-sided densities in shot units, so a shot-limited trace
reads 1.0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize, signal

from .errors import (
    GridMismatchError,
    NoOscillationError,
    SubtractionError,
    TraceLengthError,
)
from .noise_model import to_db

__all__ = [
    "SpectrumEstimate",
    "DelayFitQuality",
    "welch_psd",
    "normalize_to_shot",
    "subtract_electronic",
    "squeezing_at",
    "fit_delay_oscillation",
    "squeezing_band",
]

HANN_ENBW_BINS = 1.5  # equivalent noise bandwidth of a periodic Hann window


@dataclass(frozen=True)
class SpectrumEstimate:
    """One-sided PSD estimate relative to shot noise.

    ``estimator_variance`` is the per-bin relative variance, approximately
    1/n_averages for Welch averaging.
    """

    frequencies: np.ndarray
    psd: np.ndarray
    rbw: float
    n_averages: int
    estimator_variance: float

    def __post_init__(self):
        freqs = np.asarray(self.frequencies, dtype=float)
        psd = np.asarray(self.psd, dtype=float)
        object.__setattr__(self, "frequencies", freqs)
        object.__setattr__(self, "psd", psd)
        if freqs.ndim != 1 or freqs.size == 0 or np.any(np.diff(freqs) <= 0.0):
            raise ValueError("frequencies must be a strictly increasing 1-D sequence")
        if psd.shape != freqs.shape:
            raise ValueError("psd and frequencies must have the same shape")
        if not np.all(np.isfinite(psd)) or np.any(psd <= 0.0):
            raise ValueError("psd must be finite and > 0")
        if not self.rbw > 0.0 or not self.n_averages >= 1:
            raise ValueError("rbw must be > 0 and n_averages >= 1")

    def psd_db(self) -> np.ndarray:
        return to_db(self.psd)

    def band(self, f_min: float, f_max: float) -> np.ndarray:
        """Boolean mask selecting bins inside [f_min, f_max]."""
        return (self.frequencies >= f_min) & (self.frequencies <= f_max)


def segment_length_for_rbw(sample_rate: float, rbw: float) -> int:
    """Welch segment length realizing the requested resolution bandwidth."""
    nperseg = int(round(HANN_ENBW_BINS * sample_rate / rbw))
    if nperseg < 8:
        raise ValueError(f"rbw {rbw:g} Hz is too wide for sample rate {sample_rate:g} Hz")
    return nperseg


def required_samples(sample_rate: float, rbw: float, n_averages: int) -> int:
    """Samples needed for n_averages segments at 50% overlap."""
    nperseg = segment_length_for_rbw(sample_rate, rbw)
    return (n_averages - 1) * (nperseg // 2) + nperseg


def welch_psd(trace, rbw: float, n_averages: int) -> SpectrumEstimate:
    """Averaged one-sided Welch PSD of a photocurrent trace.

    Hann window, 50% overlap, density scaling: unit-PSD white noise reads
    1.0 independent of ``rbw``.  Exactly ``n_averages`` segments are used
    (the first ``required_samples`` of the trace); a shorter trace raises
    :class:`TraceLengthError` stating the required duration.  The zero
    bin is dropped.
    """
    x = np.asarray(trace.samples, dtype=float)
    fs = trace.sample_rate
    if n_averages < 1:
        raise ValueError("n_averages must be >= 1")
    nperseg = segment_length_for_rbw(fs, rbw)
    needed = required_samples(fs, rbw, n_averages)
    if x.size < needed:
        raise TraceLengthError(
            f"trace {getattr(trace, 'label', '')!r} has {x.size} samples "
            f"({x.size / fs:.4g} s) but {needed} ({needed / fs:.4g} s) are needed "
            f"for {n_averages} averages at rbw {rbw:g} Hz"
        )
    if not np.any(x):
        raise ValueError("trace is identically zero; no spectrum to estimate")
    freqs, psd = signal.welch(
        x[:needed],
        fs=fs,
        window="hann",
        nperseg=nperseg,
        noverlap=nperseg // 2,
        detrend=False,
        scaling="density",
        return_onesided=True,
    )
    return SpectrumEstimate(
        frequencies=freqs[1:],
        psd=psd[1:],
        rbw=HANN_ENBW_BINS * fs / nperseg,
        n_averages=n_averages,
        estimator_variance=1.0 / n_averages,
    )


def _require_same_grid(a: SpectrumEstimate, b: SpectrumEstimate, what: str) -> None:
    if a.frequencies.shape != b.frequencies.shape or not np.array_equal(
        a.frequencies, b.frequencies
    ):
        raise GridMismatchError(f"{what} are on different frequency grids")


def normalize_to_shot(est: SpectrumEstimate, shot_reference: SpectrumEstimate) -> SpectrumEstimate:
    """Pointwise ratio to a shot-noise reference on the same grid.

    The reference can come from a coherent-scenario run or from the
    analytically known shot transfer of the measurement chain (in which
    case its estimator variance is zero).
    """
    _require_same_grid(est, shot_reference, "estimate and shot reference")
    return SpectrumEstimate(
        frequencies=est.frequencies,
        psd=est.psd / shot_reference.psd,
        rbw=est.rbw,
        n_averages=est.n_averages,
        estimator_variance=est.estimator_variance + shot_reference.estimator_variance,
    )


def subtract_electronic(est: SpectrumEstimate, dark: SpectrumEstimate) -> SpectrumEstimate:
    """Subtract a dark (electronics-only) spectrum measured with the same settings.

    Performed linearly before any shot normalization; the per-bin variance
    of the two estimates adds.
    """
    _require_same_grid(est, dark, "estimate and dark spectrum")
    bad = np.nonzero(dark.psd >= est.psd)[0]
    if bad.size:
        f_bad = est.frequencies[bad[0]]
        raise SubtractionError(
            f"dark spectrum is not below the signal at {f_bad:g} Hz "
            f"({dark.psd[bad[0]]:.4g} >= {est.psd[bad[0]]:.4g})"
        )
    return SpectrumEstimate(
        frequencies=est.frequencies,
        psd=est.psd - dark.psd,
        rbw=est.rbw,
        n_averages=est.n_averages,
        estimator_variance=est.estimator_variance + dark.estimator_variance,
    )


def squeezing_at(est: SpectrumEstimate, frequency: float, span: float) -> tuple[float, float]:
    """Mean noise level in a band around ``frequency``, in dB with 1-sigma error.

    Averages the bins inside frequency +- span/2 and converts to dB; the
    uncertainty follows from the per-bin estimator variance assuming
    independent bins.
    """
    lo, hi = frequency - span / 2.0, frequency + span / 2.0
    if lo < est.frequencies[0] or hi > est.frequencies[-1]:
        raise ValueError(
            f"readout band [{lo:g}, {hi:g}] Hz falls outside the estimate grid "
            f"[{est.frequencies[0]:g}, {est.frequencies[-1]:g}] Hz"
        )
    mask = est.band(lo, hi)
    n_bins = int(np.count_nonzero(mask))
    if n_bins == 0:
        raise ValueError(f"no bins inside [{lo:g}, {hi:g}] Hz (rbw {est.rbw:g} Hz)")
    mean = float(np.mean(est.psd[mask]))
    rel_se = math.sqrt(est.estimator_variance / n_bins)
    return to_db(mean), 10.0 / math.log(10.0) * rel_se


@dataclass(frozen=True)
class DelayFitQuality:
    """Goodness-of-fit summary for a spectral delay-oscillation fit."""

    r_squared: float
    amplitude: float
    amplitude_se: float
    baseline: float
    phase: float
    n_bins: int


def _cosine_ls(freqs: np.ndarray, psd: np.ndarray, tau: float):
    """Least-squares A + P*cos + Q*sin at fixed tau; returns (rss, A, P, Q)."""
    arg = 2.0 * np.pi * freqs * tau
    design = np.column_stack([np.ones_like(freqs), np.cos(arg), np.sin(arg)])
    coef, _, _, _ = np.linalg.lstsq(design, psd, rcond=None)
    resid = psd - design @ coef
    return float(resid @ resid), coef


def fit_delay_oscillation(
    est: SpectrumEstimate, f_min: float, f_max: float
) -> tuple[float, DelayFitQuality]:
    """Recover a residual delay from the oscillation of a noise spectrum.

    Fits psd(f) ~ A + B*cos(2*pi*f*tau + phi) over [f_min, f_max] by
    scanning tau (linear least squares in the remaining parameters at
    each candidate) and polishing the best candidate.  The band must
    contain at least half an oscillation period; the scan therefore
    starts at tau = 0.5/(f_max - f_min).  Raises
    :class:`NoOscillationError` when the oscillation amplitude is not
    statistically significant, i.e. when the spectrum is flat or only
    smoothly trended over the band.

    The fit depends only on the phase structure of the oscillation, so it
    is invariant under an overall rescaling of the spectrum.
    """
    mask = est.band(f_min, f_max)
    freqs = est.frequencies[mask]
    psd = est.psd[mask]
    n = freqs.size
    if n < 16:
        raise ValueError(f"only {n} bins in [{f_min:g}, {f_max:g}] Hz; need at least 16")
    bandwidth = f_max - f_min
    tau_min = 0.5 / bandwidth
    # Oscillations faster than two bins per period are unresolvable.
    tau_max = 0.5 / float(np.max(np.diff(freqs)))
    if tau_max <= tau_min:
        raise ValueError("band too narrow to resolve any oscillation")

    taus = np.linspace(tau_min, tau_max, 600)
    rss = np.array([_cosine_ls(freqs, psd, t)[0] for t in taus])
    best = int(np.argmin(rss))
    lo = taus[max(best - 1, 0)]
    hi = taus[min(best + 1, taus.size - 1)]
    res = optimize.minimize_scalar(
        lambda t: _cosine_ls(freqs, psd, t)[0], bounds=(lo, hi), method="bounded",
        options={"xatol": 1e-14},
    )
    tau = float(res.x)
    rss_fit, coef = _cosine_ls(freqs, psd, tau)
    baseline, p, q = (float(v) for v in coef)
    amplitude = math.hypot(p, q)
    phase = math.atan2(-q, p)

    centered = psd - psd.mean()
    rss_const = float(centered @ centered)
    r_squared = 1.0 - rss_fit / rss_const if rss_const > 0.0 else 0.0
    sigma2 = rss_fit / max(n - 4, 1)
    amplitude_se = math.sqrt(2.0 * sigma2 / n)
    quality = DelayFitQuality(
        r_squared=r_squared,
        amplitude=amplitude,
        amplitude_se=amplitude_se,
        baseline=baseline,
        phase=phase,
        n_bins=n,
    )
    # Significance gate: the cosine must explain the band variance far
    # better than chance and resolve at least half a period.
    f_stat = ((rss_const - rss_fit) / 3.0) / max(sigma2, 1e-300)
    if amplitude < 6.0 * amplitude_se or f_stat < 25.0 or r_squared < 0.2:
        raise NoOscillationError(
            f"no detectable oscillation in [{f_min:g}, {f_max:g}] Hz: "
            f"amplitude {amplitude:.3g} (se {amplitude_se:.3g}), R^2 {r_squared:.3f}"
        )
    return tau, quality


def squeezing_band(est: SpectrumEstimate) -> tuple[float, float] | None:
    """Largest contiguous frequency band measured below shot noise.

    A bin counts as squeezed when psd + one estimator standard deviation
    stays below 1.0.  Returns (f_low, f_high) or ``None`` when no bin
    qualifies.
    """
    sigma = est.psd * math.sqrt(est.estimator_variance)
    below = est.psd + sigma < 1.0
    if not np.any(below):
        return None
    padded = np.concatenate([[False], below, [False]])
    edges = np.flatnonzero(np.diff(padded.astype(int)))
    starts, stops = edges[::2], edges[1::2]
    widest = int(np.argmax(stops - starts))
    return (
        float(est.frequencies[starts[widest]]),
        float(est.frequencies[stops[widest] - 1]),
    )
