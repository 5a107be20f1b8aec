"""Acceptance suite: one test per release criterion, one printed line each.

Run with ``pytest -s tests/test_acceptance.py`` to see the per-criterion
PASS/FAIL lines.  Heavy Monte Carlo runs are shared through module-scoped
fixtures; every tolerance is stated inline next to its assertion.
"""

import math

import numpy as np
import pytest
from scipy.constants import c as SPEED_OF_LIGHT

import twinfeed.spectral as spectral
from twinfeed.cli import (
    _flattened_oscillation_spectrum,
    load_config,
    main,
)
from twinfeed.feedforward_sim import SimConfig, analytic_prediction, run
from twinfeed.fwm_source import ScenarioPreset, from_measured, preset
from twinfeed.noise_model import (
    ChannelEfficiencies,
    GainProfile,
    NormalizedSpectrum,
    TwinBeamNoise,
    noise_with_gain,
    optimal_gain,
    predict_optimal_noise,
    to_db,
)

SEED = 20260810
ANALYSIS_HZ = 360e3
BAND_HZ = (200e3, 2e6)


def report(criterion, ok, detail):
    print(f"[criterion {criterion:02d}] {'PASS' if ok else 'FAIL'}: {detail}")


def flat_twin(s, s_minus, grid=None):
    grid = np.array([ANALYSIS_HZ]) if grid is None else grid
    return TwinBeamNoise.from_spectra(
        NormalizedSpectrum.flat(grid, s), NormalizedSpectrum.flat(grid, s_minus)
    )


@pytest.fixture(scope="module")
def off_resonance_compensated():
    return run(
        preset("off_resonance"),
        SimConfig(duration=0.2, rng_seed=SEED),
        compensate_delay=True,
        rbw=50e3,
    )


@pytest.fixture(scope="module")
def on_resonance_compensated():
    return run(
        preset("on_resonance"),
        SimConfig(duration=0.2, rng_seed=SEED),
        compensate_delay=True,
        rbw=50e3,
    )


@pytest.fixture(scope="module")
def coherent_run():
    coherent = ScenarioPreset(
        name="coherent",
        twin_noise_db=-1e-9,
        eta_E=0.88,
        eta_D=0.95,
        electronic_delay=65e-9,
        optical_delay_length=19.6,
        detector_bandwidth=4e6,
        analysis_frequency=ANALYSIS_HZ,
    )
    return run(coherent, SimConfig(duration=0.1, rng_seed=SEED), rbw=30e3)


def uncompensated_delay_fit(scenario_name):
    result = run(
        preset(scenario_name),
        SimConfig(duration=0.04, rng_seed=SEED),
        compensate_delay=False,
        rbw=100e3,
    )
    flattened = _flattened_oscillation_spectrum(result)
    sample_rate = result.config_echo.sim.sample_rate
    tau, quality = spectral.fit_delay_oscillation(flattened, 0.3e6, 0.42 * sample_rate)
    return tau, quality


def test_criterion_01_transfer_penalty_limit():
    # Lossless high-gain limit: S_f/(2*S_minus) within 0.1% of unity for
    # S = 1000, S_minus = 0.5.
    twin = flat_twin(1000.0, 0.5)
    eff = ChannelEfficiencies(1.0, 1.0)
    ratio = float(predict_optimal_noise(twin, eff).values[0]) / (2.0 * 0.5)
    ok = abs(ratio - 1.0) <= 1e-3
    report(1, ok, f"S_f/(2 S-) = {ratio:.6f}, |ratio-1| = {abs(ratio - 1):.2e} <= 1e-3")
    assert ok
    assert ratio == pytest.approx(0.99975, abs=1e-9)


def test_criterion_02_optimal_gain_consistency():
    # 1000 randomized tuples: the quadratic at its optimal gain matches the
    # closed form to 1e-9 relative, and +-10% gain perturbations are
    # strictly worse.
    rng = np.random.default_rng(SEED)
    grid = np.sort(rng.uniform(1e4, 1e7, size=50))
    worst = 0.0
    tuples = 0
    for _ in range(20):
        s = rng.uniform(0.05, 100.0, size=50)
        s_minus = s * rng.uniform(0.05, 1.9, size=50)
        s_minus = np.where(np.abs(s - s_minus) < 1e-2, s_minus + 0.02, s_minus)
        twin = TwinBeamNoise.from_spectra(
            NormalizedSpectrum(grid, s), NormalizedSpectrum(grid, s_minus)
        )
        eff = ChannelEfficiencies(rng.uniform(0.05, 1.0), rng.uniform(0.05, 1.0))
        best = optimal_gain(twin, eff, "photocurrent")
        floor = predict_optimal_noise(twin, eff)
        at_best = noise_with_gain(twin, eff, best, 0.0)
        rel = np.max(np.abs(at_best.values / floor.values - 1.0))
        worst = max(worst, float(rel))
        for factor in (0.9, 1.1):
            perturbed = noise_with_gain(
                twin, eff, GainProfile(grid, best.gains * factor), 0.0
            )
            assert np.all(perturbed.values > floor.values)
        tuples += 50
    ok = worst <= 1e-9
    report(2, ok, f"{tuples} tuples, worst relative mismatch {worst:.2e} <= 1e-9")
    assert ok


def test_criterion_03_off_resonance_prediction_anchor():
    # S- = -7.4 dB, eta_E = 0.88, eta_D = 0.95, symmetric source model:
    # the optimal prediction at 360 kHz must fall in [-3.6, -3.0] dB.
    scenario = preset("off_resonance")
    twin = from_measured(
        scenario.twin_noise_db, scenario.resolved_single_beam_db, [ANALYSIS_HZ]
    )
    eff = ChannelEfficiencies(scenario.eta_E, scenario.eta_D)
    value = to_db(float(predict_optimal_noise(twin, eff).values[0]))
    ok = -3.6 <= value <= -3.0
    report(3, ok, f"predicted probe-out {value:.3f} dB in [-3.6, -3.0] dB")
    assert ok


def test_criterion_04_on_resonance_prediction_anchor():
    # S- = -5.8 dB, same efficiencies: prediction in [-2.7, -2.1] dB.
    scenario = preset("on_resonance")
    twin = from_measured(
        scenario.twin_noise_db, scenario.resolved_single_beam_db, [ANALYSIS_HZ]
    )
    eff = ChannelEfficiencies(scenario.eta_E, scenario.eta_D)
    value = to_db(float(predict_optimal_noise(twin, eff).values[0]))
    ok = -2.7 <= value <= -2.1
    report(4, ok, f"predicted probe-out {value:.3f} dB in [-2.7, -2.1] dB")
    assert ok


@pytest.mark.xfail(
    strict=True,
    reason=(
        "Unattainable under the optimal-gain noise formula with the symmetric "
        "source model: S_f is linear in eta_E with slope bounded so that the "
        "0.88 -> 0.99 improvement cannot exceed ~0.65 dB off-resonance "
        "(~0.37 dB on-resonance) for the preset squeezing levels.  Kept at the "
        "stated threshold instead of weakening it; see the analysis notes."
    ),
)
def test_criterion_05_displacement_variant_gain():
    # Raising eta_E from 0.88 to 0.99 must improve the prediction by at
    # least 0.7 dB in both scenarios.
    improvements = {}
    for name in ("off_resonance", "on_resonance"):
        scenario = preset(name)
        twin = from_measured(
            scenario.twin_noise_db, scenario.resolved_single_beam_db, [ANALYSIS_HZ]
        )
        base = to_db(
            float(
                predict_optimal_noise(
                    twin, ChannelEfficiencies(0.88, scenario.eta_D)
                ).values[0]
            )
        )
        displaced = to_db(
            float(
                predict_optimal_noise(
                    twin, ChannelEfficiencies(0.99, scenario.eta_D)
                ).values[0]
            )
        )
        improvements[name] = base - displaced
    ok = all(value >= 0.7 for value in improvements.values())
    report(
        5,
        ok,
        "displacement improvement "
        + ", ".join(f"{k}: {v:.3f} dB" for k, v in improvements.items())
        + " (threshold 0.7 dB)",
    )
    assert ok


@pytest.mark.parametrize("fixture_name", ["off_resonance_compensated", "on_resonance_compensated"])
def test_criterion_06_monte_carlo_matches_analytic(fixture_name, request):
    # Compensated runs at 50 MS/s: simulated probe-out spectrum within
    # 0.2 dB of the frequency-domain model over 200 kHz - 2 MHz.
    result = request.getfixturevalue(fixture_name)
    assert result.config_echo.sim.sample_rate == 50e6
    assert result.config_echo.n_averages >= 200
    est = result.spectra["probe_out"]
    prediction = analytic_prediction(result)
    deviation = est.psd_db() - prediction.values_db()
    mask = est.band(*BAND_HZ)
    worst = float(np.max(np.abs(deviation[mask])))
    ok = worst <= 0.2
    report(
        6,
        ok,
        f"{result.config_echo.scenario.name}: max |sim - model| = {worst:.3f} dB "
        f"over {BAND_HZ[0]:g}-{BAND_HZ[1]:g} Hz at {result.config_echo.n_averages} averages "
        "(tolerance 0.2 dB)",
    )
    assert ok


def test_criterion_07_delay_oscillation_recovery():
    # Uncompensated runs: fitted oscillation period 15.38 MHz within 2%
    # and free-space delay-line lengths 19.6 m / 21.7 m within 2%.
    tau_off, _ = uncompensated_delay_fit("off_resonance")
    period = 1.0 / tau_off
    length_off = tau_off * SPEED_OF_LIGHT
    tau_on, _ = uncompensated_delay_fit("on_resonance")
    length_on = tau_on * SPEED_OF_LIGHT
    ok = (
        abs(period - 15.38e6) <= 0.02 * 15.38e6
        and abs(length_off - 19.6) <= 0.02 * 19.6
        and abs(length_on - 21.7) <= 0.02 * 21.7
    )
    report(
        7,
        ok,
        f"period {period / 1e6:.3f} MHz (15.38 +- 2%), lengths "
        f"{length_off:.2f} m (19.6 +- 2%) and {length_on:.2f} m (21.7 +- 2%)",
    )
    assert ok


def test_criterion_08_shot_noise_calibration(coherent_run):
    # Coherent scenario: every stage reads 0 dB within 0.05 dB across the
    # band (loss and detection leave normalized shot noise invariant); a
    # 6-sigma per-bin guard catches any localized artifact.
    worst_stage, worst_db = None, 0.0
    for stage, est in coherent_run.spectra.items():
        db, _ = spectral.squeezing_at(est, 1.1e6, BAND_HZ[1] - BAND_HZ[0])
        if abs(db) > abs(worst_db):
            worst_stage, worst_db = stage, db
        sigma_db = 10.0 / math.log(10.0) * math.sqrt(est.estimator_variance)
        bins = est.psd_db()[est.band(*BAND_HZ)]
        assert np.max(np.abs(bins)) < 6.0 * sigma_db, stage
    ok = abs(worst_db) <= 0.05
    report(
        8,
        ok,
        f"worst stage {worst_stage}: {worst_db:+.4f} dB over "
        f"{BAND_HZ[0]:g}-{BAND_HZ[1]:g} Hz (tolerance 0.05 dB)",
    )
    assert ok


def test_criterion_09_squeezing_band(off_resonance_compensated):
    # The compensated off-resonance run must report a squeezing band
    # containing at least [360 kHz, 2 MHz].
    band = spectral.squeezing_band(off_resonance_compensated.spectra["probe_out"])
    ok = band is not None and band[0] <= ANALYSIS_HZ and band[1] >= 2e6
    detail = "no squeezing band" if band is None else (
        f"band {band[0] / 1e3:.0f} kHz - {band[1] / 1e6:.2f} MHz contains [360 kHz, 2 MHz]"
    )
    report(9, ok, detail)
    assert ok


def test_criterion_10_deterministic_csv(tmp_path):
    # Two CLI invocations with identical config and seed produce
    # byte-identical CSV artifacts.
    config = tmp_path / "determinism.ini"
    config.write_text(
        "[scenario]\nname = off_resonance\n\n"
        "[simulation]\nduration_s = 0.008\nseed = 1234\n\n"
        "[spectral]\nrbw_hz = 100e3\n"
    )
    payloads = []
    for sub in ("a", "b"):
        out_dir = tmp_path / sub
        code = main(
            ["simulate", "--config", str(config), "--out-dir", str(out_dir)]
        )
        assert code == 0
        payloads.append((out_dir / "off_resonance_simulate.csv").read_bytes())
    ok = payloads[0] == payloads[1] and len(payloads[0]) > 0
    report(10, ok, f"identical CSV bytes across reruns ({len(payloads[0])} bytes)")
    assert ok
