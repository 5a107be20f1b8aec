"""Tests for the twin-beam source models and scenario presets."""

import numpy as np
import pytest
from scipy.constants import c as SPEED_OF_LIGHT

from twinfeed.fwm_source import (
    FwmParams,
    PRESET_NAMES,
    ScenarioPreset,
    from_measured,
    ideal_pia_spectra,
    preset,
    scenario_twin_noise,
)
from twinfeed.noise_model import apply_loss, to_db

GRID = np.geomspace(1e3, 25e6, 101)


class TestIdealPiaSpectra:
    def test_unit_gain_is_coherent(self):
        twin = ideal_pia_spectra(FwmParams(gain=1.0), GRID)
        np.testing.assert_allclose(twin.single_beam.values, 1.0, rtol=1e-12)
        np.testing.assert_allclose(twin.intensity_difference.values, 1.0, rtol=1e-12)
        np.testing.assert_allclose(twin.cross_correlation, 0.0, atol=1e-12)

    def test_low_frequency_levels(self):
        # G chosen so 2G - 1 = 5.494: the difference noise inverts it.
        gain = (5.494 + 1.0) / 2.0
        twin = ideal_pia_spectra(FwmParams(gain=gain), np.array([1.0, 10.0]))
        assert twin.single_beam.values[0] == pytest.approx(5.494, rel=1e-9)
        assert twin.intensity_difference.values[0] == pytest.approx(1 / 5.494, rel=1e-9)
        assert to_db(twin.intensity_difference.values[0]) == pytest.approx(-7.4, abs=0.01)

    def test_uncertainty_product_at_low_frequency(self):
        # Lossless, excess-free: S * S_minus == 1 in the flat region.
        for gain in (1.0, 1.5, 3.247, 20.0):
            twin = ideal_pia_spectra(FwmParams(gain=gain), np.array([1.0, 2.0]))
            product = twin.single_beam.values * twin.intensity_difference.values
            np.testing.assert_allclose(product, 1.0, atol=1e-9)

    def test_out_of_band_relaxes_to_shot(self):
        gamma = 1e6
        twin = ideal_pia_spectra(
            FwmParams(gain=3.0, squeezing_bandwidth=gamma), np.array([1000 * gamma])
        )
        assert twin.single_beam.values[0] == pytest.approx(1.0, abs=1e-4)
        assert twin.intensity_difference.values[0] == pytest.approx(1.0, abs=1e-4)

    def test_source_loss_matches_loss_rule(self):
        eta = 0.7
        lossless = ideal_pia_spectra(FwmParams(gain=4.0), GRID)
        lossy = ideal_pia_spectra(FwmParams(gain=4.0, source_transmission=eta), GRID)
        np.testing.assert_allclose(
            lossy.single_beam.values,
            apply_loss(lossless.single_beam, eta).values,
            rtol=1e-12,
        )
        np.testing.assert_allclose(
            lossy.intensity_difference.values,
            apply_loss(lossless.intensity_difference, eta).values,
            rtol=1e-12,
        )
        # Loss bounds the difference noise from below by 1 - eta.
        assert np.all(lossy.intensity_difference.values >= 1.0 - eta)

    def test_excess_noise_preserves_correlation(self):
        clean = ideal_pia_spectra(FwmParams(gain=4.0), GRID)
        noisy = ideal_pia_spectra(FwmParams(gain=4.0, excess_noise=0.3), GRID)
        np.testing.assert_allclose(noisy.single_beam.values, clean.single_beam.values + 0.3)
        np.testing.assert_allclose(
            noisy.intensity_difference.values, clean.intensity_difference.values + 0.3
        )
        np.testing.assert_allclose(noisy.cross_correlation, clean.cross_correlation)

    def test_gain_below_one_rejected(self):
        with pytest.raises(ValueError, match="gain"):
            FwmParams(gain=0.99)


class TestFromMeasured:
    def test_flat_anchor_levels(self):
        twin = from_measured(-7.4, 7.4, GRID)
        np.testing.assert_allclose(twin.intensity_difference.values, 0.18197, rtol=1e-4)
        np.testing.assert_allclose(twin.single_beam.values, 5.4954, rtol=1e-4)
        twin = from_measured(-5.8, 5.8, GRID)
        np.testing.assert_allclose(twin.intensity_difference.values, 0.26303, rtol=1e-4)
        np.testing.assert_allclose(twin.single_beam.values, 3.8019, rtol=1e-4)

    def test_near_coherent_degenerate_case(self):
        twin = from_measured(0.0, 1e-9, GRID)
        np.testing.assert_allclose(twin.cross_correlation, 0.0, atol=1e-9)

    def test_ordering_enforced(self):
        with pytest.raises(ValueError, match="below"):
            from_measured(0.0, 0.0, GRID)
        with pytest.raises(ValueError, match="below"):
            from_measured(3.0, -3.0, GRID)


class TestPresets:
    def test_known_names(self):
        assert set(PRESET_NAMES) == {
            "off_resonance",
            "on_resonance",
            "off_resonance_displacement",
            "on_resonance_displacement",
        }

    def test_off_resonance_values(self):
        p = preset("off_resonance")
        assert p.twin_noise_db == -7.4
        assert (p.eta_E, p.eta_D) == (0.88, 0.95)
        assert p.electronic_delay == pytest.approx(65e-9)
        assert p.optical_delay_length == 19.6
        assert p.detector_bandwidth == 4e6
        assert p.analysis_frequency == 360e3
        assert p.metadata["two_photon_detuning_hz"] == 2e6
        assert p.metadata["pump_probe_angle_deg"] == 0.5

    def test_on_resonance_values(self):
        p = preset("on_resonance")
        assert p.twin_noise_db == -5.8
        assert p.electronic_delay == pytest.approx(72e-9)
        assert p.optical_delay_length == 21.7
        assert p.metadata["two_photon_detuning_hz"] == 8e6
        assert p.metadata["cell_temperature_c"] == 90.0

    def test_displacement_variants_change_only_transmission(self):
        for base_name in ("off_resonance", "on_resonance"):
            base = preset(base_name)
            disp = preset(f"{base_name}_displacement")
            assert disp.eta_E == 0.99
            assert disp.eta_D == base.eta_D
            assert disp.twin_noise_db == base.twin_noise_db
            assert disp.electronic_delay == base.electronic_delay

    def test_delay_line_length_consistent_with_electronic_delay(self):
        # 19.6 m of free space is 65.4 ns, matching the 65 ns electronics.
        p = preset("off_resonance")
        assert p.optical_delay * 1e9 == pytest.approx(19.6 / 2.998e8 * 1e9, abs=0.01)
        assert p.optical_delay == pytest.approx(p.electronic_delay, rel=0.01)
        p = preset("on_resonance")
        assert p.optical_delay == pytest.approx(21.7 / SPEED_OF_LIGHT, rel=1e-12)

    def test_serialization_round_trip(self):
        for name in PRESET_NAMES:
            original = preset(name)
            assert ScenarioPreset.from_dict(original.to_dict()) == original

    def test_unknown_name(self):
        with pytest.raises(KeyError, match="unknown scenario"):
            preset("mid_resonance")

    def test_symmetric_single_beam_default(self):
        p = preset("off_resonance")
        assert p.single_beam_db is None
        assert p.resolved_single_beam_db == 7.4

    def test_validation(self):
        data = preset("off_resonance").to_dict()
        with pytest.raises(ValueError, match=r"eta_E must lie in \(0,1\]"):
            ScenarioPreset.from_dict({**data, "eta_E": 1.2})
        with pytest.raises(ValueError, match="single_beam_db"):
            ScenarioPreset.from_dict({**data, "single_beam_db": -8.0})


def test_scenario_twin_noise_matches_preset_levels():
    p = preset("on_resonance")
    twin = scenario_twin_noise(p, GRID)
    np.testing.assert_allclose(to_db(twin.intensity_difference.values), -5.8, atol=1e-9)
    np.testing.assert_allclose(to_db(twin.single_beam.values), 5.8, atol=1e-9)
