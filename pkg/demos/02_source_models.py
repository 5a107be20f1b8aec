"""Twin-beam source models: ideal amplifier vs measured flat levels.

Shows the phase-insensitive-amplifier spectra (with their Lorentzian
relaxation to shot noise), the effect of source loss and excess noise,
and the flat measured-level alternative used by the scenario presets.
"""

import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from twinfeed import FwmParams, from_measured, ideal_pia_spectra, to_db

OUT = pathlib.Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

grid = np.geomspace(1e4, 1e8, 600)

# Gain chosen so the low-frequency difference squeezing is -7.4 dB.
gain = (1.0 / 10 ** (-0.74) + 1.0) / 2.0
print(f"amplifier gain for -7.4 dB difference squeezing: G = {gain:.4f}")

ideal = ideal_pia_spectra(FwmParams(gain=gain, squeezing_bandwidth=10e6), grid)
lossy = ideal_pia_spectra(
    FwmParams(gain=gain, squeezing_bandwidth=10e6, source_transmission=0.8), grid
)
noisy = ideal_pia_spectra(
    FwmParams(gain=gain, squeezing_bandwidth=10e6, excess_noise=0.5), grid
)
flat = from_measured(-7.4, 7.4, grid)

low = ideal.intensity_difference.values[0] * ideal.single_beam.values[0]
print(f"uncertainty product S * S- at low frequency: {low:.6f} (ideal amplifier: 1)")
print(f"difference noise after 20% source loss: "
      f"{to_db(lossy.intensity_difference.values[0]):.2f} dB (was -7.40 dB)")

fig, ax = plt.subplots(figsize=(7, 4.5))
ax.semilogx(grid, ideal.single_beam.values_db(), "C0", label="single beam, ideal")
ax.semilogx(grid, ideal.intensity_difference.values_db(), "C0--", label="difference, ideal")
ax.semilogx(grid, lossy.intensity_difference.values_db(), "C1--", label="difference, 80% transmission")
ax.semilogx(grid, noisy.intensity_difference.values_db(), "C2--", label="difference, 0.5 excess noise")
ax.semilogx(grid, flat.intensity_difference.values_db(), "C3:", label="difference, measured flat")
ax.axhline(0.0, color="gray", lw=0.8)
ax.set_xlabel("analysis frequency (Hz)")
ax.set_ylabel("noise (dB rel. shot)")
ax.set_title("Twin-beam source spectra")
ax.legend(fontsize=8)
fig.tight_layout()
fig.savefig(OUT / "02_source_spectra.png", dpi=150)
print(f"wrote {OUT / '02_source_spectra.png'}")
