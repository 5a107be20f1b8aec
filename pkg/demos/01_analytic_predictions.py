"""Analytic noise predictions for feedforward squeezing transfer.

Walks through the frequency-domain model: optimal gain, the predicted
output noise, the factor-of-two transfer penalty, and how the prediction
degrades with probe-path loss and detector efficiency.  Writes plots to
demos/output/.
"""

import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from twinfeed import (
    ChannelEfficiencies,
    GainProfile,
    from_measured,
    ideal_limit,
    noise_with_gain,
    optimal_gain,
    predict_optimal_noise,
    preset,
    to_db,
)

OUT = pathlib.Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

# ----------------------------------------------------------------------
# 1. Headline numbers for the two bundled scenarios
# ----------------------------------------------------------------------
print("Scenario predictions at the 360 kHz analysis frequency")
print(f"{'scenario':<30}{'S- (dB)':>9}{'gain':>9}{'S_f (dB)':>10}{'2S- (dB)':>10}")
for name in ("off_resonance", "on_resonance"):
    scenario = preset(name)
    twin = from_measured(
        scenario.twin_noise_db, scenario.resolved_single_beam_db, [scenario.analysis_frequency]
    )
    eff = ChannelEfficiencies(scenario.eta_E, scenario.eta_D)
    gain = float(optimal_gain(twin, eff).gains[0])
    s_f = to_db(float(predict_optimal_noise(twin, eff).values[0]))
    limit = to_db(float(ideal_limit(twin.intensity_difference).values[0]))
    print(f"{name:<30}{scenario.twin_noise_db:>9.1f}{gain:>9.3f}{s_f:>10.2f}{limit:>10.2f}")

# Cutting the probe-path loss (the displacement variant) helps, but the
# dominant cost is the factor of two from splitting the correlations.
scenario = preset("off_resonance_displacement")
twin = from_measured(scenario.twin_noise_db, scenario.resolved_single_beam_db, [360e3])
s_f = to_db(float(predict_optimal_noise(twin, ChannelEfficiencies(0.99, 0.95)).values[0]))
print(f"\noff-resonance with 99/1 displacement actuation: {s_f:.2f} dB")

# ----------------------------------------------------------------------
# 2. The quadratic in the gain: why the optimum matters
# ----------------------------------------------------------------------
grid = np.array([360e3])
twin = from_measured(-7.4, 7.4, grid)
eff = ChannelEfficiencies(0.88, 0.95)
gains = np.linspace(-1.6, 0.2, 400)
noise = [
    float(noise_with_gain(twin, eff, GainProfile.flat(grid, g)).values[0]) for g in gains
]
best = float(optimal_gain(twin, eff, "photocurrent").gains[0])
floor = float(predict_optimal_noise(twin, eff).values[0])

fig, ax = plt.subplots(figsize=(6, 4))
ax.plot(gains, to_db(np.array(noise)), label="output noise vs gain")
ax.axhline(0.0, color="gray", lw=0.8, label="shot noise")
ax.axhline(to_db(floor), color="C2", ls="--", label="optimal-gain prediction")
ax.plot([best], [to_db(floor)], "C3o", label=f"optimum g = {best:.3f}")
ax.set_xlabel("feedforward gain")
ax.set_ylabel("probe noise (dB rel. shot)")
ax.set_title("Gain sweep, off-resonance parameters")
ax.legend(fontsize=8)
fig.tight_layout()
fig.savefig(OUT / "01_gain_sweep.png", dpi=150)
print(f"\nwrote {OUT / '01_gain_sweep.png'}")

# ----------------------------------------------------------------------
# 3. Loss budget: prediction vs eta_E and eta_D
# ----------------------------------------------------------------------
etas = np.linspace(0.5, 1.0, 200)
fig, ax = plt.subplots(figsize=(6, 4))
for eta_d, style in ((1.0, "-"), (0.95, "--"), (0.9, ":")):
    curve = [
        to_db(float(predict_optimal_noise(twin, ChannelEfficiencies(e, eta_d)).values[0]))
        for e in etas
    ]
    ax.plot(etas, curve, style, label=f"detector efficiency {eta_d:.2f}")
ax.axhline(to_db(2 * 10 ** (-0.74)), color="gray", lw=0.8, label="lossless limit 2S-")
ax.set_xlabel("probe-path transmission")
ax.set_ylabel("predicted output noise (dB rel. shot)")
ax.set_title("Loss budget for -7.4 dB twin beams")
ax.legend(fontsize=8)
fig.tight_layout()
fig.savefig(OUT / "01_loss_budget.png", dpi=150)
print(f"wrote {OUT / '01_loss_budget.png'}")
