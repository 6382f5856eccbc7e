"""Two interferometers driven by the same control light.

The control fields leaving interferometer I carry its atom fluctuations into
interferometer II, so the two readouts become correlated.  Severing the link
removes the correlation; the differential readout keeps the GW signal.
"""
import numpy as np

from matterwave.interferometer import SequenceSpec, gw_low_frequency_limit, gw_phase_response, run_pair
from matterwave.oracle import monte_carlo

rabi, chi_a, amp = 1.0, 0.1, 10.0
spec = SequenceSpec.mach_zehnder(rabi, chi_a, amp)
pair = run_pair(spec, spec)
severed = run_pair(spec, spec, linked=False)

print("Var I, Var II:", pair.first.variance, pair.second.variance)
print("Cov(I, II): linked", pair.covariance, " severed", severed.covariance)
print("differential variance:", pair.differential_variance)
print("AI_II noise parts:", pair.second_parts())
print("cross coefficient chi_a^2 A^3 / (2 Omega) =", chi_a ** 2 * amp ** 3 / (2 * rabi))

mc = monte_carlo(pair, 50_000, seed=2)
print(f"Monte-Carlo Cov: {mc.cov[0, 1]:.3f} +- {mc.se_cov[0, 1]:.3f}")

# GW phase response, light-travel units
print("\nGW phase response (h=1e-20, L=1, T=1, k=1, t=0.25):")
for w in (1e-3, 1e-2, 0.1, 1.0, np.pi):
    full = gw_phase_response(w, 1e-20, 1.0, 1.0, 1.0, 0.25)
    print(f"  omega={w:8.4f}  phi_GW={full: .3e}  k a_GW T^2={gw_low_frequency_limit(w, 1e-20, 1.0, 1.0, 1.0):.3e}")
