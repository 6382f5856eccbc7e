"""A pi/2 - pi - pi/2 atom interferometer.

Signal: Delta N responds to phi_s1 - 2 phi_s2 + phi_s3 and rejects common
phases.  Noise: atom shot noise from the empty input port, back-action from
the mirror pulses sharing one control field, and optical vacuum noise.
"""
import numpy as np

from matterwave.interferometer import SequenceSpec, estimator, run_sequence, signal_gradient

rabi, chi_a, amp = 1.0, 0.05, 10.0
spec = SequenceSpec.mach_zehnder(rabi, chi_a, amp, (1e-3, 2e-4, -5e-4), interrogation_time=2.0)
out = run_sequence(spec)

print("output means / amp:", np.round(np.array(out.mean_out) / amp, 12))
print("signal gradient d(Delta N)/d(phi_s):", signal_gradient(spec))
print("Delta N signal:", out.delta_n_signal, " = -A^2 (phi1 - 2 phi2 + phi3) =", -amp ** 2 * spec.signal_combination)

common = run_sequence(SequenceSpec.mach_zehnder(rabi, chi_a, amp, (3e-3,) * 3), noise=False)
print("common phase (3e-3 on every pulse):", common.delta_n_signal)

print("\nnoise decomposition of Delta N:")
for name, v in out.noise_parts.items():
    print(f"  {name:12s} {v:12.6f}")
print(f"  {'total':12s} {out.variance:12.6f}")
print("back-action coefficient chi_a^2 A^3 / (2 sqrt2 Omega) =", chi_a ** 2 * amp ** 3 / (2 * np.sqrt(2) * rabi))

est = estimator(out)
print("\nestimate:", est.estimate, " variance:", est.variance, " curvature phi_s'' ~", est.curvature)
