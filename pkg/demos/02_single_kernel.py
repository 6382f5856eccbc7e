"""One Raman pulse: mean-field Rabi flopping and the noise it picks up.

The atom fluctuations after the pulse carry optical vacuum noise from the
control and passive channels; the outgoing control light carries atom noise.
Both effects are linear in the optical coupling chi_a.
"""
import numpy as np

from matterwave.kernel import KernelParams, force_decomposition, propagate_kernel, rabi_mean
from matterwave.mode_algebra import ModeKind, ModeRegistry, commutator, vacuum_variance

rabi, chi_a = 1.0, 0.2
params = KernelParams.from_rabi(rabi, chi_a, np.pi / 2, phi=0.0)

print("Rabi flopping from (1, 0):")
for t in np.linspace(0, params.duration, 5):
    a, b = rabi_mean(params, (1.0, 0.0), t)
    print(f"  t={t:.3f}  |A|^2={abs(a) ** 2:.4f}  |B|^2={abs(b) ** 2:.4f}")

reg = ModeRegistry()
xa = reg.annihilation(reg.register("A"))
xb = reg.annihilation(reg.register("B"))
ch = tuple(reg.register(s, ModeKind.FILTERED_OPTICAL, window=params.window) for s in ("control", "passive"))
rec = propagate_kernel(params, (1.0, 0.0), (xa, xb), ch, reg)
oa, ob = rec.fluct_out

print("\nafter the pulse:")
print("  [A_A, A_A^dag] =", commutator(oa, oa.dagger()).real)
opt = ob.restrict(ch)
print("  optical part of the B-port quadrature variance:", vacuum_variance(opt + opt.dagger()))
print("  outgoing control field deficit [a, a^dag] - 1 at t=0.3:", rec.control_out.commutator_deficit(0.3).real)

# balanced control/passive intensities remove the ponderomotive and dynamical forces
f = force_decomposition(params, rec.mean_out, rec.fluct_out)
print("\nbalanced: F_cl =", f.ponderomotive)
unbalanced = KernelParams.from_fields(0.3, 1.0, np.sqrt(3.0), params.duration)
print("unbalanced (|a_p|^2 - |a_c|^2 = 2):", force_decomposition(unbalanced, (1.0, 1.0), (xa, xb)).ponderomotive)
