"""Error budget and the standard quantum limit.

Back-action grows with the atom number and atom shot noise falls with it;
the optimum sits at N_a* = sqrt(2) N_L / k.  What remains is the photon shot
noise 1/N_L, reachable only by extrapolation (the model flags N_a >= N_L/10).
"""
import warnings

import numpy as np

from matterwave.budget import LabParams, ValidityWarning, error_budget, map_params, optimize_atom_number

n_l, k = 1e6, 1.0
print(f"N_L = {n_l:.0e}, k = {k}")
print(f"{'N_a':>10s} {'back-action':>12s} {'atom shot':>12s} {'optical':>12s} {'total':>12s}")
for n_a in np.geomspace(1e3, 1e9, 7):
    b = error_budget(n_a, n_l, k, warn=False)
    flag = "  *" if b.warnings else ""
    print(f"{n_a:10.2e} {b.back_action:12.3e} {b.atom_shot:12.3e} {b.optical:12.3e} {b.total:12.3e}{flag}")
print("  * outside the linearised regime")

opt = optimize_atom_number(n_l, k)
print(f"\noptimum N_a* = {opt.atom_number:.4e}, sigma^2 = {opt.variance:.4e}, sigma^2 N_L = {opt.sql_ratio:.3f}")
for kk in (np.pi / 4, np.pi / 2):
    print(f"  k = {kk:.4f}: sigma^2_min N_L = {optimize_atom_number(n_l, kk).sql_ratio:.3f}")

# laboratory numbers -> model parameters
lab = LabParams(pulse_length=0.3, photon_number=1e8, atom_number=1e4, omega_laser=2.4e15,
                omega_atom=4e10, g13=3e6, g23=2e6, detuning=1e9, omega30=2.4e15)
# tune the dipole coupling so the pulse is a pi/2 pulse, Omega l_a / c = pi/2
g13 = lab.g13 * (np.pi / 2) / map_params(lab).pulse_area
lab = LabParams(**{**lab.__dict__, "g13": g13})
m = map_params(lab)
print(f"\ng_eff = {m.g_eff:.3e}, chi = {m.chi:.3e}, Omega = {m.rabi:.3e}, chi_a = {m.chi_a:.3e}")
print(f"pulse area k = Omega l_a / c = {m.pulse_area:.4f}; chi_a^2/Omega vs k/N_L residual {m.identity_residual:.1e}")
with warnings.catch_warnings(record=True) as caught:
    warnings.simplefilter("always")
    error_budget(5e7, 1e8, m.pulse_area)
print("warning near N_a ~ N_L:", [str(w.message) for w in caught if issubclass(w.category, ValidityWarning)])
