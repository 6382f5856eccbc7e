"""Independent numerical checks of the closed forms.

RK4 integration of the kernel equations with time-binned optical inputs,
fourth-order convergence of the propagator, and quadrature checks of the
Gaussian-profile identities behind the effective atom operators.
"""
import numpy as np

from matterwave.kernel import KernelParams
from matterwave.oracle import GridConfig, compare_with_analytic, profile_checks

for theta in (np.pi / 4, np.pi / 2):
    p = KernelParams.from_rabi(1.0, 0.3, theta, phi=0.7, phi_p=0.2)
    res = compare_with_analytic(p, mean_in=(0.6, 0.8j))
    print(f"theta={theta:.4f}:", {k: f"{v:.1e}" for k, v in res.items()})

p = KernelParams.from_rabi(1.0, 0.0, np.pi / 2)
errs = [compare_with_analytic(p, GridConfig(n, p.duration))["propagator"] for n in (20, 40, 80, 160)]
print("\npropagator error vs steps:", [f"{e:.2e}" for e in errs])
print("successive ratios:", [f"{a / b:.2f}" for a, b in zip(errs, errs[1:])])

print("\nprofile identities:")
print(profile_checks().to_json())
