"""Linearised operators as a mean plus coefficients on noise modes.

A discrete atom mode and a filtered optical channel are registered, combined
into Hermitian readouts, and their vacuum moments are compared with Gaussian
sampling.
"""
import numpy as np

from matterwave.mode_algebra import ModeKind, ModeRegistry, WeightKernel, commutator, covariance, vacuum_variance
from matterwave.oracle import monte_carlo

reg = ModeRegistry()
b = reg.register("atom_B_initial")
c = reg.register("optical_c_step1", ModeKind.FILTERED_OPTICAL, window=(0.0, np.pi / 2))

amp = 1e3
shot = (reg.annihilation(b) + reg.creation(b)) * amp
print("Var[A (b + b^dag)] =", vacuum_variance(shot), " expected", amp ** 2)

# a filtered channel: int w(t) a(t) dt with w = exp(-i t)
w = WeightKernel.complex_exponential((0.0, np.pi / 2), -1.0, 0.5)
x = reg.annihilation(c, w)
print("[x, x^dag] =", commutator(x, x.dagger()).real, " (= int |w|^2 dt =", 0.25 * np.pi / 2, ")")

readout = shot * 1e-3 + x + x.dagger()
print("Var[readout] =", vacuum_variance(readout))
print("Cov[shot, readout] =", covariance(shot, readout).real)

mc = monte_carlo([shot, readout], 100_000, seed=1)
print("Monte-Carlo covariance matrix:\n", mc.cov)
print("standard errors:\n", mc.se_cov)
