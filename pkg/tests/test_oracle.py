import json
import math

import numpy as np
import pytest

from matterwave.interferometer import SequenceSpec, run_pair, run_sequence
from matterwave.kernel import KernelParams
from matterwave.mode_algebra import ModeKind, ModeRegistry, WeightKernel, covariance
from matterwave.oracle import (
    GridConfig,
    OracleError,
    ProfileSpec,
    compare_with_analytic,
    integrate_kernel,
    monte_carlo,
    profile_checks,
)


# RK4 kernel integration


def test_decoupled_propagator():
    p = KernelParams.from_rabi(1.0, 0.0, math.pi / 2, phi=0.5)
    res = compare_with_analytic(p)
    assert res["propagator"] < 1e-8


def test_norm_drift_over_pi_pulse():
    p = KernelParams.from_rabi(1.0, 0.2, math.pi)
    table = integrate_kernel(p, GridConfig.for_kernel(p), mean_in=(0.6, 0.8))
    assert table.norm_drift < 1e-10


def test_unstable_step_rejected():
    p = KernelParams.from_rabi(1.0, 0.1, math.pi / 2)
    with pytest.raises(OracleError):
        integrate_kernel(p, GridConfig(10, p.duration))
    with pytest.raises(OracleError):
        integrate_kernel(p, GridConfig(1000, 2 * p.duration))


def test_grid_validation():
    with pytest.raises(OracleError):
        GridConfig(0, 1.0)
    with pytest.raises(OracleError):
        GridConfig(10, 1.0, order="euler")


def test_noise_coefficients_match_closed_form():
    p = KernelParams.from_rabi(1.0, 0.3, math.pi / 2, phi=0.7, phi_p=0.2)
    res = compare_with_analytic(p, mean_in=(0.6, 0.8j))
    for key in ("++1", "+-2", "-+1", "--2"):
        assert res[key] < 1e-6, key
    assert res["+_spill"] < 1e-9 and res["-_spill"] < 1e-9


def test_rk4_fourth_order():
    p = KernelParams.from_rabi(1.0, 0.0, math.pi / 2, phi=0.3)
    e1 = compare_with_analytic(p, GridConfig(20, p.duration))["propagator"]
    e2 = compare_with_analytic(p, GridConfig(40, p.duration))["propagator"]
    assert e1 / e2 == pytest.approx(16.0, rel=0.05)


def test_table_mean_matches_transfer():
    from matterwave.kernel import transfer_matrix

    p = KernelParams.from_rabi(2.0, 0.1, math.pi / 4, phi=1.0)
    table = integrate_kernel(p, GridConfig.for_kernel(p), mean_in=(1.0, 0.0))
    assert np.allclose(table.mean_out, transfer_matrix(p.theta, p.phi) @ [1, 0], atol=1e-12)
    assert table.notes


# Monte-Carlo


def _quad(reg, label, amp=1.0):
    m = reg.register(label)
    return (reg.annihilation(m) + reg.creation(m)) * amp


def test_monte_carlo_quadrature_variance():
    reg = ModeRegistry()
    x = _quad(reg, "a", 1e3)
    r = monte_carlo(x, 100_000, seed=1)
    assert r.agrees(0, 0, 1e6)


def test_monte_carlo_disjoint_modes():
    reg = ModeRegistry()
    r = monte_carlo([_quad(reg, "a"), _quad(reg, "b")], 20_000, seed=2)
    assert r.agrees(0, 1, 0.0)


def test_monte_carlo_filtered_mode():
    reg = ModeRegistry()
    c = reg.register("c", ModeKind.FILTERED_OPTICAL, window=(0.0, 2.0))
    w = WeightKernel.complex_exponential((0.0, 2.0), 1.5, 0.8)
    x = reg.annihilation(c, w)
    x = x + x.dagger()
    r = monte_carlo(x, 50_000, seed=3)
    assert r.agrees(0, 0, 2.0 * 0.64)


def test_monte_carlo_deterministic():
    s = SequenceSpec.mach_zehnder(1.0, 0.05, 5.0)
    a = monte_carlo(s, 5000, seed=9).as_dict()
    b = monte_carlo(s, 5000, seed=9).as_dict()
    assert a == b
    assert monte_carlo(s, 5000, seed=10).as_dict() != a


def test_monte_carlo_sequence_variance():
    out = run_sequence(SequenceSpec.mach_zehnder(1.0, 0.1, 10.0))
    r = monte_carlo(out, 50_000, seed=4, n_bins=512)
    assert r.agrees(0, 0, out.variance)


def test_monte_carlo_pair_covariance_sign():
    s = SequenceSpec.mach_zehnder(1.0, 0.1, 10.0)
    p = run_pair(s, s)
    r = monte_carlo(p, 20_000, seed=5)
    assert np.sign(r.cov[0, 1]) == np.sign(covariance(p.first.delta_n, p.second.delta_n).real)


def test_monte_carlo_guards():
    reg = ModeRegistry()
    x = _quad(reg, "a")
    with pytest.raises(OracleError):
        monte_carlo(x, 100)
    with pytest.raises(OracleError):
        monte_carlo(reg.annihilation(reg["a"]), 1000)


# profile identities


def test_profile_checks_default():
    report = profile_checks()
    assert report.passed
    got = {c.name: c for c in report.checks}
    assert abs(got["profile_norm"].value - 1) < 1e-10
    assert abs(got["half_factor"].value - 0.5) < 1e-8
    assert abs(got["effective_commutator"].value - 1) < 1e-8
    doc = json.loads(report.to_json())
    assert doc["passed"] and len(doc["checks"]) == len(report.checks)


@pytest.mark.parametrize("delta_a,z0", [(0.5, 0.0), (3.0, 1.2)])
def test_profile_checks_other_widths(delta_a, z0):
    assert profile_checks(ProfileSpec(delta_a=delta_a, z0=z0)).passed


def test_unnormalised_profile_rejected():
    with pytest.raises(OracleError):
        profile_checks(ProfileSpec(amplitude=2.0))
