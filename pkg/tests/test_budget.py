import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from matterwave.budget import (
    LabParams,
    ValidityWarning,
    error_budget,
    map_params,
    optimize_atom_number,
)

LAB = dict(pulse_length=0.3, photon_number=1e8, atom_number=1e4, omega_laser=2.4e15,
           omega_atom=4e10, g13=3e6, g23=2e6, detuning=1e9, omega30=2.4e15)


def test_budget_arithmetic():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ValidityWarning)
        b = error_budget(1e6, 1e6, 1.0)
    assert (b.back_action, b.atom_shot, b.optical) == pytest.approx((1e-6, 2e-6, 1e-6), rel=1e-15)
    assert b.total == pytest.approx(4e-6, rel=1e-15)
    assert b.sql_value == 1e-6
    assert b.kind == "scaling estimate"


def test_back_action_dominates_at_large_atom_number():
    b = error_budget(1e12, 1e6, 1.0, warn=False)
    assert b.back_action > 1e3 * (b.atom_shot + b.optical)


def test_validity_warning():
    with pytest.warns(ValidityWarning):
        b = error_budget(1e5, 1e6)
    assert b.warnings
    assert not error_budget(9.9e4, 1e6).warnings


def test_budget_rejects_non_positive():
    with pytest.raises(ValueError):
        error_budget(0.0, 1e6)


@settings(max_examples=300, deadline=None)
@given(st.floats(1.0, 1e12), st.floats(1.0, 1e10), st.floats(0.1, 3.0))
def test_budget_identity_and_floor(n_a, n_l, k):
    b = error_budget(n_a, n_l, k, warn=False)
    assert b.back_action > 0 and b.atom_shot > 0 and b.optical > 0
    assert b.total == b.back_action + b.atom_shot + b.optical
    assert b.total >= 1.0 / n_l


def test_optimum_at_sqrt2():
    n, var = optimize_atom_number(1e6, math.sqrt(2))
    assert n == pytest.approx(1e6, rel=1e-12)
    assert var == pytest.approx((4 + 1) / 1e6, rel=1e-12)


def test_optimum_scales_with_photon_number():
    assert optimize_atom_number(1e8).atom_number / optimize_atom_number(1e6).atom_number == pytest.approx(100)


@pytest.mark.parametrize("n_l", [1e4, 1e6, 1e8])
@pytest.mark.parametrize("k", [math.pi / 4, 1.0, math.pi / 2])
def test_optimum_beats_log_grid(n_l, k):
    opt = optimize_atom_number(n_l, k)
    grid = np.logspace(0, math.log10(1e3 * n_l), 10_000)
    vals = grid * k ** 2 / n_l ** 2 + 2 / grid + 1 / n_l
    assert opt.variance <= vals.min() * (1 + 1e-15)
    assert grid[np.argmin(vals)] == pytest.approx(opt.atom_number, rel=5e-3)
    assert opt.sql_ratio == pytest.approx(2 * math.sqrt(2) * k + 1, rel=1e-12)


def test_map_params_identity():
    m = map_params(LabParams(**LAB))
    k = m.pulse_area
    assert m.chi_a ** 2 / m.rabi == pytest.approx(k / LAB["photon_number"], rel=1e-12)
    assert m.identity_residual < 1e-12
    assert m.kernel.balanced and m.kernel.rabi == m.rabi
    assert m.chi < 0


@settings(max_examples=200, deadline=None)
@given(st.floats(1e-3, 10), st.floats(1e2, 1e12), st.floats(1e3, 1e8), st.floats(1e5, 1e10))
def test_map_params_identity_randomized(l_a, n_l, g, det):
    lab = LabParams(**{**LAB, "pulse_length": l_a, "photon_number": n_l, "g13": g, "detuning": det})
    m = map_params(lab)
    assert m.identity_residual < 1e-12


def test_detuning_halves_coupling():
    m1 = map_params(LabParams(**LAB))
    m2 = map_params(LabParams(**{**LAB, "detuning": 2 * LAB["detuning"]}))
    assert m2.g_eff == pytest.approx(m1.g_eff / 2, rel=1e-15)


def test_beam_area_reduces_coupling():
    m1 = map_params(LabParams(**LAB))
    m2 = map_params(LabParams(**LAB, beam_area=4.0))
    assert m2.g_eff == pytest.approx(m1.g_eff / 4, rel=1e-15)


def test_pi_half_pulse_area():
    # pick g13 so that Omega l_a / c = pi / 2
    m = map_params(LabParams(**LAB))
    scale = (math.pi / 2) / m.pulse_area
    m2 = map_params(LabParams(**{**LAB, "g13": LAB["g13"] * scale}))
    assert m2.pulse_area == pytest.approx(math.pi / 2, rel=1e-12)
    assert m2.kernel.theta == pytest.approx(math.pi / 2, rel=1e-12)


def test_zero_detuning_rejected():
    with pytest.raises(ValueError):
        LabParams(**{**LAB, "detuning": 0.0})


def test_map_params_validity_note():
    m = map_params(LabParams(**{**LAB, "atom_number": 5e7}))
    assert m.warnings
