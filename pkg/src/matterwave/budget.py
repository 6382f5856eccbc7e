"""Laboratory parameter mapping and the single-interferometer error budget.

The budget terms are scaling estimates: back-action ``N_a k^2 / N_L^2``, atom
shot noise ``2 / N_a`` and photon shot noise ``1 / N_L``, with
``k = Omega l_a / c`` the pulse area.  The first two trade off against each
other; the floor that remains is the photon shot noise, the standard quantum
limit of the device.  That floor only holds by extrapolation: near
``N_a ~ N_L`` the linearised atom-light model breaks down, so budgets there
carry a validity warning.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

from .kernel import KernelParams

__all__ = [
    "SPEED_OF_LIGHT",
    "VALIDITY_FRACTION",
    "ValidityWarning",
    "LabParams",
    "MappedParams",
    "NoiseBudget",
    "map_params",
    "error_budget",
    "optimize_atom_number",
]

SPEED_OF_LIGHT = 299_792_458.0
# linearisation is flagged once the atom number reaches this fraction of N_L
VALIDITY_FRACTION = 0.1


class ValidityWarning(UserWarning):
    pass


@dataclass(frozen=True)
class LabParams:
    """Laboratory description of one balanced Raman pulse.

    Frequencies are angular (rad/s); ``g13``, ``g23`` are the dipole couplings
    of the 1+1 dimensional scalar model.  If ``beam_area`` is given the 3+1
    couplings are reduced by ``1/sqrt(area)`` per optical field.
    """

    pulse_length: float
    photon_number: float
    atom_number: float
    omega_laser: float
    omega_atom: float
    g13: float
    g23: float
    detuning: float
    omega30: float
    beam_area: float | None = None
    speed_of_light: float = SPEED_OF_LIGHT

    def __post_init__(self):
        if self.detuning == 0:
            raise ValueError("zero detuning: level |3> cannot be adiabatically eliminated")
        for name in ("pulse_length", "photon_number", "atom_number", "omega_laser", "omega_atom",
                     "omega30", "speed_of_light"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.g13 == 0 or self.g23 == 0:
            raise ValueError("dipole couplings must be non-zero")
        if self.beam_area is not None and not self.beam_area > 0:
            raise ValueError("beam_area must be positive")


@dataclass(frozen=True)
class MappedParams:
    kernel: KernelParams
    g_eff: float
    chi: float
    rabi: float
    chi_a: float
    field_amplitude: float
    pulse_area: float  # k = Omega l_a / c
    identity_residual: float  # chi_a^2/Omega vs (Omega l_a/c)/N_L, relative
    warnings: tuple[str, ...] = ()


def map_params(lab: LabParams, phi: float = 0.0) -> MappedParams:
    """Effective-Hamiltonian parameters of ``lab``.

    ``g_eff = g13 g23 / (detuning * omega30)`` is the Raman coupling after
    eliminating level |3>; ``chi = -g_eff / (2 omega_L)``; the field amplitude
    follows from the photon number of a rectangular pulse,
    ``N_L = a_L^2 l_a / c``.
    """
    c = lab.speed_of_light
    g13, g23 = lab.g13, lab.g23
    if lab.beam_area is not None:
        g13 /= math.sqrt(lab.beam_area)
        g23 /= math.sqrt(lab.beam_area)
    g_eff = g13 * g23 / (lab.detuning * lab.omega30)
    chi = -g_eff / (2 * lab.omega_laser)
    a_l = math.sqrt(lab.photon_number * c / lab.pulse_length)
    rabi = abs(chi) * a_l ** 2
    chi_a = abs(chi) * a_l
    duration = lab.pulse_length / c
    k = rabi * duration
    kernel = KernelParams(rabi=rabi, chi_c=chi_a, chi_p=chi_a, duration=duration, phi_c=phi, phi_p=0.0)
    lhs = chi_a ** 2 / rabi
    rhs = k / lab.photon_number
    notes = []
    if lab.atom_number >= VALIDITY_FRACTION * lab.photon_number:
        notes.append(_validity_note(lab.atom_number, lab.photon_number))
    return MappedParams(
        kernel=kernel,
        g_eff=g_eff,
        chi=chi,
        rabi=rabi,
        chi_a=chi_a,
        field_amplitude=a_l,
        pulse_area=k,
        identity_residual=abs(lhs - rhs) / abs(rhs),
        warnings=tuple(notes),
    )


def _validity_note(n_atoms, n_photons) -> str:
    return (
        f"N_a/N_L = {n_atoms / n_photons:.3g} >= {VALIDITY_FRACTION}: the linearised "
        "atom-light model is outside its range; treat the budget as an extrapolation"
    )


@dataclass(frozen=True)
class NoiseBudget:
    back_action: float
    atom_shot: float
    optical: float
    atom_number: float
    photon_number: float
    pulse_area: float
    atom_number_optimum: float
    warnings: tuple[str, ...] = field(default=())
    kind: str = "scaling estimate"

    @property
    def total(self) -> float:
        return self.back_action + self.atom_shot + self.optical

    @property
    def sql_value(self) -> float:
        return 1.0 / self.photon_number

    def as_dict(self) -> dict:
        return {
            "kind": self.kind,
            "back_action": self.back_action,
            "atom_shot": self.atom_shot,
            "optical": self.optical,
            "total": self.total,
            "sql_value": self.sql_value,
            "atom_number": self.atom_number,
            "photon_number": self.photon_number,
            "pulse_area": self.pulse_area,
            "atom_number_optimum": self.atom_number_optimum,
            "warnings": list(self.warnings),
        }


def error_budget(n_atoms: float, n_photons: float, k: float = 1.0, warn: bool = True) -> NoiseBudget:
    if not (n_atoms > 0 and n_photons > 0 and k > 0):
        raise ValueError("atom number, photon number and pulse area must be positive")
    notes = ()
    if n_atoms >= VALIDITY_FRACTION * n_photons:
        notes = (_validity_note(n_atoms, n_photons),)
        if warn:
            warnings.warn(notes[0], ValidityWarning, stacklevel=2)
    return NoiseBudget(
        back_action=n_atoms * k ** 2 / n_photons ** 2,
        atom_shot=2.0 / n_atoms,
        optical=1.0 / n_photons,
        atom_number=float(n_atoms),
        photon_number=float(n_photons),
        pulse_area=float(k),
        atom_number_optimum=math.sqrt(2.0) * n_photons / k,
        warnings=notes,
    )


@dataclass(frozen=True)
class Optimum:
    atom_number: float
    variance: float
    sql_ratio: float  # variance / (1/N_L)

    def __iter__(self):
        return iter((self.atom_number, self.variance))


def optimize_atom_number(n_photons: float, k: float = 1.0) -> Optimum:
    """Atom number balancing back-action against atom shot noise.

    ``d/dN (N k^2/N_L^2 + 2/N) = 0`` gives ``N* = sqrt(2) N_L / k`` and a
    minimum total of ``(2 sqrt(2) k + 1) / N_L``.
    """
    if not (n_photons > 0 and k > 0):
        raise ValueError("photon number and pulse area must be positive")
    n_star = math.sqrt(2.0) * n_photons / k
    var = error_budget(n_star, n_photons, k, warn=False).total
    return Optimum(n_star, var, var * n_photons)
