"""A single atom-light interaction kernel.

One kernel is a two-photon Raman pulse of duration ``tau`` driven by a control
and a passive field.  The mean atom fields follow Rabi dynamics; fluctuations
are propagated to linear order with optical Langevin injection through the
continuum channels of the two fields.  The control field leaving a kernel
carries the atom fluctuations it picked up (see :class:`OpticalField`); a later
kernel driven by that same field receives them as back-action.

Phase conventions: the mean optical amplitudes are ``|a_j| exp(-i phi_j)``, so
the atoms see ``phi = phi_c - phi_p``.  Quadratures are referenced to
``exp(i phi_c) a_c`` and ``exp(i phi_p) a_p``; with those, the ``+-`` basis
equations take the closed form implemented in :func:`evolve_fluctuations`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .mode_algebra import (
    ExpSum,
    ModeId,
    ModeKind,
    ModeRegistry,
    OperatorExpr,
    WeightKernel,
    combine,
)

SQRT2 = math.sqrt(2.0)

__all__ = [
    "KernelError",
    "KernelParams",
    "TimeExpr",
    "OpticalField",
    "KernelRecord",
    "ForceTerms",
    "transfer_matrix",
    "basis_change",
    "rabi_mean",
    "mean_trajectory",
    "free_propagator",
    "evolve_fluctuations",
    "propagate_kernel",
    "force_decomposition",
    "output_optical",
    "apply_back_action",
    "back_action_force",
]


class KernelError(ValueError):
    pass


@dataclass(frozen=True)
class KernelParams:
    """Parameters of one interaction kernel.

    ``rabi`` is the Rabi frequency ``Omega = chi |a_c a_p|``; ``chi_c`` and
    ``chi_p`` are the single-field optical couplings ``chi |a_c|`` and
    ``chi |a_p|``.  Storing the couplings rather than ``chi`` and the two
    amplitudes keeps the decoupled limit ``chi_a -> 0`` representable.
    """

    rabi: float
    chi_c: float
    chi_p: float
    duration: float
    phi_c: float = 0.0
    phi_p: float = 0.0
    signal_phase: float = 0.0

    def __post_init__(self):
        if self.rabi < 0:
            raise KernelError("Rabi frequency must be non-negative")
        if not self.duration > 0:
            raise KernelError("kernel duration must be positive")
        if self.chi_c < 0 or self.chi_p < 0:
            raise KernelError("optical couplings are magnitudes and must be >= 0")

    @classmethod
    def from_fields(cls, chi, a_c_amp, a_p_amp, duration, phi_c=0.0, phi_p=0.0, signal_phase=0.0):
        chi = abs(chi)
        return cls(
            rabi=chi * abs(a_c_amp * a_p_amp),
            chi_c=chi * abs(a_c_amp),
            chi_p=chi * abs(a_p_amp),
            duration=duration,
            phi_c=phi_c,
            phi_p=phi_p,
            signal_phase=signal_phase,
        )

    @classmethod
    def from_rabi(cls, rabi, chi_a, theta, phi=0.0, signal_phase=0.0, phi_p=0.0):
        """Balanced kernel with pulse area ``theta = rabi * duration``."""
        if not rabi > 0:
            raise KernelError("from_rabi needs a positive Rabi frequency")
        return cls(
            rabi=rabi,
            chi_c=chi_a,
            chi_p=chi_a,
            duration=theta / rabi,
            phi_c=phi + phi_p,
            phi_p=phi_p,
            signal_phase=signal_phase,
        )

    @property
    def phi(self) -> float:
        return self.phi_c - self.phi_p

    @property
    def theta(self) -> float:
        return self.rabi * self.duration

    @property
    def balanced(self) -> bool:
        return self.chi_c == self.chi_p

    @property
    def chi_a(self) -> float:
        if not self.balanced:
            raise KernelError("chi_a is only defined for balanced fields")
        return self.chi_c

    @property
    def chi(self) -> float:
        return self.chi_c * self.chi_p / self.rabi if self.rabi else 0.0

    @property
    def a_c_amp(self) -> float:
        return self.chi_c / self.chi if self.chi else math.inf

    @property
    def a_p_amp(self) -> float:
        return self.chi_p / self.chi if self.chi else math.inf

    @property
    def window(self) -> tuple[float, float]:
        return (0.0, float(self.duration))


# --------------------------------------------------------------------------
# matrices and mean field
# --------------------------------------------------------------------------


def transfer_matrix(theta: float, phi: float) -> np.ndarray:
    """Atom-field transfer matrix in the ``(A, B)`` basis."""
    c, s = math.cos(theta), math.sin(theta)
    return np.array(
        [[c, -1j * s * np.exp(1j * phi)], [-1j * s * np.exp(-1j * phi), c]],
        dtype=complex,
    )


def transfer_matrix_dphi(theta: float, phi: float) -> np.ndarray:
    """``d M(theta, phi) / d phi``, the first-order response to a phase shift."""
    s = math.sin(theta)
    return np.array([[0, s * np.exp(1j * phi)], [-s * np.exp(-1j * phi), 0]], dtype=complex)


def basis_change(phi: float) -> np.ndarray:
    """Maps ``(A_+, A_-)`` to ``(A_A, A_B)``."""
    e = np.exp(1j * phi / 2)
    return np.array([[e, e], [1 / e, -1 / e]], dtype=complex) / SQRT2


def free_propagator(params: KernelParams) -> tuple[tuple[ExpSum, ExpSum], tuple[ExpSum, ExpSum]]:
    """Entries of ``M(Omega t, phi)`` as functions of kernel time ``t``."""
    w, phi = params.rabi, params.phi
    return (
        (ExpSum.cosine(w), ExpSum.sinusoid(w, -1j * np.exp(1j * phi))),
        (ExpSum.sinusoid(w, -1j * np.exp(-1j * phi)), ExpSum.cosine(w)),
    )


def mean_trajectory(params: KernelParams, mean_in) -> tuple[ExpSum, ExpSum]:
    """Mean fields ``(A_A(t), A_B(t))`` during the kernel."""
    (maa, mab), (mba, mbb) = free_propagator(params)
    a0, b0 = complex(mean_in[0]), complex(mean_in[1])
    return maa * a0 + mab * b0, mba * a0 + mbb * b0


def rabi_mean(params: KernelParams, mean_in, t: float) -> tuple[complex, complex]:
    if not (0.0 <= t <= params.duration * (1 + 1e-12)):
        raise KernelError(f"t={t} outside kernel window [0, {params.duration}]")
    fa, fb = mean_trajectory(params, mean_in)
    return complex(fa(t)), complex(fb(t))


# --------------------------------------------------------------------------
# time-dependent operators carried by the control field
# --------------------------------------------------------------------------


class TimeExpr:
    """``sum_k f_k(t) X_k``: fixed operators with time-dependent weights."""

    __slots__ = ("terms",)

    def __init__(self, terms: Iterable[tuple[ExpSum, OperatorExpr]] = ()):
        self.terms = tuple((f, x) for f, x in terms if not f.is_zero() and x.coeffs)

    def __add__(self, other: "TimeExpr") -> "TimeExpr":
        return TimeExpr(self.terms + other.terms)

    def __bool__(self) -> bool:
        return bool(self.terms)

    def weighted(self, g: ExpSum) -> "TimeExpr":
        return TimeExpr((g * f, x) for f, x in self.terms)

    def dagger(self) -> "TimeExpr":
        return TimeExpr((f.conj(), x.dagger()) for f, x in self.terms)

    def integrate(self, t0: float, t1: float, registry: ModeRegistry) -> OperatorExpr:
        if not self.terms:
            return registry.zero()
        return combine([(f.integrate(t0, t1), x) for f, x in self.terms])

    def at(self, t: float, registry: ModeRegistry) -> OperatorExpr:
        if not self.terms:
            return registry.zero()
        return combine([(complex(f(t)), x) for f, x in self.terms])


@dataclass(frozen=True)
class OpticalField:
    """Outgoing field ``a_out(t) = a_in(t) + extra(t)`` on one channel.

    ``a_in`` is the continuum mode ``channel``; ``extra`` holds the atom
    fluctuations written onto the field by every kernel it has crossed.
    """

    channel: ModeId
    extra: TimeExpr
    registry: ModeRegistry = field(repr=False)

    def smear(self, kernel: WeightKernel | ExpSum) -> OperatorExpr:
        """``int w(t) a_out(t) dt``."""
        base = self.registry.annihilation(self.channel, kernel)
        func = kernel.func if isinstance(kernel, WeightKernel) else kernel
        return base + self.extra.weighted(func).integrate(*self.channel.window, self.registry)

    def extra_at(self, t: float) -> OperatorExpr:
        return self.extra.at(t, self.registry)

    def commutator_deficit(self, t: float) -> complex:
        """``[a_out(t), a_out(t)^dag] - [a_in(t), a_in(t)^dag]``."""
        from .mode_algebra import commutator

        x = self.extra_at(t)
        return commutator(x, x.dagger())


@dataclass(frozen=True)
class KernelRecord:
    params: KernelParams
    mean_in: tuple[complex, complex]
    mean_out: tuple[complex, complex]
    signal_in: tuple[complex, complex]
    signal_out: tuple[complex, complex]
    fluct_in: tuple[OperatorExpr, OperatorExpr]
    fluct_out: tuple[OperatorExpr, OperatorExpr]
    channels: tuple[ModeId, ModeId]
    registry: ModeRegistry = field(repr=False)
    beam_in: TimeExpr = field(default_factory=TimeExpr)
    label: str = ""
    _written: list = field(default_factory=list, init=False, repr=False, compare=False)

    def written_fields(self) -> tuple[TimeExpr, TimeExpr]:
        """Atom content written onto the control and passive fields (cached)."""
        if not self._written:
            self._written.extend(_written_fields(self.params, self.mean_in, self.fluct_in))
        return self._written[0], self._written[1]

    @property
    def control_out(self) -> OpticalField:
        return OpticalField(self.channels[0], self.beam_in + self.written_fields()[0], self.registry)

    @property
    def passive_out(self) -> OpticalField:
        return OpticalField(self.channels[1], self.written_fields()[1], self.registry)

    def mean_at(self, t: float) -> tuple[complex, complex]:
        return rabi_mean(self.params, self.mean_in, t)

    def norm_drift(self, n: int = 257) -> float:
        fa, fb = mean_trajectory(self.params, self.mean_in)
        t = np.linspace(0, self.params.duration, n)
        norm = np.abs(fa(t)) ** 2 + np.abs(fb(t)) ** 2
        return float(np.max(np.abs(norm - norm[0])))

    @property
    def diagnostics(self) -> dict:
        n_atoms = abs(self.mean_in[0]) ** 2 + abs(self.mean_in[1]) ** 2
        p = self.params
        # photons per pulse in time-normalised units: |a|^2 * duration
        n_photons = (p.a_c_amp ** 2) * p.duration if p.chi else math.inf
        return {
            "scattering_ratio": math.sqrt(n_atoms / n_photons) if n_photons else math.inf,
            "norm_drift": self.norm_drift(),
        }


# --------------------------------------------------------------------------
# forces
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ForceTerms:
    """Optical forces on the atom fields at one instant.

    ``langevin[port]`` maps ``"a_c" | "a_c_dag" | "a_p" | "a_p_dag"`` to the
    coefficient of that incoming field; ``ponderomotive`` is the c-number
    force; ``dynamical`` the operator-valued force on the fluctuations.
    """

    langevin: dict
    ponderomotive: tuple[complex, complex]
    dynamical: tuple[OperatorExpr, OperatorExpr]
    imbalance: float


def force_decomposition(params: KernelParams, means, fluct) -> ForceTerms:
    abar, bbar = complex(means[0]), complex(means[1])
    xa, xb = fluct
    cc, cp = params.chi_c, params.chi_p
    langevin = {
        "A": {
            "a_c_dag": -1j * bbar * cp * np.exp(-1j * params.phi_p),
            "a_p": -1j * bbar * cc * np.exp(1j * params.phi_c),
        },
        "B": {
            "a_c": -1j * abar * cp * np.exp(1j * params.phi_p),
            "a_p_dag": -1j * abar * cc * np.exp(-1j * params.phi_c),
        },
    }
    # chi^2 (|a_p|^2 - |a_c|^2); exactly zero when balanced
    imbalance = cp * cp - cc * cc
    f_cl = (
        0.5 * imbalance * abs(bbar) ** 2 * abar,
        0.5 * imbalance * abs(abar) ** 2 * bbar,
    )
    f_dy = (
        combine([(0.5 * imbalance * abar * bbar, xb.dagger()), (0.5 * imbalance * abs(bbar) ** 2, xa)]),
        combine([(0.5 * imbalance * bbar * abar, xa.dagger()), (0.5 * imbalance * abs(abar) ** 2, xb)]),
    )
    return ForceTerms(langevin, f_cl, f_dy, imbalance)


# --------------------------------------------------------------------------
# fluctuations
# --------------------------------------------------------------------------


def _check_channels(params: KernelParams, channels: Sequence[ModeId], registry: ModeRegistry):
    for ch in channels:
        registry.require(ch)
        if ch.kind is not ModeKind.FILTERED_OPTICAL:
            raise KernelError(f"{ch!r} is not an optical channel")
        if not all(math.isclose(a, b, rel_tol=1e-12) for a, b in zip(ch.window, params.window)):
            raise KernelError(f"channel {ch!r} window {ch.window} does not match pulse {params.window}")


def _plus_minus_kernels(params: KernelParams, mean_in):
    """Propagated Langevin kernels for ``A_+(tau)`` and ``A_-(tau)``.

    Returns, for each of ``+`` and ``-``, the pair ``(K1, K2)`` of functions of
    ``t'`` multiplying the quadratures ``a_{+in1}(t')`` and ``a_{-in2}(t')``.
    """
    w, tau, phi = params.rabi, params.duration, params.phi
    chi_a = params.chi_a
    c, d = np.exp(-0.5j * phi), np.exp(0.5j * phi)
    a0, b0 = complex(mean_in[0]), complex(mean_in[1])
    ap0 = (c * a0 + d * b0) / SQRT2
    am0 = (c * a0 - d * b0) / SQRT2
    ap = ExpSum.exponential(-w, ap0)
    am = ExpSum.exponential(w, am0)
    g_plus = ExpSum.exponential(w, np.exp(-1j * w * tau))  # exp(-i w (tau - t'))
    g_minus = ExpSum.exponential(-w, np.exp(1j * w * tau))
    k_plus = (-1j * chi_a * (g_plus * ap), chi_a * (g_plus * am))
    k_minus = (1j * chi_a * (g_minus * am), -chi_a * (g_minus * ap))
    return k_plus, k_minus


def _raw_channel_kernels(params: KernelParams, k1: ExpSum, k2: ExpSum) -> dict[str, ExpSum]:
    """Expand ``K1 a_{+1} + K2 a_{-2}`` on ``a_c, a_c^dag, a_p, a_p^dag``."""
    half1 = 0.5 * k1
    half2 = (0.5 / 1j) * k2
    ec, ep = np.exp(1j * params.phi_c), np.exp(1j * params.phi_p)
    return {
        "a_c": (half1 + half2) * ec,
        "a_c_dag": (half1 - half2) * np.conj(ec),
        "a_p": (half1 - half2) * ep,
        "a_p_dag": (half1 + half2) * np.conj(ep),
    }


def quadrature_kernels(params: KernelParams, mean_in) -> dict[str, tuple[ExpSum, ExpSum]]:
    """``{"+": (K1, K2), "-": (K1, K2)}`` on ``(a_{+in1}, a_{-in2})``."""
    k_plus, k_minus = _plus_minus_kernels(params, mean_in)
    return {"+": k_plus, "-": k_minus}


def _filtered_expr(registry, params, channels, raw: dict[str, ExpSum]) -> OperatorExpr:
    c_mode, p_mode = channels
    win = params.window
    return OperatorExpr(
        registry,
        0j,
        {
            c_mode: (WeightKernel(win, raw["a_c"]), WeightKernel(win, raw["a_c_dag"])),
            p_mode: (WeightKernel(win, raw["a_p"]), WeightKernel(win, raw["a_p_dag"])),
        },
    )


def _from_plus_minus(phi: float, plus: OperatorExpr, minus: OperatorExpr):
    e = np.exp(0.5j * phi)
    a = combine([(e / SQRT2, plus), (e / SQRT2, minus)])
    b = combine([(1 / (e * SQRT2), plus), (-1 / (e * SQRT2), minus)])
    return a, b


def _to_plus_minus(phi: float, xa: OperatorExpr, xb: OperatorExpr):
    c, d = np.exp(-0.5j * phi), np.exp(0.5j * phi)
    return (
        combine([(c / SQRT2, xa), (d / SQRT2, xb)]),
        combine([(c / SQRT2, xa), (-d / SQRT2, xb)]),
    )


def evolve_fluctuations(
    params: KernelParams,
    atom_in: Sequence[OperatorExpr],
    optical_channels: Sequence[ModeId],
    registry: ModeRegistry,
    mean_in=(1.0, 0.0),
    beam_in: TimeExpr | None = None,
) -> tuple[OperatorExpr, OperatorExpr]:
    """Atom fluctuations ``(A_A, A_B)`` at the end of the kernel.

    Each ``+-`` component is its free propagation plus the optical noise
    filtered through ``exp(-+ i Omega (tau - t'))`` times the mean trajectory.
    ``beam_in`` adds atom fluctuations carried in on the control field by
    upstream kernels (back-action).
    """
    if not params.balanced:
        raise KernelError(
            "evolve_fluctuations needs balanced control/passive amplitudes; "
            "use force_decomposition for the unbalanced dynamical terms"
        )
    _check_channels(params, optical_channels, registry)
    xa, xb = atom_in
    w, tau, phi = params.rabi, params.duration, params.phi

    xp, xm = _to_plus_minus(phi, xa, xb)
    free_p = xp * np.exp(-1j * w * tau)
    free_m = xm * np.exp(1j * w * tau)

    k_plus, k_minus = _plus_minus_kernels(params, mean_in)
    raw_p = _raw_channel_kernels(params, *k_plus)
    raw_m = _raw_channel_kernels(params, *k_minus)
    opt_p = _filtered_expr(registry, params, optical_channels, raw_p)
    opt_m = _filtered_expr(registry, params, optical_channels, raw_m)

    plus = free_p + opt_p
    minus = free_m + opt_m
    if beam_in:
        ba_p, ba_m = _beam_response(params, raw_p, raw_m, beam_in, registry)
        plus = plus + ba_p
        minus = minus + ba_m
    return _from_plus_minus(phi, plus, minus)


def _beam_response(params, raw_p, raw_m, beam: TimeExpr, registry):
    """``+-`` responses to extra operator content ``beam(t)`` on the control input."""
    beam_dag = beam.dagger()
    t0, t1 = params.window
    out = []
    for raw in (raw_p, raw_m):
        total = beam.weighted(raw["a_c"]) + beam_dag.weighted(raw["a_c_dag"])
        out.append(total.integrate(t0, t1, registry))
    return tuple(out)


def _written_fields(params: KernelParams, mean_in, fluct_in) -> tuple[TimeExpr, TimeExpr]:
    """Atom fluctuations written onto the control and passive fields.

    Uses the freely propagated kernel-entry fluctuations; the kernel's own
    optical noise and any back-action it receives would enter at higher order
    in the coupling.
    """
    fa, fb = mean_trajectory(params, mean_in)
    (maa, mab), (mba, mbb) = free_propagator(params)
    xa, xb = fluct_in
    xa_d, xb_d = xa.dagger(), xb.dagger()
    kc = -1j * params.chi_p * np.exp(-1j * params.phi_p)
    kp = -1j * params.chi_c * np.exp(-1j * params.phi_c)
    fa_c, fb_c = fa.conj(), fb.conj()
    control = TimeExpr(
        [
            (kc * (fa_c * mba), xa),
            (kc * (fa_c * mbb), xb),
            (kc * (fb * maa.conj()), xa_d),
            (kc * (fb * mab.conj()), xb_d),
        ]
    )
    passive = TimeExpr(
        [
            (kp * (fa * mba.conj()), xa_d),
            (kp * (fa * mbb.conj()), xb_d),
            (kp * (fb_c * maa), xa),
            (kp * (fb_c * mab), xb),
        ]
    )
    return control, passive


def propagate_kernel(
    params: KernelParams,
    mean_in,
    atom_in: Sequence[OperatorExpr],
    channels: Sequence[ModeId],
    registry: ModeRegistry,
    signal_in=(0j, 0j),
    beam_in: TimeExpr | None = None,
    label: str = "",
    noise: bool = True,
) -> KernelRecord:
    """Run one kernel: mean, first-order signal, fluctuations and output fields.

    ``noise=False`` skips the fluctuations (returned as zero) for signal-only
    scans; means and signals are unaffected.
    """
    beam_in = beam_in or TimeExpr()
    mean_in = (complex(mean_in[0]), complex(mean_in[1]))
    m = transfer_matrix(params.theta, params.phi)
    mean_out = tuple(complex(v) for v in m @ np.array(mean_in))
    dm = transfer_matrix_dphi(params.theta, params.phi)
    sig = m @ np.array(signal_in, dtype=complex) + params.signal_phase * (dm @ np.array(mean_in))
    if noise:
        fluct_out = evolve_fluctuations(params, atom_in, channels, registry, mean_in, beam_in)
    else:
        fluct_out = (registry.zero(), registry.zero())
    return KernelRecord(
        params=params,
        mean_in=mean_in,
        mean_out=mean_out,
        signal_in=tuple(complex(s) for s in signal_in),
        signal_out=(complex(sig[0]), complex(sig[1])),
        fluct_in=tuple(atom_in),
        fluct_out=fluct_out,
        channels=tuple(channels),
        registry=registry,
        beam_in=beam_in,
        label=label,
    )


def output_optical(params: KernelParams, record: KernelRecord) -> tuple[OpticalField, OpticalField]:
    """Control and passive fields leaving the kernel."""
    return record.control_out, record.passive_out


def back_action_force(downstream: KernelParams, mean_in, upstream: KernelRecord, t: float):
    """Back-action force ``(F_A, F_B)`` on a downstream kernel at time ``t``.

    Only the part carried in by ``upstream``'s own atoms is returned.
    """
    reg = upstream.registry
    written, _ = upstream.written_fields()
    delta = written.at(t, reg)
    abar, bbar = rabi_mean(downstream, mean_in, t)
    cp = downstream.chi_p
    f_a = delta.dagger() * (-1j * bbar * cp * np.exp(-1j * downstream.phi_p))
    f_b = delta * (-1j * abar * cp * np.exp(1j * downstream.phi_p))
    return f_a, f_b


def apply_back_action(
    params: KernelParams,
    mean_in,
    upstream: KernelRecord,
    control_channel: ModeId | None = None,
) -> tuple[OperatorExpr, OperatorExpr]:
    """Additive correction to the downstream atom fluctuations.

    ``params``/``mean_in`` describe the downstream kernel, which must be driven
    by the control field leaving ``upstream`` with the same amplitude.
    """
    if control_channel is not None and control_channel != upstream.channels[0]:
        raise KernelError("downstream control channel is not the upstream control field")
    if not params.balanced or not upstream.params.balanced:
        raise KernelError("back-action composition needs balanced fields")
    if params.chi_a != upstream.params.chi_a:
        raise KernelError("shared control field must have the same amplitude on both kernels")
    if not math.isclose(params.duration, upstream.params.duration, rel_tol=1e-12):
        raise KernelError("shared control pulse must have the same duration on both kernels")
    registry = upstream.registry
    written, _ = upstream.written_fields()
    k_plus, k_minus = _plus_minus_kernels(params, mean_in)
    raw_p = _raw_channel_kernels(params, *k_plus)
    raw_m = _raw_channel_kernels(params, *k_minus)
    plus, minus = _beam_response(params, raw_p, raw_m, written, registry)
    return _from_plus_minus(params.phi, plus, minus)
