"""Mach-Zehnder atom interferometer and the two-interferometer detector.

A single interferometer is four kernels: the beam splitter (step 1), the two
mirror pulses acting on the separated A and B clouds (2a, 2b) and the
recombiner (step 3).  The mirror pulses are driven by one control field, so the
atom fluctuations written onto it at 2a act back on 2b.  In the detector pair
every control field leaving interferometer I drives the matching kernel of
interferometer II.

Readout is ``Delta N = N_A - N_B`` after recombination, linearised around the
mean output.  The B-port field is reported with a fixed phase reference of pi
(:data:`B_PORT_FRAME`); particle numbers do not depend on it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .kernel import (
    KernelError,
    KernelParams,
    KernelRecord,
    TimeExpr,
    propagate_kernel,
    transfer_matrix,
    transfer_matrix_dphi,
)
from .mode_algebra import (
    ModeId,
    ModeKind,
    ModeRegistry,
    OperatorExpr,
    coherent,
    covariance,
    vacuum_variance,
)

__all__ = [
    "SequenceSpec",
    "InterferometerOutput",
    "PairOutput",
    "EstimatorResult",
    "B_PORT_FRAME",
    "CANONICAL_THETAS",
    "CANONICAL_PHASES",
    "run_sequence",
    "run_pair",
    "delta_n_decompose",
    "estimator",
    "signal_gradient",
    "gw_phase_response",
    "gw_low_frequency_limit",
]

CANONICAL_THETAS = (math.pi / 4, math.pi / 2, math.pi / 4)
CANONICAL_PHASES = (0.0, 0.0, math.pi / 2)
B_PORT_FRAME = math.pi
STEPS = ("1", "2a", "2b", "3")


@dataclass(frozen=True)
class SequenceSpec:
    """A pi/2 - pi - pi/2 sequence with balanced control and passive fields.

    ``amplitude`` is the initial A-port mean ``sqrt(N_a)``; the B port starts in
    vacuum.  ``signal_phases`` are the small phases ``phi_s1..3`` imprinted at
    the three pulses.  ``link_mirrors`` feeds the control field leaving 2a into
    2b; switching it off gives independent control fields.
    """

    rabi: float
    chi_a: float
    amplitude: float
    signal_phases: tuple[float, float, float] = (0.0, 0.0, 0.0)
    thetas: tuple[float, float, float] = CANONICAL_THETAS
    laser_phases: tuple[float, float, float] = CANONICAL_PHASES
    interrogation_time: float = 1.0
    link_mirrors: bool = True

    def __post_init__(self):
        if not self.rabi > 0:
            raise KernelError("Rabi frequency must be positive")
        if self.chi_a < 0:
            raise KernelError("chi_a must be non-negative")
        if len(self.thetas) != 3 or len(self.signal_phases) != 3 or len(self.laser_phases) != 3:
            raise KernelError("a Mach-Zehnder sequence has exactly three pulses")
        if not np.allclose(self.thetas, CANONICAL_THETAS, rtol=0, atol=1e-12):
            raise KernelError(
                f"only the pi/2-pi-pi/2 sequence (thetas {CANONICAL_THETAS}) is supported, got {self.thetas}"
            )
        if not self.interrogation_time > 0:
            raise KernelError("interrogation time must be positive")

    @classmethod
    def mach_zehnder(cls, rabi, chi_a, amplitude, signal_phases=(0.0, 0.0, 0.0), **kw):
        return cls(rabi=rabi, chi_a=chi_a, amplitude=amplitude, signal_phases=tuple(signal_phases), **kw)

    def kernel(self, step: str) -> KernelParams:
        j = {"1": 0, "2a": 1, "2b": 1, "3": 2}[step]
        return KernelParams.from_rabi(
            self.rabi, self.chi_a, self.thetas[j], phi=self.laser_phases[j], signal_phase=self.signal_phases[j]
        )

    @property
    def signal_combination(self) -> float:
        p1, p2, p3 = self.signal_phases
        return p1 - 2 * p2 + p3


@dataclass
class InterferometerOutput:
    spec: SequenceSpec
    mean_out: tuple[complex, complex]
    signal_out: tuple[complex, complex]
    fluct_out: tuple[OperatorExpr, OperatorExpr]
    delta_n_signal: float
    signal_coefficient: float
    delta_n: OperatorExpr
    groups: dict[str, tuple[ModeId, ...]]
    records: dict[str, KernelRecord] = field(repr=False)
    prefix: str = ""
    noise: bool = True

    def _need_noise(self):
        if not self.noise:
            raise KernelError("this output was run with noise=False")

    @property
    def registry(self) -> ModeRegistry:
        return self.delta_n.registry

    @property
    def noise_parts(self) -> dict[str, float]:
        return delta_n_decompose(self)

    @property
    def variance(self) -> float:
        self._need_noise()
        return vacuum_variance(self.delta_n)

    @property
    def estimator_variance(self) -> float:
        return self.variance / self.signal_coefficient ** 2

    def atom_numbers(self) -> tuple[float, float]:
        """Mean ``(N_A, N_B)`` to first order in the signal."""
        out = []
        for m, s in zip(self.mean_out, self.signal_out):
            out.append(abs(m) ** 2 + 2 * (np.conj(m) * s).real)
        return tuple(out)


@dataclass(frozen=True)
class EstimatorResult:
    estimate: float
    variance: float
    parts: dict
    curvature: float  # estimate / T^2, the phi_s'' reading


@dataclass
class PairOutput:
    first: InterferometerOutput
    second: InterferometerOutput
    covariance: float
    linked: bool

    @property
    def differential_signal(self) -> float:
        return self.first.delta_n_signal - self.second.delta_n_signal

    @property
    def differential_variance(self) -> float:
        return self.first.variance + self.second.variance - 2 * self.covariance

    @property
    def correlation(self) -> float:
        denom = math.sqrt(self.first.variance * self.second.variance)
        return self.covariance / denom if denom else 0.0

    def second_parts(self) -> dict[str, float]:
        """AI_II noise split into own shot, own back-action, back-action from AI_I, optical."""
        dn = self.second.delta_n
        g1, g2 = self.first.groups, self.second.groups
        from_first = g1["atom_shot"] + g1["back_action"]
        return {
            "atom_shot": vacuum_variance(dn.restrict(g2["atom_shot"])),
            "back_action": vacuum_variance(dn.restrict(g2["back_action"])),
            "back_action_from_first": vacuum_variance(dn.restrict(from_first)),
            "optical": vacuum_variance(dn.restrict(g1["optical"] + g2["optical"])),
        }


# --------------------------------------------------------------------------
# signal chain (numbers only)
# --------------------------------------------------------------------------


def _chain(spec: SequenceSpec, signal_phases):
    """Means and first-order signals through the four kernels."""
    th, ph = spec.thetas, spec.laser_phases
    mean0 = np.array([spec.amplitude, 0.0], dtype=complex)
    zero = np.zeros(2, dtype=complex)

    def step(theta, phi, phis, mean, sig):
        m = transfer_matrix(theta, phi)
        return m @ mean, m @ sig + phis * (transfer_matrix_dphi(theta, phi) @ mean)

    m1, s1 = step(th[0], ph[0], signal_phases[0], mean0, zero)
    m2a, s2a = step(th[1], ph[1], signal_phases[1], np.array([m1[0], 0]), np.array([s1[0], 0]))
    m2b, s2b = step(th[1], ph[1], signal_phases[1], np.array([0, m1[1]]), np.array([0, s1[1]]))
    m3, s3 = step(th[2], ph[2], signal_phases[2], np.array([m2b[0], m2a[1]]), np.array([s2b[0], s2a[1]]))
    return m3, s3


def _readout(mean, sig) -> float:
    return 2 * (np.conj(mean[0]) * sig[0]).real - 2 * (np.conj(mean[1]) * sig[1]).real


def signal_gradient(spec: SequenceSpec) -> np.ndarray:
    """``d(Delta N)/d(phi_s1, phi_s2, phi_s3)``."""
    grad = np.empty(3)
    for j in range(3):
        e = np.zeros(3)
        e[j] = 1.0
        grad[j] = _readout(*_chain(spec, e))
    return grad


# --------------------------------------------------------------------------
# full sequence
# --------------------------------------------------------------------------


@dataclass
class _Wiring:
    """Control channel and incoming control content for each step."""

    control: dict[str, ModeId]
    beams: dict[str, TimeExpr]


def _register_atoms(registry, prefix, amplitude):
    return {
        "A_ini": registry.register(prefix + "A_ini", state=coherent(amplitude)),
        "B_ini": registry.register(prefix + "B_ini"),
        "A2": registry.register(prefix + "A2"),
        "B2": registry.register(prefix + "B2"),
    }


def _optical(registry, label, window):
    return registry.register(label, ModeKind.FILTERED_OPTICAL, window=window)


def _fresh_wiring(spec, registry, prefix) -> _Wiring:
    w1 = spec.kernel("1").window
    w2 = spec.kernel("2a").window
    w3 = spec.kernel("3").window
    c2 = _optical(registry, prefix + "c2a", w2)
    control = {
        "1": _optical(registry, prefix + "c1", w1),
        "2a": c2,
        "2b": c2 if spec.link_mirrors else _optical(registry, prefix + "c2b", w2),
        "3": _optical(registry, prefix + "c3", w3),
    }
    return _Wiring(control, {})


def _run(spec: SequenceSpec, registry: ModeRegistry, prefix: str, wiring: _Wiring, noise: bool = True):
    atoms = _register_atoms(registry, prefix, spec.amplitude)
    a = {k: registry.annihilation(m) for k, m in atoms.items()}
    passive = {s: _optical(registry, f"{prefix}p{s}", spec.kernel(s).window) for s in STEPS}
    records: dict[str, KernelRecord] = {}

    def run(step, mean, fluct, sig):
        params = spec.kernel(step)
        beam = wiring.beams.get(step, TimeExpr())
        if step == "2b" and spec.link_mirrors:
            beam = records["2a"].control_out.extra
        records[step] = propagate_kernel(
            params, mean, fluct, (wiring.control[step], passive[step]), registry,
            signal_in=sig, beam_in=beam, label=prefix + step, noise=noise,
        )
        return records[step]

    r1 = run("1", (spec.amplitude, 0.0), (a["A_ini"], a["B_ini"]), (0j, 0j))
    r2a = run("2a", (r1.mean_out[0], 0j), (r1.fluct_out[0], a["B2"]), (r1.signal_out[0], 0j))
    r2b = run("2b", (0j, r1.mean_out[1]), (a["A2"], r1.fluct_out[1]), (0j, r1.signal_out[1]))
    r3 = run(
        "3",
        (r2b.mean_out[0], r2a.mean_out[1]),
        (r2b.fluct_out[0], r2a.fluct_out[1]),
        (r2b.signal_out[0], r2a.signal_out[1]),
    )
    frame = (1.0, np.exp(1j * B_PORT_FRAME))
    mean_out = tuple(complex(f * m) for f, m in zip(frame, r3.mean_out))
    signal_out = tuple(complex(f * s) for f, s in zip(frame, r3.signal_out))
    fluct_out = tuple(x * f for f, x in zip(frame, r3.fluct_out))

    def number_fluct(mean, x):
        t = x * np.conj(mean)
        return t + t.dagger()

    delta_n = number_fluct(mean_out[0], fluct_out[0]) - number_fluct(mean_out[1], fluct_out[1])
    optical = tuple(m for m in registry.modes if m.kind is ModeKind.FILTERED_OPTICAL
                    and (m in wiring.control.values() or m in passive.values()))
    groups = {
        "atom_shot": (atoms["A_ini"], atoms["B_ini"]),
        "back_action": (atoms["A2"], atoms["B2"]),
        "optical": optical,
    }
    grad = signal_gradient(spec)
    return InterferometerOutput(
        spec=spec,
        mean_out=mean_out,
        signal_out=signal_out,
        fluct_out=fluct_out,
        delta_n_signal=_readout(mean_out, signal_out),
        signal_coefficient=float(grad[0]),
        delta_n=delta_n,
        groups=groups,
        records=records,
        prefix=prefix,
        noise=noise,
    )


def run_sequence(
    spec: SequenceSpec, registry: ModeRegistry | None = None, prefix: str = "", noise: bool = True
) -> InterferometerOutput:
    """Run one interferometer on fresh modes in ``registry``.

    With ``noise=False`` only means and signals are propagated; ``delta_n`` is
    then zero and the noise accessors raise.
    """
    registry = registry if registry is not None else ModeRegistry()
    return _run(spec, registry, prefix, _fresh_wiring(spec, registry, prefix), noise)


def delta_n_decompose(output: InterferometerOutput, registry: ModeRegistry | None = None) -> dict[str, float]:
    """Variance of ``Delta N`` split by the modes it draws on.

    ``atom_shot``: initial atom fluctuations; ``back_action``: atoms injected at
    the mirror pulses; ``optical``: every optical channel.  The groups share no
    modes, so the parts add up to the total.  In a linked pair, AI_II also
    draws on AI_I modes; see :meth:`PairOutput.second_parts`.
    """
    if registry is not None and output.registry is not registry:
        raise KernelError("output belongs to a different registry")
    output._need_noise()
    dn = output.delta_n
    parts = {name: vacuum_variance(dn.restrict(modes)) for name, modes in output.groups.items()}
    own = {m for modes in output.groups.values() for m in modes}
    rest = dn.restrict([m for m in dn.modes if m not in own])
    if rest.coeffs:
        parts["external"] = vacuum_variance(rest)
    return parts


def estimator(output: InterferometerOutput) -> EstimatorResult:
    """Normalise ``Delta N`` by the signal coefficient."""
    if output.spec.amplitude == 0 or output.signal_coefficient == 0:
        raise KernelError("zero mean atom amplitude: the readout carries no signal")
    coef = output.signal_coefficient
    est = output.delta_n_signal / coef
    parts = {k: v / coef ** 2 for k, v in delta_n_decompose(output).items()}
    var = output.variance / coef ** 2
    return EstimatorResult(est, var, parts, est / output.spec.interrogation_time ** 2)


# --------------------------------------------------------------------------
# detector pair
# --------------------------------------------------------------------------


def run_pair(
    spec_first: SequenceSpec,
    spec_second: SequenceSpec,
    registry: ModeRegistry | None = None,
    linked: bool = True,
) -> PairOutput:
    """Two interferometers, the second driven by the control fields of the first.

    Control routing: step 1 of I drives step 1 of II and likewise for step 3;
    the mirror control runs I-2a, I-2b, II-2a, II-2b.  With ``linked=False`` the
    second interferometer gets its own fields and equals a standalone run.
    """
    registry = registry if registry is not None else ModeRegistry()
    if linked:
        if spec_first.chi_a != spec_second.chi_a or spec_first.rabi != spec_second.rabi:
            raise KernelError("linked interferometers must see the same control field strength")
        if not (spec_first.link_mirrors and spec_second.link_mirrors):
            raise KernelError("a linked pair needs the mirror link in both interferometers")
    first = run_sequence(spec_first, registry, prefix="I:")
    if linked:
        rec = first.records
        wiring = _Wiring(
            control={
                "1": rec["1"].channels[0],
                "2a": rec["2b"].channels[0],
                "2b": rec["2b"].channels[0],
                "3": rec["3"].channels[0],
            },
            beams={
                "1": rec["1"].control_out.extra,
                "2a": rec["2b"].control_out.extra,
                "3": rec["3"].control_out.extra,
            },
        )
        second = _run(spec_second, registry, "II:", wiring)
    else:
        second = run_sequence(spec_second, registry, prefix="II:")
    cov = covariance(first.delta_n, second.delta_n).real
    return PairOutput(first, second, float(cov), linked)


# --------------------------------------------------------------------------
# gravitational-wave response
# --------------------------------------------------------------------------


def gw_phase_response(omega, h, L, T, k, t, c: float = 1.0):
    """``k h L sin^2(omega T/2) sin(omega L/c) (c/omega) sin(omega t)``.

    ``c`` is the speed of light in the caller's units; the default of 1 uses
    light-travel units for ``L``.  Returns 0 at ``omega = 0``.
    """
    omega = np.asarray(omega, dtype=float)
    if np.any(omega < 0):
        raise ValueError("GW angular frequency must be non-negative")
    safe = np.where(omega == 0, 1.0, omega)
    val = k * h * L * np.sin(safe * T / 2) ** 2 * np.sin(safe * L / c) * (c / safe) * np.sin(safe * t)
    val = np.where(omega == 0, 0.0, val)
    return float(val) if val.ndim == 0 else val


def gw_low_frequency_limit(omega, h, L, T, k):
    """``k a_GW T^2`` with tidal acceleration ``a_GW = omega^2 h L``."""
    return k * omega ** 2 * h * L * T ** 2
