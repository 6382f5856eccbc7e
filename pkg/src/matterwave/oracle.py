"""Independent numerical checks of the analytic engine.

* :func:`integrate_kernel` integrates the raw ``(A, B)`` Heisenberg-Langevin
  equations with RK4 on time-binned optical modes and returns per-bin noise
  coefficients, comparable to the closed-form kernels in :mod:`.kernel`.
* :func:`monte_carlo` replaces every vacuum mode by complex Gaussian numbers
  and samples linear readouts.  Because all dynamics are linearised, this
  semiclassical sampling reproduces symmetrised quantum moments exactly.
* :func:`profile_checks` verifies the Gaussian atom-profile identities behind
  the effective atom operators.

Time-binned continuum modes obey ``[a_k, a_l^dag] = delta_kl / dt``.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np
from scipy import integrate

from .kernel import KernelParams, quadrature_kernels
from .mode_algebra import ModeKind, ModeRegistry, OperatorExpr, commutator

__all__ = [
    "OracleError",
    "GridConfig",
    "KernelTable",
    "integrate_kernel",
    "analytic_bin_coefficients",
    "compare_with_analytic",
    "MonteCarloResult",
    "monte_carlo",
    "ProfileSpec",
    "profile_checks",
    "Check",
    "OracleReport",
    "RAW_PORTS",
    "to_quadratures",
]

RAW_PORTS = ("a_c", "a_c_dag", "a_p", "a_p_dag")
MAX_STEP = 0.1  # largest accepted dt * Omega

EXP_FORM_NOTE = (
    "The exact-treatment equations write the time-dependent coupling through "
    "alpha_+-(t) = alpha_+-(0) exp[-+ Omega t], a real exponential; the Rabi "
    "solution is oscillatory, exp[-+ i Omega t].  The oracle integrates the "
    "oscillatory form."
)


class OracleError(ValueError):
    pass


# --------------------------------------------------------------------------
# RK4 kernel integration
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class GridConfig:
    n_steps: int
    duration: float
    order: str = "rk4"
    seed: int = 0

    def __post_init__(self):
        if self.n_steps < 1:
            raise OracleError("need at least one step")
        if not self.duration > 0:
            raise OracleError("duration must be positive")
        if self.order != "rk4":
            raise OracleError(f"unsupported integrator {self.order!r}")

    @property
    def dt(self) -> float:
        return self.duration / self.n_steps

    @classmethod
    def for_kernel(cls, params: KernelParams, step: float = 1e-3, seed: int = 0) -> "GridConfig":
        """Grid with ``dt * Omega`` at most ``step``."""
        n = max(1, math.ceil(params.theta / step - 1e-9))
        return cls(n, params.duration, seed=seed)


@dataclass
class KernelTable:
    """Numeric kernel: propagator, mean and per-bin noise coefficients.

    ``raw[port][out]`` is the coefficient array (one entry per bin) of output
    ``out`` in ``("A", "B")`` on the binned input ``port``; the bin variable is
    the bin average of the continuum field, so a closed-form kernel ``w``
    corresponds to ``int_bin w dt``.
    """

    params: KernelParams
    grid: GridConfig
    edges: np.ndarray
    propagator: np.ndarray
    mean_out: np.ndarray
    norm_drift: float
    raw: dict[str, np.ndarray]
    notes: tuple[str, ...] = (EXP_FORM_NOTE,)

    def plus_minus(self) -> dict[str, dict[str, np.ndarray]]:
        """Coefficients of ``A_+`` and ``A_-`` on the four input quadratures."""
        phi = self.params.phi
        c, d = np.exp(-0.5j * phi), np.exp(0.5j * phi)
        out = {}
        for name, sign in (("+", 1), ("-", -1)):
            raw = {p: (c * self.raw[p][0] + sign * d * self.raw[p][1]) / math.sqrt(2) for p in RAW_PORTS}
            out[name] = to_quadratures(self.params, raw)
        return out


def to_quadratures(params: KernelParams, raw: dict) -> dict[str, np.ndarray]:
    """Re-express coefficients on ``a_c, a_c^dag, a_p, a_p^dag`` in quadratures.

    Keys ``"+1", "-1", "+2", "-2"``: common/differential, amplitude/phase
    quadratures of the phase-referenced fields ``exp(i phi_j) a_j``.
    """
    al = raw["a_c"] * np.exp(-1j * params.phi_c)
    be = raw["a_c_dag"] * np.exp(1j * params.phi_c)
    ga = raw["a_p"] * np.exp(-1j * params.phi_p)
    de = raw["a_p_dag"] * np.exp(1j * params.phi_p)
    return {
        "+1": 0.5 * (al + be + ga + de),
        "-1": 0.5 * (al + be - ga - de),
        "+2": 0.5j * (al - be + ga - de),
        "-2": 0.5j * (al - be - ga + de),
    }


def integrate_kernel(params: KernelParams, grid: GridConfig, mean_in=(1.0, 0.0)) -> KernelTable:
    """RK4 integration of one kernel.

    State columns: the mean, the two initial atom modes, then four columns
    (``a_c, a_c^dag, a_p, a_p^dag``) per time bin.  The optical input is held
    constant inside its bin, and the Langevin force uses the mean from the
    same RK stage, so mean and noise are integrated jointly.
    """
    if not math.isclose(grid.duration, params.duration, rel_tol=1e-12):
        raise OracleError("grid duration does not match the kernel duration")
    dt = grid.dt
    if dt * params.rabi > MAX_STEP:
        raise OracleError(f"unstable step: dt*Omega = {dt * params.rabi:.3g} > {MAX_STEP}")
    n = grid.n_steps
    w, phi = params.rabi, params.phi
    gen = np.array([[0, -1j * w * np.exp(1j * phi)], [-1j * w * np.exp(-1j * phi), 0]])
    # Langevin couplings in the fluctuation equations of motion
    lang_a = np.array([0, -1j * params.chi_p * np.exp(-1j * params.phi_p), -1j * params.chi_c * np.exp(1j * params.phi_c), 0])
    lang_b = np.array([-1j * params.chi_p * np.exp(1j * params.phi_p), 0, 0, -1j * params.chi_c * np.exp(-1j * params.phi_c)])

    state = np.zeros((2, 3 + 4 * n), dtype=complex)
    state[:, 0] = mean_in
    state[0, 1] = 1.0
    state[1, 2] = 1.0
    norm0 = abs(mean_in[0]) ** 2 + abs(mean_in[1]) ** 2
    drift = 0.0

    for k in range(n):
        lo, hi = 3 + 4 * k, 3 + 4 * k + 4
        # only columns up to the current bin are non-zero
        view = state[:, :hi]

        def rhs(x):
            dx = gen @ x
            abar, bbar = x[0, 0], x[1, 0]
            dx[0, lo:hi] += bbar * lang_a
            dx[1, lo:hi] += abar * lang_b
            return dx

        k1 = rhs(view)
        k2 = rhs(view + 0.5 * dt * k1)
        k3 = rhs(view + 0.5 * dt * k2)
        k4 = rhs(view + dt * k3)
        state[:, :hi] = view + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        drift = max(drift, abs(abs(state[0, 0]) ** 2 + abs(state[1, 0]) ** 2 - norm0))

    raw = {}
    for j, port in enumerate(RAW_PORTS):
        # bin variable is the bin average; d/dt uses a(t) = a_k, coefficient per unit a_k
        raw[port] = state[:, 3 + j :: 4]
    return KernelTable(
        params=params,
        grid=grid,
        edges=np.linspace(0.0, params.duration, n + 1),
        propagator=state[:, 1:3].copy(),
        mean_out=state[:, 0].copy(),
        norm_drift=float(drift),
        raw=raw,
    )


def analytic_bin_coefficients(params: KernelParams, edges: np.ndarray, mean_in=(1.0, 0.0)) -> dict:
    """Closed-form kernels integrated over each bin.

    Returns ``{"+": {"+1": K1 bins, "-2": K2 bins}, "-": {...}}``.
    """
    out = {}
    for name, (k1, k2) in quadrature_kernels(params, mean_in).items():
        out[name] = {
            "+1": _bin_integrals(k1, edges),
            "-2": _bin_integrals(k2, edges),
        }
    return out


def _bin_integrals(func, edges) -> np.ndarray:
    lo, hi = edges[:-1], edges[1:]
    total = np.zeros(len(lo), dtype=complex)
    for rate, coef in func.terms.items():
        if rate == 0:
            total += coef * (hi - lo)
        else:
            z = 1j * rate
            total += coef * np.exp(z * lo) * np.expm1(z * (hi - lo)) / z
    return total


def compare_with_analytic(params: KernelParams, grid: GridConfig | None = None, mean_in=(1.0, 0.0)) -> dict:
    """Relative residuals between the RK4 table and the closed-form kernels."""
    grid = grid or GridConfig.for_kernel(params)
    table = integrate_kernel(params, grid, mean_in)
    num = table.plus_minus()
    ana = analytic_bin_coefficients(params, table.edges, mean_in)
    res = {}
    for name in ("+", "-"):
        for q in ("+1", "-2"):
            ref = ana[name][q]
            scale = np.linalg.norm(ref)
            err = np.linalg.norm(num[name][q] - ref)
            res[f"{name}{q}"] = float(err / scale) if scale else float(err)
        # the other two quadratures must not be driven at all
        spill = np.linalg.norm(num[name]["-1"]) + np.linalg.norm(num[name]["+2"])
        res[f"{name}_spill"] = float(spill)
    tau = params.duration
    free = np.array([np.exp(-1j * params.rabi * tau), np.exp(1j * params.rabi * tau)])
    c, d = np.exp(-0.5j * params.phi), np.exp(0.5j * params.phi)
    to_pm = np.array([[c, d], [c, -d]]) / math.sqrt(2)
    prop_pm = to_pm @ table.propagator @ np.linalg.inv(to_pm)
    res["propagator"] = float(np.max(np.abs(prop_pm - np.diag(free))))
    res["norm_drift"] = table.norm_drift
    return res


# --------------------------------------------------------------------------
# Monte-Carlo sampling
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class MonteCarloResult:
    n_samples: int
    seed: int
    mean: np.ndarray
    cov: np.ndarray
    se_cov: np.ndarray
    labels: tuple[str, ...] = ()

    @property
    def variance(self) -> np.ndarray:
        return np.diag(self.cov).copy()

    @property
    def se_variance(self) -> np.ndarray:
        return np.diag(self.se_cov).copy()

    def agrees(self, i: int, j: int, expected: float, n_sigma: float = 3.0) -> bool:
        return abs(self.cov[i, j] - expected) <= n_sigma * self.se_cov[i, j]

    def as_dict(self) -> dict:
        return {
            "n_samples": self.n_samples,
            "seed": self.seed,
            "labels": list(self.labels),
            "mean": self.mean.tolist(),
            "cov": self.cov.tolist(),
            "se_cov": self.se_cov.tolist(),
        }


def _sampling_matrix(exprs: Sequence[OperatorExpr], n_bins: int):
    """Real matrix mapping standard normals to the fluctuation of each expr."""
    modes = []
    for x in exprs:
        for m in x.modes:
            if m not in modes:
                modes.append(m)
    cols_u, cols_v = [], []
    for m in modes:
        if m.kind is ModeKind.DISCRETE_ATOM:
            ann = np.array([x.coeffs.get(m, (0j, 0j))[0] for x in exprs], dtype=complex)[None, :]
            cre = np.array([x.coeffs.get(m, (0j, 0j))[1] for x in exprs], dtype=complex)[None, :]
            scale = 1.0
        else:
            t0, t1 = m.window
            dt = (t1 - t0) / n_bins
            t = t0 + (np.arange(n_bins) + 0.5) * dt
            ann = np.zeros((n_bins, len(exprs)), dtype=complex)
            cre = np.zeros((n_bins, len(exprs)), dtype=complex)
            for j, x in enumerate(exprs):
                if m in x.coeffs:
                    ann[:, j] = x.coeffs[m][0](t)
                    cre[:, j] = x.coeffs[m][1](t)
            # sum_k w_k dt alpha_k with E|alpha_k|^2 = 1/(2 dt)
            scale = math.sqrt(dt)
        # alpha = (u + i v)/2 per unit-variance coordinate
        cols_u.append(0.5 * scale * (ann + cre))
        cols_v.append(0.5j * scale * (ann - cre))
    mu = np.vstack(cols_u) if cols_u else np.zeros((0, len(exprs)))
    mv = np.vstack(cols_v) if cols_v else np.zeros((0, len(exprs)))
    return np.vstack([mu, mv])


def _as_exprs(target):
    from .interferometer import InterferometerOutput, PairOutput, SequenceSpec, run_sequence

    if isinstance(target, SequenceSpec):
        target = run_sequence(target)
    if isinstance(target, InterferometerOutput):
        return [target.delta_n], ("delta_n",)
    if isinstance(target, PairOutput):
        return [target.first.delta_n, target.second.delta_n], ("delta_n_I", "delta_n_II")
    if isinstance(target, OperatorExpr):
        return [target], ("x",)
    exprs = list(target)
    return exprs, tuple(f"x{j}" for j in range(len(exprs)))


def monte_carlo(target, n_samples: int, seed: int = 0, n_bins: int = 256, chunk: int = 10_000) -> MonteCarloResult:
    """Sample Hermitian linear readouts over vacuum fluctuations.

    ``target`` is a :class:`SequenceSpec`, an interferometer or pair output,
    one expression or a list of expressions.  Each vacuum mode becomes a
    complex Gaussian with ``E|alpha|^2 = 1/2`` (time bins: ``1/(2 dt)``).
    Chunks draw from child seeds of ``seed``, so results are reproducible.
    """
    if n_samples < 1000:
        raise OracleError("monte_carlo needs at least 1000 samples")
    exprs, labels = _as_exprs(target)
    for x in exprs:
        if not x.is_hermitian():
            raise OracleError("monte_carlo samples Hermitian readouts only")
    mat = _sampling_matrix(exprs, n_bins)
    mat_r = mat.real  # imaginary parts cancel for Hermitian readouts
    n_chunks = -(-n_samples // chunk)
    children = np.random.SeedSequence(seed).spawn(n_chunks)
    done = 0
    samples = []
    for child in children:
        m = min(chunk, n_samples - done)
        rng = np.random.default_rng(child)
        z = rng.standard_normal((m, mat_r.shape[0]))
        x = z @ mat_r
        samples.append(x)
        done += m
    x = np.vstack(samples)
    means = x.mean(axis=0)
    xc = x - means
    cov = xc.T @ xc / (n_samples - 1)
    var = np.diag(cov)
    se = np.sqrt((np.outer(var, var) + cov ** 2) / (n_samples - 1))
    mean_c = np.array([x_.mean.real for x_ in exprs])
    return MonteCarloResult(n_samples, seed, means + mean_c, cov, se, labels)


# --------------------------------------------------------------------------
# profile identities
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ProfileSpec:
    """Gaussian atom cloud and rectangular light pulse.

    ``f_a(y) = N exp(-delta_a^2 y^2 / 4)`` with ``y = z - z0 - v_a t`` and
    ``N = delta_a^{1/2} / (2 pi)^{1/4}`` unless ``amplitude`` overrides it;
    the light pulse has width ``light_width`` (``2 pi a``) and amplitude
    ``alpha_c``.
    """

    delta_a: float = 1.0
    z0: float = 0.0
    v_a: float = 0.0
    light_width: float = 2 * math.pi
    alpha_c: float = 1.0
    amplitude: float | None = None

    def __post_init__(self):
        if not (self.delta_a > 0 and self.light_width > 0):
            raise OracleError("profile widths must be positive")

    @property
    def norm_const(self) -> float:
        if self.amplitude is not None:
            return self.amplitude
        return math.sqrt(self.delta_a) / (2 * math.pi) ** 0.25

    def f_a(self, z, t: float = 0.0):
        y = np.asarray(z) - self.z0 - self.v_a * t
        return self.norm_const * np.exp(-(self.delta_a ** 2) * y ** 2 / 4)

    def light(self, z):
        z = np.asarray(z)
        h = 0.5 * self.light_width
        return np.where(np.abs(z - self.z0) <= h, self.alpha_c / math.sqrt(self.light_width), 0.0)


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    target: float
    tol: float
    passed: bool

    @classmethod
    def make(cls, name, value, target, tol):
        value = float(value)
        return cls(name, value, float(target), float(tol), bool(abs(value - target) <= tol))


@dataclass
class OracleReport:
    checks: list[Check] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, check: Check):
        self.checks.append(check)
        return check

    def to_json(self) -> str:
        return json.dumps(
            {
                "header": "semiclassical Gaussian sampling is exact for the linearised dynamics",
                "passed": self.passed,
                "checks": [asdict(c) for c in self.checks],
                "notes": self.notes,
            },
            indent=2,
        )


def profile_checks(profile: ProfileSpec | None = None, n_grid: int = 4001) -> OracleReport:
    """Quadrature checks of the effective-operator identities."""
    profile = profile or ProfileSpec()
    span = 14.0 / profile.delta_a
    lo, hi = profile.z0 - span, profile.z0 + span

    def f2(z):
        return float(profile.f_a(z)) ** 2

    norm, _ = integrate.quad(f2, -np.inf, np.inf, epsabs=1e-14, epsrel=1e-13)
    if abs(norm - 1) > 1e-10:
        raise OracleError(f"atom profile is not normalised: int f^2 = {norm!r}")
    report = OracleReport()
    report.add(Check.make("profile_norm", norm, 1.0, 1e-10))

    def cumulative(z):
        val, _ = integrate.quad(f2, -np.inf, z, epsabs=1e-14, epsrel=1e-12)
        return val

    half, _ = integrate.quad(lambda z: f2(z) * cumulative(z), lo, hi, epsabs=1e-13, epsrel=1e-12)
    report.add(Check.make("half_factor", half, 0.5, 1e-8))

    # discretised atom field: psi_i = b_i / sqrt(dz), [b_i, b_j^dag] = delta_ij
    z = np.linspace(lo, hi, n_grid)
    dz = z[1] - z[0]
    reg = ModeRegistry()
    weights = profile.f_a(z) * math.sqrt(dz)
    coeffs = {reg.register(f"z{i}"): (complex(wi), 0j) for i, wi in enumerate(weights)}
    op = OperatorExpr(reg, 0j, coeffs)
    report.add(Check.make("effective_commutator", commutator(op, op.dagger()).real, 1.0, 1e-8))

    light_norm, _ = integrate.quad(
        lambda s: float(profile.light(s)) ** 2,
        profile.z0 - profile.light_width, profile.z0 + profile.light_width,
        points=[profile.z0 - profile.light_width / 2, profile.z0 + profile.light_width / 2],
        limit=200,
    )
    report.add(Check.make("light_norm", light_norm, profile.alpha_c ** 2, 1e-10))

    # Parseval for the rectangular pulse: |F(k)|^2 = (w/2pi) alpha^2 sinc^2(k w / 2pi)
    width = profile.light_width
    cut = 2000.0 / width
    body, _ = integrate.quad(
        lambda k: width / (2 * math.pi) * np.sinc(k * width / (2 * math.pi)) ** 2, -cut, cut, limit=4000
    )
    # tail of sin^2(x)/x^2 beyond the cutoff averages to 1/(2x)
    tail = 2.0 / (math.pi * width * cut)
    spectrum = profile.alpha_c ** 2 * (body + tail)
    report.add(Check.make("light_spectrum_norm", spectrum, profile.alpha_c ** 2, 1e-4))
    report.notes.append("half-factor identity: the profile is symmetric, so its cumulative weight averages to 1/2")
    return report
