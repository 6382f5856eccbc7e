"""Linear algebra over bosonic noise modes.

Every linearized Heisenberg operator in this package is a c-number mean plus a
linear combination of annihilation and creation parts of registered modes.
Two kinds of mode exist:

* discrete atom modes, ``[a, a^dag] = 1``;
* filtered optical modes, continuum channels ``a(t)`` on a time window with
  ``[a(t), a^dag(t')] = delta(t - t')``.  A coefficient on such a mode is a
  :class:`WeightKernel` ``w(t)`` and stands for ``int w(t) a(t) dt``.

Kernels are finite sums of complex exponentials, so all moments reduce to
closed-form integrals.  Moments are evaluated with ``<a a^dag> = 1`` and all
other second moments zero; coherent amplitudes live in the mean only.
"""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence, Union

import numpy as np

HERMITIAN_TOL = 1e-12

__all__ = [
    "ModeKind",
    "ModeState",
    "VACUUM",
    "coherent",
    "ModeId",
    "ModeRegistry",
    "ExpSum",
    "WeightKernel",
    "OperatorExpr",
    "ModeAlgebraError",
    "register_mode",
    "combine",
    "dagger",
    "vacuum_variance",
    "covariance",
    "commutator",
]


class ModeAlgebraError(ValueError):
    """Raised on invalid mode bookkeeping (duplicates, foreign modes, ...)."""


class ModeKind(enum.Enum):
    DISCRETE_ATOM = "discrete_atom"
    FILTERED_OPTICAL = "filtered_optical"


@dataclass(frozen=True)
class ModeState:
    """Vacuum (``amplitude == 0``) or a coherent state with that amplitude."""

    amplitude: complex = 0j

    @property
    def is_vacuum(self) -> bool:
        return self.amplitude == 0


VACUUM = ModeState()


def coherent(amplitude: complex) -> ModeState:
    return ModeState(complex(amplitude))


@dataclass(frozen=True)
class ModeId:
    index: int
    label: str
    kind: ModeKind
    window: tuple[float, float] | None = field(default=None, compare=False)
    registry_token: int = field(default=0, repr=False)
    _hash: int = field(default=0, init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_hash", hash((self.registry_token, self.index)))

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return f"ModeId#{self.index}({self.label!r})"


# --------------------------------------------------------------------------
# exponential sums
# --------------------------------------------------------------------------


def _exp_integral(rate: float, t0: float, t1: float) -> complex:
    """Closed form of ``int_{t0}^{t1} exp(i*rate*t) dt``."""
    length = t1 - t0
    z = 1j * rate * length
    if z == 0:
        return complex(length)
    return complex(np.exp(1j * rate * t0) * length * np.expm1(z) / z)


def _rate_key(rate: float) -> float:
    # merge rates that differ only by round-off
    return round(rate, 11) + 0.0


class ExpSum:
    """A function ``f(t) = sum_k c_k exp(i r_k t)`` with real rates ``r_k``.

    Instances are immutable.  Terms with equal rates (to 12 significant
    digits) are merged.
    """

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[float, complex] | Iterable[tuple[float, complex]] = ()):
        merged: dict[float, complex] = {}
        items = terms.items() if isinstance(terms, (dict, Mapping)) else terms
        for rate, coef in items:
            coef = complex(coef)
            if coef == 0:
                continue
            key = _rate_key(float(rate))
            merged[key] = merged.get(key, 0j) + coef
        self._terms = {r: c for r, c in merged.items() if c != 0}

    @classmethod
    def _keyed(cls, terms: dict) -> "ExpSum":
        """Build from terms whose rates are already distinct keys."""
        out = cls.__new__(cls)
        out._terms = {r: c for r, c in terms.items() if c != 0}
        return out

    @classmethod
    def constant(cls, value: complex) -> "ExpSum":
        return cls({0.0: value})

    @classmethod
    def exponential(cls, rate: float, coef: complex = 1.0) -> "ExpSum":
        return cls({rate: coef})

    @classmethod
    def sinusoid(cls, rate: float, coef: complex = 1.0) -> "ExpSum":
        """``coef * sin(rate * t)``."""
        return cls([(rate, coef / 2j), (-rate, -coef / 2j)])

    @classmethod
    def cosine(cls, rate: float, coef: complex = 1.0) -> "ExpSum":
        return cls([(rate, coef / 2), (-rate, coef / 2)])

    @property
    def terms(self) -> dict[float, complex]:
        return dict(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape, dtype=complex)
        for rate, coef in self._terms.items():
            out = out + coef * np.exp(1j * rate * t)
        return out

    def __add__(self, other: "ExpSum") -> "ExpSum":
        if not isinstance(other, ExpSum):
            return NotImplemented
        # keys of both operands are already canonical
        merged = dict(self._terms)
        for r, c in other._terms.items():
            merged[r] = merged.get(r, 0j) + c
        return ExpSum._keyed(merged)

    def __sub__(self, other: "ExpSum") -> "ExpSum":
        return self + (-1) * other

    def __neg__(self) -> "ExpSum":
        return (-1) * self

    def __mul__(self, other):
        if isinstance(other, ExpSum):
            return ExpSum(
                (r1 + r2, c1 * c2)
                for (r1, c1), (r2, c2) in itertools.product(
                    self._terms.items(), other._terms.items()
                )
            )
        if isinstance(other, (int, float, complex, np.number)):
            other = complex(other)
            if other == 0:
                return ExpSum()
            out = ExpSum.__new__(ExpSum)
            out._terms = {r: c * other for r, c in self._terms.items()}
            return out
        return NotImplemented

    __rmul__ = __mul__

    def conj(self) -> "ExpSum":
        return ExpSum._keyed({-r + 0.0: c.conjugate() for r, c in self._terms.items()})

    def shift(self, tau: float) -> "ExpSum":
        """``t -> f(t + tau)``."""
        return ExpSum._keyed({r: c * complex(np.exp(1j * r * tau)) for r, c in self._terms.items()})

    def integrate(self, t0: float, t1: float) -> complex:
        return sum((c * _exp_integral(r, t0, t1) for r, c in self._terms.items()), 0j)

    def max_abs_coef(self) -> float:
        return max((abs(c) for c in self._terms.values()), default=0.0)

    def __repr__(self) -> str:
        inner = " + ".join(f"({c:.6g})e^(i{r:.6g}t)" for r, c in self._terms.items())
        return f"ExpSum({inner or '0'})"


@dataclass(frozen=True)
class WeightKernel:
    """A filtering kernel ``w(t)`` supported on ``window = (t_start, t_end)``."""

    window: tuple[float, float]
    func: ExpSum

    def __post_init__(self):
        t0, t1 = self.window
        if not t1 > t0:
            raise ModeAlgebraError(f"kernel window must have t_end > t_start, got {self.window}")

    @classmethod
    def _same_window(cls, window, func: ExpSum) -> "WeightKernel":
        out = object.__new__(cls)
        object.__setattr__(out, "window", window)
        object.__setattr__(out, "func", func)
        return out

    @classmethod
    def constant(cls, window, value: complex = 1.0) -> "WeightKernel":
        return cls(tuple(window), ExpSum.constant(value))

    @classmethod
    def complex_exponential(cls, window, rate: float, prefactor: complex = 1.0) -> "WeightKernel":
        return cls(tuple(window), ExpSum.exponential(rate, prefactor))

    @classmethod
    def sinusoid(cls, window, rate: float, prefactor: complex = 1.0) -> "WeightKernel":
        return cls(tuple(window), ExpSum.sinusoid(rate, prefactor))

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        inside = (t >= self.window[0]) & (t <= self.window[1])
        return np.where(inside, self.func(t), 0)

    def _check(self, other: "WeightKernel"):
        if self.window != other.window:
            raise ModeAlgebraError(f"kernel windows differ: {self.window} vs {other.window}")

    def __add__(self, other: "WeightKernel") -> "WeightKernel":
        if not isinstance(other, WeightKernel):
            return NotImplemented
        self._check(other)
        return WeightKernel._same_window(self.window, self.func + other.func)

    def __mul__(self, scalar) -> "WeightKernel":
        if isinstance(scalar, (int, float, complex, np.number)):
            return WeightKernel._same_window(self.window, self.func * scalar)
        return NotImplemented

    __rmul__ = __mul__

    def conj(self) -> "WeightKernel":
        return WeightKernel._same_window(self.window, self.func.conj())

    def is_zero(self) -> bool:
        return self.func.is_zero()

    def pairing(self, other: "WeightKernel") -> complex:
        """Bilinear ``int w1(t) w2(t) dt``."""
        self._check(other)
        return (self.func * other.func).integrate(*self.window)

    def inner(self, other: "WeightKernel") -> complex:
        """Sesquilinear ``int w1(t) conj(w2(t)) dt``."""
        return self.pairing(other.conj())

    def norm(self) -> float:
        return float(np.sqrt(max(self.inner(self).real, 0.0)))


Coef = Union[complex, WeightKernel]


# --------------------------------------------------------------------------
# registry
# --------------------------------------------------------------------------


class ModeRegistry:
    """Ordered, append-only collection of modes and their states."""

    _counter = itertools.count(1)

    def __init__(self):
        self._token = next(ModeRegistry._counter)
        self._modes: list[ModeId] = []
        self._states: dict[ModeId, ModeState] = {}
        self._by_label: dict[str, ModeId] = {}

    def __len__(self) -> int:
        return len(self._modes)

    def __iter__(self):
        return iter(self._modes)

    def __contains__(self, mode) -> bool:
        return isinstance(mode, ModeId) and mode.registry_token == self._token and mode in self._states

    @property
    def modes(self) -> tuple[ModeId, ...]:
        return tuple(self._modes)

    def state(self, mode: ModeId) -> ModeState:
        self.require(mode)
        return self._states[mode]

    def __getitem__(self, label: str) -> ModeId:
        return self._by_label[label]

    def require(self, mode: ModeId):
        if mode not in self:
            raise ModeAlgebraError(f"{mode!r} is not registered in this registry")

    def register(
        self,
        label: str,
        kind: ModeKind = ModeKind.DISCRETE_ATOM,
        state: ModeState = VACUUM,
        window: tuple[float, float] | None = None,
    ) -> ModeId:
        if label in self._by_label:
            raise ModeAlgebraError(f"mode label {label!r} already registered")
        kind = ModeKind(kind)
        if kind is ModeKind.FILTERED_OPTICAL:
            if window is None:
                raise ModeAlgebraError("filtered optical modes need a time window")
            window = (float(window[0]), float(window[1]))
            if not window[1] > window[0]:
                raise ModeAlgebraError(f"invalid window {window}")
        elif window is not None:
            raise ModeAlgebraError("discrete modes take no window")
        mode = ModeId(len(self._modes), label, kind, window, self._token)
        self._modes.append(mode)
        self._states[mode] = state
        self._by_label[label] = mode
        return mode

    # convenience constructors ------------------------------------------------

    def annihilation(self, mode: ModeId, kernel: WeightKernel | ExpSum | None = None) -> "OperatorExpr":
        """``a`` for a discrete mode, ``int w(t) a(t) dt`` for a filtered one."""
        self.require(mode)
        if mode.kind is ModeKind.DISCRETE_ATOM:
            if kernel is not None:
                raise ModeAlgebraError("discrete modes take no kernel")
            return OperatorExpr(self, 0j, {mode: (1 + 0j, 0j)})
        kernel = _as_kernel(mode, kernel if kernel is not None else ExpSum.constant(1.0))
        return OperatorExpr(self, 0j, {mode: (kernel, _zero_kernel(mode))})

    def creation(self, mode: ModeId, kernel: WeightKernel | ExpSum | None = None) -> "OperatorExpr":
        return self.annihilation(mode, None if kernel is None else _conj_kernel(kernel)).dagger()

    def quadrature(self, mode: ModeId, phase: float = 0.0) -> "OperatorExpr":
        """``a e^{i phase} + a^dag e^{-i phase}`` on a discrete mode."""
        a = self.annihilation(mode)
        return combine([(np.exp(1j * phase), a), (np.exp(-1j * phase), a.dagger())])

    def zero(self) -> "OperatorExpr":
        return OperatorExpr(self, 0j, {})

    def constant(self, value: complex) -> "OperatorExpr":
        return OperatorExpr(self, complex(value), {})


def register_mode(registry: ModeRegistry, label: str, kind=ModeKind.DISCRETE_ATOM, state: ModeState = VACUUM, window=None) -> ModeId:
    return registry.register(label, kind, state, window)


def _conj_kernel(kernel):
    return kernel.conj()


def _zero_kernel(mode: ModeId) -> WeightKernel:
    return WeightKernel(mode.window, ExpSum())


def _as_kernel(mode: ModeId, kernel) -> WeightKernel:
    if isinstance(kernel, ExpSum):
        return WeightKernel(mode.window, kernel)
    if kernel.window != mode.window:
        raise ModeAlgebraError(f"kernel window {kernel.window} does not match {mode!r} window {mode.window}")
    return kernel


# --------------------------------------------------------------------------
# operator expressions
# --------------------------------------------------------------------------


def _coef_is_zero(c: Coef) -> bool:
    return c.is_zero() if isinstance(c, WeightKernel) else c == 0


def _scale(c: Coef, s: complex) -> Coef:
    return c if s == 1 else c * s


def _conj(c: Coef) -> Coef:
    return c.conj() if isinstance(c, WeightKernel) else complex(np.conj(c))


def _pair(mode: ModeId, x: Coef, y: Coef) -> complex:
    if mode.kind is ModeKind.DISCRETE_ATOM:
        return complex(x * y)
    return x.pairing(y)


class OperatorExpr:
    """``mean + sum_m (c_ann[m] a_m + c_cre[m] a_m^dag)`` over one registry."""

    __slots__ = ("registry", "mean", "coeffs")

    def __init__(self, registry: ModeRegistry, mean: complex = 0j, coeffs: Mapping[ModeId, tuple[Coef, Coef]] | None = None):
        self.registry = registry
        self.mean = complex(mean)
        clean = {}
        for mode, (ann, cre) in (coeffs or {}).items():
            registry.require(mode)
            if mode.kind is ModeKind.FILTERED_OPTICAL:
                ann = _as_kernel(mode, ann)
                cre = _as_kernel(mode, cre)
            else:
                ann, cre = complex(ann), complex(cre)
            if _coef_is_zero(ann) and _coef_is_zero(cre):
                continue
            clean[mode] = (ann, cre)
        self.coeffs = clean

    @classmethod
    def _trusted(cls, registry, mean, coeffs) -> "OperatorExpr":
        """Skip validation for coefficients derived from validated expressions."""
        out = cls.__new__(cls)
        out.registry = registry
        out.mean = complex(mean)
        out.coeffs = {
            m: (a, c) for m, (a, c) in coeffs.items() if not (_coef_is_zero(a) and _coef_is_zero(c))
        }
        return out

    # algebra --------------------------------------------------------------

    def dagger(self) -> "OperatorExpr":
        return OperatorExpr._trusted(
            self.registry,
            np.conj(self.mean),
            {m: (_conj(cre), _conj(ann)) for m, (ann, cre) in self.coeffs.items()},
        )

    def __add__(self, other):
        if isinstance(other, OperatorExpr):
            return combine([(1, self), (1, other)])
        if isinstance(other, (int, float, complex, np.number)):
            return OperatorExpr(self.registry, self.mean + other, self.coeffs)
        return NotImplemented

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, OperatorExpr):
            return combine([(1, self), (-1, other)])
        return self + (-other)

    def __neg__(self):
        return self * -1

    def __mul__(self, scalar):
        if isinstance(scalar, (int, float, complex, np.number)):
            return OperatorExpr(
                self.registry,
                self.mean * scalar,
                {m: (_scale(a, scalar), _scale(c, scalar)) for m, (a, c) in self.coeffs.items()},
            )
        return NotImplemented

    __rmul__ = __mul__

    def fluctuation(self) -> "OperatorExpr":
        return OperatorExpr(self.registry, 0j, self.coeffs)

    def restrict(self, modes: Iterable[ModeId]) -> "OperatorExpr":
        """Fluctuation part on the given modes only."""
        keep = set(modes)
        return OperatorExpr(self.registry, 0j, {m: c for m, c in self.coeffs.items() if m in keep})

    @property
    def modes(self) -> tuple[ModeId, ...]:
        return tuple(sorted(self.coeffs, key=lambda m: m.index))

    def coefficient(self, mode: ModeId) -> tuple[Coef, Coef]:
        if mode in self.coeffs:
            return self.coeffs[mode]
        if mode.kind is ModeKind.FILTERED_OPTICAL:
            return _zero_kernel(mode), _zero_kernel(mode)
        return 0j, 0j

    def scale_magnitude(self) -> float:
        mags = [abs(self.mean)]
        for mode, (ann, cre) in self.coeffs.items():
            if mode.kind is ModeKind.FILTERED_OPTICAL:
                mags += [ann.norm(), cre.norm()]
            else:
                mags += [abs(ann), abs(cre)]
        return max(mags)

    def hermiticity_defect(self) -> float:
        """Largest coefficient mismatch between ``self`` and ``self^dag``."""
        defect = abs(self.mean.imag) * 2
        for mode, (ann, cre) in self.coeffs.items():
            if mode.kind is ModeKind.FILTERED_OPTICAL:
                diff = ann + cre.conj() * -1
                defect = max(defect, diff.norm())
            else:
                defect = max(defect, abs(ann - np.conj(cre)))
        return defect

    def is_hermitian(self, tol: float = HERMITIAN_TOL) -> bool:
        return self.hermiticity_defect() <= tol * max(1.0, self.scale_magnitude())

    def equals(self, other: "OperatorExpr", tol: float = 0.0) -> bool:
        diff = self - other
        return diff.scale_magnitude() <= tol

    def __repr__(self) -> str:
        parts = [f"mean={self.mean:.6g}"]
        for mode in self.modes:
            ann, cre = self.coeffs[mode]
            if mode.kind is ModeKind.DISCRETE_ATOM:
                parts.append(f"{mode.label}:({ann:.4g}, {cre:.4g})")
            else:
                parts.append(f"{mode.label}:(|w|={ann.norm():.4g}, |v|={cre.norm():.4g})")
        return "OperatorExpr(" + ", ".join(parts) + ")"


def _same_registry(exprs: Sequence[OperatorExpr]) -> ModeRegistry:
    if not exprs:
        raise ModeAlgebraError("need at least one expression")
    registry = exprs[0].registry
    for e in exprs[1:]:
        if e.registry is not registry:
            raise ModeAlgebraError("expressions belong to different registries")
    return registry


def combine(terms: Sequence[tuple[complex, OperatorExpr]]) -> OperatorExpr:
    """Exact linear combination ``sum_k s_k x_k``."""
    terms = list(terms)
    registry = _same_registry([e for _, e in terms])
    mean = 0j
    acc: dict[ModeId, tuple[Coef, Coef]] = {}
    for s, expr in terms:
        mean += s * expr.mean
        for mode, (ann, cre) in expr.coeffs.items():
            if mode in acc:
                a0, c0 = acc[mode]
                acc[mode] = (a0 + _scale(ann, s), c0 + _scale(cre, s))
            else:
                acc[mode] = (_scale(ann, s), _scale(cre, s))
    return OperatorExpr._trusted(registry, mean, acc)


def dagger(x: OperatorExpr) -> OperatorExpr:
    return x.dagger()


def _ordered_moment(x: OperatorExpr, y: OperatorExpr) -> complex:
    """``<dx dy>`` for the fluctuation parts, vacuum moments."""
    total = 0j
    for mode, (x_ann, _) in x.coeffs.items():
        if mode in y.coeffs:
            total += _pair(mode, x_ann, y.coeffs[mode][1])
    return total


def _require_hermitian(x: OperatorExpr, name: str = "expression"):
    if not x.is_hermitian():
        raise ModeAlgebraError(
            f"{name} is not Hermitian (defect {x.hermiticity_defect():.3e})"
        )


def vacuum_variance(expr: OperatorExpr, registry: ModeRegistry | None = None) -> float:
    """``<x^2> - <x>^2`` for a Hermitian expression."""
    if registry is not None and expr.registry is not registry:
        raise ModeAlgebraError("expression is not over the given registry")
    _require_hermitian(expr)
    return max(float(_ordered_moment(expr, expr).real), 0.0)


def covariance(x: OperatorExpr, y: OperatorExpr, registry: ModeRegistry | None = None) -> complex:
    """Symmetrized ``(<xy + yx>)/2 - <x><y>``."""
    reg = _same_registry([x, y])
    if registry is not None and reg is not registry:
        raise ModeAlgebraError("expressions are not over the given registry")
    _require_hermitian(x, "x")
    _require_hermitian(y, "y")
    value = 0.5 * (_ordered_moment(x, y) + _ordered_moment(y, x))
    return complex(value)


def commutator(x: OperatorExpr, y: OperatorExpr) -> complex:
    """c-number ``[x, y]``."""
    _same_registry([x, y])
    return _ordered_moment(x, y) - _ordered_moment(y, x)
