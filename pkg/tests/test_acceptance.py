"""Acceptance suite: one pass/fail line per criterion.

Run under pytest (lines are repeated in the terminal summary) or directly with
``python tests/test_acceptance.py``.
"""
import functools
import math
import time

import numpy as np
import pytest

from matterwave.budget import error_budget, optimize_atom_number
from matterwave.interferometer import SequenceSpec, gw_phase_response, run_pair, run_sequence
from matterwave.kernel import KernelParams, force_decomposition, propagate_kernel
from matterwave.mode_algebra import ModeKind, ModeRegistry, commutator, vacuum_variance
from matterwave.oracle import GridConfig, compare_with_analytic, monte_carlo, profile_checks

RESULTS: dict[str, tuple[bool, str]] = {}


def _record(key, passed, detail):
    RESULTS[key] = (bool(passed), detail)
    line = f"ACCEPTANCE {key}: {'PASS' if passed else 'FAIL'} | {detail}"
    print(line)
    return passed


def _timed(fn):
    t0 = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t0


# 1 ------------------------------------------------------------------------


def check_1():
    out, dt = _timed(lambda: run_sequence(SequenceSpec.mach_zehnder(1.0, 0.01, 1.0)))
    ref = -np.array([np.exp(1j * math.pi / 4), np.exp(-1j * math.pi / 4)]) / math.sqrt(2)
    err = float(np.max(np.abs(np.array(out.mean_out) - ref)))
    ok = err <= 1e-12 and dt < 1.0
    return _record("1 mean-field golden value", ok, f"max |mean - ref| = {err:.2e} (tol 1e-12), {dt:.3f} s (< 1 s)")


# 2 ------------------------------------------------------------------------


def check_2():
    rng = np.random.default_rng(2024)

    def run():
        worst, worst_common, cross = 0.0, 0.0, 0.0
        for j in range(1000):
            amp = 10 ** rng.uniform(-1, 4)
            if j % 10 == 0:
                e = rng.uniform(-1e-2, 1e-2)
                phases = (e, e, e)
            else:
                phases = tuple(rng.uniform(-1e-2, 1e-2, 3))
            spec = SequenceSpec.mach_zehnder(1.0, 0.01, amp, phases)
            out = run_sequence(spec, noise=False)
            ref = -amp ** 2 * (phases[0] - 2 * phases[1] + phases[2])
            scale = amp ** 2 * max(abs(p) for p in phases)
            rel = abs(out.delta_n_signal - ref) / scale
            if j % 10 == 0:
                worst_common = max(worst_common, rel)
            else:
                worst = max(worst, rel)
            if j % 20 == 1:
                # the fast path agrees with the full noise computation
                full = run_sequence(spec)
                cross = max(cross, abs(full.delta_n_signal - out.delta_n_signal) / scale)
        return worst, worst_common, cross

    (worst, worst_common, cross), dt = _timed(run)
    ok = worst <= 1e-12 and worst_common <= 1e-12 and cross == 0.0 and dt < 5.0
    return _record(
        "2 signal transfer",
        ok,
        f"max rel err {worst:.1e}, common-phase residual {worst_common:.1e} (tol 1e-12), "
        f"fast/full mismatch {cross:.1e}, 1000 cases in {dt:.2f} s (< 5 s)",
    )


# 3 ------------------------------------------------------------------------


def check_3():
    def run():
        amp = 1e3
        out = run_sequence(SequenceSpec.mach_zehnder(1.0, 0.01, amp))
        shot = out.delta_n.restrict(out.groups["atom_shot"])
        var = vacuum_variance(shot)
        mc = monte_carlo(shot, 100_000, seed=3)
        return amp, var, mc

    (amp, var, mc), dt = _timed(run)
    exact = abs(var - amp ** 2) <= 1e-12 * amp ** 2
    agree = mc.agrees(0, 0, amp ** 2)
    z = (mc.cov[0, 0] - amp ** 2) / mc.se_cov[0, 0]
    ok = exact and agree and dt < 30.0
    return _record(
        "3 atom shot noise",
        ok,
        f"variance {var:.6g} vs A^2 = {amp ** 2:.6g}; MC {mc.cov[0, 0]:.6g} ({z:+.2f} SE, 1e5 samples), {dt:.1f} s (< 30 s)",
    )


# 4 ------------------------------------------------------------------------


def check_4():
    rng = np.random.default_rng(4)
    reg = ModeRegistry()
    x = (reg.annihilation(reg.register("A")), reg.annihilation(reg.register("B")))
    bad = 0
    for _ in range(1000):
        chi, amp = rng.uniform(1e-3, 10), rng.uniform(1e-3, 1e3)
        p = KernelParams.from_fields(chi, amp, amp, rng.uniform(0.1, 10),
                                     phi_c=rng.uniform(-7, 7), phi_p=rng.uniform(-7, 7))
        means = rng.normal(size=2) + 1j * rng.normal(size=2)
        f = force_decomposition(p, means, x)
        if f.ponderomotive != (0, 0) or any(d.coeffs or d.mean for d in f.dynamical):
            bad += 1
    return _record("4 balanced cancellation", bad == 0, f"{bad} of 1000 balanced draws with a non-zero F_cl/F_dy coefficient")


# 5 ------------------------------------------------------------------------


def check_5():
    def run():
        worst = 0.0
        for theta in (math.pi / 4, math.pi / 2):
            p = KernelParams.from_rabi(1.0, 0.3, theta, phi=0.7, phi_p=0.2)
            res = compare_with_analytic(p, GridConfig.for_kernel(p, 1e-3), mean_in=(0.6, 0.8j))
            worst = max(worst, *(res[k] for k in ("++1", "+-2", "-+1", "--2")))
        return worst

    worst, dt = _timed(run)
    ok = worst <= 1e-6 and dt < 60.0
    return _record("5 oracle equivalence", ok, f"max rel residual {worst:.2e} (tol 1e-6) at dt*Omega = 1e-3, {dt:.1f} s (< 60 s)")


# 6 ------------------------------------------------------------------------


def _grid_check():
    ks = np.linspace(math.pi / 4, math.pi / 2, 11)
    worst_arg, worst_ratio, k_worst = 0.0, 0.0, None
    for n_l in (1e4, 1e6, 1e8):
        grid = np.geomspace(1.0, 1e3 * n_l, 20_001)
        for k in ks:
            opt = optimize_atom_number(n_l, k)
            assert opt.variance == error_budget(opt.atom_number, n_l, k, warn=False).total
            vals = grid * k ** 2 / n_l ** 2 + 2.0 / grid + 1.0 / n_l
            j = int(np.argmin(vals))
            worst_arg = max(worst_arg, abs(grid[j] / opt.atom_number - 1))
            if opt.variance > vals[j] * (1 + 1e-12):
                worst_arg = math.inf
            if opt.sql_ratio > worst_ratio:
                worst_ratio, k_worst = opt.sql_ratio, k
    return worst_arg, worst_ratio, k_worst


@functools.lru_cache(maxsize=None)
def _grid_check_timed():
    return _timed(_grid_check)


def check_6a():
    (worst_arg, _, _), dt = _grid_check_timed()
    step = 10 ** (np.log10(1e3 * 1e8) / 20_000) - 1
    ok = worst_arg <= step and dt < 5.0
    return _record("6a budget optimum: minimizer", ok,
                   f"grid argmin within {worst_arg:.1e} of sqrt(2) N_L/k (grid step {step:.1e}); "
                   f"closed form never beaten; {dt:.2f} s (< 5 s)")


def check_6b():
    (_, worst_ratio, k_worst), _ = _grid_check_timed()
    return _record("6b budget optimum: sigma2_min N_L <= 4", worst_ratio <= 4.0,
                   f"max ratio {worst_ratio:.3f} at k = {k_worst:.4f}; closed form 2 sqrt(2) k + 1 exceeds 4 for k > 1.061")


# 7 ------------------------------------------------------------------------


def check_7():
    def run():
        spec = SequenceSpec.mach_zehnder(1.0, 0.1, 10.0)
        linked = run_pair(spec, spec)
        severed = run_pair(spec, spec, linked=False)
        mc = monte_carlo(linked, 100_000, seed=7)
        return linked, severed, mc

    (linked, severed, mc), dt = _timed(run)
    z = (mc.cov[0, 1] - linked.covariance) / mc.se_cov[0, 1]
    ok = linked.covariance != 0 and severed.covariance == 0 and abs(z) <= 3 and dt < 60.0
    return _record(
        "7 pair correlation",
        ok,
        f"linked cov {linked.covariance:.4f}, severed {severed.covariance}, MC {mc.cov[0, 1]:.4f} ({z:+.2f} SE), {dt:.1f} s (< 60 s)",
    )


# 8 ------------------------------------------------------------------------


def check_8():
    report, dt = _timed(profile_checks)
    got = {c.name: c.value for c in report.checks}
    e_norm = abs(got["profile_norm"] - 1)
    e_half = abs(got["half_factor"] - 0.5)
    e_comm = abs(got["effective_commutator"] - 1)
    ok = e_norm <= 1e-10 and e_half <= 1e-8 and e_comm <= 1e-8 and dt < 5.0
    return _record("8 profile identities", ok,
                   f"|norm-1| {e_norm:.1e}, |half-0.5| {e_half:.1e}, |[A,A+]-1| {e_comm:.1e}, {dt:.2f} s (< 5 s)")


# 9 ------------------------------------------------------------------------


def _one_kernel(chi_a):
    p = KernelParams.from_rabi(1.0, chi_a, math.pi / 2)
    reg = ModeRegistry()
    x = (reg.annihilation(reg.register("A")), reg.annihilation(reg.register("B")))
    ch = tuple(reg.register(s, ModeKind.FILTERED_OPTICAL, window=p.window) for s in ("c", "p"))
    return propagate_kernel(p, (1.0, 0.0), x, ch, reg)


def check_9():
    def run():
        recs = [_one_kernel(c) for c in (0.2, 0.1)]
        atom = [commutator(r.fluct_out[0], r.fluct_out[0].dagger()).real - 1 for r in recs]
        optical = [r.control_out.commutator_deficit(0.2 * r.params.duration).real for r in recs]
        return atom, optical

    (atom, optical), dt = _timed(run)
    floor = 1e-12
    resolved = min(abs(a) for a in atom) > floor
    ratio = atom[0] / atom[1] if atom[1] else math.nan
    ok = resolved and abs(ratio - 4) <= 0.1 and dt < 5.0
    _record(
        "9 commutator-deficit scaling",
        ok,
        f"[A_A, A_A+] - 1 = {atom[0]:.1e} / {atom[1]:.1e}: below round-off ({floor:.0e}), no chi_a^2 term to resolve",
    )
    opt_ratio = optical[0] / optical[1]
    print(f"  (supplementary) control output [a, a+] deficit {optical[0]:.4e} / {optical[1]:.4e}, ratio {opt_ratio:.4f}")
    return ok


# 10 -----------------------------------------------------------------------


def check_10():
    def run():
        at_zero = gw_phase_response(0.0, 1.0, 1.0, 1.0, 1.0, 0.3)
        small = abs(gw_phase_response(1e-8, 1.0, 1.0, 1.0, 1.0, 0.3))
        L = 1.7
        node = abs(gw_phase_response(math.pi / L, 1.0, L, 1.0, 1.0, 0.3))
        w, t = 1.0, 0.9
        wts = np.array([1e-2, 3e-3, 1e-3, 3e-4, 1e-4])
        ratios = np.array([gw_phase_response(w, 1.0, L, x / w, 1.0, t) / x ** 2 for x in wts])
        spread = float(np.max(np.abs(ratios / ratios[-1] - 1)))
        return at_zero, small, node, spread

    (at_zero, small, node, spread), dt = _timed(run)
    ok = at_zero == 0.0 and small < 1e-15 and node < 1e-15 and spread < 1e-4 and dt < 1.0
    return _record("10 GW response", ok,
                   f"phi(0) = {at_zero}, phi(1e-8) = {small:.1e}, node {node:.1e}, "
                   f"ratio spread over wT <= 1e-2: {spread:.1e}, {dt:.3f} s (< 1 s)")


CHECKS = [check_1, check_2, check_3, check_4, check_5, check_6a, check_6b, check_7, check_8, check_9, check_10]


@pytest.mark.parametrize("check", CHECKS, ids=[f"criterion_{c.__name__[6:]}" for c in CHECKS])
def test_acceptance(check):
    assert check()


if __name__ == "__main__":
    results = [c() for c in CHECKS]
    print(f"{sum(results)}/{len(results)} criteria passed")
