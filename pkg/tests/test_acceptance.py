"""Acceptance criteria, one test each.

Every test records a PASS/FAIL line in ``conftest.ACCEPTANCE_LINES``; the
lines are printed in the pytest terminal summary.  Run just this suite with
``pytest tests/test_acceptance.py -v`` or ``python3 tests/test_acceptance.py``.
"""

import math
import time

import numpy as np
import pytest

from qdslow import bath, dressed, dynamics, response, scenario, sweep
from qdslow.dressed import DriveConfig, RateSet, WeakNMCoefficients
from qdslow.errors import ShapeError
from qdslow.response import DotOpticalParams

from conftest import ACCEPTANCE_LINES, O0, super_ohmic

pytestmark = pytest.mark.acceptance

OPT = DotOpticalParams()
OMEGA_S = 1e-4 * O0


def record(n, ok, detail):
    ACCEPTANCE_LINES[n] = f"{'PASS' if ok else 'FAIL'} criterion {n:2d}: {detail}"
    assert ok, detail


def fig_coeffs(f2, g2=0.0):
    return WeakNMCoefficients(O0, 2 * O0, f2, 2 * f2, g2 / O0, 2 * g2 / O0)


def upsilon(coeffs, op):
    drive = DriveConfig(op, 0.0, OMEGA_S)
    return response.slow_down_factor(0.0, dressed.rates_phenomenological(drive, coeffs), drive, OPT)


def test_01_markovian_recovery():
    t0 = time.perf_counter()
    flat = bath.BathSpec.flat(O0)
    worst_nu = worst_g = 0.0
    for op in np.linspace(0, 10, 21) * O0:
        for dp in np.linspace(-5, 5, 21) * O0:
            r = dressed.rates_asymptotic(DriveConfig(op, dp), flat)
            worst_nu = max(worst_nu, abs(r.nu2), abs(r.nu3))
            worst_g = max(worst_g, abs(r.gamma2 - O0) / O0)
    dt = time.perf_counter() - t0
    ok = worst_nu < 1e-8 * O0 and worst_g < 1e-6 and dt < 5
    record(1, ok, f"flat bath max|nu|={worst_nu:.1e}, max rel gamma2 err={worst_g:.1e}, {dt:.2f} s")


def test_02_correlation_washout(bath15):
    t0 = time.perf_counter()
    r0 = dressed.rates_asymptotic(DriveConfig(0.0, 0.0), bath15, 1.0)
    worst = 0.0
    for op in np.linspace(0, 10, 21) * O0:
        for dp in (-2 * O0, 0.0, 2 * O0):
            r = dressed.rates_asymptotic(DriveConfig(op, dp), bath15, 1.0)
            worst = max(worst, abs(r.gamma2 - r0.gamma2), abs(r.gamma3 - r0.gamma3),
                        abs(r.nu2), abs(r.nu3))
    dt = time.perf_counter() - t0
    record(2, worst < 1e-8 and dt < 30, f"kappa=1 max pump dependence={worst:.1e} ps^-1, {dt:.2f} s")


def test_03_formula_solve_equivalence():
    rng = np.random.default_rng(2024)
    cases = []
    for _ in range(1000):
        g2, g3 = rng.uniform(0.2, 3.0, 2) * O0
        n2, n3 = rng.uniform(-1.0, 1.0, 2) * O0
        drive = DriveConfig(rng.uniform(0, 5) * O0, rng.uniform(-2, 2) * O0, OMEGA_S)
        cases.append((rng.uniform(-5, 5) * O0, RateSet.build(g2, g3, n2, n3, drive), drive))
    t0 = time.perf_counter()
    worst = 0.0
    for ds, r, drive in cases:
        a = response.susceptibility(ds, r, drive, OPT)
        b = response.susceptibility_oracle(ds, r, drive, OPT)
        za, zb = complex(a.chi_re, a.chi_im), complex(b.chi_re, b.chi_im)
        worst = max(worst, abs(za - zb) / abs(zb))
    dt = time.perf_counter() - t0
    record(3, worst < 1e-10 and dt < 1, f"1000 random points, max rel diff={worst:.1e}, {dt:.2f} s")


def test_04_ode_fixed_point():
    t0 = time.perf_counter()
    worst, count = 0.0, 0
    drive = DriveConfig(3 * O0, 0.0, OMEGA_S)
    for name in ("fig3", "fig4", "fig5", "fig6", "fig7"):
        cfg = scenario.preset(name)
        for branch in cfg.branches:
            r = sweep.point_rates(cfg, branch, drive)
            horizon = 40.0 / min(r.gamma2.real, r.gamma3.real)
            st = dynamics.integrate_coherences(None, r, drive, horizon=horizon)[-1]
            rho12, rho13 = response.stationary_coherences(r, drive)
            err = math.hypot(abs(st.rho12 - rho12), abs(st.rho13 - rho13)) / math.hypot(abs(rho12), abs(rho13))
            worst, count = max(worst, err), count + 1
    dt = time.perf_counter() - t0
    record(4, worst < 1e-6 and dt < 10,
           f"{count} preset rate sets at Omega_p=3 Omega0, max rel residual={worst:.1e}, {dt:.2f} s")


def test_05_eit_dip_law():
    worst = 0.0
    markov = fig_coeffs(0.0)
    for k in (1, 2, 3, 5):
        drive = DriveConfig(k * O0, 0.0, OMEGA_S)
        r = dressed.rates_phenomenological(drive, markov)
        chi = response.chi_closed_form(0.0, r, drive, OPT)
        g2, g3 = r.gamma2.real, r.gamma3.real
        expected = OPT.prefactor * O0 * g3 / (g2 * g3 + (k * O0) ** 2 / 4)
        worst = max(worst, abs(chi.imag - expected) / expected)
    record(5, worst < 1e-12, f"chi''(0) vs A gamma3/(gamma2 gamma3 + Omega_p^2/4), max rel err={worst:.1e}")


def test_06_fig4_ordering():
    t0 = time.perf_counter()
    violations = 0
    ops = np.linspace(1, 5, 17) * O0
    for op in ops:
        u0, u1, u2 = (upsilon(fig_coeffs(f2), op) for f2 in (0.0, 0.1, 0.2))
        violations += not (u2 > u1 > u0)
    dt = time.perf_counter() - t0
    record(6, violations == 0 and dt < 10,
           f"Upsilon(f2=0.2) > Upsilon(0.1) > Upsilon(0) at {len(ops) - violations}/{len(ops)} pump values, {dt:.2f} s")


def test_07_fig3_window():
    cfg = scenario.preset("fig3")
    grid = cfg.grid
    step = grid[1] - grid[0]
    drive = cfg.drive
    windows, missing = {}, []
    for f2 in (0.0, 0.1, 0.2):
        r = dressed.rates_phenomenological(drive, fig_coeffs(f2))
        pts = response.spectrum(grid, r, drive, OPT)
        try:
            windows[f2] = response.transmission_window(pts, cfg.window_threshold)
        except ShapeError as exc:
            missing.append(f"f2={f2}: {exc}")
    ok = not missing
    if ok:
        c0, c1, c2 = (windows[f][0] for f in (0.0, 0.1, 0.2))
        ok = (abs(c0) <= step and (c0 < c1 < c2 or c0 > c1 > c2)
              and windows[0.2][1] < windows[0.0][1])
        detail = f"centers {c0:.3g}, {c1:.3g}, {c2:.3g}; widths {windows[0.0][1]:.3g} -> {windows[0.2][1]:.3g}"
    else:
        detail = "no transparency doublet for " + "; ".join(missing)
    record(7, ok, detail)


def test_08_fig7_crossing():
    nm = fig_coeffs(0.2, 0.15)
    markov = fig_coeffs(0.0)
    ops = np.linspace(0, 5, 51)[1:] * O0
    diff = np.array([upsilon(nm, op) - upsilon(markov, op) for op in ops])
    crossing = bool(np.any(diff > 0) and diff[-1] < 0)
    where = ops[np.argmax(diff < 0)] / O0 if crossing else math.nan
    record(8, crossing, f"Upsilon_NM - Upsilon_M changes sign, first negative at Omega_p={where:.2f} Omega0")


def test_09_fig2_trend():
    t0 = time.perf_counter()
    temps = (5.0, 15.0, 45.0)
    baths = [super_ohmic(T) for T in temps]
    ops = np.linspace(0, 5, 11)[1:] * O0
    monotone, nonzero = True, True
    for op in ops:
        rs = [dressed.rates_asymptotic(DriveConfig(op, 0.0), b) for b in baths]
        g = [r.gamma2.real for r in rs]
        monotone &= g[0] < g[1] < g[2]
        nonzero &= all(abs(r.nu2) > 0 for r in rs)
    worst = 0.0
    for b in baths:
        for delta in (0.0, 2 * O0, -5 * O0):
            a = bath.half_fourier_spectral(delta, 2, 2, b).value
            c = bath.half_fourier_time(delta, 2, 2, b).value
            worst = max(worst, abs(a - c) / abs(a))
    dt = time.perf_counter() - t0
    ok = monotone and nonzero and worst < 1e-4 and dt < 60
    record(9, ok, f"Re gamma2 increasing in T: {monotone}, nu2 != 0: {nonzero}, "
                  f"spectral vs time D max rel diff={worst:.1e}, {dt:.2f} s")


def test_10_dressed_identity():
    rng = np.random.default_rng(10)
    worst = 0.0
    for t, op, dp in zip(rng.uniform(0, 1e3, 10_000), rng.uniform(0, 10, 10_000), rng.uniform(-10, 10, 10_000)):
        s33, s22, s23 = dressed.dressed_populations(t, DriveConfig(op, dp))
        worst = max(worst, abs(abs(s23) ** 2 - s22 * s33))
    record(10, worst < 1e-12, f"max ||S23|^2 - S22 S33| over 1e4 samples={worst:.1e}")


def test_11_weak_nm_order(bath15):
    coeffs = dressed.weak_nm_coefficients(bath15)
    errs = []
    for op in (0.5 * O0, 0.25 * O0):
        d = DriveConfig(op, 0.0)
        errs.append(abs(dressed.rates_asymptotic(d, bath15).nu2 - dressed.rates_phenomenological(d, coeffs).nu2))
    ratio = errs[0] / errs[1]
    record(11, ratio >= 4, f"nu2 error ratio on halving Omega_p={ratio:.2f}")


if __name__ == "__main__":
    import sys
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
