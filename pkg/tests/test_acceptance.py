"""Acceptance suite: one test per criterion at its stated tolerance.

Each test prints a single ``[PASS]``/``[FAIL]`` line with the measured value
(run with ``pytest -s`` to see them inline).
"""

import time

import numpy as np

from sasraman import selfcheck
from sasraman.bath import thermal_phonon_number, wavenumber_to_omega


def _line(number, name, passed, value, threshold):
    mark = "PASS" if passed else "FAIL"
    print(f"\n[{mark}] criterion {number:2d} {name}: value={value!r} threshold={threshold!r}")
    return passed


def test_criterion_01_analytic_signal():
    r = selfcheck.check_analytic_signal(series=20, threshold=1e-10)
    ok = _line(1, "negative-frequency fraction", r["value"] < 1e-10, r["value"], 1e-10)
    assert ok


def test_criterion_02_free_space_evolution():
    r = selfcheck.check_free_space(threshold=1e-10, ratio_band=(3.2, 4.8))
    ratios_ok = all(3.2 <= x <= 4.8 for x in r["fd_ratios"])
    ok = _line(2, "spectral residual / fd ratios", r["value"] < 1e-10 and ratios_ok,
               (r["value"], r["fd_ratios"]), (1e-10, "4 +/- 20%"))
    assert ok


def test_criterion_03_weisskopf_wigner_decay():
    start = time.perf_counter()
    r = selfcheck.check_weisskopf_wigner(J=401, bandwidth_gammas=40.0, threshold=0.02)
    elapsed = time.perf_counter() - start
    ok = _line(3, "fitted decay rate error", r["value"] <= 0.02 and elapsed <= 60.0, r["value"], 0.02)
    assert ok


def test_criterion_04_commutator_sum_rule():
    r = selfcheck.check_commutator(Js=(101, 201, 401), threshold=1e-2)
    by_j = list(r["by_J"].values())
    monotone = all(b < a for a, b in zip(by_j, by_j[1:]))
    ok = _line(4, "commutator defect (J=401) / monotone in J", r["value"] < 1e-2 and monotone,
               (r["value"], r["by_J"]), 1e-2)
    assert ok


def test_criterion_05_lorentzian_exchange():
    r = selfcheck.check_lorentzian(omega_ratio=100.0, gamma_delta_max=5.0, threshold=1e-4)
    ok = _line(5, "quadrature vs closed form", r["value"] < 1e-4, r["value"], 1e-4)
    assert ok


def test_criterion_06_delay_decay():
    r = selfcheck.check_delay_decay(points=50, threshold=1e-10)
    ok = _line(6, "log-rate slope error", r["value"] <= 1e-10, r["value"], 1e-10)
    assert ok


def test_criterion_07_cross_polarization_null():
    worst = float(selfcheck.crossed_null_ratios(seed=3, geometries=100).max())
    ok = _line(7, "crossed/parallel rate", worst <= 1e-24, worst, 1e-24)
    assert ok


def test_criterion_08_angular_correlation():
    start = time.perf_counter()
    r = selfcheck.check_angular(beam_spread=0.05, samples=100_000, tolerance=0.15)
    elapsed = time.perf_counter() - start
    ok = _line(8, "marginal width error", r["value"] <= 0.15 and elapsed <= 120.0,
               (r["value"], r["marginal_width"]), 0.15)
    assert ok


def test_criterion_09_spectrum_delay_duality():
    r = selfcheck.check_spectrum_duality(threshold=1e-6)
    ok = _line(9, "FWHM error / FT modulus deviation",
               r["fwhm_error"] <= r["grid_step"] and r["value"] <= 1e-6,
               (r["fwhm_error"], r["value"]), (r["grid_step"], 1e-6))
    assert ok


def test_criterion_10_thermal_occupation():
    nbar = thermal_phonon_number(wavenumber_to_omega(1332.0), 300.0)
    ok = _line(10, "diamond phonon number", 1.0e-3 <= nbar <= 2.5e-3, nbar, (1.0e-3, 2.5e-3))
    assert ok


def test_criterion_11_exchange_symmetry():
    worst = float(selfcheck.symmetry_errors(seed=5, configs=100).max())
    ok = _line(11, "swap mismatch", worst <= 1e-12, worst, 1e-12)
    assert ok


def test_criterion_12_determinism():
    r = selfcheck.check_determinism(threads=(1, 1, 4))
    ok = _line(12, "byte-identical reference outputs", bool(r["passed"]), r["value"], True)
    assert ok and np.isfinite(r["files"])
