"""Desk-scale validation suite.

Each check returns a dict with ``passed``, ``value`` (the measured figure),
``threshold`` and a short ``detail``.  Checks never raise; an exception is
reported as a failure.  ``overrides`` replaces keyword parameters of single
checks, e.g. ``{"delay_decay": {"gamma": 0.5}}`` simulates with a wrong
decay rate while the expectation keeps the nominal one.
"""

import filecmp
import json
import os
import tempfile
import time
import warnings

import numpy as np

from . import __version__
from .bath import (
    FockOracle,
    MediumSpec,
    commutator_defect,
    discretize_reservoir,
    fit_decay_rate,
    oracle_decay,
    thermal_phonon_number,
    wavenumber_to_omega,
)
from .fields import (
    C_UM_PER_PS,
    PlaneWaveMode,
    analytic_signal_residual,
    free_space_residual,
    rs_field,
    sample_grid,
)
from .green import DetectorDirection
from .observables import (
    ScanConfig,
    analyzer_vector,
    angle_jones,
    angular_map,
    delay_scan,
    pair_spectrum,
    project_analyzers,
    spectrum_delay_duality,
)
from .pair import LaserPair, derive_constants, lorentzian_exchange, two_photon_amplitude

NOMINAL_GAMMA = 1.0
NOMINAL_BEAM_SPREAD = 0.05


class _Scenario:
    """Minimal stand-in for :class:`sasraman.scenario.Scenario`."""

    def __init__(self, medium, laser, sigma_acc=0.01, seed=0):
        self.medium, self.laser, self.sigma_acc, self.seed = medium, laser, sigma_acc, seed
        self.constants = derive_constants(medium, laser)


def desk_medium(gamma=NOMINAL_GAMMA, omega_tilde=100.0, n=2.4):
    return MediumSpec(n=n, N=1.0, alpha_prime=1.0, M=1.0, omega0=omega_tilde,
                      omega_tilde=omega_tilde, gamma=gamma, V_S=1.0)


def desk_scenario(gamma=NOMINAL_GAMMA, beam_spread=0.0, omega_l=3000.0, jones=(1.0, 0.0), seed=0):
    med = desk_medium(gamma)
    laser = LaserPair.from_jones([0, 0, 1], [0, 0, 1], *jones, omega_l, med.u, beam_spread)
    return _Scenario(med, laser, seed=seed)


def random_direction(rng):
    v = rng.normal(size=3)
    return v / np.linalg.norm(v)


def random_superposition(rng, n_modes, omega_range, u=C_UM_PER_PS):
    modes = []
    for _ in range(n_modes):
        v = rng.normal(size=4)
        v /= np.linalg.norm(v)
        modes.append(PlaneWaveMode.from_jones(random_direction(rng), complex(v[0], v[1]),
                                              complex(v[2], v[3]), rng.uniform(*omega_range), u,
                                              amplitude=complex(*rng.normal(size=2))))
    return modes


def periodic_superposition(rng, helicity, box, n_modes=5):
    """Helicity-pure modes on the |m|² = 9 shell of a periodic box.

    All modes share one frequency, so one period in time is periodic too.
    """
    shell = [m for m in np.ndindex(7, 7, 7) if sum((np.array(m) - 3) ** 2) == 9]
    shell = np.array(shell) - 3
    picks = rng.choice(len(shell), size=n_modes, replace=False)
    modes = []
    for i in picks:
        k = 2 * np.pi * shell[i] / box
        omega = C_UM_PER_PS * np.linalg.norm(k)
        modes.append(PlaneWaveMode.helical(k, helicity, omega, amplitude=complex(*rng.normal(size=2))))
    return modes


def periodic_grid(modes, box, n, nt=None):
    nt = n if nt is None else nt
    x = np.arange(n) * box / n
    period = 2 * np.pi / modes[0].omega
    t = np.arange(nt) * period / nt
    return sample_grid(modes, x, x, x, t)


def momentum_conserving_pair(k1, k2, phi):
    """Detector directions with ``r1 + r2 = k1 + k2`` at azimuth ``phi``
    about ``S = k1 + k2``."""
    S = k1 + k2
    s = np.linalg.norm(S)
    a = S / s
    e1 = np.cross(a, [1.0, 0.0, 0.0] if abs(a[0]) < 0.9 else [0.0, 1.0, 0.0])
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(a, e1)
    # r1·a = s/2 and |r1| = 1
    along = s / 2
    perp = np.sqrt(max(1 - along ** 2, 0.0))
    r1 = along * a + perp * (np.cos(phi) * e1 + np.sin(phi) * e2)
    r2 = S - r1
    return r1 / np.linalg.norm(r1), r2 / np.linalg.norm(r2)


# individual checks ----------------------------------------------------------


def check_analytic_signal(seed=1, series=20, n_modes=5, samples=1024, threshold=1e-10):
    rng = np.random.default_rng(seed)
    dt = 1.0
    t = np.arange(samples) * dt
    worst = 0.0
    for _ in range(series):
        modes = random_superposition(rng, n_modes, (0.1 * np.pi, 0.8 * np.pi))
        psi = rs_field(modes, rng.normal(size=3)[None, :] * 10, t)
        for comp in range(3):
            worst = max(worst, analytic_signal_residual(psi[:, comp], t))
    return {"passed": worst < threshold, "value": worst, "threshold": threshold,
            "detail": f"max negative-frequency fraction over {series} superpositions"}


def check_free_space(seed=2, box=50.0, n=16, fd_sizes=(8, 16, 32), threshold=1e-10,
                     ratio_band=(3.2, 4.8)):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for h in (1, -1):
        modes = periodic_superposition(rng, h, box)
        worst = max(worst, free_space_residual(periodic_grid(modes, box, n), h, "spectral"))
    mode = [PlaneWaveMode.helical(2 * np.pi * np.array([1.0, 0.0, 0.0]) / box, 1,
                                  C_UM_PER_PS * 2 * np.pi / box)]
    fd = [free_space_residual(periodic_grid(mode, box, m), 1, "fd") for m in fd_sizes]
    ratios = [a / b for a, b in zip(fd, fd[1:])]
    ok_ratio = all(ratio_band[0] <= r <= ratio_band[1] for r in ratios)
    return {"passed": worst < threshold and ok_ratio, "value": worst, "threshold": threshold,
            "fd_residuals": fd, "fd_ratios": ratios,
            "detail": "spectral residual; fd ratios per halving must lie in [3.2, 4.8]"}


def check_weisskopf_wigner(gamma=NOMINAL_GAMMA, J=401, bandwidth_gammas=40.0, threshold=0.02):
    med = desk_medium(gamma)
    grid = discretize_reservoir(med, J, bandwidth_gammas * NOMINAL_GAMMA)
    series = oracle_decay(grid, med, t_max=3.0 / NOMINAL_GAMMA, steps=601)
    fit = fit_decay_rate(series, (0.5 / NOMINAL_GAMMA, 3.0 / NOMINAL_GAMMA))
    err = abs(fit.gamma - NOMINAL_GAMMA) / NOMINAL_GAMMA
    return {"passed": err <= threshold, "value": err, "threshold": threshold,
            "fitted_gamma": fit.gamma, "detail": "relative error of the fitted decay rate"}


def commutator_window_max(med, J, bandwidth, points=2001):
    grid = discretize_reservoir(med, J, bandwidth)
    t = np.linspace(0.0, grid.validity_time, points)
    return float(np.max(commutator_defect(t, grid, med)))


def check_commutator(gamma=NOMINAL_GAMMA, Js=(101, 201, 401), bandwidth_gammas=40.0, threshold=1e-2):
    med = desk_medium(gamma)
    maxima = [commutator_window_max(med, J, bandwidth_gammas * NOMINAL_GAMMA) for J in Js]
    monotone = all(b < a for a, b in zip(maxima, maxima[1:]))
    return {"passed": maxima[-1] < threshold and monotone, "value": maxima[-1],
            "threshold": threshold, "by_J": dict(zip(map(str, Js), maxima)), "monotone": monotone,
            "detail": "max defect over the validity window; must also fall with J"}


def lorentzian_errors(med, deltas):
    u = med.u
    out = []
    for d in deltas:
        closed = lorentzian_exchange(d * u, med, u)
        quad = lorentzian_exchange(d * u, med, u, method="quadrature")
        out.append(abs(quad - closed) / abs(closed))
    return np.array(out)


def check_lorentzian(gamma=NOMINAL_GAMMA, omega_ratio=100.0, gamma_delta_max=5.0, points=51,
                     threshold=1e-4):
    med = desk_medium(gamma, omega_tilde=omega_ratio * NOMINAL_GAMMA)
    deltas = np.linspace(0.0, gamma_delta_max / NOMINAL_GAMMA, points)
    errs = lorentzian_errors(med, deltas)
    worst = float(errs.max())
    return {"passed": worst < threshold, "value": worst, "threshold": threshold,
            "worst_gamma_delta": float(deltas[int(np.argmax(errs))] * NOMINAL_GAMMA),
            "detail": "max relative error, quadrature on [0, inf) vs extended-limit closed form"}


def check_delay_decay(gamma=NOMINAL_GAMMA, points=50, threshold=1e-10):
    sc = desk_scenario(gamma)
    res = delay_scan(ScanConfig("selfcheck-delay", "delay", grid=(0.0, 5.0 / NOMINAL_GAMMA, points)), sc)
    err = abs(res.summary["fitted_gamma"] - NOMINAL_GAMMA) / NOMINAL_GAMMA
    return {"passed": err <= threshold, "value": err, "threshold": threshold,
            "fitted_gamma": res.summary["fitted_gamma"], "detail": "relative error of the log-rate slope"}


def crossed_null_ratios(seed, geometries, sigma_acc=0.01):
    """Crossed/parallel analyzer rate for identical linear lasers on random
    momentum-conserving detector pairs."""
    rng = np.random.default_rng(seed)
    med = desk_medium()
    ratios = []
    for _ in range(geometries):
        k1 = random_direction(rng)
        k2 = random_direction(rng)
        while np.dot(k1, k2) < 0.2:
            k2 = random_direction(rng)
        axis = np.cross(k1, k2)
        laser = LaserPair.linear(k1, k2, axis, 3000.0, med.u)
        consts = derive_constants(med, laser)
        r1, r2 = momentum_conserving_pair(k1, k2, rng.uniform(0, 2 * np.pi))
        d1, d2 = DetectorDirection(r1, 1e5), DetectorDirection(r2, 1e5)
        t = 1e5 / med.u + 10.0
        amp = two_photon_amplitude(laser, d1, d2, t, consts, sigma_acc)
        T = amp.assigned("anti_stokes_first")
        rates = {}
        for name, phi in (("parallel", 0.0), ("crossed", np.pi / 2)):
            a1 = analyzer_vector(laser, r1, angle_jones(0.0))
            a2 = analyzer_vector(laser, r2, angle_jones(phi))
            rates[name] = abs(project_analyzers(T, a1, a2, r1, r2)) ** 2
        ratios.append(rates["crossed"] / rates["parallel"])
    return np.array(ratios)


def check_cross_polarization(seed=3, geometries=100, threshold=1e-24):
    worst = float(crossed_null_ratios(seed, geometries).max())
    return {"passed": worst <= threshold, "value": worst, "threshold": threshold,
            "detail": "max crossed-analyzer rate normalized to the parallel rate"}


def check_angular(beam_spread=NOMINAL_BEAM_SPREAD, samples=100_000, half_width=0.3, cells=41, tolerance=0.15,
                  seed=4, max_runtime=120.0):
    start = time.perf_counter()
    sc = desk_scenario(beam_spread=beam_spread, seed=seed)
    res = angular_map(ScanConfig("selfcheck-angular", "angular", grid=(-half_width, half_width, cells),
                                 samples=samples), sc)
    elapsed = time.perf_counter() - start
    expected = NOMINAL_BEAM_SPREAD * np.sqrt(2.0)
    err = float(abs(res.summary["marginal_width"] - expected) / expected)
    return {"passed": err <= tolerance and elapsed <= max_runtime, "value": err, "threshold": tolerance,
            "marginal_width": res.summary["marginal_width"], "expected_width": expected,
            "runtime_s": elapsed, "detail": "relative error of the coincidence marginal width"}


def check_spectrum_duality(gamma=NOMINAL_GAMMA, threshold=1e-6):
    sc = desk_scenario(gamma)
    spec = pair_spectrum(ScanConfig("selfcheck-spectrum", "spectrum"), sc)
    fwhm_err = abs(spec.summary["fwhm"] - NOMINAL_GAMMA)
    step = spec.summary["grid_step"]
    report = spectrum_delay_duality(desk_medium(NOMINAL_GAMMA))
    ok = fwhm_err <= step and report.max_deviation <= threshold
    return {"passed": bool(ok), "value": report.max_deviation, "threshold": threshold,
            "fwhm": spec.summary["fwhm"], "fwhm_error": fwhm_err, "grid_step": step,
            "detail": "FWHM within one step of gamma; max |FT modulus - exp(-gamma|D|/2)|"}


def check_thermal(raman_shift_cm=1332.0, T=300.0, band=(1.0e-3, 2.5e-3)):
    nbar = thermal_phonon_number(wavenumber_to_omega(raman_shift_cm), T)
    return {"passed": band[0] <= nbar <= band[1], "value": nbar, "threshold": list(band),
            "detail": "thermal phonon number of diamond at room temperature"}


def symmetry_errors(seed, configs):
    """Relative mismatch between the amplitude at (r1, r2) and the swapped
    evaluation with legs and frequency assignment exchanged."""
    rng = np.random.default_rng(seed)
    med = desk_medium()
    errs = []
    for _ in range(configs):
        v = rng.normal(size=4)
        v /= np.linalg.norm(v)
        k1 = random_direction(rng)
        k2 = random_direction(rng)
        laser = LaserPair.from_jones(k1, k2, complex(v[0], v[1]), complex(v[2], v[3]), 3000.0, med.u)
        consts = derive_constants(med, laser)
        d1 = DetectorDirection(random_direction(rng), rng.uniform(5e4, 1e5))
        d2 = DetectorDirection(random_direction(rng), rng.uniform(5e4, 1e5))
        t = max(d1.r, d2.r) / med.u + 10.0
        a = two_photon_amplitude(laser, d1, d2, t, consts, sigma_acc=10.0)
        b = two_photon_amplitude(laser, d2, d1, t, consts, sigma_acc=10.0)
        scale = np.abs(a.tensor).max()
        errs.append(max(np.abs(b.tensor.T - a.tensor).max(),
                        np.abs(b.tensor_as.T - a.tensor_sa).max()) / scale)
    return np.array(errs)


def check_exchange_symmetry(seed=5, configs=100, threshold=1e-12):
    worst = float(symmetry_errors(seed, configs).max())
    return {"passed": worst <= threshold, "value": worst, "threshold": threshold,
            "detail": "max relative tensor mismatch under the simultaneous swap"}


def reference_scenario_path():
    return os.path.join(os.path.dirname(__file__), "data", "reference.json")


def outputs_identical(dir_a, dir_b):
    names = sorted(os.listdir(dir_a))
    if names != sorted(os.listdir(dir_b)):
        return False
    _, mismatch, errors = filecmp.cmpfiles(dir_a, dir_b, names, shallow=False)
    return not mismatch and not errors


def check_determinism(path=None, threads=(1, 2)):
    from .runner import run_scenario
    from .scenario import parse_scenario

    scenario = parse_scenario(path or reference_scenario_path())
    with tempfile.TemporaryDirectory() as tmp:
        dirs = []
        for i, n in enumerate(threads):
            d = os.path.join(tmp, f"run{i}")
            run_scenario(scenario, d, threads=n)
            dirs.append(d)
        same = all(outputs_identical(dirs[0], d) for d in dirs[1:])
        count = len(os.listdir(dirs[0]))
    return {"passed": same, "value": same, "threshold": True, "files": count,
            "detail": "byte-identical outputs across repeated runs and thread counts"}


CHECKS = {
    "analytic_signal": (1, check_analytic_signal),
    "free_space_evolution": (2, check_free_space),
    "weisskopf_wigner_decay": (3, check_weisskopf_wigner),
    "commutator_sum_rule": (4, check_commutator),
    "lorentzian_exchange": (5, check_lorentzian),
    "delay_decay": (6, check_delay_decay),
    "cross_polarization_null": (7, check_cross_polarization),
    "angular_correlation": (8, check_angular),
    "spectrum_delay_duality": (9, check_spectrum_duality),
    "thermal_occupation": (10, check_thermal),
    "exchange_symmetry": (11, check_exchange_symmetry),
    "determinism": (12, check_determinism),
}


def self_check(only=None, overrides=None):
    """Run the checks and return a JSON-ready report."""
    overrides = overrides or {}
    unknown = (set(overrides) | set(only or ())) - set(CHECKS)
    if unknown:
        raise KeyError(f"unknown checks: {sorted(unknown)}")
    results = {}
    for name, (criterion, fn) in CHECKS.items():
        if only is not None and name not in only:
            continue
        start = time.perf_counter()
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                entry = fn(**overrides.get(name, {}))
        except Exception as exc:  # reported, not raised
            entry = {"passed": False, "value": None, "threshold": None,
                     "detail": f"{type(exc).__name__}: {exc}"}
        entry = {"criterion": criterion, **entry}
        entry["passed"] = bool(entry["passed"])
        entry.setdefault("runtime_s", time.perf_counter() - start)
        results[name] = entry
    return {"version": __version__, "all_passed": all(r["passed"] for r in results.values()),
            "checks": results}


def _plain(v):
    return float(v) if isinstance(v, np.floating) else v


def format_report(report):
    lines = []
    for name, r in report["checks"].items():
        mark = "PASS" if r["passed"] else "FAIL"
        lines.append(f"[{mark}] {r['criterion']:2d} {name}: value={_plain(r['value'])!r} "
                     f"threshold={r['threshold']!r} ({r['runtime_s']:.1f} s)")
    lines.append("all checks passed" if report["all_passed"] else "some checks FAILED")
    return "\n".join(lines)


def report_json(report):
    from .runner import _jsonable

    return json.dumps(_jsonable(report), indent=2, sort_keys=True)
