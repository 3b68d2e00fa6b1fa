"""Experiment-facing scans over the two-photon amplitude.

Every scan returns a :class:`ScanResult` whose records carry a rate
normalized to the scan maximum together with the raw squared amplitude.

Which arm sees which photon
---------------------------
The symmetrized amplitude contains both frequency assignments.  They share
the same polarization tensor but beat at ``2ω̃`` in the arrival-time
difference.  A real coincidence setup filters each arm spectrally, so scans
default to ``assignment="anti_stokes_first"`` (arm 1 anti-Stokes, arm 2
Stokes).  ``"both"`` keeps the unfiltered sum.
"""

import csv
import hashlib
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np

from .errors import (
    ConfigError,
    DegenerateDistributionError,
    GeometryError,
    ResolutionError,
    UnderflowError,
)
from .fields import _frame_array, unit
from .green import DetectorDirection, _momentum_weight_array
from .pair import ASSIGNMENTS, lorentzian_exchange, two_photon_amplitude

if TYPE_CHECKING:
    from .scenario import Scenario

SCAN_KINDS = ("delay", "polarization", "angular", "spectrum")
UNDERFLOW_LIMIT = 600.0


def derive_rng(seed, scan_id):
    """Generator for one scan, keyed by ``(seed, scan_id)``.

    The stream depends only on the pair, never on execution order, so scans
    running in parallel stay reproducible.
    """
    digest = hashlib.sha256(str(scan_id).encode("utf-8")).digest()
    key = int.from_bytes(digest[:8], "little")
    return np.random.default_rng(np.random.SeedSequence(entropy=int(seed), spawn_key=(key,)))


def _as_jones(value, name):
    if value is None:
        return None
    j = np.asarray(value, dtype=complex).reshape(-1)
    if j.shape != (2,):
        raise ValueError(f"{name} must have two components")
    if abs(np.vdot(j, j).real - 1.0) > 1e-9:
        raise ValueError(f"{name} must be normalized, |J|^2 = {np.vdot(j, j).real!r}")
    return j


@dataclass(frozen=True, eq=False)
class ScanConfig:
    """One scan request.

    ``grid = (start, stop, count)`` means delays of arm 2 in ps for
    ``delay``, arm-2 analyzer angles in rad for ``polarization``, detector
    tilts in rad for ``angular`` and phonon frequencies in rad/ps for
    ``spectrum`` (``None`` picks a default from the medium).

    Analyzers are Jones pairs in each arm's (parallel, perpendicular) frame;
    ``None`` means no analyzer (sum over both polarizations).
    """

    scan_id: str
    kind: str
    grid: tuple = None
    r1: tuple = None
    r2: tuple = None
    distance: float = 1e5
    analyzer1: tuple = None
    analyzer2: tuple = None
    assignment: str = "anti_stokes_first"
    beam_spread: float = None
    sigma_acc: float = None
    samples: int = 100_000
    t: float = None
    events: int = 0
    seed: int = None

    def __post_init__(self):
        if self.kind not in SCAN_KINDS:
            raise ValueError(f"unknown scan kind {self.kind!r}")
        if self.assignment not in ASSIGNMENTS:
            raise ValueError(f"assignment must be one of {ASSIGNMENTS}")
        if self.grid is not None:
            start, stop, count = self.grid
            if int(count) != count or count < 1:
                raise ValueError("grid count must be a positive integer")
            if count > 1 and not stop > start:
                raise ValueError("grid must be increasing (stop > start)")
            object.__setattr__(self, "grid", (float(start), float(stop), int(count)))
        elif self.kind != "spectrum":
            raise ValueError(f"{self.kind} scan needs a grid")
        object.__setattr__(self, "analyzer1", _as_jones(self.analyzer1, "analyzer1"))
        object.__setattr__(self, "analyzer2", _as_jones(self.analyzer2, "analyzer2"))
        if not self.distance > 0:
            raise ValueError("distance must be positive")
        if self.beam_spread is not None and not self.beam_spread >= 0:
            raise ValueError("beam_spread must be >= 0")
        if self.sigma_acc is not None and not self.sigma_acc > 0:
            raise ValueError("sigma_acc must be positive")
        if self.events < 0:
            raise ValueError("events must be >= 0")

    def values(self):
        start, stop, count = self.grid
        return np.linspace(start, stop, count)


@dataclass(frozen=True)
class CoincidenceRecord:
    arm1: dict
    arm2: dict
    rate: float
    raw: float


@dataclass(eq=False)
class ScanResult:
    scan_id: str
    kind: str
    records: list
    summary: dict = field(default_factory=dict)
    rates: np.ndarray = None

    @property
    def columns(self):
        first = self.records[0]
        return ([f"arm1_{k}" for k in first.arm1] + [f"arm2_{k}" for k in first.arm2]
                + ["rate", "raw"])

    def rows(self):
        for rec in self.records:
            yield [*rec.arm1.values(), *rec.arm2.values(), rec.rate, rec.raw]

    def to_csv(self, path):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(self.columns)
            for row in self.rows():
                w.writerow([repr(float(x)) for x in row])


def _normalized(kind, scan_id, settings, raw, summary):
    raw = np.asarray(raw, dtype=float)
    peak = raw.max()
    rates = raw / peak if peak > 0 else np.zeros_like(raw)
    records = [CoincidenceRecord(a1, a2, float(r), float(x))
               for (a1, a2), r, x in zip(settings, rates.ravel(), raw.ravel())]
    return ScanResult(scan_id, kind, records, summary, rates)


def _detectors(config, scenario, delay2=0.0):
    laser = scenario.laser
    forward = unit(laser.mode1.k_hat + laser.mode2.k_hat)
    r1 = forward if config.r1 is None else unit(config.r1)
    r2 = forward if config.r2 is None else unit(config.r2)
    return (DetectorDirection(r1, config.distance),
            DetectorDirection(r2, config.distance, delay2))


def _eval_time(config, scenario, max_delay=0.0):
    if config.t is not None:
        return float(config.t)
    return config.distance / scenario.laser.u + max_delay + 10.0 / scenario.medium.gamma


def analyzer_frame(laser, r_hat):
    """``(e_par, e_perp)`` for an arm looking along ``r_hat``.

    ``e_par`` is the projection of the laser's analyzer axis onto the plane
    normal to ``r_hat``, ``e_perp = r_hat x e_par``.
    """
    r_hat = unit(r_hat)
    a = laser.analyzer_axis
    e_par = a - np.dot(a, r_hat) * r_hat
    norm = np.linalg.norm(e_par)
    if norm < 1e-9:
        raise GeometryError("analyzer reference axis is parallel to the detector direction")
    e_par = e_par / norm
    return e_par, np.cross(r_hat, e_par)


def analyzer_vector(laser, r_hat, jones):
    """Lab-frame analyzer vector for a Jones pair in the arm frame."""
    e_par, e_perp = analyzer_frame(laser, r_hat)
    return jones[0] * e_par + jones[1] * e_perp


def angle_jones(phi):
    return np.array([np.cos(phi), np.sin(phi)], dtype=complex)


def project_analyzers(tensor, a1, a2, r1_hat=None, r2_hat=None):
    """Amplitude seen through analyzers ``a1``, ``a2``: ``a1* . T . a2*``.

    When detector directions are given the analyzers must be transverse.
    """
    for a, r in ((a1, r1_hat), (a2, r2_hat)):
        if r is not None and abs(np.dot(a, r)) > 1e-10:
            raise GeometryError("analyzer is not transverse to its detector direction")
    return complex(np.conj(a1) @ tensor @ np.conj(a2))


def _amplitude_rate(amp, config, laser, jones1=None, jones2=None):
    T = amp.assigned(config.assignment)
    j1 = config.analyzer1 if jones1 is None else jones1
    j2 = config.analyzer2 if jones2 is None else jones2
    if j1 is None and j2 is None:
        return float(np.sum(np.abs(T) ** 2))
    r1, r2 = amp.det1.r_hat, amp.det2.r_hat
    if j1 is None:
        # sum over arm-1 polarizations
        a2 = analyzer_vector(laser, r2, j2)
        return float(np.sum(np.abs(T @ np.conj(a2)) ** 2))
    a1 = analyzer_vector(laser, r1, j1)
    if j2 is None:
        return float(np.sum(np.abs(np.conj(a1) @ T) ** 2))
    a2 = analyzer_vector(laser, r2, j2)
    return abs(project_analyzers(T, a1, a2, r1, r2)) ** 2


def _sigma(config, scenario):
    return scenario.sigma_acc if config.sigma_acc is None else config.sigma_acc


def delay_scan(config, scenario: "Scenario"):
    """Coincidence rate against a delay line in arm 2.

    The stationary rate falls as ``exp(-γ δt)``; the summary carries the
    least-squares decay rate of ``log(rate)`` against ``δt``.
    """
    g = scenario.medium.gamma
    delays = config.values()
    u = scenario.laser.u
    d1, d2 = _detectors(config, scenario)
    base = d2.time_of_flight(u) - d1.time_of_flight(u)
    dts = np.abs(base + delays)
    if g * dts.max() > UNDERFLOW_LIMIT:
        raise UnderflowError(
            f"gamma * delta_t reaches {g * dts.max():.4g} > {UNDERFLOW_LIMIT:g}; rates would underflow")
    t = _eval_time(config, scenario, max(delays.max(), 0.0))
    raw, settings = [], []
    for delay, dt in zip(delays, dts):
        d1, d2 = _detectors(config, scenario, delay)
        amp = two_photon_amplitude(scenario.laser, d1, d2, t, scenario.constants, _sigma(config, scenario))
        raw.append(_amplitude_rate(amp, config, scenario.laser))
        settings.append(({"delay": 0.0}, {"delay": float(delay), "delta_t": float(dt)}))
    raw = np.array(raw)
    summary = {"gamma": g}
    if len(raw) >= 2 and np.all(raw > 0) and np.ptp(dts) > 0:
        slope, intercept = np.polyfit(dts, np.log(raw), 1)
        summary.update(fitted_gamma=float(-slope), log_intercept=float(intercept),
                       relative_error=float(abs(-slope - g) / g))
    return _normalized("delay", config.scan_id, settings, raw, summary)


def polarization_scan(config, scenario: "Scenario"):
    """Coincidence rate against the arm-2 analyzer angle.

    Arm 1 keeps ``analyzer1`` (angle 0 by default).  The summary reports the
    parallel and crossed rates (arm-2 analyzer along arm 1's Jones angle and
    rotated by π/2) and their ratio.
    """
    laser = scenario.laser
    d1, d2 = _detectors(config, scenario)
    t = _eval_time(config, scenario)
    amp = two_photon_amplitude(laser, d1, d2, t, scenario.constants, _sigma(config, scenario))
    j1 = angle_jones(0.0) if config.analyzer1 is None else config.analyzer1
    raw, settings = [], []
    for phi in config.values():
        raw.append(_amplitude_rate(amp, config, laser, j1, angle_jones(phi)))
        settings.append(({"angle": 0.0}, {"angle": float(phi)}))
    # parallel/crossed against the arm-1 Jones direction
    par = _amplitude_rate(amp, config, laser, j1, j1)
    crossed_jones = np.array([-np.conj(j1[1]), np.conj(j1[0])])
    crossed = _amplitude_rate(amp, config, laser, j1, crossed_jones)
    raw = np.array(raw)
    summary = {
        "parallel_raw": par,
        "crossed_raw": crossed,
        "crossed_over_parallel": crossed / par if par > 0 else None,
        "argmax_angle": float(config.values()[int(np.argmax(raw))]),
    }
    return _normalized("polarization", config.scan_id, settings, raw, summary)


def _tilt_directions(center, tilts):
    e1, _ = _frame_array(center)
    d = center[None, :] + np.tan(tilts)[:, None] * e1[None, :]
    return d / np.linalg.norm(d, axis=1, keepdims=True)


def _beam_averaged_rates(laser, consts, r1s, r2s, k1, k2, p1, p2, distance, sigma, assignment,
                         chunk=2000):
    """Mean ``|amplitude|²`` over laser samples for every (r1, r2) cell pair.

    Uses ``P(p, r)·P(q, r)* = p·q* - (p·r)(q·r)*`` so only the scalar
    projections ``p·r`` are needed.  The two frequency assignments share the
    polarization tensor; ``"both"`` multiplies by their phase interference.
    """
    n1, n2 = len(r1s), len(r2s)
    total = np.zeros((n1, n2))
    for lo in range(0, len(k1), chunk):
        sl = slice(lo, lo + chunk)
        q1, q2 = p1[sl], p2[sl]
        s11, s21 = q1 @ r1s.T, q2 @ r1s.T          # (s, n1)
        s12, s22 = q1 @ r2s.T, q2 @ r2s.T          # (s, n2)
        c12 = np.sum(q1 * q2.conj(), axis=1)[:, None]
        aa1 = 1 - np.abs(s11) ** 2                  # |P(p1, r1)|²
        aa2 = 1 - np.abs(s21) ** 2
        bb1 = 1 - np.abs(s12) ** 2
        bb2 = 1 - np.abs(s22) ** 2
        a12 = c12 - s11 * s21.conj()                # P(p1,r1)·P(p2,r1)*
        b21 = c12.conj() - s22 * s12.conj()         # P(p2,r2)·P(p1,r2)*
        # X = P(p1,r1)⊗P(p2,r2) + P(p2,r1)⊗P(p1,r2)
        frob = (aa1[:, :, None] * bb2[:, None, :] + aa2[:, :, None] * bb1[:, None, :]
                + 2 * np.real(a12[:, :, None] * b21[:, None, :]))
        K = k1[sl] + k2[sl]                         # (s, 3)
        rsum = r1s[:, None, :] + r2s[None, :, :]    # (n1, n2, 3)
        w2 = np.exp(-np.sum((rsum[None] - K[:, None, None, :]) ** 2, axis=-1) / sigma ** 2)
        total += np.sum(frob * w2, axis=0)
    mean = total / len(k1)
    scale = (consts.field_prefactor * consts.dipole_p) ** 4 * (consts.omega_a * consts.omega_s) ** 4
    scale /= distance ** 4
    if assignment == "both":
        # equal distances: zero arrival-time difference, phases coincide
        scale *= 4.0
    return scale * mean


def angular_map(config, scenario: "Scenario"):
    """Coincidence map over detector tilts of the two arms.

    Each arm scans a line of tilts about its center direction (in the plane
    of the center's first reference axis).  Rates are averaged over
    ``samples`` focused-beam realizations drawn from the scan's RNG stream;
    the same draws serve every cell.  The summary gives the standard
    deviation of the arm-2 profile at the arm-1 cell nearest zero tilt.
    """
    if config.samples < 1:
        raise ConfigError([(f"scans.{config.scan_id}.samples", "sample budget must be >= 1")])
    laser = scenario.laser
    spread = laser.beam_spread if config.beam_spread is None else config.beam_spread
    sampler = type(laser)(laser.mode1, laser.mode2, spread, laser.analyzer_axis)
    rng = derive_rng(scenario.seed if config.seed is None else config.seed, config.scan_id)
    k1, k2, p1, p2 = sampler.sample(rng, config.samples)
    tilts = config.values()
    d1, d2 = _detectors(config, scenario)
    r1s = _tilt_directions(d1.r_hat, tilts)
    r2s = _tilt_directions(d2.r_hat, tilts)
    raw = _beam_averaged_rates(laser, scenario.constants, r1s, r2s, k1, k2, p1, p2,
                               config.distance, _sigma(config, scenario), config.assignment)
    i0 = int(np.argmin(np.abs(tilts)))
    profile = raw[i0]
    summary = {"beam_spread": spread, "samples": config.samples,
               "expected_width": float(spread * np.sqrt(2.0))}
    if profile.sum() > 0:
        p = profile / profile.sum()
        mean = float(np.sum(p * tilts))
        summary.update(marginal_mean=mean,
                       marginal_width=float(np.sqrt(np.sum(p * (tilts - mean) ** 2))))
    settings = [({"tilt": float(a)}, {"tilt": float(b)}) for a in tilts for b in tilts]
    return _normalized("angular", config.scan_id, settings, raw, summary)


def lorentzian_density(omega, medium):
    """Pair spectral density ``1/((ω - ω̃)² + γ²/4)``."""
    return 1.0 / ((np.asarray(omega) - medium.omega_tilde) ** 2 + 0.25 * medium.gamma ** 2)


def _check_spectrum_grid(omega, medium):
    g, wt = medium.gamma, medium.omega_tilde
    step = np.diff(omega)
    if len(omega) < 3 or step.max() > g / 4:
        raise ResolutionError(f"frequency step must be <= gamma/4 = {g / 4:.4g} rad/ps")
    if omega[0] > wt - 5 * g or omega[-1] < wt + 5 * g:
        raise ResolutionError("frequency grid must span at least 10 gamma around omega_tilde")


def _fwhm(omega, density):
    half = 0.5 * density.max()
    above = np.nonzero(density >= half)[0]
    lo, hi = above[0], above[-1]
    if lo == 0 or hi == len(omega) - 1:
        return float("nan")

    def cross(i, j):
        return omega[i] + (half - density[i]) * (omega[j] - omega[i]) / (density[j] - density[i])

    return float(cross(hi, hi + 1) - cross(lo - 1, lo))


def pair_spectrum(config, scenario: "Scenario"):
    """Lorentzian spectrum of the pairs against the phonon frequency."""
    med = scenario.medium
    if config.grid is None:
        omega = np.linspace(med.omega_tilde - 100 * med.gamma, med.omega_tilde + 100 * med.gamma, 1601)
    else:
        omega = config.values()
    _check_spectrum_grid(omega, med)
    raw = lorentzian_density(omega, med)
    summary = {
        "peak_omega": float(omega[int(np.argmax(raw))]),
        "fwhm": _fwhm(omega, raw),
        "gamma": med.gamma,
        "grid_step": float(omega[1] - omega[0]),
        "area": float(np.trapezoid(raw, omega)),
        "area_expected": 2 * np.pi / med.gamma,
    }
    settings = [({"omega": float(w)}, {}) for w in omega]
    return _normalized("spectrum", config.scan_id, settings, raw, summary)


@dataclass(frozen=True)
class DualityReport:
    delta: np.ndarray
    modulus: np.ndarray
    expected: np.ndarray
    max_deviation: float


def spectrum_delay_duality(medium, step=None, points=2 ** 24, delta_max=None):
    """Fourier transform of the sampled pair spectrum against the delay decay.

    The spectrum is sampled with ``step`` (default γ/8) on ``points`` nodes
    centred on ω̃ and transformed by FFT.  The modulus, normalized at Δ = 0,
    is compared with ``|lorentzian_exchange| / (2π/γ) = e^{-γ|Δ|/2}`` for
    ``0 <= Δ <= delta_max`` (default 20/γ).
    """
    g = medium.gamma
    h = g / 8 if step is None else float(step)
    if h > g / 4:
        raise ResolutionError(f"step must be <= gamma/4 = {g / 4:.4g}")
    dmax = 20.0 / g if delta_max is None else float(delta_max)
    omega = medium.omega_tilde + (np.arange(points) - points // 2) * h
    spec = lorentzian_density(omega, medium)
    ft = np.fft.ifft(spec) * points * h
    delta = 2 * np.pi * np.arange(points) / (points * h)
    keep = delta <= dmax
    modulus = np.abs(ft[keep]) / abs(ft[0])
    u = medium.u
    area = 2 * np.pi / g
    expected = np.abs(lorentzian_exchange(delta[keep] * u, medium, u)) / area
    return DualityReport(delta=delta[keep], modulus=modulus, expected=expected,
                         max_deviation=float(np.max(np.abs(modulus - expected))))


@dataclass(eq=False)
class EventSample:
    """Synthetic coincidence events: a cell index and a timestamp each.

    Timestamps have unit-mean exponential spacing (arbitrary time unit).
    """

    cells: np.ndarray
    timestamps: np.ndarray
    n_cells: int

    def __len__(self):
        return len(self.cells)

    def histogram(self):
        return np.bincount(self.cells, minlength=self.n_cells)

    def to_csv(self, path, records=None):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            head = ["event", "cell"]
            if records:
                head += [f"arm1_{k}" for k in records[0].arm1] + [f"arm2_{k}" for k in records[0].arm2]
            w.writerow(head + ["timestamp"])
            for i, (c, ts) in enumerate(zip(self.cells, self.timestamps)):
                row = [str(i), str(int(c))]
                if records:
                    rec = records[c]
                    row += [repr(float(v)) for v in (*rec.arm1.values(), *rec.arm2.values())]
                w.writerow(row + [repr(float(ts))])


def sample_events(rate_map, seed, n_events, scan_id="events"):
    """Draw coincidence events from a discrete rate map by inverse transform.

    ``rate_map`` may have any shape; cells are numbered in C order.
    """
    rates = np.asarray(rate_map, dtype=float).ravel()
    if n_events < 1:
        raise ValueError("n_events must be >= 1")
    if not np.all(np.isfinite(rates)) or np.any(rates < 0):
        raise ValueError("rates must be finite and non-negative")
    cdf = np.cumsum(rates)
    if cdf[-1] <= 0:
        raise DegenerateDistributionError("rate map is identically zero")
    cdf /= cdf[-1]
    rng = derive_rng(seed, scan_id)
    cells = np.searchsorted(cdf, rng.random(n_events), side="right")
    cells = np.minimum(cells, len(rates) - 1)
    timestamps = np.cumsum(rng.exponential(1.0, n_events))
    return EventSample(cells=cells, timestamps=timestamps, n_cells=len(rates))


def total_variation(events, rate_map):
    p = np.asarray(rate_map, dtype=float).ravel()
    p = p / p.sum()
    return 0.5 * float(np.sum(np.abs(events.histogram() / len(events) - p)))


SCAN_FUNCTIONS = {
    "delay": delay_scan,
    "polarization": polarization_scan,
    "angular": angular_map,
    "spectrum": pair_spectrum,
}


def run_scan(config, scenario: "Scenario"):
    return SCAN_FUNCTIONS[config.kind](config, scenario)
