"""Two-photon Stokes/anti-Stokes amplitude.

Each leg is the far field of a point dipole oscillating at ``ω_a = ω_ℓ + ω̃``
or ``ω_s = ω_ℓ - ω̃``, polarized along the projection of a laser polarization
on the plane normal to the detector.  The pair amplitude is the symmetrized
product of the legs, damped by ``exp(-γ δt / 2)`` in the arrival-time
difference and weighted by the momentum acceptance.

Symmetrization sums the swap terms without a normalization factor.  All
observables are ratios, so the convention cancels.

Model units: ħ = ε₀ = µ₀ = 1 unless overridden in :func:`derive_constants`.
"""

import csv
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .bath import thermal_phonon_number
from .errors import (
    DomainError,
    FarFieldError,
    SingularConstantError,
    StationarityError,
    ThermalOccupationError,
)
from .fields import PlaneWaveMode, _frame_array, unit
from .green import _check_decaying, _momentum_weight_array

VACUUM_THRESHOLD = 1e-2


@dataclass(frozen=True, eq=False)
class LaserPair:
    """Two laser photons of common frequency.

    ``analyzer_axis`` is the real lab axis that polarization analyzers are
    referenced to (angle 0 = its projection on the detector plane).  By
    default it is ``e1`` of the first mode, i.e. the ``alpha`` axis of a
    Jones pair.
    """

    mode1: PlaneWaveMode
    mode2: PlaneWaveMode
    beam_spread: float = 0.0
    analyzer_axis: np.ndarray = None

    def __post_init__(self):
        if abs(self.mode1.omega - self.mode2.omega) > 1e-12 * self.mode1.omega:
            raise ValueError("both laser photons must share the same frequency")
        if abs(self.mode1.phase_speed - self.mode2.phase_speed) > 1e-9 * self.mode1.phase_speed:
            raise ValueError("laser modes imply different phase speeds")
        if not self.beam_spread >= 0:
            raise ValueError("beam_spread must be >= 0")
        axis = self.analyzer_axis
        if axis is None:
            axis = _frame_array(self.mode1.k_hat)[0]
        object.__setattr__(self, "analyzer_axis", unit(np.real(axis)))

    @property
    def omega_l(self):
        return self.mode1.omega

    @property
    def u(self):
        return self.mode1.phase_speed

    @classmethod
    def from_jones(cls, direction1, direction2, alpha, beta, omega_l, u, beam_spread=0.0):
        """Jones pair taken in the frame of ``direction1``; the second photon
        carries the same polarization vector projected onto its own plane."""
        m1 = PlaneWaveMode.from_jones(direction1, alpha, beta, omega_l, u)
        return cls(m1, m1.redirected(direction2), beam_spread)

    @classmethod
    def linear(cls, direction1, direction2, axis, omega_l, u, beam_spread=0.0):
        m1 = PlaneWaveMode.linear(direction1, axis, omega_l, u)
        m2 = PlaneWaveMode.linear(direction2, axis, omega_l, u)
        return cls(m1, m2, beam_spread, analyzer_axis=np.real(m1.polarization))

    def sample(self, rng, n):
        """Draw ``n`` focused-beam realizations.

        Each photon direction is tilted from its nominal direction by
        independent Gaussian angles of std ``beam_spread`` along the two
        transverse axes; polarizations follow by transverse projection.
        Returns ``(k1, k2, pol1, pol2)`` arrays of shape ``(n, 3)``.
        """
        out = []
        for mode in (self.mode1, self.mode2):
            k0 = mode.k_hat
            e1, e2 = _frame_array(k0)
            a = rng.normal(scale=self.beam_spread, size=(n, 2))
            ang = np.hypot(a[:, 0], a[:, 1])
            with np.errstate(invalid="ignore", divide="ignore"):
                d = np.where(ang[:, None] > 0, (a[:, :1] * e1 + a[:, 1:] * e2) / ang[:, None], 0.0)
            k = np.cos(ang)[:, None] * k0 + np.sin(ang)[:, None] * d
            k /= np.linalg.norm(k, axis=1, keepdims=True)
            p = mode.polarization - np.sum(mode.polarization * k, axis=1, keepdims=True) * k
            p /= np.sqrt(np.sum(np.abs(p) ** 2, axis=1, keepdims=True))
            out.append((k, p))
        (k1, p1), (k2, p2) = out
        return k1, k2, p1, p2


@dataclass(frozen=True)
class PairConstants:
    C_const: complex
    D_const: complex
    dipole_p: float
    omega_l: float
    omega_a: float
    omega_s: float
    Omega_a: complex
    Omega_s: complex
    gamma: float
    field_prefactor: float


def derive_constants(medium, laser, V_Q=None, hbar=1.0, eps0=1.0, mu0=1.0):
    """Coupling constants and the equivalent dipole moment.

    ``C = i N α' µ₀ ε₀ ħ / (2n sqrt(2 M ω̃ V_Q))``, ``D = C V_S / 2π`` and
    ``p = (ħ N V_S α' / 2n) sqrt(ε₀ ω_ℓ / (M ω̃ V_Q))``.  ``V_Q`` defaults to
    ``1000 V_S``.  ``p`` is the modulus: the overall factor ``i`` of ``C`` is
    a global phase of the pair amplitude.
    """
    if V_Q is None:
        V_Q = 1e3 * medium.V_S
    w_l = laser.omega_l
    if medium.M == 0 or medium.omega_tilde == 0 or w_l == 0:
        raise SingularConstantError("mass and frequencies must be non-zero")
    for name in ("N", "alpha_prime", "M", "omega_tilde", "gamma", "V_S"):
        if not getattr(medium, name) > 0:
            raise ValueError(f"medium.{name} must be positive")
    if V_Q < medium.V_S:
        raise ValueError(f"V_Q = {V_Q!r} is smaller than V_S = {medium.V_S!r}")
    n, wt, g = medium.n, medium.omega_tilde, medium.gamma
    C = 1j * medium.N * medium.alpha_prime * mu0 * eps0 * hbar / (
        2 * n * np.sqrt(2 * medium.M * wt * V_Q))
    D = C * medium.V_S / (2 * np.pi)
    p = hbar * medium.N * medium.V_S * medium.alpha_prime / (2 * n) * np.sqrt(
        eps0 * w_l / (medium.M * wt * V_Q))
    return PairConstants(
        C_const=complex(C), D_const=complex(D), dipole_p=float(p), omega_l=float(w_l),
        omega_a=w_l + wt, omega_s=w_l - wt,
        Omega_a=complex(w_l + wt, -g / 2), Omega_s=complex(w_l - wt, -g / 2),
        gamma=float(g), field_prefactor=float(np.sqrt(2 * eps0) * mu0 / (4 * np.pi)),
    )


def check_vacuum_approximation(medium, threshold=VACUUM_THRESHOLD):
    """Return the thermal phonon number, raising if it spoils the vacuum
    approximation."""
    nbar = thermal_phonon_number(medium.omega_tilde, medium.T)
    if nbar > threshold:
        raise ThermalOccupationError(
            f"thermal phonon number {nbar:.3e} exceeds {threshold:g}; "
            "the vibrational vacuum approximation does not hold")
    return nbar


def lorentzian_exchange(delta_r, medium, u=None, method="closed", omega_max=None):
    """Frequency integral ``∫ dω e^{iωΔ} / ((ω - ω̃)² + γ²/4)`` with ``Δ = δr/u``.

    ``method="closed"`` extends the lower limit to -∞ and returns
    ``(2π/γ) e^{iω̃Δ} e^{-γ|Δ|/2}``.  ``method="quadrature"`` integrates
    numerically over ``[0, omega_max]`` (``None`` = ∞) with adaptive
    QUADPACK rules, Fourier-weighted where the integrand oscillates.  The
    closed form accepts arrays of ``delta_r``.
    """
    if u is None:
        u = medium.u
    wt, g = medium.omega_tilde, medium.gamma
    if method == "closed":
        delta = np.asarray(delta_r, dtype=float) / u
        value = 2 * np.pi / g * np.exp(1j * wt * delta - 0.5 * g * np.abs(delta))
        return complex(value) if value.ndim == 0 else value
    if method != "quadrature":
        raise ValueError(f"unknown method {method!r}")
    delta = float(delta_r) / u
    upper = np.inf if omega_max is None else float(omega_max)

    def lor(w):
        return 1.0 / ((w - wt) ** 2 + 0.25 * g * g)

    opts = dict(epsabs=1e-15 * 2 * np.pi / g, epsrel=1e-11, limit=2000)
    lo = max(wt - 50 * g, 0.0)
    hi = min(wt + 50 * g, upper)
    pieces = [(0.0, lo, "outer"), (lo, hi, "core"), (hi, upper, "outer")]
    total = 0.0 + 0.0j
    for a, b, kind in pieces:
        if b <= a:
            continue
        if delta == 0.0:
            total += integrate.quad(lor, a, b, **opts)[0]
        elif kind == "core":
            pts = [wt] if a < wt < b else None
            re = integrate.quad(lambda w: lor(w) * np.cos(w * delta), a, b, points=pts, **opts)[0]
            im = integrate.quad(lambda w: lor(w) * np.sin(w * delta), a, b, points=pts, **opts)[0]
            total += re + 1j * im
        elif np.isinf(b):
            # QAWF: Fourier integral over a semi-infinite range
            re = integrate.quad(lor, a, b, weight="cos", wvar=delta, limlst=200)[0]
            im = integrate.quad(lor, a, b, weight="sin", wvar=delta, limlst=200)[0]
            total += re + 1j * im
        else:
            re = integrate.quad(lor, a, b, weight="cos", wvar=delta, **opts)[0]
            im = integrate.quad(lor, a, b, weight="sin", wvar=delta, **opts)[0]
            total += re + 1j * im
    return complex(total)


@dataclass(frozen=True)
class VacuumReport:
    c_deviation: float
    b_deviation: float
    v_norm: float
    v_deviation: float
    cross_max: float
    thermal_N: float = None
    tolerance: float = 1e-2

    @property
    def passed(self):
        ok = (self.c_deviation <= 1e-12 and self.b_deviation <= 1e-12
              and self.v_deviation <= self.tolerance and self.cross_max == 0.0)
        if self.thermal_N is not None:
            ok = ok and self.thermal_N <= VACUUM_THRESHOLD
        return ok


def vacuum_matrix_elements(oracle, check="all", n_modes=2, medium=None):
    """Evaluate ``<0|X_1 X_2†|0>`` for the reservoir, oscillator and the
    composite noise operator ``v_q = Σ_j ζ_j c_jq / (ω_j - ω̃ + iγ/2)`` on
    the truncated Fock space of ``oracle``.

    ``check`` restricts the work to ``"c"``, ``"b"`` or ``"v"``.  When
    ``medium`` is given its thermal phonon number is reported too.
    """
    spec, grid = oracle.spec, oracle.grid
    b_ops, c_ops = oracle.ladder_operators(n_modes)
    dim = b_ops[0].shape[0]
    vac = np.zeros(dim, dtype=complex)
    vac[0] = 1.0

    def gram(ops):
        X = np.column_stack([op.conj().T @ vac for op in ops])
        return X.conj().T @ X

    def deviation(G):
        return float(np.max(np.abs(G - np.eye(G.shape[0]))))

    def offdiag(G):
        return float(np.max(np.abs(G - np.diag(np.diag(G))))) if G.shape[0] > 1 else 0.0

    c_dev = b_dev = v_dev = cross = 0.0
    v_norm = float("nan")
    if check in ("all", "c"):
        G = gram([c for cq in c_ops for c in cq])
        c_dev, cross = deviation(G), max(cross, offdiag(G))
    if check in ("all", "b"):
        G = gram(b_ops)
        b_dev, cross = deviation(G), max(cross, offdiag(G))
    if check in ("all", "v"):
        w = grid.couplings / (grid.omegas - spec.omega_tilde + 0.5j * spec.gamma)
        v_ops = [sum(wj * c for wj, c in zip(w, cq)) for cq in c_ops]
        G = gram(v_ops)
        v_norm = float(np.real(G[0, 0]))
        v_dev, cross = float(np.max(np.abs(np.diag(G) - 1.0))), max(cross, offdiag(G))
    nbar = thermal_phonon_number(medium.omega_tilde, medium.T) if medium is not None else None
    return VacuumReport(c_deviation=c_dev, b_deviation=b_dev, v_norm=v_norm,
                        v_deviation=v_dev, cross_max=cross, thermal_N=nbar)


def _dipole_legs(omega, pol, r_hat, r, tof, t, consts):
    e_perp = pol - np.sum(pol * r_hat, axis=-1, keepdims=True) * r_hat
    scale = consts.field_prefactor * consts.dipole_p * omega ** 2 / r * np.exp(
        -1j * omega * (t - tof))
    return np.asarray(scale)[..., None] * e_perp


def dipole_wavefunction(omega, mode, det, t, consts, u=None, source_size=0.0):
    """Far-field wave function of the equivalent dipole at frequency ``omega``.

    ``sqrt(2ε₀) (µ₀/4π) p A(θ) ω²/r e^{-iω t_r} ê⊥``, the single-mode
    scattered amplitude scaled by ``p sqrt(2ε₀) µ₀/4π``.
    """
    _check_decaying(omega)
    if not det.is_far_field(source_size):
        raise FarFieldError(f"r = {det.r!r} µm is not in the far field of a {source_size!r} µm source")
    if u is None:
        u = mode.phase_speed
    return _dipole_legs(omega, mode.polarization, det.r_hat, det.r, det.time_of_flight(u), t, consts)


ASSIGNMENTS = ("anti_stokes_first", "stokes_first", "both")


@dataclass(frozen=True, eq=False)
class PairAmplitude:
    """Symmetrized pair amplitude at ``(r₁, r₂, t)``.

    ``tensor[i, j]`` pairs component ``i`` of the photon at ``det1`` with
    component ``j`` of the photon at ``det2``.  ``tensor_as`` keeps only the
    terms with the anti-Stokes photon at ``det1`` (what a spectrally filtered
    arm sees), ``tensor_sa`` the reverse; ``tensor`` is their sum.
    """

    tensor: np.ndarray
    tensor_as: np.ndarray
    tensor_sa: np.ndarray
    det1: object
    det2: object
    t: float
    decay: float
    weight: float

    def assigned(self, assignment="both"):
        if assignment == "anti_stokes_first":
            return self.tensor_as
        if assignment == "stokes_first":
            return self.tensor_sa
        if assignment == "both":
            return self.tensor
        raise ValueError(f"assignment must be one of {ASSIGNMENTS}")

    def leg_transversality(self):
        """Largest component of either leg along its own detector direction."""
        T = self.tensor
        leg1 = np.abs(np.einsum("i,ij->j", self.det1.r_hat, T)).max()
        leg2 = np.abs(np.einsum("j,ij->i", self.det2.r_hat, T)).max()
        return float(max(leg1, leg2))


def _pair_terms(k_pols, r1_hat, r2_hat, r1, r2, tof1, tof2, t, consts):
    """Unsymmetrized leg products for both frequency assignments.

    ``k_pols = (pol1, pol2)`` are the polarization arrays of the two laser
    photons.  Returns the four leg pairs ``[(a, b), ...]`` for the
    anti-Stokes-first and Stokes-first groups.
    """
    pol1, pol2 = k_pols
    wa, ws = consts.omega_a, consts.omega_s

    def leg(w, pol, r_hat, r, tof):
        return _dipole_legs(w, pol, r_hat, r, tof, t, consts)

    as_terms = [
        (leg(wa, pol1, r1_hat, r1, tof1), leg(ws, pol2, r2_hat, r2, tof2)),
        (leg(wa, pol2, r1_hat, r1, tof1), leg(ws, pol1, r2_hat, r2, tof2)),
    ]
    sa_terms = [
        (leg(ws, pol2, r1_hat, r1, tof1), leg(wa, pol1, r2_hat, r2, tof2)),
        (leg(ws, pol1, r1_hat, r1, tof1), leg(wa, pol2, r2_hat, r2, tof2)),
    ]
    return as_terms, sa_terms


def _check_times(laser, det1, det2, t, gamma, transient):
    u = laser.u
    if det1.retarded_time(t, u) < 0 or det2.retarded_time(t, u) < 0:
        raise DomainError("both retarded times must be non-negative")
    if not transient and not t > 5.0 / gamma:
        raise StationarityError(
            f"t = {t!r} ps is not in the stationary regime (needs t > 5/gamma = {5 / gamma:.4g} ps)")


def two_photon_amplitude(laser, det1, det2, t, consts, sigma_acc=0.01, transient=False):
    """Stationary two-photon scattered wave function.

    ``e^{-γδt/2} S'[Ψ_ωa(r₁) Ψ_ωs(r₂)] w`` with ``δt`` the difference of the
    two arm arrival times, ``S'`` the unnormalized sum over the detector and
    laser-photon swaps, and ``w`` the momentum acceptance weight.  With
    ``transient=True`` the ``2 e^{-γt}`` start-up term is added and the
    stationarity requirement is lifted.
    """
    _check_times(laser, det1, det2, t, consts.gamma, transient)
    u = laser.u
    tof1, tof2 = det1.time_of_flight(u), det2.time_of_flight(u)
    decay = np.exp(-0.5 * consts.gamma * abs(tof1 - tof2))
    if transient:
        decay += 2.0 * np.exp(-consts.gamma * t)
    w = float(_momentum_weight_array(laser.mode1.k_hat, laser.mode2.k_hat,
                                     det1.r_hat, det2.r_hat, sigma_acc))
    as_terms, sa_terms = _pair_terms((laser.mode1.polarization, laser.mode2.polarization),
                                     det1.r_hat, det2.r_hat, det1.r, det2.r, tof1, tof2, t, consts)
    scale = decay * w
    t_as = scale * sum(np.outer(a, b) for a, b in as_terms)
    t_sa = scale * sum(np.outer(a, b) for a, b in sa_terms)
    return PairAmplitude(tensor=t_as + t_sa, tensor_as=t_as, tensor_sa=t_sa, det1=det1,
                         det2=det2, t=float(t), decay=float(decay), weight=w)


def _frobenius_sq(terms):
    """``|Σ_i a_i ⊗ b_i|²`` from inner products, without forming tensors."""
    total = 0.0
    for ai, bi in terms:
        for aj, bj in terms:
            total = total + np.real(np.sum(ai * aj.conj(), axis=-1) * np.sum(bi * bj.conj(), axis=-1))
    return total


def _polar_angles(v):
    return float(np.arccos(np.clip(v[2], -1.0, 1.0))), float(np.arctan2(v[1], v[0]))


def write_amplitude_csv(path, amplitudes, u):
    """Dump pair amplitudes: detector polar angles, δt and the 9 tensor entries."""
    header = ["r1_theta", "r1_phi", "r2_theta", "r2_phi", "delta_t"]
    header += [f"{part}_{i}{j}" for i in range(3) for j in range(3) for part in ("re", "im")]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for amp in amplitudes:
            dt = abs(amp.det1.time_of_flight(u) - amp.det2.time_of_flight(u))
            row = [*_polar_angles(amp.det1.r_hat), *_polar_angles(amp.det2.r_hat), dt]
            row += [x for z in amp.tensor.ravel() for x in (z.real, z.imag)]
            w.writerow([repr(float(x)) for x in row])
