"""Damped molecular oscillator coupled to a discretized reservoir.

The closed forms (exponential amplitude decay and the Langevin kernel) are
checked against an exact model: the oscillator plus J reservoir modes
restricted to the one-quantum sector, a (J+1)-dimensional Hermitian matrix
that is diagonalized once and then evolved exactly.

Frequencies are rad/ps and times ps; ħ = 1 inside the oracle.
"""

import csv
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import constants, sparse

from .errors import (
    DomainError,
    PhysicsWarning,
    RecurrenceError,
    ResourceError,
    UnderResolvedBathError,
    WindowError,
)
from .fields import C_UM_PER_PS

MAX_ORACLE_DIM = 100_000


@dataclass(frozen=True)
class MediumSpec:
    """Raman-active medium.

    Attributes
    ----------
    n : refractive index
    N : molecular number density (µm⁻³)
    alpha_prime : polarizability derivative dα/dQ (model units)
    M : total oscillator mass (model units)
    omega0 : bare vibrational resonance (rad/ps)
    omega_tilde : observed resonance (rad/ps); the operative value everywhere
    gamma : phonon decay rate (rad/ps)
    V_S : scattering volume (µm³)
    T : temperature (K)
    """

    n: float
    N: float
    alpha_prime: float
    M: float
    omega0: float
    omega_tilde: float
    gamma: float
    V_S: float
    T: float = 300.0

    def __post_init__(self):
        if not self.n >= 1.0:
            raise ValueError(f"refractive index must be >= 1, got {self.n!r}")
        if not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma!r}")
        if not self.omega_tilde > 0:
            raise ValueError(f"omega_tilde must be positive, got {self.omega_tilde!r}")
        if self.gamma / self.omega_tilde >= 0.1:
            warnings.warn(f"gamma/omega_tilde = {self.gamma / self.omega_tilde:.3g} is not << 1; "
                          "the Weisskopf-Wigner treatment is questionable", PhysicsWarning,
                          stacklevel=3)
        if self.omega0 > 0 and abs(self.omega_tilde - self.omega0) > 0.05 * self.omega0:
            warnings.warn("omega_tilde deviates from omega0 by more than 5%", PhysicsWarning,
                          stacklevel=3)

    @property
    def u(self):
        """Phase speed in the medium, µm/ps."""
        return C_UM_PER_PS / self.n

    @property
    def complex_frequency(self):
        return self.omega_tilde - 0.5j * self.gamma


@dataclass(frozen=True, eq=False)
class ReservoirGrid:
    """Flat, uniformly discretized bath centred on the resonance."""

    omegas: np.ndarray
    couplings: np.ndarray
    density: float
    bandwidth: float
    center: float
    gamma: float

    @property
    def count(self):
        return self.omegas.size

    @property
    def spacing(self):
        return 1.0 / self.density

    @property
    def recurrence_time(self):
        """Revival time ``2π/Δω`` of the discrete bath, ps."""
        return 2 * np.pi * self.density

    @property
    def validity_time(self):
        return 0.5 * self.recurrence_time

    def coupling_density(self):
        """``|ζ(ω̃)|² ν(ω̃)``; equals ``γ/2π`` by construction."""
        mid = self.count // 2
        return float(abs(self.couplings[mid]) ** 2 * self.density)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["omega", "re_zeta", "im_zeta"])
            for om, z in zip(self.omegas, self.couplings):
                w.writerow([repr(float(om)), repr(float(z.real)), repr(float(z.imag))])


def discretize_reservoir(spec, J=401, bandwidth=None):
    """Uniform bath of ``J`` modes spanning ``bandwidth`` around ``omega_tilde``.

    The mode density is ``ν = J / bandwidth`` and the constant coupling is
    chosen so that ``|ζ|² ν = γ / 2π``.  ``bandwidth`` defaults to ``40 γ``.
    """
    if bandwidth is None:
        bandwidth = 40.0 * spec.gamma
    if bandwidth < 10 * spec.gamma:
        raise UnderResolvedBathError(
            f"bandwidth {bandwidth!r} < 10 gamma: the bath cannot support Markovian decay")
    if bandwidth < 20 * spec.gamma:
        warnings.warn("bandwidth below 20 gamma; decay will deviate from exponential",
                      PhysicsWarning, stacklevel=2)
    if J < 101 or J % 2 == 0:
        raise ValueError(f"J must be odd and >= 101, got {J!r}")
    density = J / bandwidth
    spacing = bandwidth / J
    omegas = spec.omega_tilde + spacing * (np.arange(J) - (J - 1) // 2)
    zeta = np.sqrt(spec.gamma / (2 * np.pi * density))
    return ReservoirGrid(omegas=omegas, couplings=np.full(J, zeta, dtype=complex),
                         density=density, bandwidth=float(bandwidth),
                         center=spec.omega_tilde, gamma=spec.gamma)


def _check_forward(t):
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise DomainError("time must be non-negative")
    return t


def ww_amplitude(t, spec):
    """Weisskopf–Wigner amplitude ``exp(-i(ω̃ - iγ/2) t)``."""
    t = _check_forward(t)
    out = np.exp(-1j * spec.complex_frequency * t)
    return complex(out) if out.ndim == 0 else out


def langevin_kernel(j, t, grid, spec):
    """Coefficient of the reservoir operator ``c_j`` in the Langevin term.

    ``j`` may be an index, slice or index array; ``t`` a scalar or an array
    broadcastable against the selected modes.
    """
    t = _check_forward(t)
    wj = grid.omegas[j]
    zj = grid.couplings[j]
    num = np.exp(-1j * wj * t) - np.exp(-1j * spec.complex_frequency * t)
    out = zj * num / (wj - spec.omega_tilde + 0.5j * spec.gamma)
    return complex(out) if np.ndim(out) == 0 else out


def _check_window(t, grid):
    if np.any(np.asarray(t) > grid.validity_time):
        raise RecurrenceError(
            f"t exceeds half the bath recurrence time ({grid.validity_time:.4g} ps)")


def commutator_defect(t, grid, spec):
    """``|e^{-γt} + Σ_j |L_j(t)|² - 1|``: how far the discrete bath is from
    preserving ``[b(t), b†(t)] = 1``.  Accepts scalar or 1-D ``t``."""
    t = _check_forward(t)
    _check_window(t, grid)
    tt = np.atleast_1d(t)
    out = np.empty(tt.shape)
    for i, ti in enumerate(tt):
        L = langevin_kernel(slice(None), ti, grid, spec)
        out[i] = abs(np.exp(-spec.gamma * ti) + np.sum(np.abs(L) ** 2) - 1.0)
    return float(out[0]) if t.ndim == 0 else out


class FockOracle:
    """Exact molecule + bath dynamics in the one-quantum sector.

    Basis index 0 is the excited molecule, index ``1 + j`` is one quantum in
    bath mode ``j``.  Energies are measured from ``omega_tilde`` (a global
    phase, irrelevant for populations).
    """

    def __init__(self, grid, spec):
        dim = grid.count + 1
        if dim > MAX_ORACLE_DIM:
            raise ResourceError(f"oracle dimension {dim} exceeds {MAX_ORACLE_DIM}")
        self.grid = grid
        self.spec = spec
        H = np.zeros((dim, dim), dtype=complex)
        H[0, 0] = 0.0
        H[np.arange(1, dim), np.arange(1, dim)] = grid.omegas - spec.omega_tilde
        # <mol|H|bath_j> = ζ_j from the ζ_j c_j b† term
        H[0, 1:] = grid.couplings
        H[1:, 0] = grid.couplings.conj()
        self.hamiltonian = H
        self._energies, self._vectors = np.linalg.eigh(H)

    @property
    def dimension(self):
        return self.hamiltonian.shape[0]

    def hermiticity_error(self):
        return float(np.max(np.abs(self.hamiltonian - self.hamiltonian.conj().T)))

    def initial_state(self, initial="molecule"):
        psi = np.zeros(self.dimension, dtype=complex)
        psi[0 if initial == "molecule" else 1 + int(initial)] = 1.0
        return psi

    def evolve(self, psi0, times):
        """States at each time, shape ``(len(times), dim)``."""
        V = self._vectors
        coeff = V.conj().T @ psi0
        phases = np.exp(-1j * np.outer(np.asarray(times, dtype=float), self._energies))
        return (phases * coeff) @ V.T

    def ladder_operators(self, n_modes=1):
        """Sparse matrices for ``b_q`` and ``c_{jq}`` on vacuum ⊕ one-quantum space.

        With ``n_modes`` spatial modes the space has dimension
        ``1 + n_modes (J + 1)``; index 0 is the vacuum.  Returns
        ``(b, c)`` with ``b[q]`` and ``c[q][j]`` annihilation operators.
        """
        J = self.grid.count
        dim = 1 + n_modes * (J + 1)
        if dim > MAX_ORACLE_DIM:
            raise ResourceError(f"operator dimension {dim} exceeds {MAX_ORACLE_DIM}")

        def lowering(state):
            return sparse.csr_matrix(([1.0], ([0], [state])), shape=(dim, dim), dtype=complex)

        b, c = [], []
        for q in range(n_modes):
            base = 1 + q * (J + 1)
            b.append(lowering(base))
            c.append([lowering(base + 1 + j) for j in range(J)])
        return b, c


@dataclass(frozen=True, eq=False)
class DecaySeries:
    t: np.ndarray
    survival: np.ndarray
    norm_error: float
    gamma: float

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t", "survival", "model"])
            for ti, si in zip(self.t, self.survival):
                w.writerow([repr(float(ti)), repr(float(si)), repr(float(np.exp(-self.gamma * ti)))])


def oracle_decay(grid, spec, t_max, steps, initial="molecule"):
    """Molecular excitation probability under exact one-quantum evolution.

    ``initial`` is ``"molecule"`` or the index of a bath mode that starts
    excited instead.  Norm conservation is checked to 1e-9.
    """
    if grid.count + 1 > MAX_ORACLE_DIM:
        raise ResourceError(f"oracle dimension {grid.count + 1} exceeds {MAX_ORACLE_DIM}")
    if t_max > grid.validity_time:
        raise RecurrenceError(
            f"t_max={t_max!r} exceeds half the recurrence time ({grid.validity_time:.4g} ps)")
    oracle = FockOracle(grid, spec)
    t = np.linspace(0.0, t_max, steps)
    states = oracle.evolve(oracle.initial_state(initial), t)
    norm_error = float(np.max(np.abs(np.sum(np.abs(states) ** 2, axis=1) - 1.0)))
    if norm_error > 1e-9:
        raise RuntimeError(f"oracle lost unitarity: norm error {norm_error:.3e}")
    return DecaySeries(t=t, survival=np.abs(states[:, 0]) ** 2, norm_error=norm_error,
                       gamma=spec.gamma)


@dataclass(frozen=True)
class DecayFit:
    gamma: float
    intercept: float
    residual: float
    n_points: int


def fit_decay_rate(series, window):
    """Least-squares slope of ``-log(survival)`` over ``window = (t_lo, t_hi)``.

    ``series`` is a :class:`DecaySeries` or a ``(t, survival)`` pair.  The
    reported residual is the RMS of the log-fit residuals.
    """
    if isinstance(series, DecaySeries):
        t, s = series.t, series.survival
    else:
        t, s = (np.asarray(a, dtype=float) for a in series)
    lo, hi = window
    if lo < t[0] or hi > t[-1] or lo >= hi:
        raise WindowError(f"window {window!r} not inside series span [{t[0]}, {t[-1]}]")
    sel = (t >= lo) & (t <= hi)
    if sel.sum() < 2:
        raise WindowError("window holds fewer than two samples")
    if np.any(s[sel] <= 1e-12):
        raise WindowError("survival must be > 1e-12 inside the fit window")
    y = -np.log(s[sel])
    A = np.vstack([t[sel], np.ones(sel.sum())]).T
    (slope, icept), *_ = np.linalg.lstsq(A, y, rcond=None)
    res = y - A @ np.array([slope, icept])
    return DecayFit(gamma=float(slope), intercept=float(-icept),
                    residual=float(np.sqrt(np.mean(res ** 2))), n_points=int(sel.sum()))


def thermal_phonon_number(omega_tilde, T):
    """Bose occupation ``1/(exp(ħω̃/k_B T) - 1)`` for ``omega_tilde`` in rad/ps."""
    if not T > 0:
        raise DomainError(f"temperature must be positive, got {T!r}")
    eta = constants.hbar * omega_tilde * 1e12 / (constants.k * T)
    return float(1.0 / np.expm1(eta))


def wavenumber_to_omega(wavenumber_cm):
    """Convert a Raman shift in cm⁻¹ to angular frequency in rad/ps."""
    return 2 * np.pi * constants.c * 100.0 * wavenumber_cm * 1e-12
