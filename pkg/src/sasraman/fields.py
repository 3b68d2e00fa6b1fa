"""Complex vector-field primitives for the photon wave function.

Field amplitudes are plain complex numpy arrays of shape ``(3,)``; the
vectorized helpers accept ``(..., 3)``.  Internal units are µm, ps and rad/ps,
with ε₀ folded into the amplitude (the RS vector is ``sqrt(1/2) (E ± i cB)``).

Helicity convention: ``k̂ × ê± = ∓i ê±``.  The transverse reference frame
``(e1, e2)`` of a direction is built from the coordinate axis along which the
direction has its smallest component, so ``ẑ`` gives ``(x̂, ŷ)`` and ``x̂``
gives ``(ŷ, ẑ)``.  Jones pairs ``(alpha, beta)`` always refer to that frame.
"""

import csv
from dataclasses import dataclass

import numpy as np
from scipy.signal import windows

from .errors import (
    DispersionError,
    HelicityPurityError,
    InvalidDirectionError,
    NormalizationError,
    SamplingError,
)

#: Speed of light in vacuum, µm/ps.
C_UM_PER_PS = 299.792458

_UNIT_TOL = 1e-12


def unit(v):
    """Return ``v / |v|`` as a float array; zero or non-finite input raises."""
    v = np.asarray(v, dtype=float)
    if v.shape[-1:] != (3,) or not np.all(np.isfinite(v)):
        raise InvalidDirectionError(f"expected a finite 3-vector, got {v!r}")
    n = np.linalg.norm(v, axis=-1, keepdims=True)
    if np.any(n == 0):
        raise InvalidDirectionError("zero-length direction")
    return v / n


def _check_unit(v, name="direction"):
    v = np.asarray(v, dtype=float)
    if v.shape != (3,) or not np.all(np.isfinite(v)):
        raise InvalidDirectionError(f"{name} must be a finite 3-vector")
    n = np.linalg.norm(v)
    if n == 0:
        raise InvalidDirectionError(f"{name} has zero length")
    if abs(n - 1.0) > _UNIT_TOL:
        raise InvalidDirectionError(f"{name} is not a unit vector (|v| = {n!r})")
    return v


def _frame_array(k_hat):
    # smallest |component| is at most 1/sqrt(3), so e1 never degenerates
    k_hat = np.asarray(k_hat, dtype=float)
    idx = np.argmin(np.abs(k_hat), axis=-1)
    axis = np.zeros_like(k_hat)
    np.put_along_axis(axis, idx[..., None], 1.0, axis=-1)
    e1 = axis - np.sum(axis * k_hat, axis=-1, keepdims=True) * k_hat
    e1 /= np.linalg.norm(e1, axis=-1, keepdims=True)
    e2 = np.cross(k_hat, e1)
    return e1, e2


def reference_frame(k_hat):
    """Real orthonormal pair ``(e1, e2)`` transverse to ``k_hat`` with ``e1 × e2 = k̂``."""
    return _frame_array(_check_unit(k_hat, "k_hat"))


def _helicity_array(k_hat):
    e1, e2 = _frame_array(k_hat)
    s = 1.0 / np.sqrt(2.0)
    return s * (e1 + 1j * e2), s * (e1 - 1j * e2)


def helicity_basis(k_hat):
    """Helicity eigenvectors ``(ê₊, ê₋)`` for propagation along ``k_hat``.

    They satisfy ``k̂ × ê± = ∓i ê±``, are unit-normalized and transverse.
    """
    return _helicity_array(_check_unit(k_hat, "k_hat"))


def scattering_frame(k_hat, r_hat):
    """Linear polarization frame for a mode along ``k_hat`` seen from ``r_hat``.

    Returns ``(e_p, e_t, e_theta, theta)``: ``e_p`` is normal to the k–r plane,
    ``e_t`` lies in that plane transverse to k, ``e_theta`` lies in it transverse
    to r, and ``theta`` is the angle between k and r.  When r is (anti)parallel
    to k the plane is undefined and ``e_p`` falls back to the reference ``e1``.
    """
    k_hat = _check_unit(k_hat, "k_hat")
    r_hat = _check_unit(r_hat, "r_hat")
    cross = np.cross(k_hat, r_hat)
    s = np.linalg.norm(cross)
    if s < 1e-12:
        e_p = _frame_array(k_hat)[0]
    else:
        e_p = cross / s
    e_t = np.cross(k_hat, e_p)
    e_theta = np.cross(r_hat, e_p)
    theta = float(np.arctan2(s, np.dot(k_hat, r_hat)))
    return e_p, e_t, e_theta, theta


@dataclass(frozen=True, eq=False)
class PlaneWaveMode:
    """One plane-wave photon mode.

    ``polarization`` is a complex unit vector transverse to ``k``; ``omega``
    must equal ``u |k|`` for the medium speed used by the caller.
    """

    k: np.ndarray
    polarization: np.ndarray
    omega: float
    amplitude: complex = 1.0

    def __post_init__(self):
        k = np.asarray(self.k, dtype=float)
        pol = np.asarray(self.polarization, dtype=complex)
        if k.shape != (3,) or not np.all(np.isfinite(k)) or not np.any(k):
            raise InvalidDirectionError(f"bad wavevector {self.k!r}")
        if pol.shape != (3,) or not np.all(np.isfinite(pol)):
            raise NormalizationError("polarization must be a finite complex 3-vector")
        if abs(np.vdot(pol, pol).real - 1.0) > _UNIT_TOL:
            raise NormalizationError("polarization vector is not normalized")
        k_hat = k / np.linalg.norm(k)
        if abs(np.dot(k_hat, pol)) > 1e-10:
            raise NormalizationError("polarization is not transverse to k")
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "polarization", pol)
        object.__setattr__(self, "omega", float(self.omega))
        object.__setattr__(self, "amplitude", complex(self.amplitude))

    @property
    def k_hat(self):
        return self.k / np.linalg.norm(self.k)

    @property
    def wavenumber(self):
        return float(np.linalg.norm(self.k))

    @property
    def phase_speed(self):
        return self.omega / self.wavenumber

    @property
    def jones(self):
        """``(alpha, beta)`` components in the reference frame ``(e1, e2)``."""
        e1, e2 = _frame_array(self.k_hat)
        return complex(np.dot(e1, self.polarization)), complex(np.dot(e2, self.polarization))

    @property
    def helicity(self):
        """+1 or -1 for a helicity eigenmode, otherwise ``None``."""
        e_plus, e_minus = _helicity_array(self.k_hat)
        if abs(abs(np.vdot(e_plus, self.polarization)) - 1.0) < 1e-12:
            return 1
        if abs(abs(np.vdot(e_minus, self.polarization)) - 1.0) < 1e-12:
            return -1
        return None

    @classmethod
    def helical(cls, direction, helicity, omega, u=C_UM_PER_PS, amplitude=1.0):
        if helicity not in (1, -1):
            raise ValueError("helicity must be +1 or -1")
        k_hat = unit(direction)
        e_plus, e_minus = _helicity_array(k_hat)
        pol = e_plus if helicity == 1 else e_minus
        return cls(k=k_hat * omega / u, polarization=pol, omega=omega, amplitude=amplitude)

    @classmethod
    def from_jones(cls, direction, alpha, beta, omega, u=C_UM_PER_PS, amplitude=1.0):
        norm = abs(alpha) ** 2 + abs(beta) ** 2
        if abs(norm - 1.0) > _UNIT_TOL:
            raise NormalizationError(f"|alpha|^2 + |beta|^2 = {norm!r}, expected 1")
        k_hat = unit(direction)
        e1, e2 = _frame_array(k_hat)
        return cls(k=k_hat * omega / u, polarization=alpha * e1 + beta * e2,
                   omega=omega, amplitude=amplitude)

    @classmethod
    def linear(cls, direction, axis, omega, u=C_UM_PER_PS, amplitude=1.0):
        """Linearly polarized mode along the transverse part of ``axis``."""
        k_hat = unit(direction)
        pol = _transport(np.asarray(axis, dtype=complex), k_hat)
        return cls(k=k_hat * omega / u, polarization=pol, omega=omega, amplitude=amplitude)

    def redirected(self, direction):
        """Same frequency and |k| along a new direction, polarization carried over
        by transverse projection (the paraxial rule for a focused beam)."""
        k_hat = unit(direction)
        return PlaneWaveMode(k=k_hat * self.wavenumber,
                             polarization=_transport(self.polarization, k_hat),
                             omega=self.omega, amplitude=self.amplitude)


def _transport(pol, k_hat):
    p = pol - np.dot(pol, k_hat) * k_hat
    n = np.sqrt(np.vdot(p, p).real)
    if n < 1e-12:
        raise InvalidDirectionError("polarization axis is parallel to the propagation direction")
    return p / n


def _check_dispersion(modes, u):
    for m in modes:
        if abs(m.omega - u * m.wavenumber) > 1e-9 * max(abs(m.omega), 1e-300):
            raise DispersionError(
                f"mode violates omega = u|k|: omega={m.omega!r}, u|k|={u * m.wavenumber!r}")


def rs_field(modes, points, times, u=C_UM_PER_PS):
    """Vectorized Riemann–Silberstein vector.

    ``points`` has shape ``(..., 3)`` and ``times`` shape ``(...)``; the two
    shapes broadcast against each other and the result gets a trailing axis 3.

    Each mode is split into helicity components and the real fields
    ``E = i(𝓔 e^{iφ} - c.c.)`` and ``cB`` (with ``c𝓑 = k̂ × 𝓔``) are combined
    into ``sqrt(1/2) (E ± i cB)``.  Both frequency parts are kept in the sum;
    the negative one cancels because of the helicity relation, not by fiat.
    """
    modes = list(modes)
    _check_dispersion(modes, u)
    points = np.asarray(points, dtype=float)
    times = np.asarray(times, dtype=float)
    shape = np.broadcast_shapes(points.shape[:-1], times.shape)
    psi = np.zeros(shape + (3,), dtype=complex)
    s = np.sqrt(0.5)
    for m in modes:
        k_hat = m.k_hat
        phase = np.exp(1j * (points @ m.k - m.omega * times))[..., None]
        amp = m.amplitude * m.polarization
        for h, e_h in zip((1, -1), _helicity_array(k_hat)):
            cE = np.vdot(e_h, amp) * e_h
            cB = np.cross(k_hat, cE)
            pos = 1j * (cE + 1j * h * cB)
            neg = -1j * (cE.conj() + 1j * h * cB.conj())
            psi += s * (pos * phase + neg * phase.conj())
    return psi


def rs_vector(modes, r, t, u=C_UM_PER_PS):
    """Photon wave function Ψ(r, t) of a finite plane-wave superposition."""
    return rs_field(modes, np.asarray(r, dtype=float), float(t), u=u)


def analytic_signal_residual(samples, times=None, beta=30.0):
    """Fraction of spectral energy at negative frequency.

    Positive frequency means ``e^{-iωt}`` with ``ω > 0``.  A Kaiser window
    (``beta``) suppresses truncation leakage to far below 1e-10 for tones at
    least ~10 bins away from DC and Nyquist.  The DC and Nyquist bins are
    shared equally, so any real signal returns exactly 0.5.
    """
    x = np.asarray(samples, dtype=complex)
    if x.ndim != 1 or x.size < 64:
        raise SamplingError("need a 1-D series of at least 64 samples")
    if not np.all(np.isfinite(x)):
        raise SamplingError("series contains non-finite samples")
    if times is not None:
        times = np.asarray(times, dtype=float)
        if times.shape != x.shape:
            raise SamplingError("times and samples differ in length")
        dt = np.diff(times)
        if dt[0] <= 0 or not np.allclose(dt, dt[0], rtol=1e-9, atol=0.0):
            raise SamplingError("series is not uniformly sampled")
    n = x.size
    power = np.abs(np.fft.fft(x * windows.kaiser(n, beta, sym=False))) ** 2
    total = power.sum()
    if total == 0.0:
        return 0.0
    f = np.fft.fftfreq(n)
    # numpy's positive bins hold e^{+iωt}, i.e. physically negative frequencies
    negative = power[f > 0].sum() + 0.5 * power[0]
    if n % 2 == 0:
        negative += 0.5 * power[n // 2]
    return float(negative / total)


@dataclass(frozen=True, eq=False)
class FieldGrid:
    """Ψ sampled on a rectilinear space-time lattice.

    ``values`` has shape ``(nx, ny, nz, nt, 3)``.  Axes with one sample are
    allowed (the field is then assumed constant along them).
    """

    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    t: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        axes = []
        for name in ("x", "y", "z", "t"):
            a = np.asarray(getattr(self, name), dtype=float)
            if a.ndim != 1 or a.size == 0:
                raise SamplingError(f"axis {name} must be a non-empty 1-D array")
            if a.size > 1:
                d = np.diff(a)
                if d[0] <= 0 or not np.allclose(d, d[0], rtol=1e-9, atol=0.0):
                    raise SamplingError(f"axis {name} is not uniformly spaced")
            object.__setattr__(self, name, a)
            axes.append(a.size)
        v = np.asarray(self.values, dtype=complex)
        if v.shape != tuple(axes) + (3,):
            raise SamplingError(f"values shape {v.shape} does not match axes {tuple(axes)}")
        if not np.all(np.isfinite(v)):
            raise SamplingError("field values contain NaN/Inf")
        object.__setattr__(self, "values", v)

    def spacing(self, axis):
        a = (self.x, self.y, self.z, self.t)[axis]
        return float(a[1] - a[0]) if a.size > 1 else 0.0

    def to_csv(self, path):
        X, Y, Z, T = np.meshgrid(self.x, self.y, self.z, self.t, indexing="ij")
        v = self.values.reshape(-1, 3)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["x", "y", "z", "t", "re_x", "im_x", "re_y", "im_y", "re_z", "im_z"])
            for row in zip(X.ravel(), Y.ravel(), Z.ravel(), T.ravel(), v):
                vals = row[4]
                w.writerow([repr(float(c)) for c in row[:4]]
                           + [repr(float(f)) for c in vals for f in (c.real, c.imag)])

    @classmethod
    def from_csv(cls, path):
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        axes = [np.unique(data[:, i]) for i in range(4)]
        shape = tuple(a.size for a in axes)
        vals = data[:, 4::2] + 1j * data[:, 5::2]
        return cls(*axes, values=vals.reshape(shape + (3,)))


def sample_grid(modes, x, y, z, t, u=C_UM_PER_PS):
    """Evaluate :func:`rs_field` on a lattice, enforcing 4 samples per
    shortest wavelength and per shortest period."""
    modes = list(modes)
    axes = [np.asarray(a, dtype=float) for a in (x, y, z, t)]
    if modes:
        kmax = max(m.wavenumber for m in modes)
        wmax = max(m.omega for m in modes)
        for i, a in enumerate(axes[:3]):
            if a.size == 1:
                if any(abs(m.k[i]) > 0 for m in modes):
                    raise SamplingError(f"axis {'xyz'[i]} has one sample but the field varies along it")
            elif (a[1] - a[0]) > (2 * np.pi / kmax) / 4:
                raise SamplingError(f"axis {'xyz'[i]} has fewer than 4 samples per wavelength")
        if axes[3].size > 1 and (axes[3][1] - axes[3][0]) > (2 * np.pi / wmax) / 4:
            raise SamplingError("fewer than 4 time samples per period")
    X, Y, Z, T = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([X, Y, Z], axis=-1)
    return FieldGrid(*axes, values=rs_field(modes, pts, T, u=u))


def _derivative(values, h, axis, method):
    n = values.shape[axis]
    if n < 3:
        return np.zeros_like(values)
    if method == "spectral":
        k = 2 * np.pi * np.fft.fftfreq(n, d=h)
        if n % 2 == 0:
            k[n // 2] = 0.0
        shape = [1] * values.ndim
        shape[axis] = n
        return np.fft.ifft(1j * k.reshape(shape) * np.fft.fft(values, axis=axis), axis=axis)
    if method == "fd":
        return np.gradient(values, h, axis=axis, edge_order=2)
    raise ValueError(f"unknown derivative method {method!r}")


def _check_helicity_purity(grid, helicity, tol=1e-8):
    spatial = [i for i in range(3) if grid.values.shape[i] > 1]
    spec = np.fft.fftn(grid.values[:, :, :, 0, :], axes=spatial)
    ks = []
    for i, a in enumerate((grid.x, grid.y, grid.z)):
        ks.append(2 * np.pi * np.fft.fftfreq(a.size, d=grid.spacing(i)) if a.size > 1 else np.zeros(1))
    K = np.stack(np.meshgrid(*ks, indexing="ij"), axis=-1)
    kn = np.linalg.norm(K, axis=-1)
    total = np.sum(np.abs(spec) ** 2)
    if total == 0.0:
        return
    nz = kn > 0
    e_plus, e_minus = _helicity_array(K[nz] / kn[nz][:, None])
    wrong = e_minus if helicity == 1 else e_plus
    bad = np.sum(np.abs(np.sum(wrong.conj() * spec[nz], axis=-1)) ** 2)
    bad += np.sum(np.abs(spec[~nz]) ** 2)
    if bad / total > tol:
        raise HelicityPurityError(
            f"field is not helicity-pure: {bad / total:.3e} of the energy has the wrong helicity")


def free_space_residual(grid, helicity, method="spectral", c=C_UM_PER_PS):
    """Max-norm residual of the free-space PWF equations on a sampled grid.

    Returns ``max|i ∂Ψ/∂t - c h ∇×Ψ| + max|∇·Ψ|`` with ħ divided out and the
    helicity operator replaced by its eigenvalue ``h``.  ``method`` is
    ``"spectral"`` (needs a periodic lattice) or ``"fd"`` (second order).
    """
    if helicity not in (1, -1):
        raise ValueError("helicity must be +1 or -1")
    _check_helicity_purity(grid, helicity)
    v = grid.values
    d = [_derivative(v, grid.spacing(i), i, method) for i in range(4)]
    dx, dy, dz, dt = d
    curl = np.stack([
        dy[..., 2] - dz[..., 1],
        dz[..., 0] - dx[..., 2],
        dx[..., 1] - dy[..., 0],
    ], axis=-1)
    div = dx[..., 0] + dy[..., 1] + dz[..., 2]
    evo = 1j * dt - c * helicity * curl
    return float(np.max(np.linalg.norm(evo, axis=-1)) + np.max(np.abs(div)))


def project_transverse(e, r_hat):
    """Component of ``e`` normal to ``r_hat`` (not renormalized)."""
    r_hat = _check_unit(r_hat, "r_hat")
    e = np.asarray(e, dtype=complex)
    return e - np.dot(e, r_hat) * r_hat


def pattern_factor(alpha, beta, theta):
    """Angular weight ``sqrt(|α|² + |β|² cos²θ)`` of a projected polarization."""
    norm = abs(alpha) ** 2 + abs(beta) ** 2
    if abs(norm - 1.0) > _UNIT_TOL:
        raise NormalizationError(f"|alpha|^2 + |beta|^2 = {norm!r}, expected 1")
    return float(np.sqrt(abs(alpha) ** 2 + abs(beta) ** 2 * np.cos(theta) ** 2))
