"""Far-field scattering geometry.

The retarded dyadic Green function reduces at large distance to the
transverse projector ``(I - r̂r̂)/(4πr)`` with retardation ``t_r = t - r/u``.
"""

from dataclasses import dataclass

import numpy as np

from .errors import FarFieldError, GrowthError
from .fields import _check_unit, _frame_array, project_transverse, unit


@dataclass(frozen=True, eq=False)
class DetectorDirection:
    """Observation point in the far field.

    ``delay`` (ps) is extra propagation delay in the detection arm, e.g. a
    delay line.  It adds to the retardation but leaves the 1/r spreading
    untouched.
    """

    r_hat: np.ndarray
    r: float
    delay: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "r_hat", _check_unit(self.r_hat, "r_hat"))
        if not self.r > 0:
            raise ValueError(f"detector distance must be positive, got {self.r!r}")
        object.__setattr__(self, "r", float(self.r))
        object.__setattr__(self, "delay", float(self.delay))

    @classmethod
    def toward(cls, direction, r, delay=0.0):
        return cls(unit(direction), r, delay)

    @classmethod
    def tilted(cls, center, theta_x, theta_y, r, delay=0.0):
        """Direction tilted from ``center`` by ``theta_x`` and ``theta_y`` in the
        planes spanned by ``center`` and its reference axes ``e1``, ``e2``."""
        c = unit(center)
        e1, e2 = _frame_array(c)
        return cls(unit(c + np.tan(theta_x) * e1 + np.tan(theta_y) * e2), r, delay)

    def theta(self, k_hat):
        """Angle between the observation direction and ``k_hat``."""
        k_hat = unit(k_hat)
        return float(np.arctan2(np.linalg.norm(np.cross(k_hat, self.r_hat)),
                                np.dot(k_hat, self.r_hat)))

    def time_of_flight(self, u):
        return self.r / u + self.delay

    def retarded_time(self, t, u):
        return t - self.time_of_flight(u)

    def is_far_field(self, source_size):
        return self.r >= 100.0 * source_size


@dataclass(frozen=True, eq=False)
class ScatteredAmplitude:
    value: np.ndarray
    omega: complex
    retarded_time: float


def green_apply(source, det, source_size=0.0):
    """Far-field Green dyadic applied to ``source``: ``source·(I - r̂r̂)/(4πr)``."""
    if not det.is_far_field(source_size):
        raise FarFieldError(
            f"r = {det.r!r} µm is not >= 100 x source size ({source_size!r} µm)")
    return project_transverse(source, det.r_hat) / (4 * np.pi * det.r)


def _check_decaying(Omega):
    Omega = complex(Omega)
    if Omega.imag > 1e-15 * max(abs(Omega), 1.0):
        raise GrowthError(f"Omega = {Omega!r} has positive imaginary part")
    return Omega


def scattered_mode_amplitude(mode, Omega, det, t, u=None):
    """Single-mode scattered far field ``A(θ) Ω²/r e^{-iΩ t_r} ê⊥``.

    ``A(θ) ê⊥`` is the transverse projection of the mode polarization, so the
    unnormalized projection is used directly (it stays well defined where
    A vanishes).  ``u`` defaults to the mode's own phase speed.
    """
    Omega = _check_decaying(Omega)
    if u is None:
        u = mode.phase_speed
    t_r = det.retarded_time(t, u)
    e_perp = project_transverse(mode.polarization, det.r_hat)
    value = Omega ** 2 / det.r * np.exp(-1j * Omega * t_r) * e_perp
    return ScatteredAmplitude(value=value, omega=Omega, retarded_time=t_r)


def _momentum_weight_array(k1, k2, r1, r2, sigma_acc):
    mismatch = r1 + r2 - k1 - k2
    return np.exp(-np.sum(mismatch ** 2, axis=-1) / (2 * sigma_acc ** 2))


def momentum_weight(k1_hat, k2_hat, r1_hat, r2_hat, sigma_acc):
    """Gaussian acceptance of the pair momentum condition ``r̂₁ + r̂₂ = k̂₁ + k̂₂``.

    The finite scattering volume turns the ideal Kronecker delta into a
    smooth window of angular width ``sigma_acc`` (rad).
    """
    if not sigma_acc > 0:
        raise ValueError("sigma_acc must be positive")
    vs = [_check_unit(v, name) for v, name in
          ((k1_hat, "k1_hat"), (k2_hat, "k2_hat"), (r1_hat, "r1_hat"), (r2_hat, "r2_hat"))]
    return float(_momentum_weight_array(*vs, sigma_acc))
