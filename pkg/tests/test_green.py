import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sasraman.errors import FarFieldError, GrowthError, InvalidDirectionError
from sasraman.fields import PlaneWaveMode
from sasraman.green import DetectorDirection, green_apply, momentum_weight, scattered_mode_amplitude

U = 100.0
vec = st.lists(st.floats(-1, 1, allow_nan=False), min_size=3, max_size=3).filter(
    lambda v: np.linalg.norm(v) > 0.1)


def _unit(v):
    v = np.asarray(v, dtype=float)
    return v / np.linalg.norm(v)


def test_detector_validation():
    with pytest.raises(InvalidDirectionError):
        DetectorDirection(np.array([0, 0, 2.0]), 1.0)
    with pytest.raises(ValueError):
        DetectorDirection.toward([0, 0, 1], 0.0)
    d = DetectorDirection.toward([1, 0, 1], 10.0, delay=2.0)
    assert d.theta([0, 0, 1]) == pytest.approx(np.pi / 4)
    assert d.time_of_flight(5.0) == pytest.approx(4.0)


def test_green_apply_examples():
    out = green_apply(np.array([1.0, 0, 0]), DetectorDirection.toward([0, 0, 1], 4 * np.pi))
    np.testing.assert_allclose(out, [1 / (16 * np.pi ** 2), 0, 0], rtol=1e-15)
    np.testing.assert_allclose(green_apply(np.array([0, 0, 1.0]), DetectorDirection.toward([0, 0, 1], 3.0)),
                               0, atol=1e-17)


def test_green_apply_far_field_guard():
    with pytest.raises(FarFieldError):
        green_apply(np.array([1.0, 0, 0]), DetectorDirection.toward([0, 0, 1], 50.0), source_size=1.0)


@settings(max_examples=100, deadline=None)
@given(vec, vec)
def test_green_apply_transverse(src, r):
    d = DetectorDirection.toward(r, 2.0)
    assert abs(np.dot(green_apply(np.asarray(src, complex), d), d.r_hat)) < 1e-12


def test_scattered_amplitude_forward_magnitude():
    mode = PlaneWaveMode.from_jones([0, 0, 1], 1, 0, omega=30.0, u=U)
    det = DetectorDirection.toward([0, 0, 1], 500.0)
    amp = scattered_mode_amplitude(mode, 30.0, det, t=500.0 / U)
    assert amp.retarded_time == 0.0
    assert np.linalg.norm(amp.value) == pytest.approx(30.0 ** 2 / 500.0, rel=1e-15)


def test_scattered_amplitude_damping():
    mode = PlaneWaveMode.from_jones([0, 0, 1], 1, 0, omega=30.0, u=U)
    det = DetectorDirection.toward([0, 0, 1], 500.0)
    Omega = 30.0 - 10.0 - 0.5j * 0.4
    amp = scattered_mode_amplitude(mode, Omega, det, t=500.0 / U + 3.0)
    ref = abs(Omega) ** 2 / 500.0
    assert np.linalg.norm(amp.value) / ref == pytest.approx(np.exp(-0.4 * 3.0 / 2), rel=1e-13)
    with pytest.raises(GrowthError):
        scattered_mode_amplitude(mode, 30.0 + 0.1j, det, 10.0)


def test_scattered_amplitude_pattern_at_right_angle():
    # ê_p along x, ê_t along y for k = z; detector at 90° in the k–p plane
    alpha, beta = 0.6, 0.8
    mode = PlaneWaveMode.from_jones([0, 0, 1], alpha, beta, omega=30.0, u=U)
    det = DetectorDirection.toward([0, 1, 0], 500.0)
    amp = scattered_mode_amplitude(mode, 30.0, det, t=10.0)
    assert np.linalg.norm(amp.value) == pytest.approx(alpha * 900 / 500, rel=1e-14)


@settings(max_examples=60, deadline=None)
@given(vec, vec, st.floats(1.0, 1e4))
def test_scattered_transverse_and_inverse_r(k, r, dist):
    mode = PlaneWaveMode.from_jones(k, 0.6, 0.8j, omega=30.0, u=U)
    d1 = DetectorDirection.toward(r, dist)
    d2 = DetectorDirection.toward(r, 2 * dist)
    a1 = scattered_mode_amplitude(mode, 30.0 - 0.1j, d1, t=dist / U + 1.0)
    a2 = scattered_mode_amplitude(mode, 30.0 - 0.1j, d2, t=2 * dist / U + 1.0)
    assert abs(np.dot(a1.value, d1.r_hat)) <= 1e-10 * max(1.0, np.linalg.norm(a1.value))
    np.testing.assert_allclose(a2.value, a1.value / 2, rtol=1e-12, atol=1e-300)


def test_momentum_weight_examples():
    z = np.array([0, 0, 1.0])
    assert momentum_weight(z, z, z, z, 0.01) == 1.0
    phi = 0.1
    r1 = np.array([np.sin(phi), 0, np.cos(phi)])
    r2 = np.array([-np.sin(phi), 0, np.cos(phi)])
    mismatch = abs(2 * np.cos(phi) - 2)
    assert mismatch == pytest.approx(0.00999, abs=1e-5)
    w = momentum_weight(z, z, r1, r2, 0.01)
    assert w == pytest.approx(np.exp(-mismatch ** 2 / (2 * 0.01 ** 2)), rel=1e-12)
    assert w == pytest.approx(0.607, abs=2e-3)


@settings(max_examples=100, deadline=None)
@given(vec, vec, vec, vec, st.floats(1e-3, 1.0))
def test_momentum_weight_symmetry(k1, k2, r1, r2, s):
    k1, k2, r1, r2 = map(_unit, (k1, k2, r1, r2))
    w = momentum_weight(k1, k2, r1, r2, s)
    assert 0.0 <= w <= 1.0
    assert momentum_weight(k2, k1, r1, r2, s) == pytest.approx(w, rel=1e-12, abs=1e-300)
    assert momentum_weight(k1, k2, r2, r1, s) == pytest.approx(w, rel=1e-12, abs=1e-300)


def test_momentum_weight_indicator_limit():
    z = np.array([0, 0, 1.0])
    r1 = _unit([0.05, 0, 1])
    ws = [momentum_weight(z, z, r1, z, s) for s in (0.1, 0.01, 0.001)]
    assert ws[0] > ws[1] > ws[2] and ws[2] < 1e-100
    assert momentum_weight(z, z, z, z, 1e-6) == 1.0
