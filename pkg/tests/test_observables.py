import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sasraman.errors import (
    ConfigError,
    DegenerateDistributionError,
    GeometryError,
    ResolutionError,
    UnderflowError,
)
from sasraman.green import DetectorDirection
from sasraman.observables import (
    ScanConfig,
    analyzer_frame,
    analyzer_vector,
    angle_jones,
    angular_map,
    delay_scan,
    derive_rng,
    lorentzian_density,
    pair_spectrum,
    polarization_scan,
    project_analyzers,
    run_scan,
    sample_events,
    spectrum_delay_duality,
    total_variation,
)
from sasraman.pair import two_photon_amplitude
from sasraman.selfcheck import desk_scenario

THETA = np.pi / 6


def tilted(theta, sign=1.0):
    return [sign * np.sin(theta), 0.0, np.cos(theta)]


def test_scan_config_validation():
    with pytest.raises(ValueError):
        ScanConfig("a", "bogus", (0, 1, 2))
    with pytest.raises(ValueError):
        ScanConfig("a", "delay")
    with pytest.raises(ValueError):
        ScanConfig("a", "delay", (1.0, 0.0, 5))
    with pytest.raises(ValueError):
        ScanConfig("a", "polarization", (0, 1, 2), analyzer1=(1.0, 1.0))
    assert ScanConfig("s", "spectrum").grid is None


def test_derive_rng_keyed_by_seed_and_id():
    a = derive_rng(7, "x").random(4)
    np.testing.assert_array_equal(a, derive_rng(7, "x").random(4))
    assert not np.array_equal(a, derive_rng(7, "y").random(4))
    assert not np.array_equal(a, derive_rng(8, "x").random(4))


def test_delay_scan_examples():
    sc = desk_scenario(gamma=0.5)
    res = delay_scan(ScanConfig("d", "delay", (0.0, 2.0, 2)), sc)
    assert res.rates[0] == 1.0
    assert res.rates[1] == pytest.approx(np.exp(-1.0), rel=1e-12)
    assert res.records[1].arm2["delay"] == 2.0


def test_delay_scan_fit_recovers_gamma():
    sc = desk_scenario(gamma=0.7)
    res = delay_scan(ScanConfig("d", "delay", (0.0, 20.0, 50)), sc)
    assert res.summary["relative_error"] < 1e-10
    assert np.all((res.rates >= 0) & (res.rates <= 1))


def test_delay_scan_underflow_guard():
    sc = desk_scenario(gamma=1.0)
    with pytest.raises(UnderflowError):
        delay_scan(ScanConfig("d", "delay", (0.0, 700.0, 3)), sc)


def test_polarization_parallel_is_maximum():
    sc = desk_scenario()
    res = polarization_scan(ScanConfig("p", "polarization", (0.0, np.pi, 37), r2=tilted(THETA),
                                       sigma_acc=1.0), sc)
    assert res.summary["argmax_angle"] in (0.0, np.pi)
    assert res.rates[0] == 1.0
    assert res.summary["crossed_raw"] <= 1e-24 * res.summary["parallel_raw"]


def test_polarization_crossed_null_random_geometries():
    sc = desk_scenario()
    rng = np.random.default_rng(4)
    for _ in range(20):
        r1, r2 = (tilted(rng.uniform(0, 1.2), s) for s in (1, -1))
        cfg = ScanConfig("p", "polarization", (0.0, np.pi, 5), r1=r1, r2=r2, sigma_acc=1.0)
        s = polarization_scan(cfg, sc).summary
        assert s["parallel_raw"] > 0
        assert s["crossed_over_parallel"] <= 1e-24


def test_polarization_elliptic_ratio_matches_projection():
    # p = α x + β y; arm 2 at 30° in the x-z plane sees e_par = (cos θ, 0, -sin θ), e_perp = y
    alpha, beta = 0.8, 0.6j
    sc = desk_scenario(jones=(alpha, beta))
    cfg = ScanConfig("p", "polarization", (0.0, np.pi, 5), r2=tilted(THETA), sigma_acc=1.0)
    s = polarization_scan(cfg, sc).summary
    expected = abs(beta) ** 2 / (abs(alpha) ** 2 * np.cos(THETA) ** 2)
    assert s["crossed_over_parallel"] == pytest.approx(expected, rel=1e-12)


def test_analyzer_frame_and_geometry_errors():
    sc = desk_scenario()
    e_par, e_perp = analyzer_frame(sc.laser, tilted(THETA))
    np.testing.assert_allclose(e_par, [np.cos(THETA), 0, -np.sin(THETA)], atol=1e-15)
    np.testing.assert_allclose(e_perp, [0, 1, 0], atol=1e-15)
    with pytest.raises(GeometryError):
        analyzer_frame(sc.laser, [1, 0, 0])
    z = np.array([0, 0, 1.0])
    with pytest.raises(GeometryError):
        project_analyzers(np.eye(3), z, np.array([1, 0, 0.0]), z, z)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.0, 1.3), st.floats(-np.pi, np.pi), st.floats(0, 2 * np.pi))
def test_analyzer_vectors_transverse_and_normalized(theta, azimuth, phi):
    sc = desk_scenario()
    r = np.array([np.sin(theta) * np.cos(azimuth), np.sin(theta) * np.sin(azimuth), np.cos(theta)])
    a = analyzer_vector(sc.laser, r, angle_jones(phi))
    assert abs(np.dot(a, r)) < 1e-12
    assert np.vdot(a, a).real == pytest.approx(1.0, rel=1e-12)


def test_angular_zero_spread_center_maximal_and_symmetric():
    sc = desk_scenario(beam_spread=0.0)
    res = angular_map(ScanConfig("a", "angular", (-0.03, 0.03, 7), samples=1), sc)
    raw = res.rates.reshape(7, 7)
    assert np.unravel_index(np.argmax(raw), raw.shape) == (3, 3)
    np.testing.assert_allclose(raw, raw.T, rtol=1e-12, atol=0)


def test_angular_spread_map_swap_symmetric():
    sc = desk_scenario(beam_spread=0.05)
    res = angular_map(ScanConfig("a", "angular", (-0.1, 0.1, 9), samples=4000), sc)
    np.testing.assert_allclose(res.rates, res.rates.T, rtol=1e-12, atol=1e-15)


def test_angular_zero_spread_matches_pair_amplitude():
    # the beam-averaged Frobenius shortcut against the full tensor
    sc = desk_scenario(beam_spread=0.0)
    cfg = ScanConfig("a", "angular", (-0.01, 0.01, 3), samples=1, distance=1e4)
    raw = np.array([r.raw for r in angular_map(cfg, sc).records]).reshape(3, 3)
    t = 1e4 / sc.laser.u + 20.0
    for i, a in enumerate(cfg.values()):
        for j, b in enumerate(cfg.values()):
            d1 = DetectorDirection.toward([np.tan(a), 0, 1], 1e4)
            d2 = DetectorDirection.toward([np.tan(b), 0, 1], 1e4)
            amp = two_photon_amplitude(sc.laser, d1, d2, t, sc.constants, 0.01)
            ref = np.sum(np.abs(amp.assigned("anti_stokes_first")) ** 2)
            assert raw[i, j] == pytest.approx(ref, rel=1e-9)


def test_angular_empty_budget():
    sc = desk_scenario()
    with pytest.raises(ConfigError):
        angular_map(ScanConfig("a", "angular", (-0.1, 0.1, 3), samples=0), sc)


def test_angular_deterministic():
    sc = desk_scenario(beam_spread=0.05)
    cfg = ScanConfig("a", "angular", (-0.1, 0.1, 5), samples=500)
    np.testing.assert_array_equal(angular_map(cfg, sc).rates, angular_map(cfg, sc).rates)


def test_spectrum_examples():
    sc = desk_scenario(gamma=0.4)
    med = sc.medium
    res = pair_spectrum(ScanConfig("s", "spectrum"), sc)
    s = res.summary
    assert s["peak_omega"] == med.omega_tilde
    half = lorentzian_density([med.omega_tilde - 0.2, med.omega_tilde + 0.2], med)
    np.testing.assert_allclose(half, 0.5 * lorentzian_density(med.omega_tilde, med), rtol=1e-12)
    assert abs(s["fwhm"] - med.gamma) <= s["grid_step"]
    assert s["area"] == pytest.approx(2 * np.pi / med.gamma, rel=0.01)
    assert res.rates.max() == 1.0


def test_spectrum_resolution_errors():
    sc = desk_scenario(gamma=1.0)
    with pytest.raises(ResolutionError):
        pair_spectrum(ScanConfig("s", "spectrum", (50.0, 150.0, 101)), sc)
    with pytest.raises(ResolutionError):
        pair_spectrum(ScanConfig("s", "spectrum", (98.0, 102.0, 101)), sc)


def test_spectrum_delay_duality_small_grid():
    sc = desk_scenario(gamma=1.0)
    rep = spectrum_delay_duality(sc.medium, points=2 ** 18)
    assert rep.modulus[0] == 1.0
    # a shorter transform still tracks the exponential to grid-truncation accuracy
    assert rep.max_deviation < 1e-4


def test_events_single_cell():
    ev = sample_events([0, 0, 3.0, 0], seed=1, n_events=1000)
    assert np.all(ev.cells == 2)
    assert np.all(np.diff(ev.timestamps) > 0)


def test_events_uniform_concentration():
    n = 10 ** 6
    ev = sample_events(np.ones(10), seed=2, n_events=n)
    dev = np.abs(ev.histogram() / (n / 10) - 1)
    assert dev.max() < 0.01


def test_events_deterministic_and_seed_dependent():
    m = np.arange(12.0).reshape(3, 4)
    a = sample_events(m, 5, 500)
    b = sample_events(m, 5, 500)
    np.testing.assert_array_equal(a.cells, b.cells)
    np.testing.assert_array_equal(a.timestamps, b.timestamps)
    assert not np.array_equal(a.cells, sample_events(m, 6, 500).cells)


def test_events_errors():
    with pytest.raises(DegenerateDistributionError):
        sample_events(np.zeros(5), 0, 10)
    with pytest.raises(ValueError):
        sample_events([1.0, -1.0], 0, 10)
    with pytest.raises(ValueError):
        sample_events([1.0], 0, 0)


@settings(max_examples=20, deadline=None)
@given(st.lists(st.floats(0.0, 10.0), min_size=2, max_size=30).filter(lambda v: sum(v) > 0),
       st.integers(0, 2 ** 32 - 1))
def test_events_total_variation_bound(rates, seed):
    n = 20000
    ev = sample_events(rates, seed, n)
    assert total_variation(ev, rates) <= 3 / np.sqrt(n)


def test_scan_csv_layout(tmp_path):
    sc = desk_scenario()
    res = run_scan(ScanConfig("d", "delay", (0.0, 1.0, 3)), sc)
    path = tmp_path / "d.csv"
    res.to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "arm1_delay,arm2_delay,arm2_delta_t,rate,raw"
    assert len(lines) == 4
    ev = sample_events(res.rates, 0, 5)
    ev.to_csv(tmp_path / "e.csv", res.records)
    head = (tmp_path / "e.csv").read_text().splitlines()[0]
    assert head == "event,cell,arm1_delay,arm2_delay,arm2_delta_t,timestamp"
