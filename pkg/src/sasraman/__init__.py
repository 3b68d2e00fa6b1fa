"""Correlated Stokes/anti-Stokes Raman scattering with photon wave functions."""

__version__ = "0.1.0"

from .bath import FockOracle, MediumSpec, discretize_reservoir, thermal_phonon_number  # noqa: E402
from .fields import PlaneWaveMode, rs_field, rs_vector  # noqa: E402
from .green import DetectorDirection, momentum_weight  # noqa: E402
from .observables import ScanConfig, sample_events  # noqa: E402
from .pair import LaserPair, derive_constants, lorentzian_exchange, two_photon_amplitude  # noqa: E402
from .scenario import Scenario, parse_scenario  # noqa: E402

__all__ = [
    "DetectorDirection",
    "FockOracle",
    "LaserPair",
    "MediumSpec",
    "PlaneWaveMode",
    "ScanConfig",
    "Scenario",
    "derive_constants",
    "discretize_reservoir",
    "lorentzian_exchange",
    "momentum_weight",
    "parse_scenario",
    "rs_field",
    "rs_vector",
    "sample_events",
    "thermal_phonon_number",
    "two_photon_amplitude",
]
