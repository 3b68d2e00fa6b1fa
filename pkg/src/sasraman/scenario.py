"""Scenario files: schema, defaults and parsing.

A scenario is a JSON document validated in strict mode (unknown keys are
errors).  Complex numbers are written either as a plain number or as a
``[re, im]`` pair.  Units: µm, ps, rad/ps.
"""

import json
import warnings
from dataclasses import dataclass, field, replace
from functools import cached_property

import jsonschema
import numpy as np

from .bath import MediumSpec, wavenumber_to_omega
from .errors import ConfigError, PhysicsWarning
from .fields import C_UM_PER_PS
from .observables import ScanConfig, angle_jones
from .pair import LaserPair, derive_constants

DEFAULTS = {
    "seed": 0,
    "sigma_acc": 0.01,
    "V_Q_over_V_S": 1e3,
    "J": 401,
    "bandwidth_over_gamma": 40.0,
    "T": 300.0,
    "distance": 1e5,
    "samples": 100_000,
    "checks": ["thermal"],
}

CHECKS = ("thermal", "vacuum", "decay", "duality")

_NUMBER = {"type": "number"}
_POSITIVE = {"type": "number", "exclusiveMinimum": 0}
_COMPLEX = {
    "oneOf": [
        {"type": "number"},
        {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
    ]
}
_VEC3 = {"type": "array", "items": {"type": "number"}, "minItems": 3, "maxItems": 3}
_JONES = {"type": "array", "items": _COMPLEX, "minItems": 2, "maxItems": 2}
_ANALYZER = {
    "type": "object",
    "additionalProperties": False,
    "properties": {"angle": _NUMBER, "jones": _JONES},
    "oneOf": [{"required": ["angle"]}, {"required": ["jones"]}],
}

SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "sasraman scenario",
    "type": "object",
    "additionalProperties": False,
    "required": ["medium", "laser"],
    "properties": {
        "name": {"type": "string"},
        "seed": {"type": "integer", "minimum": 0},
        "sigma_acc": _POSITIVE,
        "V_Q": _POSITIVE,
        "out_dir": {"type": "string"},
        "checks": {"type": "array", "items": {"enum": list(CHECKS)}, "uniqueItems": True},
        "medium": {
            "type": "object",
            "additionalProperties": False,
            "required": ["n", "N", "alpha_prime", "M", "gamma", "V_S"],
            "properties": {
                "n": _NUMBER,
                "N": _POSITIVE,
                "alpha_prime": _POSITIVE,
                "M": _POSITIVE,
                "omega_tilde": _POSITIVE,
                "raman_shift_cm": _POSITIVE,
                "omega0": _POSITIVE,
                "gamma": _POSITIVE,
                "V_S": _POSITIVE,
                "T": _POSITIVE,
            },
            "oneOf": [{"required": ["omega_tilde"]}, {"required": ["raman_shift_cm"]}],
        },
        "laser": {
            "type": "object",
            "additionalProperties": False,
            "required": ["k1", "k2"],
            "properties": {
                "k1": _VEC3,
                "k2": _VEC3,
                "omega_l": _POSITIVE,
                "wavelength_um": _POSITIVE,
                "jones": _JONES,
                "linear_axis": _VEC3,
                "analyzer_axis": _VEC3,
                "beam_spread": {"type": "number", "minimum": 0},
            },
            "allOf": [
                {"oneOf": [{"required": ["omega_l"]}, {"required": ["wavelength_um"]}]},
                {"not": {"required": ["jones", "linear_axis"]}},
            ],
        },
        "reservoir": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "J": {"type": "integer", "minimum": 101},
                "bandwidth": _POSITIVE,
            },
        },
        "scans": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["id", "kind"],
                "properties": {
                    "id": {"type": "string", "pattern": "^[A-Za-z0-9_.-]+$"},
                    "kind": {"enum": ["delay", "polarization", "angular", "spectrum"]},
                    "grid": {
                        "type": "object",
                        "additionalProperties": False,
                        "required": ["start", "stop", "count"],
                        "properties": {
                            "start": _NUMBER,
                            "stop": _NUMBER,
                            "count": {"type": "integer", "minimum": 1},
                        },
                    },
                    "r1": _VEC3,
                    "r2": _VEC3,
                    "distance": _POSITIVE,
                    "analyzer1": _ANALYZER,
                    "analyzer2": _ANALYZER,
                    "assignment": {"enum": ["anti_stokes_first", "stokes_first", "both"]},
                    "beam_spread": {"type": "number", "minimum": 0},
                    "sigma_acc": _POSITIVE,
                    "samples": {"type": "integer", "minimum": 1},
                    "t": _POSITIVE,
                    "events": {"type": "integer", "minimum": 0},
                },
            },
        },
    },
}


@dataclass(frozen=True, eq=False)
class Scenario:
    """Everything one run needs."""

    medium: MediumSpec
    laser: LaserPair
    scans: list = field(default_factory=list)
    name: str = "scenario"
    J: int = DEFAULTS["J"]
    bandwidth: float = None
    V_Q: float = None
    sigma_acc: float = DEFAULTS["sigma_acc"]
    seed: int = DEFAULTS["seed"]
    checks: tuple = tuple(DEFAULTS["checks"])
    out_dir: str = None

    def __post_init__(self):
        if self.bandwidth is None:
            object.__setattr__(self, "bandwidth", DEFAULTS["bandwidth_over_gamma"] * self.medium.gamma)
        if self.V_Q is None:
            object.__setattr__(self, "V_Q", DEFAULTS["V_Q_over_V_S"] * self.medium.V_S)
        ids = [s.scan_id for s in self.scans]
        if len(set(ids)) != len(ids):
            raise ConfigError([("scans", "scan ids must be unique")])

    @cached_property
    def constants(self):
        return derive_constants(self.medium, self.laser, self.V_Q)

    def with_seed(self, seed):
        return self if seed is None else replace(self, seed=int(seed))


def _complex(value):
    if isinstance(value, list):
        return complex(value[0], value[1])
    return complex(value)


def _path(error):
    return ".".join(str(p) for p in error.absolute_path)


def validate(doc):
    """Return a list of ``(path, message)`` schema violations."""
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(doc), key=lambda e: (list(map(str, e.absolute_path)), e.message))
    return [(_path(e), e.message) for e in errors]


def _build_medium(m, problems):
    if "omega_tilde" in m:
        wt = float(m["omega_tilde"])
    else:
        wt = wavenumber_to_omega(m["raman_shift_cm"])
    if m["n"] < 1:
        problems.append(("medium.n", f"refractive index must be >= 1, got {m['n']!r}"))
        return None
    return MediumSpec(n=m["n"], N=m["N"], alpha_prime=m["alpha_prime"], M=m["M"],
                      omega0=m.get("omega0", wt), omega_tilde=wt, gamma=m["gamma"],
                      V_S=m["V_S"], T=m.get("T", DEFAULTS["T"]))


def _build_laser(l, medium, problems):
    u = medium.u
    w_l = l["omega_l"] if "omega_l" in l else 2 * np.pi * C_UM_PER_PS / l["wavelength_um"]
    if w_l <= medium.omega_tilde:
        problems.append(("laser", f"laser frequency {w_l!r} rad/ps must exceed omega_tilde "
                                  f"{medium.omega_tilde!r} (Stokes frequency would be <= 0)"))
        return None
    if medium.omega_tilde / w_l >= 0.1:
        warnings.warn(f"omega_tilde/omega_l = {medium.omega_tilde / w_l:.3g} is not << 1",
                      PhysicsWarning, stacklevel=3)
    spread = l.get("beam_spread", 0.0)
    try:
        if "linear_axis" in l:
            laser = LaserPair.linear(l["k1"], l["k2"], l["linear_axis"], w_l, u, spread)
        else:
            alpha, beta = (_complex(x) for x in l.get("jones", [1.0, 0.0]))
            laser = LaserPair.from_jones(l["k1"], l["k2"], alpha, beta, w_l, u, spread)
        if "analyzer_axis" in l:
            laser = LaserPair(laser.mode1, laser.mode2, spread, np.asarray(l["analyzer_axis"], float))
    except ValueError as exc:
        problems.append(("laser", str(exc)))
        return None
    return laser


def _analyzer(a):
    if a is None:
        return None
    if "angle" in a:
        return angle_jones(a["angle"])
    return np.array([_complex(x) for x in a["jones"]])


def _build_scan(i, s, problems):
    grid = s.get("grid")
    try:
        return ScanConfig(
            scan_id=s["id"], kind=s["kind"],
            grid=None if grid is None else (grid["start"], grid["stop"], grid["count"]),
            r1=s.get("r1"), r2=s.get("r2"), distance=s.get("distance", DEFAULTS["distance"]),
            analyzer1=_analyzer(s.get("analyzer1")), analyzer2=_analyzer(s.get("analyzer2")),
            assignment=s.get("assignment", "anti_stokes_first"),
            beam_spread=s.get("beam_spread"), sigma_acc=s.get("sigma_acc"),
            samples=s.get("samples", DEFAULTS["samples"]), t=s.get("t"),
            events=s.get("events", 0),
        )
    except ValueError as exc:
        problems.append((f"scans.{i}", str(exc)))
        return None


def scenario_from_dict(doc):
    """Validate ``doc`` and build a :class:`Scenario`.

    Raises :class:`ConfigError` listing every violation with its path.
    Soft physical constraints only emit :class:`PhysicsWarning`.
    """
    problems = validate(doc)
    if problems:
        raise ConfigError(problems)
    try:
        medium = _build_medium(doc["medium"], problems)
    except ValueError as exc:
        raise ConfigError([("medium", str(exc))]) from exc
    laser = _build_laser(doc["laser"], medium, problems) if medium else None
    scans = [_build_scan(i, s, problems) for i, s in enumerate(doc.get("scans", []))]
    res = doc.get("reservoir", {})
    if res.get("J", DEFAULTS["J"]) % 2 == 0:
        problems.append(("reservoir.J", "J must be odd"))
    if medium and res.get("bandwidth", 10 * medium.gamma) < 10 * medium.gamma:
        problems.append(("reservoir.bandwidth", "bandwidth must be at least 10 gamma"))
    if problems:
        raise ConfigError(problems)
    scenario = Scenario(
        medium=medium, laser=laser, scans=scans, name=doc.get("name", "scenario"),
        J=res.get("J", DEFAULTS["J"]), bandwidth=res.get("bandwidth"), V_Q=doc.get("V_Q"),
        sigma_acc=doc.get("sigma_acc", DEFAULTS["sigma_acc"]), seed=doc.get("seed", DEFAULTS["seed"]),
        checks=tuple(doc.get("checks", DEFAULTS["checks"])), out_dir=doc.get("out_dir"),
    )
    try:
        scenario.constants
    except ValueError as exc:
        raise ConfigError([("", str(exc))]) from exc
    return scenario


def parse_scenario(path):
    """Read and validate a scenario file."""
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError([("", f"cannot read {path}: {exc.strerror}")]) from exc
    except json.JSONDecodeError as exc:
        raise ConfigError([("", f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}")]) from exc
    return scenario_from_dict(doc)
